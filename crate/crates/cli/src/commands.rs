//! Implementations of the CLI subcommands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};

use romas::active_subspace::{
    self, ActiveSubspace, GradientProvenance, GradientSamples, GradientStrategy,
};
use romas::error::{Error, Result};
use romas::evaluation::{self, SyntheticProblem};
use romas::io;
use romas::param_space::{Coordinates, ParameterSamples, ParameterSpace};
use romas::pod::{self, SnapshotSet, Truncation};
use romas::regression::rbf::RbfKernel;
use romas::rom::{self, CoefficientMethod, GradientKind, JacobianSource, RomConfig};

use crate::config::{self, ConfigFile};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Key-value provenance manifest written into every output directory.
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(subcommand: &str, cfg: &ConfigFile) -> Self {
        let mut m = Self {
            entries: Vec::new(),
        };
        m.push("tool", format!("romas {TOOL_VERSION}"));
        m.push("subcommand", subcommand.to_string());
        m.push(
            "config",
            cfg.path
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_else(|| "-".to_string()),
        );
        m
    }

    pub fn push(&mut self, key: &str, value: String) {
        self.entries.push((key.to_string(), value));
    }

    pub fn write(&self, out_dir: &Path) -> Result<()> {
        let mut text = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(text, "{k} = {v}");
        }
        write_file(&out_dir.join("manifest.txt"), &text)
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn ensure_out_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::Io {
        path: out.display().to_string(),
        source: e,
    })
}

fn fmt_list(xs: &[usize]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

// ---------------------------------------------------------------------------
// shared input resolution
// ---------------------------------------------------------------------------

/// Where the snapshot data comes from: a synthetic preset (with analytic
/// Jacobians available) or files on disk.
pub enum DataSource {
    Preset {
        name: String,
        problem: SyntheticProblem<f64>,
        snapshots: SnapshotSet<f64>,
    },
    Files {
        space: ParameterSpace<f64>,
        snapshots: SnapshotSet<f64>,
    },
}

impl DataSource {
    pub fn space(&self) -> &ParameterSpace<f64> {
        match self {
            DataSource::Preset { problem, .. } => problem.space(),
            DataSource::Files { space, .. } => space,
        }
    }

    pub fn snapshots(&self) -> &SnapshotSet<f64> {
        match self {
            DataSource::Preset { snapshots, .. } | DataSource::Files { snapshots, .. } => {
                snapshots
            }
        }
    }

    pub fn jacobian(&self) -> Option<&dyn JacobianSource<f64>> {
        match self {
            DataSource::Preset { problem, .. } => Some(problem),
            DataSource::Files { .. } => None,
        }
    }

    /// Natural truncation when the user gives none: the preset's term count.
    pub fn default_rank(&self) -> Option<usize> {
        match self {
            DataSource::Preset { problem, .. } => Some(problem.rank()),
            DataSource::Files { .. } => None,
        }
    }

    pub fn describe(&self, manifest: &mut Manifest) {
        match self {
            DataSource::Preset { name, snapshots, .. } => {
                manifest.push("preset", name.clone());
                manifest.push("samples", snapshots.len().to_string());
            }
            DataSource::Files { snapshots, .. } => {
                manifest.push("samples", snapshots.len().to_string());
            }
        }
    }
}

/// Raw input flags shared by the analysis commands.
pub struct InputArgs {
    pub preset: Option<String>,
    pub samples: Option<usize>,
    pub snapshots: Option<PathBuf>,
    pub params: Option<PathBuf>,
    pub lower: Option<String>,
    pub upper: Option<String>,
    pub seed: u64,
}

pub fn resolve_source(args: &InputArgs, cfg: &ConfigFile) -> Result<DataSource> {
    let preset = cfg.resolve(args.preset.clone(), "preset", |s| Ok(s.to_string()))?;
    if let Some(name) = preset {
        let problem = evaluation::preset::<f64>(&name)?;
        let n = cfg
            .resolve(args.samples, "samples", |s| config::parse_usize(s))?
            .unwrap_or(200);
        let samples = problem.space().sample_uniform(n, args.seed)?;
        let snapshots = evaluation::snapshot_from_problem(&problem, &samples)?;
        return Ok(DataSource::Preset {
            name,
            problem,
            snapshots,
        });
    }

    let snapshots_path = cfg
        .resolve(args.snapshots.clone(), "snapshots", |s| Ok(PathBuf::from(s)))?
        .ok_or_else(|| Error::invalid("either --preset or --snapshots/--params is required"))?;
    let params_path = cfg
        .resolve(args.params.clone(), "params", |s| Ok(PathBuf::from(s)))?
        .ok_or_else(|| Error::invalid("--params is required with --snapshots"))?;
    let space = resolve_space(args, cfg)?;
    let snapshots = load_snapshots(&snapshots_path, &params_path)?;
    if snapshots.params().dim() != space.dim() {
        return Err(Error::invalid(format!(
            "parameter file dimension {} does not match bounds dimension {}",
            snapshots.params().dim(),
            space.dim()
        )));
    }
    Ok(DataSource::Files { space, snapshots })
}

pub fn resolve_space(args: &InputArgs, cfg: &ConfigFile) -> Result<ParameterSpace<f64>> {
    let lower = cfg
        .resolve(args.lower.clone(), "lower", |s| Ok(s.to_string()))?
        .ok_or_else(|| Error::invalid("--lower bounds are required for file input"))?;
    let upper = cfg
        .resolve(args.upper.clone(), "upper", |s| Ok(s.to_string()))?
        .ok_or_else(|| Error::invalid("--upper bounds are required for file input"))?;
    ParameterSpace::new(config::parse_f64_list(&lower)?, config::parse_f64_list(&upper)?)
}

pub fn load_snapshots(snapshots: &Path, params: &Path) -> Result<SnapshotSet<f64>> {
    let fields = io::read_snapshot_matrix(snapshots)?;
    let samples = io::read_params_csv(params)?;
    SnapshotSet::new(fields, samples)
}

fn resolve_truncation(
    rank: Option<usize>,
    energy: Option<f64>,
    cfg: &ConfigFile,
    default_rank: Option<usize>,
) -> Result<Truncation<f64>> {
    let rank = cfg.resolve(rank, "rank", |s| config::parse_usize(s))?;
    let energy = cfg.resolve(energy, "energy", |s| config::parse_f64(s))?;
    match (rank, energy) {
        (Some(_), Some(_)) => Err(Error::invalid("--rank and --energy are mutually exclusive")),
        (Some(k), None) => Ok(Truncation::FixedRank(k)),
        (None, Some(tau)) => Ok(Truncation::EnergyFraction(tau)),
        (None, None) => default_rank
            .map(Truncation::FixedRank)
            .ok_or_else(|| Error::invalid("either --rank or --energy is required")),
    }
}

fn resolve_kernel(cfg: &ConfigFile) -> Result<RbfKernel<f64>> {
    let shape = match cfg.raw("kernel-shape") {
        Some(text) => config::parse_f64(text)?,
        None => 1.0,
    };
    match cfg.raw("kernel") {
        None | Some("thin-plate-spline") => Ok(RbfKernel::ThinPlateSpline),
        Some("gaussian") => Ok(RbfKernel::Gaussian { shape }),
        Some("multiquadric") => Ok(RbfKernel::Multiquadric { shape }),
        Some(other) => Err(Error::invalid(format!(
            "unknown kernel '{other}'; available: thin-plate-spline, gaussian, multiquadric"
        ))),
    }
}

pub fn parse_gradients(text: &str) -> Result<GradientKind> {
    match text {
        "analytic" => Ok(GradientKind::Analytic),
        "local-linear" => Ok(GradientKind::LocalLinear),
        "global-linear" => Ok(GradientKind::GlobalLinear),
        other => Err(Error::invalid(format!(
            "unknown gradient strategy '{other}'; available: analytic, local-linear, global-linear"
        ))),
    }
}

fn parse_method(text: &str, gradients: GradientKind, cfg: &ConfigFile) -> Result<CoefficientMethod<f64>> {
    match text {
        "full-rbf" => Ok(CoefficientMethod::FullRbf(resolve_kernel(cfg)?)),
        "as-gpr" => Ok(CoefficientMethod::AsGpr(gradients)),
        other => Err(Error::invalid(format!(
            "unknown method '{other}'; available: full-rbf, as-gpr"
        ))),
    }
}

fn resolve_gradients(
    flag: Option<String>,
    cfg: &ConfigFile,
    source: &DataSource,
) -> Result<GradientKind> {
    let named = cfg.resolve(flag, "gradients", |s| Ok(s.to_string()))?;
    match named {
        Some(text) => {
            let kind = parse_gradients(&text)?;
            if kind == GradientKind::Analytic && source.jacobian().is_none() {
                return Err(Error::invalid(
                    "analytic gradients are only available for synthetic presets",
                ));
            }
            Ok(kind)
        }
        None => Ok(match source {
            DataSource::Preset { .. } => GradientKind::Analytic,
            DataSource::Files { .. } => GradientKind::LocalLinear,
        }),
    }
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

pub struct GenArgs {
    pub preset: Option<String>,
    pub samples: Option<usize>,
    pub seed: u64,
    pub binary: bool,
    pub out: PathBuf,
}

pub fn cmd_gen(args: GenArgs, cfg: &ConfigFile) -> Result<()> {
    let name = cfg
        .resolve(args.preset, "preset", |s| Ok(s.to_string()))?
        .ok_or_else(|| {
            Error::invalid(format!(
                "--preset is required; available: {}",
                evaluation::PRESET_NAMES.join(", ")
            ))
        })?;
    let problem = evaluation::preset::<f64>(&name)?;
    let n = cfg
        .resolve(args.samples, "samples", |s| config::parse_usize(s))?
        .unwrap_or(200);
    let samples = problem.space().sample_uniform(n, args.seed)?;
    let snapshots = evaluation::snapshot_from_problem(&problem, &samples)?;

    ensure_out_dir(&args.out)?;
    io::write_params_csv(&args.out.join("params.csv"), snapshots.params())?;
    let snapshot_file = if args.binary {
        let path = args.out.join("snapshots.rsnp");
        io::write_rsnp_file(&path, snapshots.fields())?;
        path
    } else {
        let path = args.out.join("snapshots.csv");
        io::write_snapshot_csv(&path, snapshots.fields())?;
        path
    };

    let mut manifest = Manifest::new("gen", cfg);
    manifest.push("preset", name.clone());
    manifest.push("samples", n.to_string());
    manifest.push("seed", args.seed.to_string());
    manifest.push("snapshots", snapshot_file.display().to_string());
    manifest.push("params", args.out.join("params.csv").display().to_string());
    manifest.push("out", args.out.display().to_string());
    manifest.write(&args.out)?;
    println!(
        "generated {n} snapshots of '{name}' ({} field values each)",
        problem.field_dim()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// pod
// ---------------------------------------------------------------------------

pub struct PodArgs {
    pub snapshots: PathBuf,
    pub rank: Option<usize>,
    pub energy: Option<f64>,
    pub out: PathBuf,
}

pub fn cmd_pod(args: PodArgs, cfg: &ConfigFile) -> Result<()> {
    let fields = io::read_snapshot_matrix(&args.snapshots)?;
    let ns = fields.ncols();
    let placeholder = ParameterSamples::new(
        DMatrix::from_fn(1, ns, |_, j| j as f64),
        Coordinates::Physical,
    )?;
    let set = SnapshotSet::new(fields, placeholder)?;
    let (basis, _) = pod::compute_pod(&set)?;
    let truncation = resolve_truncation(args.rank, args.energy, cfg, None)?;
    let truncated = basis.truncate(truncation)?;

    ensure_out_dir(&args.out)?;
    io::write_rsnp_file(&args.out.join("modes.rsnp"), truncated.modes())?;
    io::write_singular_values_csv(
        &args.out.join("singular_values.csv"),
        basis.singular_values().as_slice(),
    )?;
    io::write_decay_csv(&args.out.join("decay.csv"), basis.singular_values().as_slice())?;

    let mut manifest = Manifest::new("pod", cfg);
    manifest.push("snapshots", args.snapshots.display().to_string());
    manifest.push("rank", truncated.rank().to_string());
    manifest.push("out", args.out.display().to_string());
    manifest.write(&args.out)?;
    println!(
        "kept {} of {} modes; largest singular value {:e}",
        truncated.rank(),
        ns,
        basis.singular_values()[0]
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

pub struct TrainArgs {
    pub snapshots: PathBuf,
    pub params: PathBuf,
    pub lower: Option<String>,
    pub upper: Option<String>,
    pub rank: Option<usize>,
    pub energy: Option<f64>,
    pub method: Option<String>,
    pub gradients: Option<String>,
    pub centering: bool,
    pub seed: u64,
    pub out: PathBuf,
}

pub fn cmd_train(args: TrainArgs, cfg: &ConfigFile) -> Result<()> {
    let input = InputArgs {
        preset: None,
        samples: None,
        snapshots: Some(args.snapshots.clone()),
        params: Some(args.params.clone()),
        lower: args.lower.clone(),
        upper: args.upper.clone(),
        seed: args.seed,
    };
    let source = resolve_source(&input, cfg)?;
    let truncation = resolve_truncation(args.rank, args.energy, cfg, None)?;
    let gradients = resolve_gradients(args.gradients, cfg, &source)?;
    let method_name = cfg
        .resolve(args.method, "method", |s| Ok(s.to_string()))?
        .unwrap_or_else(|| "full-rbf".to_string());
    let method = parse_method(&method_name, gradients, cfg)?;
    let centering = args.centering
        || cfg
            .raw("centering")
            .map(config::parse_bool)
            .transpose()?
            .unwrap_or(false);
    let config = RomConfig {
        truncation,
        method,
        centering,
    };

    let model = rom::train(source.space(), source.snapshots(), &config, Some(args.seed))?;

    ensure_out_dir(&args.out)?;
    let model_path = args.out.join("model.romas");
    io::save_model(&model_path, &model)?;

    let mut manifest = Manifest::new("train", cfg);
    manifest.push("snapshots", args.snapshots.display().to_string());
    manifest.push("params", args.params.display().to_string());
    manifest.push("method", method_name);
    manifest.push("rank", model.rank().to_string());
    manifest.push("gradients", gradients.label().to_string());
    manifest.push("centering", centering.to_string());
    manifest.push("seed", args.seed.to_string());
    manifest.push("model", model_path.display().to_string());
    manifest.push("out", args.out.display().to_string());
    manifest.write(&args.out)?;
    println!(
        "trained {} model: rank {}, {} snapshots",
        model.config().method.label(),
        model.rank(),
        model.meta().n_train
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// predict
// ---------------------------------------------------------------------------

pub struct PredictArgs {
    pub model: PathBuf,
    pub mu: String,
    pub out: PathBuf,
}

pub fn cmd_predict(args: PredictArgs, cfg: &ConfigFile) -> Result<()> {
    let model = io::load_model(&args.model)?;
    let mu = config::parse_f64_list(&args.mu)?;
    if mu.len() != model.space().dim() {
        return Err(Error::invalid(format!(
            "query has {} components; model expects {}",
            mu.len(),
            model.space().dim()
        )));
    }
    let query = DVector::from_vec(mu);
    let prediction = model.predict(query.column(0))?;
    if prediction.out_of_bounds {
        eprintln!("warning: query lies outside the training bounds; extrapolating");
    }

    ensure_out_dir(&args.out)?;
    io::csv::write_field_csv(&args.out.join("field.csv"), prediction.field.as_slice())?;

    let mut manifest = Manifest::new("predict", cfg);
    manifest.push("model", args.model.display().to_string());
    manifest.push("mu", args.mu.clone());
    manifest.push("out", args.out.display().to_string());
    manifest.write(&args.out)?;
    println!(
        "predicted field of {} values{}",
        prediction.field.len(),
        if prediction.out_of_bounds {
            " (extrapolated)"
        } else {
            ""
        }
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// as / summary shared analysis
// ---------------------------------------------------------------------------

struct ModeDiagnostics {
    eigenvalues: DVector<f64>,
    selected_dimension: Option<usize>,
    active_tail: f64,
    inactive_tail: f64,
    table: Vec<(f64, f64)>,
}

fn analyze_modes(
    source: &DataSource,
    truncation: Truncation<f64>,
    gradients: GradientKind,
) -> Result<Vec<ModeDiagnostics>> {
    let space = source.space();
    let snapshots = source.snapshots();
    let mu_ref = space.to_reference(snapshots.params())?;
    let (basis, _) = pod::compute_pod(snapshots)?;
    let basis = basis.truncate(truncation)?;
    let coeffs = basis.project(snapshots)?;
    let n = snapshots.len();
    let p = space.dim();

    let jacobians: Option<Vec<DMatrix<f64>>> = match (gradients, source.jacobian()) {
        (GradientKind::Analytic, Some(src)) => Some(
            (0..n)
                .map(|j| src.jacobian_ref(mu_ref.column(j)))
                .collect(),
        ),
        (GradientKind::Analytic, None) => {
            return Err(Error::invalid(
                "analytic gradients are only available for synthetic presets",
            ))
        }
        _ => None,
    };

    let mut diagnostics = Vec::with_capacity(basis.rank());
    for mode in 0..basis.rank() {
        let values = coeffs.mode_values(mode);
        let grads = match gradients {
            GradientKind::Analytic => {
                let jacs = jacobians.as_ref().expect("prepared above");
                let phi = basis.modes().column(mode).into_owned();
                let g = DMatrix::from_fn(p, n, |i, j| jacs[j].column(i).dot(&phi));
                GradientSamples::new(g, GradientProvenance::Analytic)
            }
            GradientKind::LocalLinear => {
                active_subspace::estimate_gradients(&mu_ref, &values, GradientStrategy::LocalLinear)
            }
            GradientKind::GlobalLinear => active_subspace::estimate_gradients(
                &mu_ref,
                &values,
                GradientStrategy::GlobalLinear,
            ),
        }
        .map_err(|e| e.in_mode(mode))?;

        let sigma = active_subspace::covariance(&grads);
        let (eigenvalues, eigenvectors) = active_subspace::eigendecompose(&sigma)?;
        let selected_dimension = active_subspace::select_dimension(&eigenvalues).ok();
        let (active_tail, inactive_tail) =
            active_subspace::eigenvalue_tail_diagnostic(&eigenvalues, 1)?;
        let subspace = ActiveSubspace::new(eigenvalues.clone(), eigenvectors, 1)
            .map_err(|e| e.in_mode(mode))?;
        let table = active_subspace::sufficient_summary(&mu_ref, &values, &subspace)?;
        diagnostics.push(ModeDiagnostics {
            eigenvalues,
            selected_dimension,
            active_tail,
            inactive_tail,
            table,
        });
    }
    Ok(diagnostics)
}

pub struct AsArgs {
    pub input: InputArgs,
    pub rank: Option<usize>,
    pub energy: Option<f64>,
    pub gradients: Option<String>,
    pub out: PathBuf,
}

pub fn cmd_as(args: AsArgs, cfg: &ConfigFile) -> Result<()> {
    let source = resolve_source(&args.input, cfg)?;
    let truncation = resolve_truncation(args.rank, args.energy, cfg, source.default_rank())?;
    let gradients = resolve_gradients(args.gradients, cfg, &source)?;
    let diagnostics = analyze_modes(&source, truncation, gradients)?;

    ensure_out_dir(&args.out)?;
    let mut dim_table = String::from(
        "mode,selected_dimension,active_tail_sqrt,inactive_tail_sqrt\n",
    );
    for (mode, diag) in diagnostics.iter().enumerate() {
        io::write_eigenvalue_csv(
            &args.out.join(format!("eigenvalues_mode_{}.csv", mode + 1)),
            diag.eigenvalues.as_slice(),
        )?;
        let _ = writeln!(
            dim_table,
            "{},{},{:e},{:e}",
            mode + 1,
            diag.selected_dimension
                .map(|m| m.to_string())
                .unwrap_or_else(|| "-".to_string()),
            diag.active_tail,
            diag.inactive_tail
        );
    }
    write_file(&args.out.join("dimensions.csv"), &dim_table)?;

    let mut manifest = Manifest::new("as", cfg);
    source.describe(&mut manifest);
    manifest.push("modes", diagnostics.len().to_string());
    manifest.push("gradients", gradients.label().to_string());
    manifest.push("seed", args.input.seed.to_string());
    manifest.push("out", args.out.display().to_string());
    manifest.write(&args.out)?;
    println!("analyzed {} modal coefficients", diagnostics.len());
    Ok(())
}

pub struct SummaryArgs {
    pub input: InputArgs,
    pub rank: Option<usize>,
    pub energy: Option<f64>,
    pub gradients: Option<String>,
    pub mode: Option<usize>,
    pub out: PathBuf,
}

pub fn cmd_summary(args: SummaryArgs, cfg: &ConfigFile) -> Result<()> {
    let source = resolve_source(&args.input, cfg)?;
    let truncation = resolve_truncation(args.rank, args.energy, cfg, source.default_rank())?;
    let gradients = resolve_gradients(args.gradients, cfg, &source)?;
    let diagnostics = analyze_modes(&source, truncation, gradients)?;

    let selected: Vec<usize> = match args.mode {
        Some(m) => {
            if m == 0 || m > diagnostics.len() {
                return Err(Error::invalid(format!(
                    "mode {m} out of range [1, {}]",
                    diagnostics.len()
                )));
            }
            vec![m - 1]
        }
        None => (0..diagnostics.len()).collect(),
    };

    ensure_out_dir(&args.out)?;
    for &mode in &selected {
        let diag = &diagnostics[mode];
        io::write_summary_csv(
            &args.out.join(format!("summary_mode_{}.csv", mode + 1)),
            &diag.table,
        )?;
        io::write_eigenvalue_csv(
            &args.out.join(format!("eigenvalues_mode_{}.csv", mode + 1)),
            diag.eigenvalues.as_slice(),
        )?;
    }

    let mut manifest = Manifest::new("summary", cfg);
    source.describe(&mut manifest);
    manifest.push(
        "mode",
        args.mode
            .map(|m| m.to_string())
            .unwrap_or_else(|| "all".to_string()),
    );
    manifest.push("gradients", gradients.label().to_string());
    manifest.push("seed", args.input.seed.to_string());
    manifest.push("out", args.out.display().to_string());
    manifest.write(&args.out)?;
    println!("wrote {} sufficient-summary tables", selected.len());
    Ok(())
}

// ---------------------------------------------------------------------------
// cv / sweep
// ---------------------------------------------------------------------------

fn resolve_methods(
    named: Vec<String>,
    gradients: GradientKind,
    truncation: Truncation<f64>,
    cfg: &ConfigFile,
) -> Result<Vec<RomConfig<f64>>> {
    named
        .iter()
        .map(|name| {
            Ok(RomConfig {
                truncation,
                method: parse_method(name, gradients, cfg)?,
                centering: false,
            })
        })
        .collect()
}

pub struct CvArgs {
    pub input: InputArgs,
    pub method: Option<String>,
    pub rank: Option<usize>,
    pub energy: Option<f64>,
    pub gradients: Option<String>,
    pub k: Option<usize>,
    pub out: PathBuf,
}

pub fn cmd_cv(args: CvArgs, cfg: &ConfigFile) -> Result<()> {
    let source = resolve_source(&args.input, cfg)?;
    let truncation = resolve_truncation(args.rank, args.energy, cfg, source.default_rank())?;
    let gradients = resolve_gradients(args.gradients, cfg, &source)?;
    let method_name = cfg
        .resolve(args.method, "method", |s| Ok(s.to_string()))?
        .unwrap_or_else(|| "full-rbf".to_string());
    let config = RomConfig {
        truncation,
        method: parse_method(&method_name, gradients, cfg)?,
        centering: false,
    };
    let k = cfg.resolve(args.k, "k", |s| config::parse_usize(s))?.unwrap_or(5);

    let report = evaluation::cv_error(
        source.space(),
        source.snapshots(),
        &config,
        k,
        args.input.seed,
        source.jacobian(),
    )?;

    ensure_out_dir(&args.out)?;
    let label = config.method.label();
    let fold_rows: Vec<(usize, &str, usize, f64)> = report
        .fold_errors
        .iter()
        .enumerate()
        .map(|(fold, &err)| (report.n_samples, label, fold, err))
        .collect();
    io::write_fold_report_csv(&args.out.join("cv_folds.csv"), &fold_rows)?;
    io::write_mean_report_csv(
        &args.out.join("cv_mean.csv"),
        &[(report.n_samples, label, report.overall)],
    )?;

    let mut manifest = Manifest::new("cv", cfg);
    source.describe(&mut manifest);
    manifest.push("method", method_name);
    manifest.push("gradients", gradients.label().to_string());
    if matches!(config.method, CoefficientMethod::AsGpr(_)) {
        manifest.push(
            "gpr-grid",
            romas::regression::gpr::HYPER_GRID_DESCRIPTION.to_string(),
        );
    }
    manifest.push("k", k.to_string());
    manifest.push("seed", args.input.seed.to_string());
    manifest.push("out", args.out.display().to_string());
    manifest.write(&args.out)?;
    println!(
        "{label}: mean relative error {:e} over {} folds",
        report.overall, report.k
    );
    Ok(())
}

pub struct SweepArgs {
    pub input: InputArgs,
    pub sizes: Option<String>,
    pub methods: Option<String>,
    pub rank: Option<usize>,
    pub energy: Option<f64>,
    pub gradients: Option<String>,
    pub k: Option<usize>,
    pub out: PathBuf,
}

pub fn cmd_sweep(args: SweepArgs, cfg: &ConfigFile) -> Result<()> {
    let source = resolve_source(&args.input, cfg)?;
    let truncation = resolve_truncation(args.rank, args.energy, cfg, source.default_rank())?;
    let gradients = resolve_gradients(args.gradients, cfg, &source)?;
    let sizes_text = cfg
        .resolve(args.sizes, "sizes", |s| Ok(s.to_string()))?
        .ok_or_else(|| Error::invalid("--sizes is required (e.g. 20,40,60 or 20:200:20)"))?;
    let sizes = config::parse_sizes(&sizes_text)?;
    let methods_text = cfg
        .resolve(args.methods, "methods", |s| Ok(s.to_string()))?
        .unwrap_or_else(|| "full-rbf,as-gpr".to_string());
    let method_names: Vec<String> = methods_text
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let configs = resolve_methods(method_names, gradients, truncation, cfg)?;
    let k = cfg.resolve(args.k, "k", |s| config::parse_usize(s))?.unwrap_or(5);

    let table = evaluation::sample_sweep(
        source.space(),
        source.snapshots(),
        &configs,
        &sizes,
        k,
        args.input.seed,
        source.jacobian(),
    )?;

    ensure_out_dir(&args.out)?;
    io::write_fold_report_csv(&args.out.join("sweep_folds.csv"), &table.fold_rows())?;
    io::write_mean_report_csv(&args.out.join("sweep_mean.csv"), &table.mean_rows())?;

    let mut manifest = Manifest::new("sweep", cfg);
    source.describe(&mut manifest);
    manifest.push("methods", methods_text);
    manifest.push("gradients", gradients.label().to_string());
    if configs
        .iter()
        .any(|c| matches!(c.method, CoefficientMethod::AsGpr(_)))
    {
        manifest.push(
            "gpr-grid",
            romas::regression::gpr::HYPER_GRID_DESCRIPTION.to_string(),
        );
    }
    manifest.push("sizes", fmt_list(&sizes));
    manifest.push("k", k.to_string());
    manifest.push("seed", args.input.seed.to_string());
    manifest.push("out", args.out.display().to_string());
    manifest.write(&args.out)?;
    for row in table.mean_rows() {
        println!("n={:<6} {:<10} mean error {:e}", row.0, row.1, row.2);
    }
    Ok(())
}
