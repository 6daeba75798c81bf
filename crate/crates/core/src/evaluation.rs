//! k-fold cross-validation, error-vs-sample-count sweeps, and synthetic
//! ridge-structured benchmark problems standing in for the full-order beam
//! and CFD datasets, which are not published. The proxies keep the published
//! dimensions (p = 6 with 6 modes, p = 8 with 9 modes, 200 samples, 5 folds)
//! and the ridge structure the active-subspace method exploits; absolute
//! error values are not reproduction targets, trends are.

use nalgebra::{DMatrix, DVector, DVectorView};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::param_space::{Coordinates, ParameterSamples, ParameterSpace};
use crate::pod::SnapshotSet;
use crate::rom::{self, CoefficientMethod, GradientKind, JacobianSource, RomConfig};
use crate::scalar::{real, Real};

/// Assignment of `n` samples to `k` folds of near-equal size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    assignments: Vec<usize>,
    seed: u64,
}

/// Uniformly shuffles the sample indices, then cuts contiguous blocks; the
/// first `n mod k` folds take the extra sample.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 || k > n {
        return Err(Error::invalid(format!(
            "fold count {k} out of range [2, {n}]"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let base = n / k;
    let extra = n % k;
    let mut assignments = vec![0usize; n];
    let mut pos = 0usize;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &sample in &order[pos..pos + size] {
            assignments[sample] = fold;
        }
        pos += size;
    }
    Ok(FoldPlan {
        k,
        assignments,
        seed,
    })
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fold id of every sample.
    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &f)| f == fold)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &f)| f != fold)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Cross-validation result for one configuration on one sample set.
#[derive(Debug, Clone)]
pub struct CvReport<T: Real> {
    /// Mean relative reconstruction error of each fold.
    pub fold_errors: Vec<T>,
    /// Mean of the fold means.
    pub overall: T,
    /// Total sample count (training plus testing).
    pub n_samples: usize,
    /// Training-set size of each fold.
    pub n_train_per_fold: Vec<usize>,
    pub k: usize,
    pub seed: u64,
    pub config: RomConfig<T>,
}

/// Trains on `k - 1` folds and scores the held-out fold, for every fold;
/// each sample is used for validation exactly once. Errors are averaged
/// within folds first, then across folds.
pub fn cv_error<T: Real>(
    space: &ParameterSpace<T>,
    snapshots: &SnapshotSet<T>,
    config: &RomConfig<T>,
    k: usize,
    seed: u64,
    jacobian: Option<&dyn JacobianSource<T>>,
) -> Result<CvReport<T>> {
    let n = snapshots.len();
    let plan = kfold_split(n, k, seed)?;
    let min = config.min_train_samples(space.dim());
    for (fold, size) in plan.fold_sizes().iter().enumerate() {
        if n - size < min {
            return Err(Error::invalid(format!(
                "fold {fold} leaves {} training samples; configuration needs {min}",
                n - size
            )));
        }
    }

    let mut fold_errors = Vec::with_capacity(k);
    let mut n_train_per_fold = Vec::with_capacity(k);
    for fold in 0..k {
        let train_idx = plan.train_indices(fold);
        let test_idx = plan.test_indices(fold);
        let train_set = snapshots.select(&train_idx);
        let model = match (jacobian, &config.method) {
            (Some(src), CoefficientMethod::AsGpr(GradientKind::Analytic)) => {
                rom::train_with_jacobian(space, &train_set, config, Some(seed), src)
            }
            _ => rom::train(space, &train_set, config, Some(seed)),
        }
        .map_err(|e| e.in_fold(fold))?;

        let mut acc = T::zero();
        for &j in &test_idx {
            let prediction = model
                .predict(snapshots.params().column(j))
                .map_err(|e| e.in_fold(fold))?;
            let exact = snapshots.snapshot(j).into_owned();
            acc += rom::relative_error(&exact, &prediction.field)
                .map_err(|e| e.in_fold(fold))?;
        }
        fold_errors.push(acc / real::<T>(test_idx.len() as f64));
        n_train_per_fold.push(train_idx.len());
    }

    let overall = fold_errors.iter().fold(T::zero(), |a, &x| a + x) / real::<T>(k as f64);
    Ok(CvReport {
        fold_errors,
        overall,
        n_samples: n,
        n_train_per_fold,
        k,
        seed,
        config: config.clone(),
    })
}

/// One (sample count, configuration) cell of a sweep.
#[derive(Debug, Clone)]
pub struct SweepEntry<T: Real> {
    pub n_samples: usize,
    pub method: &'static str,
    pub report: CvReport<T>,
}

/// Error-versus-sample-count study across methods.
#[derive(Debug, Clone)]
pub struct SweepTable<T: Real> {
    pub entries: Vec<SweepEntry<T>>,
}

impl<T: Real> SweepTable<T> {
    pub fn mean_error(&self, n_samples: usize, method: &str) -> Option<T> {
        self.entries
            .iter()
            .find(|e| e.n_samples == n_samples && e.method == method)
            .map(|e| e.report.overall)
    }

    /// Rows `(n_samples, method, fold, relative_error)` for the fold-level
    /// report CSV.
    pub fn fold_rows(&self) -> Vec<(usize, &'static str, usize, T)> {
        let mut rows = Vec::new();
        for entry in &self.entries {
            for (fold, &err) in entry.report.fold_errors.iter().enumerate() {
                rows.push((entry.n_samples, entry.method, fold, err));
            }
        }
        rows
    }

    /// Rows `(n_samples, method, mean_error)` for the summary CSV.
    pub fn mean_rows(&self) -> Vec<(usize, &'static str, T)> {
        self.entries
            .iter()
            .map(|e| (e.n_samples, e.method, e.report.overall))
            .collect()
    }
}

/// Runs `cv_error` for every configuration at every sample count. Subsets
/// are the first `s` entries of one seeded shuffled order, so the curves for
/// different sizes are nested.
pub fn sample_sweep<T: Real>(
    space: &ParameterSpace<T>,
    snapshots: &SnapshotSet<T>,
    configs: &[RomConfig<T>],
    sizes: &[usize],
    k: usize,
    seed: u64,
    jacobian: Option<&dyn JacobianSource<T>>,
) -> Result<SweepTable<T>> {
    let n = snapshots.len();
    if sizes.is_empty() || configs.is_empty() {
        return Err(Error::invalid("sweep needs at least one size and one configuration"));
    }
    if let Some(&max) = sizes.iter().max() {
        if max > n {
            return Err(Error::invalid(format!(
                "sweep size {max} exceeds available samples {n}"
            )));
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let mut entries = Vec::with_capacity(sizes.len() * configs.len());
    for &size in sizes {
        // At full size the subset is the data itself (no permutation), so a
        // single-size sweep coincides with a direct cv_error call.
        let subset = if size == n {
            snapshots.clone()
        } else {
            snapshots.select(&order[..size])
        };
        for config in configs {
            let report = cv_error(space, &subset, config, k, seed, jacobian)?;
            entries.push(SweepEntry {
                n_samples: size,
                method: config.method.label(),
                report,
            });
        }
    }
    Ok(SweepTable { entries })
}

/// Scalar profile of one ridge term, smooth on the reference cube.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile<T: Real> {
    Quadratic { scale: T, shift: T },
    Sine { scale: T, frequency: T, phase: T },
    Softplus { scale: T, sharpness: T, shift: T },
}

impl<T: Real> Profile<T> {
    pub fn eval(&self, t: T) -> T {
        match *self {
            Profile::Quadratic { scale, shift } => {
                let d = t - shift;
                scale * d * d
            }
            Profile::Sine {
                scale,
                frequency,
                phase,
            } => scale * (frequency * t + phase).sin(),
            Profile::Softplus {
                scale,
                sharpness,
                shift,
            } => {
                let z = sharpness * (t - shift);
                scale * softplus(z) / sharpness
            }
        }
    }

    pub fn derivative(&self, t: T) -> T {
        match *self {
            Profile::Quadratic { scale, shift } => real::<T>(2.0) * scale * (t - shift),
            Profile::Sine {
                scale,
                frequency,
                phase,
            } => scale * frequency * (frequency * t + phase).cos(),
            Profile::Softplus {
                scale,
                sharpness,
                shift,
            } => {
                let z = sharpness * (t - shift);
                scale / (T::one() + (-z).exp())
            }
        }
    }
}

fn softplus<T: Real>(z: T) -> T {
    // ln(1 + e^z) without overflow for large |z|
    z.max(T::zero()) + (-z.abs()).exp().ln_1p()
}

/// One additive term `h(w^T mu_ref) b` of a synthetic truth map.
#[derive(Debug, Clone)]
pub struct RidgeTerm<T: Real> {
    /// Unit parameter-space direction, reference coordinates.
    pub direction: DVector<T>,
    /// Spatial vector; orthonormal across the terms of one problem.
    pub spatial: DVector<T>,
    pub profile: Profile<T>,
}

/// Desk-scale synthetic truth map `u(mu) = sum_j h_j(w_j^T mu_ref) b_j`.
#[derive(Debug, Clone)]
pub struct SyntheticProblem<T: Real> {
    space: ParameterSpace<T>,
    field_dim: usize,
    terms: Vec<RidgeTerm<T>>,
}

/// Amplitude ratio between consecutive ridge terms. The decay makes each
/// modal coefficient nearly (not exactly) one-dimensional: dominated by its
/// own ridge profile with bounded leakage from the others, which is what
/// gives the active-subspace regressor its advantage at small sample counts
/// and its error plateau at large ones.
const AMPLITUDE_DECAY: f64 = 0.50;

/// Builds an `r`-term ridge problem with directions drawn uniformly on the
/// sphere, orthonormal spatial vectors, and profiles cycling through
/// quadratic, sine, and softplus shapes with deterministic parameters.
pub fn make_ridge_problem<T: Real>(
    space: ParameterSpace<T>,
    field_dim: usize,
    r: usize,
    seed: u64,
) -> Result<SyntheticProblem<T>> {
    if r == 0 {
        return Err(Error::invalid("at least one ridge term required"));
    }
    if field_dim < r {
        return Err(Error::invalid(format!(
            "field dimension {field_dim} cannot host {r} orthonormal spatial vectors"
        )));
    }
    let p = space.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut directions: Vec<DVector<T>> = Vec::with_capacity(r);
    for _ in 0..r {
        loop {
            let v: DVector<T> = DVector::from_fn(p, |_, _| standard_normal(&mut rng));
            let norm = v.norm();
            if norm > real::<T>(1e-8) {
                directions.push(v / norm);
                break;
            }
        }
    }

    let gaussian = DMatrix::from_fn(field_dim, r, |_, _| standard_normal::<T>(&mut rng));
    let spatial = gaussian.qr().q();

    let mut terms = Vec::with_capacity(r);
    for j in 0..r {
        let amplitude = real::<T>(AMPLITUDE_DECAY.powi(j as i32));
        let profile = match j % 3 {
            0 => Profile::Quadratic {
                scale: amplitude,
                shift: real::<T>(0.15 * (j as f64 / 3.0 - 1.0)),
            },
            1 => Profile::Sine {
                scale: amplitude,
                frequency: real::<T>(1.2 + 0.4 * ((j / 3) % 3) as f64),
                phase: real::<T>(0.4 * j as f64),
            },
            _ => Profile::Softplus {
                scale: amplitude,
                sharpness: real::<T>(2.5),
                shift: real::<T>(0.1 * (j as f64 - 4.0) / 4.0),
            },
        };
        terms.push(RidgeTerm {
            direction: directions[j].clone(),
            spatial: spatial.column(j).into_owned(),
            profile,
        });
    }
    Ok(SyntheticProblem {
        space,
        field_dim,
        terms,
    })
}

fn standard_normal<T: Real>(rng: &mut ChaCha8Rng) -> T {
    // Box-Muller on two uniforms
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    real((-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos())
}

/// Stand-in for the beam stress study: `p = 6` thickness parameters on
/// `[5, 10]` mm, 500 field degrees of freedom, 6 ridge terms.
pub fn beam_proxy<T: Real>() -> SyntheticProblem<T> {
    let space = ParameterSpace::hypercube(real(5.0), real(10.0), 6).expect("valid bounds");
    make_ridge_problem(space, 500, 6, 6021).expect("valid preset")
}

/// Stand-in for the square-cylinder pressure study: `p = 8` displacement
/// parameters, 2000 field degrees of freedom, 9 ridge terms.
pub fn pressure_proxy<T: Real>() -> SyntheticProblem<T> {
    let space =
        ParameterSpace::hypercube(real(-0.01), real(0.01), 8).expect("valid bounds");
    make_ridge_problem(space, 2000, 9, 8047).expect("valid preset")
}

/// Preset names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 2] = ["beam-proxy", "pressure-proxy"];

/// Looks up a synthetic problem preset by name.
pub fn preset<T: Real>(name: &str) -> Result<SyntheticProblem<T>> {
    match name {
        "beam-proxy" => Ok(beam_proxy()),
        "pressure-proxy" => Ok(pressure_proxy()),
        other => Err(Error::invalid(format!(
            "unknown preset '{other}'; available: {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}

impl<T: Real> SyntheticProblem<T> {
    pub fn space(&self) -> &ParameterSpace<T> {
        &self.space
    }

    pub fn field_dim(&self) -> usize {
        self.field_dim
    }

    pub fn terms(&self) -> &[RidgeTerm<T>] {
        &self.terms
    }

    /// Number of ridge terms, the numerical rank of any snapshot matrix
    /// sampled from the problem.
    pub fn rank(&self) -> usize {
        self.terms.len()
    }

    /// Truth field at a reference-coordinate point.
    pub fn evaluate_ref(&self, mu_ref: DVectorView<'_, T>) -> DVector<T> {
        let mut field = DVector::zeros(self.field_dim);
        for term in &self.terms {
            let t = term.direction.dot(&mu_ref);
            field.axpy(term.profile.eval(t), &term.spatial, T::one());
        }
        field
    }

    /// Truth field at a physical point.
    pub fn evaluate(&self, mu: DVectorView<'_, T>) -> DVector<T> {
        let mu_ref = self.space.point_to_reference(mu);
        self.evaluate_ref(mu_ref.column(0))
    }
}

impl<T: Real> JacobianSource<T> for SyntheticProblem<T> {
    fn jacobian_ref(&self, mu_ref: DVectorView<'_, T>) -> DMatrix<T> {
        let p = self.space.dim();
        let mut jac = DMatrix::zeros(self.field_dim, p);
        for term in &self.terms {
            let t = term.direction.dot(&mu_ref);
            let slope = term.profile.derivative(t);
            // rank-one update: b * (h'(t) w)^T
            for c in 0..p {
                let w = slope * term.direction[c];
                jac.column_mut(c).axpy(w, &term.spatial, T::one());
            }
        }
        jac
    }
}

/// Evaluates the truth map at every sample column. Physical samples are
/// rescaled internally; the snapshot set keeps the samples as given.
pub fn snapshot_from_problem<T: Real>(
    problem: &SyntheticProblem<T>,
    samples: &ParameterSamples<T>,
) -> Result<SnapshotSet<T>> {
    if samples.dim() != problem.space.dim() {
        return Err(Error::invalid(format!(
            "sample dimension {} does not match problem dimension {}",
            samples.dim(),
            problem.space.dim()
        )));
    }
    let n = samples.len();
    let mut fields = DMatrix::zeros(problem.field_dim, n);
    for j in 0..n {
        let column = match samples.coords() {
            Coordinates::Physical => problem.evaluate(samples.column(j)),
            Coordinates::Reference => problem.evaluate_ref(samples.column(j)),
        };
        fields.set_column(j, &column);
    }
    SnapshotSet::new(fields, samples.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pod::{compute_pod, Truncation};
    use crate::regression::rbf::RbfKernel;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn full_rbf(rank: usize) -> RomConfig<f64> {
        RomConfig {
            truncation: Truncation::FixedRank(rank),
            method: CoefficientMethod::FullRbf(RbfKernel::ThinPlateSpline),
            centering: false,
        }
    }

    #[test]
    fn five_folds_of_forty() {
        let plan = kfold_split(200, 5, 11).unwrap();
        assert_eq!(plan.fold_sizes(), vec![40; 5]);
    }

    #[test]
    fn leave_one_out() {
        let plan = kfold_split(5, 5, 0).unwrap();
        assert_eq!(plan.fold_sizes(), vec![1; 5]);
    }

    #[test]
    fn uneven_folds() {
        let plan = kfold_split(7, 3, 1).unwrap();
        let mut sizes = plan.fold_sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 2, 3]);
        assert_eq!(plan.fold_sizes()[0], 3);
    }

    #[test]
    fn invalid_fold_counts() {
        assert!(kfold_split(5, 6, 0).is_err());
        assert!(kfold_split(5, 1, 0).is_err());
    }

    #[test]
    fn constant_truth_is_reconstructed_by_both_methods() {
        let space = ParameterSpace::hypercube(0.0, 1.0, 3).unwrap();
        let samples = space.sample_uniform(30, 2).unwrap();
        let field = DVector::from_fn(12, |i, _| 1.0 + i as f64);
        let fields = DMatrix::from_fn(12, 30, |i, _| field[i]);
        let snapshots = SnapshotSet::new(fields, samples).unwrap();

        for config in [
            full_rbf(1),
            RomConfig {
                truncation: Truncation::FixedRank(1),
                method: CoefficientMethod::AsGpr(GradientKind::GlobalLinear),
                centering: false,
            },
        ] {
            let report = cv_error(&space, &snapshots, &config, 5, 3, None).unwrap();
            assert!(
                report.overall <= 1e-8,
                "{}: overall {}",
                config.method.label(),
                report.overall
            );
        }
    }

    #[test]
    fn linear_rank_one_problem_is_exact_for_full_rbf() {
        let space = ParameterSpace::hypercube(-1.0, 1.0, 3).unwrap();
        let samples = space.sample_uniform(40, 4).unwrap();
        let c = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let b = DVector::from_fn(20, |i, _| ((i + 1) as f64).sqrt());
        let fields = DMatrix::from_fn(20, 40, |i, j| {
            c.dot(&samples.column(j)) * b[i]
        });
        let snapshots = SnapshotSet::new(fields, samples).unwrap();
        let report = cv_error(&space, &snapshots, &full_rbf(1), 5, 5, None).unwrap();
        assert!(report.overall <= 1e-6, "overall {}", report.overall);
    }

    #[test]
    fn report_aggregation_identity() {
        let problem = make_ridge_problem(
            ParameterSpace::hypercube(0.0, 1.0, 3).unwrap(),
            30,
            3,
            17,
        )
        .unwrap();
        let samples = problem.space().sample_uniform(50, 6).unwrap();
        let snapshots = snapshot_from_problem(&problem, &samples).unwrap();
        let report = cv_error(problem.space(), &snapshots, &full_rbf(3), 5, 7, None).unwrap();
        let mean: f64 = report.fold_errors.iter().sum::<f64>() / report.fold_errors.len() as f64;
        assert!((report.overall - mean).abs() <= 1e-12);
        assert_eq!(report.n_train_per_fold, vec![40; 5]);
        assert_eq!(report.n_samples, 50);
    }

    #[test]
    fn seeded_reports_are_identical() {
        let problem = make_ridge_problem(
            ParameterSpace::hypercube(0.0, 1.0, 2).unwrap(),
            10,
            2,
            23,
        )
        .unwrap();
        let samples = problem.space().sample_uniform(30, 8).unwrap();
        let snapshots = snapshot_from_problem(&problem, &samples).unwrap();
        let a = cv_error(problem.space(), &snapshots, &full_rbf(2), 3, 9, None).unwrap();
        let b = cv_error(problem.space(), &snapshots, &full_rbf(2), 3, 9, None).unwrap();
        assert_eq!(a.fold_errors, b.fold_errors);
        assert_eq!(a.overall, b.overall);
    }

    #[test]
    fn sweep_single_cell_equals_cv() {
        let problem = make_ridge_problem(
            ParameterSpace::hypercube(0.0, 1.0, 2).unwrap(),
            10,
            2,
            29,
        )
        .unwrap();
        let samples = problem.space().sample_uniform(40, 10).unwrap();
        let snapshots = snapshot_from_problem(&problem, &samples).unwrap();
        let sweep = sample_sweep(
            problem.space(),
            &snapshots,
            &[full_rbf(2)],
            &[40],
            4,
            11,
            None,
        )
        .unwrap();
        assert_eq!(sweep.entries.len(), 1);
        let direct = cv_error(problem.space(), &snapshots, &full_rbf(2), 4, 11, None).unwrap();
        // size = n means the subset is a permutation; fold contents match
        // because the fold split is seeded on indices after selection.
        assert_eq!(sweep.entries[0].report.n_samples, direct.n_samples);
        assert_eq!(sweep.mean_error(40, "full-rbf").is_some(), true);
    }

    #[test]
    fn sweep_errors_shrink_with_more_samples() {
        let problem = make_ridge_problem(
            ParameterSpace::hypercube(-1.0, 1.0, 3).unwrap(),
            40,
            3,
            31,
        )
        .unwrap();
        let samples = problem.space().sample_uniform(120, 12).unwrap();
        let snapshots = snapshot_from_problem(&problem, &samples).unwrap();
        let sizes = [30usize, 60, 120];
        let sweep = sample_sweep(
            problem.space(),
            &snapshots,
            &[full_rbf(3)],
            &sizes,
            5,
            13,
            None,
        )
        .unwrap();
        let errs: Vec<f64> = sizes
            .iter()
            .map(|&s| sweep.mean_error(s, "full-rbf").unwrap())
            .collect();
        for w in errs.windows(2) {
            assert!(
                w[1] <= w[0] * 1.1,
                "errors not non-increasing within tolerance: {errs:?}"
            );
        }
    }

    #[test]
    fn single_term_problem_gives_exact_ridge_coefficients() {
        let space = ParameterSpace::hypercube(-1.0, 1.0, 4).unwrap();
        let problem = make_ridge_problem(space, 15, 1, 37).unwrap();
        let samples = problem.space().sample_uniform(50, 14).unwrap();
        let snapshots = snapshot_from_problem(&problem, &samples).unwrap();
        let (basis, _) = compute_pod(&snapshots).unwrap();
        let coeffs = basis.project(&snapshots).unwrap();
        // alpha_1 must be +/- h(w^T mu): check it collapses on the ridge
        // coordinate by sorting on w^T mu and verifying single-valuedness.
        let w = &problem.terms()[0].direction;
        let refs = problem.space().to_reference(&samples).unwrap();
        let mut pairs: Vec<(f64, f64)> = (0..50)
            .map(|j| (w.dot(&refs.column(j)), coeffs.matrix()[(0, j)]))
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for win in pairs.windows(2) {
            if (win[1].0 - win[0].0).abs() <= 1e-12 {
                assert!((win[1].1 - win[0].1).abs() <= 1e-9);
            }
        }
        // and the trailing modes carry nothing
        assert!(basis.singular_values()[1] <= 1e-10 * basis.singular_values()[0]);
    }

    #[test]
    fn presets_have_published_dimensions() {
        let beam: SyntheticProblem<f64> = beam_proxy();
        assert_eq!(beam.space().dim(), 6);
        assert_eq!(beam.field_dim(), 500);
        assert_eq!(beam.rank(), 6);
        assert_relative_eq!(beam.space().lower()[0], 5.0);
        assert_relative_eq!(beam.space().upper()[0], 10.0);

        let pressure: SyntheticProblem<f64> = pressure_proxy();
        assert_eq!(pressure.space().dim(), 8);
        assert_eq!(pressure.field_dim(), 2000);
        assert_eq!(pressure.rank(), 9);

        assert!(preset::<f64>("no-such-preset").is_err());
    }

    #[test]
    fn snapshot_matrix_rank_equals_term_count() {
        let problem = make_ridge_problem(
            ParameterSpace::hypercube(-1.0, 1.0, 6).unwrap(),
            80,
            6,
            41,
        )
        .unwrap();
        let samples = problem.space().sample_uniform(200, 15).unwrap();
        let snapshots = snapshot_from_problem(&problem, &samples).unwrap();
        let (basis, _) = compute_pod(&snapshots).unwrap();
        let sv = basis.singular_values();
        assert!(sv[5] > 1e-10 * sv[0], "profiles not independent enough");
        assert!(
            sv[6] <= 1e-10 * sv[0],
            "rank exceeds term count: sv[6]/sv[0] = {}",
            sv[6] / sv[0]
        );
    }

    #[test]
    fn single_sample_snapshot_equals_truth() {
        let problem = make_ridge_problem(
            ParameterSpace::hypercube(0.0, 2.0, 3).unwrap(),
            12,
            2,
            43,
        )
        .unwrap();
        let samples = problem.space().sample_uniform(1, 16).unwrap();
        let snapshots = snapshot_from_problem(&problem, &samples).unwrap();
        let truth = problem.evaluate(samples.column(0));
        assert!((snapshots.snapshot(0) - truth).norm() <= 1e-14);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let problem = make_ridge_problem(
            ParameterSpace::hypercube(-1.0, 1.0, 4).unwrap(),
            10,
            3,
            47,
        )
        .unwrap();
        let mu = DVector::from_vec(vec![0.2, -0.4, 0.1, 0.5]);
        let jac = problem.jacobian_ref(mu.column(0));
        let h = 1e-6;
        for axis in 0..4 {
            let mut hi = mu.clone();
            let mut lo = mu.clone();
            hi[axis] += h;
            lo[axis] -= h;
            let fd = (problem.evaluate_ref(hi.column(0)) - problem.evaluate_ref(lo.column(0)))
                / (2.0 * h);
            assert!(
                (jac.column(axis) - fd).norm() <= 1e-8,
                "axis {axis} mismatch"
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn folds_partition_indices(n in 4usize..120, k in 2usize..6, seed in 0u64..500) {
            prop_assume!(k <= n);
            let plan = kfold_split(n, k, seed).unwrap();
            let mut seen = vec![false; n];
            for fold in 0..k {
                for idx in plan.test_indices(fold) {
                    prop_assert!(!seen[idx], "index {idx} assigned twice");
                    seen[idx] = true;
                }
            }
            prop_assert!(seen.iter().all(|&s| s));
            let sizes = plan.fold_sizes();
            let max = sizes.iter().max().unwrap();
            let min = sizes.iter().min().unwrap();
            prop_assert!(max - min <= 1);
        }
    }
}
