//! End-to-end PODI model: a truncated POD basis plus one trained coefficient
//! regressor per retained mode. Prediction rescales the query internally,
//! evaluates every regressor, and projects back to the full field.

use nalgebra::{DMatrix, DVector, DVectorView};

use crate::active_subspace::{
    self, AsRidgeModel, GradientProvenance, GradientSamples, GradientStrategy,
};
use crate::error::{Error, Result};
use crate::param_space::{Coordinates, ParameterSpace};
use crate::pod::{self, PodBasis, SnapshotSet, Truncation};
use crate::regression::rbf::{self, RbfInterpolant, RbfKernel};
use crate::scalar::Real;

/// Gradient estimation policy named in a configuration. `Analytic` requires
/// a [`JacobianSource`] at training time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientKind {
    Analytic,
    LocalLinear,
    GlobalLinear,
}

impl GradientKind {
    pub fn label(&self) -> &'static str {
        match self {
            GradientKind::Analytic => "analytic",
            GradientKind::LocalLinear => "local-linear",
            GradientKind::GlobalLinear => "global-linear",
        }
    }
}

/// How modal coefficients are regressed on the parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientMethod<T: Real> {
    /// RBF interpolation over the full parameter space (baseline PODI).
    FullRbf(RbfKernel<T>),
    /// Gaussian process over the one-dimensional active-subspace coordinate.
    AsGpr(GradientKind),
}

impl<T: Real> CoefficientMethod<T> {
    pub fn label(&self) -> &'static str {
        match self {
            CoefficientMethod::FullRbf(_) => "full-rbf",
            CoefficientMethod::AsGpr(_) => "as-gpr",
        }
    }
}

/// Full training configuration, echoed into the model and its archive.
#[derive(Debug, Clone, PartialEq)]
pub struct RomConfig<T: Real> {
    pub truncation: Truncation<T>,
    pub method: CoefficientMethod<T>,
    pub centering: bool,
}

impl<T: Real> RomConfig<T> {
    /// Smallest training-set size the configuration can be fitted on, for a
    /// parameter dimension `p`.
    pub fn min_train_samples(&self, p: usize) -> usize {
        let method_min = match self.method {
            // The thin plate spline's linear tail needs unisolvent centers.
            CoefficientMethod::FullRbf(RbfKernel::ThinPlateSpline) => p + 1,
            CoefficientMethod::FullRbf(_) => 1,
            CoefficientMethod::AsGpr(_) => p + 2,
        };
        method_min.max(2)
    }
}

/// Supplies the Jacobian of the truth field with respect to the parameters,
/// in reference coordinates; enables analytic coefficient gradients.
pub trait JacobianSource<T: Real> {
    /// `d u / d mu_ref` at a reference-coordinate point, `N x p`.
    fn jacobian_ref(&self, mu_ref: DVectorView<'_, T>) -> DMatrix<T>;
}

/// Trained regressor of one modal coefficient.
#[derive(Debug, Clone)]
pub enum CoefficientRegressor<T: Real> {
    FullRbf(RbfInterpolant<T>),
    AsGpr(AsRidgeModel<T>),
}

impl<T: Real> CoefficientRegressor<T> {
    /// Coefficient prediction at a reference-coordinate parameter point.
    pub fn predict(&self, mu_ref: DVectorView<'_, T>) -> Result<T> {
        match self {
            CoefficientRegressor::FullRbf(model) => model.eval(mu_ref),
            CoefficientRegressor::AsGpr(model) => Ok(model.predict(mu_ref)),
        }
    }
}

/// Provenance recorded at training time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainingMeta {
    pub n_train: usize,
    pub seed: Option<u64>,
}

/// A trained PODI model.
#[derive(Debug, Clone)]
pub struct RomModel<T: Real> {
    space: ParameterSpace<T>,
    basis: PodBasis<T>,
    regressors: Vec<CoefficientRegressor<T>>,
    config: RomConfig<T>,
    meta: TrainingMeta,
}

/// Field prediction plus an extrapolation flag. Queries outside the
/// parameter bounds are evaluated anyway; the flag lets callers decide.
#[derive(Debug, Clone)]
pub struct Prediction<T: Real> {
    pub field: DVector<T>,
    pub out_of_bounds: bool,
}

/// Trains a ROM with a data-driven gradient policy. Configurations naming
/// analytic gradients must use [`train_with_jacobian`].
pub fn train<T: Real>(
    space: &ParameterSpace<T>,
    snapshots: &SnapshotSet<T>,
    config: &RomConfig<T>,
    seed: Option<u64>,
) -> Result<RomModel<T>> {
    if matches!(config.method, CoefficientMethod::AsGpr(GradientKind::Analytic)) {
        return Err(Error::invalid(
            "analytic gradients require a Jacobian source; use train_with_jacobian",
        ));
    }
    train_impl(space, snapshots, config, seed, None)
}

/// Trains a ROM, drawing analytic coefficient gradients from `jacobian`
/// when the configuration asks for them.
pub fn train_with_jacobian<T: Real>(
    space: &ParameterSpace<T>,
    snapshots: &SnapshotSet<T>,
    config: &RomConfig<T>,
    seed: Option<u64>,
    jacobian: &dyn JacobianSource<T>,
) -> Result<RomModel<T>> {
    train_impl(space, snapshots, config, seed, Some(jacobian))
}

fn train_impl<T: Real>(
    space: &ParameterSpace<T>,
    snapshots: &SnapshotSet<T>,
    config: &RomConfig<T>,
    seed: Option<u64>,
    jacobian: Option<&dyn JacobianSource<T>>,
) -> Result<RomModel<T>> {
    let n = snapshots.len();
    let p = space.dim();
    if snapshots.params().dim() != p {
        return Err(Error::invalid(format!(
            "sample dimension {} does not match space dimension {p}",
            snapshots.params().dim()
        )));
    }
    let min = config.min_train_samples(p);
    if n < min {
        return Err(Error::invalid(format!(
            "configuration needs at least {min} training snapshots (got {n})"
        )));
    }

    let mu_ref = match snapshots.params().coords() {
        Coordinates::Reference => snapshots.params().clone(),
        Coordinates::Physical => space.to_reference(snapshots.params())?,
    };

    let basis = if config.centering {
        let inv_n = T::one() / crate::scalar::real::<T>(n as f64);
        let mean = DVector::from_fn(snapshots.field_dim(), |i, _| {
            snapshots.fields().row(i).sum() * inv_n
        });
        let mut centered = snapshots.fields().clone();
        for j in 0..n {
            centered.column_mut(j).axpy(-T::one(), &mean, T::one());
        }
        let centered_set = SnapshotSet::new(centered, snapshots.params().clone())?;
        let (basis, _) = pod::compute_pod(&centered_set)?;
        basis.with_mean(mean)?
    } else {
        let (basis, _) = pod::compute_pod(snapshots)?;
        basis
    };
    let basis = basis.truncate(config.truncation)?;
    let coefficients = basis.project(snapshots)?;

    // Per-sample Jacobians are shared by every mode, so evaluate them once.
    let jacobians: Option<Vec<DMatrix<T>>> = match (&config.method, jacobian) {
        (CoefficientMethod::AsGpr(GradientKind::Analytic), Some(src)) => {
            Some((0..n).map(|j| src.jacobian_ref(mu_ref.column(j))).collect())
        }
        (CoefficientMethod::AsGpr(GradientKind::Analytic), None) => {
            return Err(Error::invalid(
                "analytic gradients require a Jacobian source",
            ));
        }
        _ => None,
    };

    let mut regressors = Vec::with_capacity(basis.rank());
    for mode in 0..basis.rank() {
        let values = coefficients.mode_values(mode);
        let regressor = match &config.method {
            CoefficientMethod::FullRbf(kernel) => rbf::fit(mu_ref.matrix(), &values, *kernel)
                .map(CoefficientRegressor::FullRbf)
                .map_err(|e| e.in_mode(mode))?,
            CoefficientMethod::AsGpr(kind) => {
                let ridge = match kind {
                    GradientKind::Analytic => {
                        let jacs = jacobians.as_ref().expect("prepared above");
                        let phi = basis.modes().column(mode).into_owned();
                        let grads = DMatrix::from_fn(p, n, |i, j| {
                            jacs[j].column(i).dot(&phi)
                        });
                        let grads =
                            GradientSamples::new(grads, GradientProvenance::Analytic)
                                .map_err(|e| e.in_mode(mode))?;
                        active_subspace::fit_as_ridge_with_gradients(&mu_ref, &values, &grads)
                            .map_err(|e| e.in_mode(mode))?
                    }
                    GradientKind::LocalLinear => active_subspace::fit_as_ridge(
                        &mu_ref,
                        &values,
                        GradientStrategy::LocalLinear,
                    )
                    .map_err(|e| e.in_mode(mode))?,
                    GradientKind::GlobalLinear => active_subspace::fit_as_ridge(
                        &mu_ref,
                        &values,
                        GradientStrategy::GlobalLinear,
                    )
                    .map_err(|e| e.in_mode(mode))?,
                };
                CoefficientRegressor::AsGpr(ridge)
            }
        };
        regressors.push(regressor);
    }

    RomModel::from_parts(
        space.clone(),
        basis,
        regressors,
        config.clone(),
        TrainingMeta { n_train: n, seed },
    )
}

impl<T: Real> RomModel<T> {
    /// Assembles a model from parts (used by training and the archive
    /// loader). The regressor count must match the basis rank.
    pub fn from_parts(
        space: ParameterSpace<T>,
        basis: PodBasis<T>,
        regressors: Vec<CoefficientRegressor<T>>,
        config: RomConfig<T>,
        meta: TrainingMeta,
    ) -> Result<Self> {
        if regressors.len() != basis.rank() {
            return Err(Error::invalid(format!(
                "regressor count {} does not match basis rank {}",
                regressors.len(),
                basis.rank()
            )));
        }
        if basis.field_dim() == 0 {
            return Err(Error::invalid("basis has no field dimensions"));
        }
        Ok(Self {
            space,
            basis,
            regressors,
            config,
            meta,
        })
    }

    pub fn space(&self) -> &ParameterSpace<T> {
        &self.space
    }

    pub fn basis(&self) -> &PodBasis<T> {
        &self.basis
    }

    pub fn regressors(&self) -> &[CoefficientRegressor<T>] {
        &self.regressors
    }

    pub fn config(&self) -> &RomConfig<T> {
        &self.config
    }

    pub fn meta(&self) -> TrainingMeta {
        self.meta
    }

    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    pub fn field_dim(&self) -> usize {
        self.basis.field_dim()
    }

    /// Predicted coefficients at a physical parameter point.
    pub fn predict_coefficients(&self, mu: DVectorView<'_, T>) -> Result<DVector<T>> {
        if mu.len() != self.space.dim() {
            return Err(Error::invalid(format!(
                "query dimension {} does not match space dimension {}",
                mu.len(),
                self.space.dim()
            )));
        }
        let mu_ref = self.space.point_to_reference(mu);
        let mut coeffs = DVector::zeros(self.rank());
        for (i, regressor) in self.regressors.iter().enumerate() {
            coeffs[i] = regressor
                .predict(mu_ref.column(0))
                .map_err(|e| e.in_mode(i))?;
        }
        Ok(coeffs)
    }

    /// Full-field prediction at a physical parameter point. Out-of-bounds
    /// queries extrapolate and set the flag.
    pub fn predict(&self, mu: DVectorView<'_, T>) -> Result<Prediction<T>> {
        let out_of_bounds = mu.len() == self.space.dim() && !self.space.contains(mu);
        let coeffs = self.predict_coefficients(mu)?;
        let field = self.basis.reconstruct_one(coeffs.column(0))?;
        Ok(Prediction {
            field,
            out_of_bounds,
        })
    }
}

/// Relative reconstruction error `||exact - approx||_2 / ||exact||_2`.
pub fn relative_error<T: Real>(exact: &DVector<T>, approx: &DVector<T>) -> Result<T> {
    if exact.len() != approx.len() {
        return Err(Error::invalid(format!(
            "field lengths differ: {} vs {}",
            exact.len(),
            approx.len()
        )));
    }
    let norm = exact.norm();
    if norm <= T::zero() {
        return Err(Error::Undefined(
            "relative error undefined for a zero exact field".into(),
        ));
    }
    Ok((exact - approx).norm() / norm)
}
