//! Active subspaces for scalar functions of the parameters: gradient-sample
//! covariance, eigendecomposition, spectral-gap dimension selection, and the
//! one-dimensional ridge regressor `g(W1^T mu)` used per modal coefficient.
//!
//! Everything here operates in reference coordinates (`[-1, 1]^p`); callers
//! rescale first.

use nalgebra::{DMatrix, DMatrixView, DVector, DVectorView};

use crate::error::{Error, Result};
use crate::param_space::{Coordinates, ParameterSamples};
use crate::regression::gpr::{self, GpModel1d, HyperSelection};
use crate::scalar::{real, Real};

/// How a gradient sample set was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientProvenance {
    /// Supplied by a user closure (exact for synthetic benchmarks).
    Analytic,
    /// Per-sample linear fit on the nearest neighbors; `fallbacks` counts
    /// samples whose local system was rank-deficient and fell back to the
    /// global slope.
    LocalLinear { neighbors: usize, fallbacks: usize },
    /// One global least-squares slope replicated at every sample.
    GlobalLinear,
}

/// Strategy for obtaining gradients of a scalar function from data.
pub enum GradientStrategy<'a, T: Real> {
    /// Exact gradient at a reference-coordinate point.
    Analytic(&'a dyn Fn(DVectorView<'_, T>) -> DVector<T>),
    LocalLinear,
    GlobalLinear,
}

/// Gradient samples, one column per parameter sample, in reference
/// coordinates.
#[derive(Debug, Clone)]
pub struct GradientSamples<T: Real> {
    matrix: DMatrix<T>,
    provenance: GradientProvenance,
}

impl<T: Real> GradientSamples<T> {
    pub fn new(matrix: DMatrix<T>, provenance: GradientProvenance) -> Result<Self> {
        if matrix.ncols() == 0 {
            return Err(Error::invalid("at least one gradient sample required"));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("gradient samples contain non-finite entries"));
        }
        Ok(Self { matrix, provenance })
    }

    /// `p x n` gradient matrix.
    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn provenance(&self) -> GradientProvenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.ncols() == 0
    }
}

fn require_reference<T: Real>(samples: &ParameterSamples<T>) -> Result<()> {
    if samples.coords() != Coordinates::Reference {
        return Err(Error::invalid(
            "active-subspace computations require reference coordinates",
        ));
    }
    Ok(())
}

/// Estimates `grad f` at every sample.
///
/// `LocalLinear` fits a linear model on the `min(n, 2(p+1))` nearest
/// neighbors of each sample; a rank-deficient local system falls back to the
/// global slope for that sample. `GlobalLinear` replicates the single global
/// least-squares slope.
pub fn estimate_gradients<T: Real>(
    samples: &ParameterSamples<T>,
    values: &DVector<T>,
    strategy: GradientStrategy<'_, T>,
) -> Result<GradientSamples<T>> {
    require_reference(samples)?;
    let p = samples.dim();
    let n = samples.len();
    if values.len() != n {
        return Err(Error::invalid(format!(
            "value count {} does not match sample count {n}",
            values.len()
        )));
    }
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("non-finite function values"));
    }

    match strategy {
        GradientStrategy::Analytic(grad) => {
            let mut g = DMatrix::zeros(p, n);
            for j in 0..n {
                let col = grad(samples.column(j));
                if col.len() != p {
                    return Err(Error::invalid(format!(
                        "analytic gradient returned length {} (expected {p})",
                        col.len()
                    )));
                }
                g.set_column(j, &col);
            }
            GradientSamples::new(g, GradientProvenance::Analytic)
        }
        GradientStrategy::GlobalLinear => {
            let slope = global_slope(samples, values)?;
            let mut g = DMatrix::zeros(p, n);
            for j in 0..n {
                g.set_column(j, &slope);
            }
            GradientSamples::new(g, GradientProvenance::GlobalLinear)
        }
        GradientStrategy::LocalLinear => {
            if n < p + 1 {
                return Err(Error::invalid(format!(
                    "local-linear gradients need at least p + 1 = {} samples (got {n})",
                    p + 1
                )));
            }
            let neighbors = n.min(2 * (p + 1));
            let global = global_slope(samples, values)?;
            let mut fallbacks = 0usize;
            let mut g = DMatrix::zeros(p, n);
            for j in 0..n {
                let idx = nearest_indices(samples, j, neighbors);
                match linear_slope(samples, values, &idx) {
                    Some(slope) => g.set_column(j, &slope),
                    None => {
                        g.set_column(j, &global);
                        fallbacks += 1;
                    }
                }
            }
            GradientSamples::new(
                g,
                GradientProvenance::LocalLinear {
                    neighbors,
                    fallbacks,
                },
            )
        }
    }
}

fn nearest_indices<T: Real>(samples: &ParameterSamples<T>, j: usize, m: usize) -> Vec<usize> {
    let n = samples.len();
    let target = samples.column(j);
    let mut dist: Vec<(T, usize)> = (0..n)
        .map(|i| ((samples.column(i) - target).norm_squared(), i))
        .collect();
    dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    dist.into_iter().take(m).map(|(_, i)| i).collect()
}

fn global_slope<T: Real>(
    samples: &ParameterSamples<T>,
    values: &DVector<T>,
) -> Result<DVector<T>> {
    let p = samples.dim();
    let n = samples.len();
    if n < p + 1 {
        return Err(Error::invalid(format!(
            "global-linear gradients need at least p + 1 = {} samples (got {n})",
            p + 1
        )));
    }
    let idx: Vec<usize> = (0..n).collect();
    linear_slope(samples, values, &idx).ok_or_else(|| {
        Error::Numerical("global linear system is rank-deficient".into())
    })
}

/// Least-squares slope of an affine fit on the selected samples; `None`
/// if the design is rank-deficient.
fn linear_slope<T: Real>(
    samples: &ParameterSamples<T>,
    values: &DVector<T>,
    idx: &[usize],
) -> Option<DVector<T>> {
    let p = samples.dim();
    let m = idx.len();
    if m < p + 1 {
        return None;
    }
    let design = DMatrix::from_fn(m, p + 1, |r, c| {
        if c == 0 {
            T::one()
        } else {
            samples.matrix()[(c - 1, idx[r])]
        }
    });
    let rhs = DVector::from_fn(m, |r, _| values[idx[r]]);
    let svd = design.svd(true, true);
    let smax = svd.singular_values.max();
    if smax <= T::zero() || svd.singular_values.min() <= smax * real::<T>(1e-10) {
        return None;
    }
    let sol = svd.solve(&rhs, T::zero()).ok()?;
    Some(sol.rows(1, p).into_owned())
}

/// Uncentered gradient covariance `(1/n) G G^T`, symmetrized.
pub fn covariance<T: Real>(grads: &GradientSamples<T>) -> DMatrix<T> {
    let g = grads.matrix();
    let n = real::<T>(g.ncols() as f64);
    let mut sigma = g * g.transpose() / n;
    let st = sigma.transpose();
    sigma += st;
    sigma *= real::<T>(0.5);
    sigma
}

/// Eigendecomposition of a symmetric PSD matrix: eigenvalues descending and
/// clamped to be non-negative, eigenvectors sign-fixed so each column's
/// largest-magnitude entry is positive.
pub fn eigendecompose<T: Real>(matrix: &DMatrix<T>) -> Result<(DVector<T>, DMatrix<T>)> {
    if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
        return Err(Error::invalid("eigendecomposition requires a square matrix"));
    }
    if matrix.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("matrix contains non-finite entries"));
    }
    let p = matrix.nrows();
    let half = real::<T>(0.5);
    let sym = DMatrix::from_fn(p, p, |i, j| (matrix[(i, j)] + matrix[(j, i)]) * half);
    let eig = sym.symmetric_eigen();

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
    });
    let values = DVector::from_fn(p, |i, _| eig.eigenvalues[order[i]].max(T::zero()));
    let mut vectors = DMatrix::from_fn(p, p, |i, j| eig.eigenvectors[(i, order[j])]);
    for j in 0..p {
        let mut best = T::zero();
        let mut flip = false;
        for i in 0..p {
            let a = vectors[(i, j)].abs();
            if a > best {
                best = a;
                flip = vectors[(i, j)] < T::zero();
            }
        }
        if flip {
            vectors.column_mut(j).neg_mut();
        }
    }
    Ok((values, vectors))
}

/// Spectral-gap choice of the active dimension: the `M` in `[1, p-1]`
/// maximizing `log10(lambda_M + d) - log10(lambda_{M+1} + d)` with
/// `d = 1e-16 lambda_1`; ties break toward smaller `M`.
pub fn select_dimension<T: Real>(eigenvalues: &DVector<T>) -> Result<usize> {
    let p = eigenvalues.len();
    if p < 2 {
        return Err(Error::invalid("dimension selection requires p >= 2"));
    }
    if eigenvalues[0] <= T::zero() {
        return Err(Error::NoActiveSubspace(
            "all eigenvalues are zero; the function has no preferred directions".into(),
        ));
    }
    let delta = real::<T>(1e-16) * eigenvalues[0];
    let ten = real::<T>(10.0);
    let gap = |i: usize| {
        ((eigenvalues[i] + delta).ln() - (eigenvalues[i + 1] + delta).ln()) / ten.ln()
    };
    let mut best = 0usize;
    for i in 1..p - 1 {
        if gap(i) > gap(best) {
            best = i;
        }
    }
    Ok(best + 1)
}

/// Square roots of the eigenvalue mass on each side of the split, the
/// computable parts of the response-surface RMSE upper bound.
pub fn eigenvalue_tail_diagnostic<T: Real>(
    eigenvalues: &DVector<T>,
    active_dim: usize,
) -> Result<(T, T)> {
    let p = eigenvalues.len();
    if active_dim == 0 || active_dim > p {
        return Err(Error::invalid(format!(
            "active dimension {active_dim} out of range [1, {p}]"
        )));
    }
    let active: T = eigenvalues
        .iter()
        .take(active_dim)
        .fold(T::zero(), |a, &x| a + x);
    let inactive: T = eigenvalues
        .iter()
        .skip(active_dim)
        .fold(T::zero(), |a, &x| a + x);
    Ok((active.sqrt(), inactive.sqrt()))
}

/// Eigenpairs of the gradient covariance split into active and inactive
/// blocks at dimension `M`.
#[derive(Debug, Clone)]
pub struct ActiveSubspace<T: Real> {
    eigenvalues: DVector<T>,
    eigenvectors: DMatrix<T>,
    active_dim: usize,
}

impl<T: Real> ActiveSubspace<T> {
    pub fn new(
        eigenvalues: DVector<T>,
        eigenvectors: DMatrix<T>,
        active_dim: usize,
    ) -> Result<Self> {
        let p = eigenvalues.len();
        if eigenvectors.nrows() != p || eigenvectors.ncols() != p {
            return Err(Error::invalid("eigenvector matrix must be p x p"));
        }
        let max_active = if p == 1 { 1 } else { p - 1 };
        if active_dim == 0 || active_dim > max_active {
            return Err(Error::invalid(format!(
                "active dimension {active_dim} out of range [1, {max_active}]"
            )));
        }
        for w in eigenvalues.as_slice().windows(2) {
            if w[1] > w[0] {
                return Err(Error::invalid("eigenvalues must be non-increasing"));
            }
        }
        if eigenvalues.iter().any(|&x| x < T::zero()) {
            return Err(Error::invalid("eigenvalues must be non-negative"));
        }
        let gram = eigenvectors.transpose() * &eigenvectors;
        let tol = real::<T>(1e-10).max(T::default_epsilon() * real::<T>(100.0));
        for i in 0..p {
            for j in 0..p {
                let target = if i == j { T::one() } else { T::zero() };
                if (gram[(i, j)] - target).abs() > tol {
                    return Err(Error::invalid("eigenvector matrix is not orthogonal"));
                }
            }
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
            active_dim,
        })
    }

    /// Builds the subspace from a gradient covariance matrix. `active_dim`
    /// of `None` selects the dimension by spectral gap.
    pub fn from_covariance(sigma: &DMatrix<T>, active_dim: Option<usize>) -> Result<Self> {
        let (values, vectors) = eigendecompose(sigma)?;
        if values[0] <= T::zero() {
            return Err(Error::NoActiveSubspace(format!(
                "gradient covariance is numerically zero (lambda_1 = {:.3e})",
                crate::scalar::to_f64(values[0])
            )));
        }
        let m = match active_dim {
            Some(m) => m,
            None => select_dimension(&values)?,
        };
        Self::new(values, vectors, m)
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn active_dim(&self) -> usize {
        self.active_dim
    }

    pub fn eigenvalues(&self) -> &DVector<T> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<T> {
        &self.eigenvectors
    }

    /// Active block `W1` (`p x M`).
    pub fn w1(&self) -> DMatrixView<'_, T> {
        self.eigenvectors.columns(0, self.active_dim)
    }

    /// Inactive block `W2` (`p x (p - M)`).
    pub fn w2(&self) -> DMatrixView<'_, T> {
        self.eigenvectors
            .columns(self.active_dim, self.dim() - self.active_dim)
    }

    /// Active variable `W1^T mu`.
    pub fn project_active(&self, mu_ref: DVectorView<'_, T>) -> DVector<T> {
        self.w1().tr_mul(&mu_ref)
    }

    /// Inactive variable `W2^T mu`.
    pub fn project_inactive(&self, mu_ref: DVectorView<'_, T>) -> DVector<T> {
        self.w2().tr_mul(&mu_ref)
    }

    /// First active coordinate, the abscissa of sufficient summary plots.
    pub fn active_coordinate(&self, mu_ref: DVectorView<'_, T>) -> T {
        self.eigenvectors.column(0).dot(&mu_ref)
    }
}

/// One-dimensional ridge surrogate: a GP response over the first active
/// coordinate of one scalar quantity.
#[derive(Debug, Clone)]
pub struct AsRidgeModel<T: Real> {
    subspace: ActiveSubspace<T>,
    response: GpModel1d<T>,
    provenance: GradientProvenance,
}

impl<T: Real> AsRidgeModel<T> {
    pub fn from_parts(
        subspace: ActiveSubspace<T>,
        response: GpModel1d<T>,
        provenance: GradientProvenance,
    ) -> Result<Self> {
        if subspace.active_dim() != 1 {
            return Err(Error::invalid("ridge model requires an active dimension of 1"));
        }
        Ok(Self {
            subspace,
            response,
            provenance,
        })
    }

    pub fn subspace(&self) -> &ActiveSubspace<T> {
        &self.subspace
    }

    pub fn response(&self) -> &GpModel1d<T> {
        &self.response
    }

    pub fn provenance(&self) -> GradientProvenance {
        self.provenance
    }

    /// Predicts the scalar at a reference-coordinate parameter point.
    pub fn predict(&self, mu_ref: DVectorView<'_, T>) -> T {
        self.response
            .predict_mean(self.subspace.active_coordinate(mu_ref))
    }
}

/// Fits the ridge surrogate from scalar samples, estimating gradients with
/// the given strategy. The active dimension is forced to 1; use
/// [`select_dimension`] separately for diagnostics.
pub fn fit_as_ridge<T: Real>(
    samples: &ParameterSamples<T>,
    values: &DVector<T>,
    strategy: GradientStrategy<'_, T>,
) -> Result<AsRidgeModel<T>> {
    let grads = estimate_gradients(samples, values, strategy)?;
    fit_as_ridge_with_gradients(samples, values, &grads)
}

/// [`fit_as_ridge`] with pre-computed gradient samples.
///
/// A constant quantity carries no gradient information; its covariance is
/// zero and no direction is preferred. That case degrades to a trivial
/// subspace (first coordinate axis) so constant modal coefficients remain
/// representable. A zero covariance with non-constant values is an error.
pub fn fit_as_ridge_with_gradients<T: Real>(
    samples: &ParameterSamples<T>,
    values: &DVector<T>,
    grads: &GradientSamples<T>,
) -> Result<AsRidgeModel<T>> {
    require_reference(samples)?;
    let p = samples.dim();
    let n = samples.len();
    if n < p + 2 {
        return Err(Error::invalid(format!(
            "ridge fit needs at least p + 2 = {} samples (got {n})",
            p + 2
        )));
    }
    let sigma = covariance(grads);
    let (eigenvalues, eigenvectors) = eigendecompose(&sigma)?;
    let subspace = if eigenvalues[0] > T::zero() {
        ActiveSubspace::new(eigenvalues, eigenvectors, 1)?
    } else {
        let scale = values
            .iter()
            .fold(T::one(), |a, &x| a.max(x.abs()));
        let spread = values.max() - values.min();
        if spread > real::<T>(1e-12) * scale {
            return Err(Error::NoActiveSubspace(format!(
                "gradient covariance is zero but values vary (spread {:.3e})",
                crate::scalar::to_f64(spread)
            )));
        }
        ActiveSubspace::new(DVector::zeros(p), DMatrix::identity(p, p), 1)?
    };
    let coords = DVector::from_fn(n, |j, _| subspace.active_coordinate(samples.column(j)));
    let response = gpr::fit(&coords, values, HyperSelection::Optimize)?;
    AsRidgeModel::from_parts(subspace, response, grads.provenance())
}

/// Sufficient-summary data: `(W1^T mu_i, f_i)` pairs sorted by the active
/// coordinate.
pub fn sufficient_summary<T: Real>(
    samples: &ParameterSamples<T>,
    values: &DVector<T>,
    subspace: &ActiveSubspace<T>,
) -> Result<Vec<(T, T)>> {
    require_reference(samples)?;
    let n = samples.len();
    if values.len() != n {
        return Err(Error::invalid("value count does not match sample count"));
    }
    let mut table: Vec<(T, T)> = (0..n)
        .map(|j| (subspace.active_coordinate(samples.column(j)), values[j]))
        .collect();
    table.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite coordinates"));
    Ok(table)
}

/// Single-valuedness score of a sufficient summary: a GP is fitted on the
/// even-indexed points (by sorted coordinate) and scored by R^2 on the odd
/// ones. Near 1 when the data fall on one curve in the active coordinate;
/// materially lower when a second direction carries variance.
pub fn ridge_r2<T: Real>(table: &[(T, T)]) -> Result<T> {
    if table.len() < 4 {
        return Err(Error::invalid("ridge diagnostic needs at least 4 points"));
    }
    let (fit_pts, test_pts): (Vec<_>, Vec<_>) =
        table.iter().enumerate().partition(|(i, _)| i % 2 == 0);
    let fx = DVector::from_iterator(fit_pts.len(), fit_pts.iter().map(|(_, p)| p.0));
    let fy = DVector::from_iterator(fit_pts.len(), fit_pts.iter().map(|(_, p)| p.1));
    let model = gpr::fit(&fx, &fy, HyperSelection::Optimize)?;

    let m = real::<T>(test_pts.len() as f64);
    let mean = test_pts.iter().fold(T::zero(), |a, (_, p)| a + p.1) / m;
    let mut ss_res = T::zero();
    let mut ss_tot = T::zero();
    for (_, p) in &test_pts {
        let r = p.1 - model.predict_mean(p.0);
        ss_res += r * r;
        let d = p.1 - mean;
        ss_tot += d * d;
    }
    if ss_tot <= T::zero() {
        return Err(Error::Undefined(
            "ridge diagnostic undefined for constant values".into(),
        ));
    }
    Ok(T::one() - ss_res / ss_tot)
}
