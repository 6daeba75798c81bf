//! Snapshot matrix handling, thin SVD, truncation-rank selection,
//! modal-coefficient projection and field reconstruction.

use nalgebra::{DMatrix, DVector, DVectorView};

use crate::error::{Error, Result};
use crate::param_space::ParameterSamples;
use crate::scalar::Real;

/// Full-order solution fields arranged as columns of an `N x Ns` matrix,
/// paired with the parameter sample that produced each column.
#[derive(Debug, Clone)]
pub struct SnapshotSet<T: Real> {
    fields: DMatrix<T>,
    params: ParameterSamples<T>,
}

impl<T: Real> SnapshotSet<T> {
    pub fn new(fields: DMatrix<T>, params: ParameterSamples<T>) -> Result<Self> {
        if fields.ncols() != params.len() {
            return Err(Error::invalid(format!(
                "snapshot count {} does not match sample count {}",
                fields.ncols(),
                params.len()
            )));
        }
        if fields.nrows() == 0 || fields.ncols() == 0 {
            return Err(Error::invalid("snapshot matrix must be non-empty"));
        }
        if fields.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("snapshot matrix contains non-finite entries"));
        }
        Ok(Self { fields, params })
    }

    /// Field degrees of freedom `N`.
    pub fn field_dim(&self) -> usize {
        self.fields.nrows()
    }

    /// Snapshot count `Ns`.
    pub fn len(&self) -> usize {
        self.fields.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.ncols() == 0
    }

    pub fn fields(&self) -> &DMatrix<T> {
        &self.fields
    }

    pub fn params(&self) -> &ParameterSamples<T> {
        &self.params
    }

    pub fn snapshot(&self, j: usize) -> DVectorView<'_, T> {
        self.fields.column(j)
    }

    /// Keeps the selected snapshots (and their parameters), in the given
    /// order. Used by the cross-validation harness to form folds.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            fields: self.fields.select_columns(indices),
            params: self.params.select(indices),
        }
    }
}

/// Truncation criterion for the POD basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation<T: Real> {
    /// Keep exactly the first `k` modes.
    FixedRank(usize),
    /// Keep the smallest `k` with cumulative squared singular-value energy
    /// at least this fraction of the total.
    EnergyFraction(T),
}

/// Truncated left-singular basis of a snapshot matrix.
///
/// `singular_values` always holds the full spectrum, padded with zeros to
/// length `Ns`, so truncation-error formulas remain available after the
/// basis itself has been truncated.
#[derive(Debug, Clone)]
pub struct PodBasis<T: Real> {
    modes: DMatrix<T>,
    singular_values: DVector<T>,
    mean: Option<DVector<T>>,
}

/// Modal coefficients `C = U_k^T S`, one column per snapshot.
#[derive(Debug, Clone)]
pub struct ModalCoefficients<T: Real> {
    data: DMatrix<T>,
}

impl<T: Real> ModalCoefficients<T> {
    pub fn matrix(&self) -> &DMatrix<T> {
        &self.data
    }

    /// Coefficient trajectory of mode `i` across all snapshots.
    pub fn mode_values(&self, i: usize) -> DVector<T> {
        self.data.row(i).transpose()
    }

    pub fn rank(&self) -> usize {
        self.data.nrows()
    }

    pub fn len(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.data.ncols() == 0
    }
}

/// Thin SVD of the snapshot matrix: returns the full-rank basis together
/// with the right factors `V` (`Ns x r`, orthonormal columns), so that
/// `S = U * diag(sigma) * V^T` up to round-off.
///
/// Mode signs are fixed so the largest-magnitude entry of every mode is
/// positive; `V` is flipped consistently.
pub fn compute_pod<T: Real>(snapshots: &SnapshotSet<T>) -> Result<(PodBasis<T>, DMatrix<T>)> {
    let s = snapshots.fields();
    // Tall matrices go through a thin QR first; the SVD then runs on the
    // small triangular factor at full backward stability.
    let (raw_u, sigma, raw_v) = if s.nrows() > 2 * s.ncols() {
        let qr = s.clone().qr();
        let q = qr.q();
        let svd = qr
            .r()
            .try_svd(true, true, T::default_epsilon(), 0)
            .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
        let u = q * svd.u.expect("u requested");
        (u, svd.singular_values, svd.v_t.expect("v_t requested").transpose())
    } else {
        let svd = s
            .clone()
            .try_svd(true, true, T::default_epsilon(), 0)
            .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
        (
            svd.u.expect("u requested"),
            svd.singular_values,
            svd.v_t.expect("v_t requested").transpose(),
        )
    };

    // Descending order; nalgebra already sorts, kept explicit for stability
    // across versions and code paths.
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].partial_cmp(&sigma[a]).expect("finite singular values"));
    let mut u = DMatrix::from_fn(raw_u.nrows(), raw_u.ncols(), |i, j| raw_u[(i, order[j])]);
    let mut v = DMatrix::from_fn(raw_v.nrows(), raw_v.ncols(), |i, j| raw_v[(i, order[j])]);
    debug_assert_eq!(u.ncols(), s.ncols().min(s.nrows()));

    let mut values = DVector::zeros(snapshots.len());
    for (j, &src) in order.iter().enumerate() {
        values[j] = sigma[src].max(T::zero());
    }

    for j in 0..u.ncols() {
        let mut best = T::zero();
        let mut flip = false;
        for i in 0..u.nrows() {
            let a = u[(i, j)].abs();
            if a > best {
                best = a;
                flip = u[(i, j)] < T::zero();
            }
        }
        if flip {
            u.column_mut(j).neg_mut();
            v.column_mut(j).neg_mut();
        }
    }

    Ok((
        PodBasis {
            modes: u,
            singular_values: values,
            mean: None,
        },
        v,
    ))
}

impl<T: Real> PodBasis<T> {
    /// Builds a basis from parts; used by the model archive loader.
    pub fn from_parts(
        modes: DMatrix<T>,
        singular_values: DVector<T>,
        mean: Option<DVector<T>>,
    ) -> Result<Self> {
        if modes.ncols() == 0 || modes.ncols() > singular_values.len() {
            return Err(Error::invalid("mode count must be in [1, Ns]"));
        }
        let tol = crate::scalar::real::<T>(1e-10)
            .max(T::default_epsilon() * crate::scalar::real::<T>(100.0));
        if orthonormality_defect(&modes) > tol {
            return Err(Error::invalid("modes are not orthonormal"));
        }
        for w in singular_values.as_slice().windows(2) {
            if w[1] > w[0] {
                return Err(Error::invalid("singular values must be non-increasing"));
            }
        }
        if singular_values.iter().any(|&x| x < T::zero()) {
            return Err(Error::invalid("singular values must be non-negative"));
        }
        if let Some(m) = &mean {
            if m.len() != modes.nrows() {
                return Err(Error::invalid("mean length must match field dimension"));
            }
        }
        Ok(Self {
            modes,
            singular_values,
            mean,
        })
    }

    /// Retained modes, `N x k` with orthonormal columns.
    pub fn modes(&self) -> &DMatrix<T> {
        &self.modes
    }

    /// Full singular-value spectrum (length `Ns`, descending).
    pub fn singular_values(&self) -> &DVector<T> {
        &self.singular_values
    }

    /// Snapshot mean removed before projection, if centering was requested.
    pub fn mean(&self) -> Option<&DVector<T>> {
        self.mean.as_ref()
    }

    pub fn rank(&self) -> usize {
        self.modes.ncols()
    }

    pub fn field_dim(&self) -> usize {
        self.modes.nrows()
    }

    /// Attaches a snapshot mean; projection subtracts it and reconstruction
    /// adds it back.
    pub fn with_mean(mut self, mean: DVector<T>) -> Result<Self> {
        if mean.len() != self.field_dim() {
            return Err(Error::invalid("mean length must match field dimension"));
        }
        self.mean = Some(mean);
        Ok(self)
    }

    /// Truncates to the first `k` modes per the criterion. The singular-value
    /// spectrum is kept in full.
    pub fn truncate(&self, criterion: Truncation<T>) -> Result<Self> {
        let available = self.rank();
        let k = match criterion {
            Truncation::FixedRank(k) => {
                if k == 0 || k > available {
                    return Err(Error::invalid(format!(
                        "rank {k} out of range [1, {available}]"
                    )));
                }
                k
            }
            Truncation::EnergyFraction(tau) => {
                if !(tau > T::zero() && tau <= T::one()) {
                    return Err(Error::invalid("energy fraction must lie in (0, 1]"));
                }
                let total: T = self
                    .singular_values
                    .iter()
                    .fold(T::zero(), |acc, &x| acc + x * x);
                let target = tau * total;
                let mut cum = T::zero();
                let mut k = available;
                for i in 0..available {
                    let x = self.singular_values[i];
                    cum += x * x;
                    if cum >= target {
                        k = i + 1;
                        break;
                    }
                }
                k
            }
        };
        Ok(Self {
            modes: self.modes.columns(0, k).into_owned(),
            singular_values: self.singular_values.clone(),
            mean: self.mean.clone(),
        })
    }

    /// Projects snapshots onto the basis: `C = U_k^T (S - mean)`.
    pub fn project(&self, snapshots: &SnapshotSet<T>) -> Result<ModalCoefficients<T>> {
        self.project_fields(snapshots.fields())
    }

    /// [`Self::project`] on a bare field matrix.
    pub fn project_fields(&self, fields: &DMatrix<T>) -> Result<ModalCoefficients<T>> {
        if fields.nrows() != self.field_dim() {
            return Err(Error::invalid(format!(
                "field dimension {} does not match basis dimension {}",
                fields.nrows(),
                self.field_dim()
            )));
        }
        let data = match &self.mean {
            None => self.modes.transpose() * fields,
            Some(mean) => {
                let mut centered = fields.clone();
                for j in 0..centered.ncols() {
                    centered.column_mut(j).axpy(-T::one(), mean, T::one());
                }
                self.modes.transpose() * centered
            }
        };
        Ok(ModalCoefficients { data })
    }

    /// Linear combination of the modes: `U_k C (+ mean)`, one field per
    /// coefficient column.
    pub fn reconstruct(&self, coefficients: &DMatrix<T>) -> Result<DMatrix<T>> {
        if coefficients.nrows() != self.rank() {
            return Err(Error::invalid(format!(
                "coefficient rows {} do not match basis rank {}",
                coefficients.nrows(),
                self.rank()
            )));
        }
        let mut fields = &self.modes * coefficients;
        if let Some(mean) = &self.mean {
            for j in 0..fields.ncols() {
                fields.column_mut(j).axpy(T::one(), mean, T::one());
            }
        }
        Ok(fields)
    }

    /// Single-field variant of [`Self::reconstruct`].
    pub fn reconstruct_one(&self, coefficients: DVectorView<'_, T>) -> Result<DVector<T>> {
        let m = DMatrix::from_fn(coefficients.len(), 1, |i, _| coefficients[i]);
        Ok(self.reconstruct(&m)?.column(0).into_owned())
    }

    /// Normalized spectrum `sigma_i / sigma_1` for decay plots.
    pub fn singular_value_decay(&self) -> Result<DVector<T>> {
        let first = self.singular_values[0];
        if first <= T::zero() {
            return Err(Error::Undefined(
                "decay undefined for an all-zero spectrum".into(),
            ));
        }
        Ok(self.singular_values.map(|x| x / first))
    }
}

/// Truncation errors after keeping `k` modes, from the singular values alone:
/// the spectral-norm error `sigma_{k+1}` and the Frobenius-norm error
/// `sqrt(sum_{i>k} sigma_i^2)`.
pub fn truncation_error<T: Real>(singular_values: &DVector<T>, k: usize) -> Result<(T, T)> {
    let n = singular_values.len();
    if k > n {
        return Err(Error::invalid(format!("rank {k} exceeds spectrum length {n}")));
    }
    let spectral = if k < n { singular_values[k] } else { T::zero() };
    let tail: T = singular_values
        .iter()
        .skip(k)
        .fold(T::zero(), |acc, &x| acc + x * x);
    Ok((spectral, tail.sqrt()))
}

/// Largest absolute deviation of `U^T U` from the identity; diagnostic used
/// in tests and validation.
pub fn orthonormality_defect<T: Real>(modes: &DMatrix<T>) -> T {
    let gram = modes.transpose() * modes;
    let mut worst = T::zero();
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { T::one() } else { T::zero() };
            worst = worst.max((gram[(i, j)] - target).abs());
        }
    }
    worst
}
