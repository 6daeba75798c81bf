//! Radial basis function interpolation on scattered multivariate data.
//!
//! The default kernel is the thin plate spline with an appended linear
//! polynomial tail: it is parameter-free and reproduces affine functions
//! exactly. The Gaussian and multiquadric kernels carry a shape parameter
//! and are available behind the same interface.

use nalgebra::{DMatrix, DVector, DVectorView};

use crate::error::{Error, Result};
use crate::scalar::{real, to_f64, Real};

/// Radial kernel choices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RbfKernel<T: Real> {
    /// `phi(r) = r^2 ln r`, with a linear polynomial tail.
    ThinPlateSpline,
    /// `phi(r) = exp(-(shape * r)^2)`, no tail.
    Gaussian { shape: T },
    /// `phi(r) = sqrt(1 + (shape * r)^2)`, with a constant tail.
    Multiquadric { shape: T },
}

impl<T: Real> RbfKernel<T> {
    fn eval(&self, r: T) -> T {
        match self {
            RbfKernel::ThinPlateSpline => {
                if r <= T::zero() {
                    T::zero()
                } else {
                    r * r * r.ln()
                }
            }
            RbfKernel::Gaussian { shape } => {
                let s = *shape * r;
                (-(s * s)).exp()
            }
            RbfKernel::Multiquadric { shape } => {
                let s = *shape * r;
                (T::one() + s * s).sqrt()
            }
        }
    }

    /// Number of polynomial tail terms appended to keep the collocation
    /// system solvable for conditionally positive definite kernels.
    fn tail_terms(&self, dim: usize) -> usize {
        match self {
            RbfKernel::ThinPlateSpline => dim + 1,
            RbfKernel::Gaussian { .. } => 0,
            RbfKernel::Multiquadric { .. } => 1,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            RbfKernel::ThinPlateSpline => "thin-plate-spline",
            RbfKernel::Gaussian { .. } => "gaussian",
            RbfKernel::Multiquadric { .. } => "multiquadric",
        }
    }
}

/// A fitted RBF interpolant over `n` centers in `R^d`.
#[derive(Debug, Clone)]
pub struct RbfInterpolant<T: Real> {
    centers: DMatrix<T>,
    weights: DVector<T>,
    tail: DVector<T>,
    kernel: RbfKernel<T>,
}

/// Solves the collocation system so the interpolant matches `y` at every
/// column of `centers` (`d x n`, one center per column).
///
/// Duplicate centers are rejected; a singular or badly conditioned system
/// yields [`Error::IllConditioned`] with a condition estimate.
pub fn fit<T: Real>(
    centers: &DMatrix<T>,
    values: &DVector<T>,
    kernel: RbfKernel<T>,
) -> Result<RbfInterpolant<T>> {
    let d = centers.nrows();
    let n = centers.ncols();
    if n == 0 || d == 0 {
        return Err(Error::invalid("at least one center required"));
    }
    if values.len() != n {
        return Err(Error::invalid(format!(
            "value count {} does not match center count {n}",
            values.len()
        )));
    }
    if centers.iter().any(|x| !x.is_finite()) || values.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("non-finite training data"));
    }
    if let RbfKernel::Gaussian { shape } | RbfKernel::Multiquadric { shape } = kernel {
        if shape <= T::zero() {
            return Err(Error::invalid("kernel shape parameter must be positive"));
        }
    }

    let scale = (0..n)
        .map(|j| centers.column(j).norm())
        .fold(T::zero(), |a, b| a.max(b));
    let dup_tol = real::<T>(1e-12) * (T::one() + scale);
    for i in 0..n {
        for j in (i + 1)..n {
            if (centers.column(i) - centers.column(j)).norm() <= dup_tol {
                return Err(Error::invalid(format!(
                    "duplicate centers at columns {i} and {j}"
                )));
            }
        }
    }

    let m = kernel.tail_terms(d);

    // A lone center cannot anchor a polynomial tail; degrade to the constant
    // predictor.
    if n == 1 && m > 1 {
        let mut tail = DVector::zeros(m);
        tail[0] = values[0];
        return Ok(RbfInterpolant {
            centers: centers.clone(),
            weights: DVector::zeros(1),
            tail,
            kernel,
        });
    }

    let size = n + m;
    let mut system = DMatrix::zeros(size, size);
    for i in 0..n {
        for j in 0..n {
            let r = (centers.column(i) - centers.column(j)).norm();
            system[(i, j)] = kernel.eval(r);
        }
    }
    for i in 0..n {
        for t in 0..m {
            let p = if t == 0 { T::one() } else { centers[(t - 1, i)] };
            system[(i, n + t)] = p;
            system[(n + t, i)] = p;
        }
    }
    let mut rhs = DVector::zeros(size);
    rhs.rows_mut(0, n).copy_from(values);

    let lu = system.clone().full_piv_lu();
    let solution = match lu.solve(&rhs) {
        Some(z) if z.iter().all(|x| x.is_finite()) => z,
        _ => {
            return Err(Error::IllConditioned {
                cond: condition_estimate(&system),
                context: "RBF collocation system is singular".into(),
            })
        }
    };

    let residual = (&system * &solution - &rhs).norm();
    let rhs_scale = rhs.norm().max(T::one());
    // 1e-8 relative for f64; floored at a multiple of the scalar epsilon so
    // f32 instantiations are not held to a sub-epsilon bound.
    let tol = real::<T>(1e-8).max(T::default_epsilon() * real::<T>(100.0));
    if residual > tol * rhs_scale {
        return Err(Error::IllConditioned {
            cond: condition_estimate(&system),
            context: format!(
                "collocation residual {:.3e} exceeds tolerance",
                to_f64(residual / rhs_scale)
            ),
        });
    }

    Ok(RbfInterpolant {
        centers: centers.clone(),
        weights: solution.rows(0, n).into_owned(),
        tail: solution.rows(n, m).into_owned(),
        kernel,
    })
}

fn condition_estimate<T: Real>(m: &DMatrix<T>) -> f64 {
    let sv = m.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if smin <= T::zero() {
        f64::INFINITY
    } else {
        to_f64(smax / smin)
    }
}

impl<T: Real> RbfInterpolant<T> {
    /// Rebuilds an interpolant from stored coefficients (model archive path);
    /// the collocation system is not re-solved.
    pub fn from_parts(
        kernel: RbfKernel<T>,
        centers: DMatrix<T>,
        weights: DVector<T>,
        tail: DVector<T>,
    ) -> Result<Self> {
        if weights.len() != centers.ncols() {
            return Err(Error::invalid("weight count must match center count"));
        }
        let m = kernel.tail_terms(centers.nrows());
        if tail.len() != m {
            return Err(Error::invalid(format!(
                "tail length {} does not match kernel ({} terms expected)",
                tail.len(),
                m
            )));
        }
        Ok(Self {
            centers,
            weights,
            tail,
            kernel,
        })
    }

    pub fn dim(&self) -> usize {
        self.centers.nrows()
    }

    pub fn len(&self) -> usize {
        self.centers.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.ncols() == 0
    }

    pub fn kernel(&self) -> RbfKernel<T> {
        self.kernel
    }

    pub fn centers(&self) -> &DMatrix<T> {
        &self.centers
    }

    pub fn weights(&self) -> &DVector<T> {
        &self.weights
    }

    pub fn tail(&self) -> &DVector<T> {
        &self.tail
    }

    /// Evaluates the interpolant at one point.
    pub fn eval(&self, x: DVectorView<'_, T>) -> Result<T> {
        if x.len() != self.dim() {
            return Err(Error::invalid(format!(
                "query dimension {} does not match interpolant dimension {}",
                x.len(),
                self.dim()
            )));
        }
        let mut acc = T::zero();
        for j in 0..self.len() {
            let r = (x - self.centers.column(j)).norm();
            acc += self.weights[j] * self.kernel.eval(r);
        }
        for t in 0..self.tail.len() {
            let p = if t == 0 { T::one() } else { x[t - 1] };
            acc += self.tail[t] * p;
        }
        Ok(acc)
    }

    /// Evaluates at every column of `xs`.
    pub fn eval_batch(&self, xs: &DMatrix<T>) -> Result<DVector<T>> {
        let mut out = DVector::zeros(xs.ncols());
        for j in 0..xs.ncols() {
            out[j] = self.eval(xs.column(j))?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(d: usize, n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(d, n, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn single_center_is_constant() {
        let x: DMatrix<f64> = DMatrix::from_column_slice(3, 1, &[0.3, -0.2, 0.9]);
        let y = DVector::from_vec(vec![4.5]);
        let model = fit(&x, &y, RbfKernel::ThinPlateSpline).unwrap();
        for &probe in &[[0.0, 0.0, 0.0], [10.0, -3.0, 2.0], [0.3, -0.2, 0.9]] {
            let q = DVector::from_row_slice(&probe);
            assert!((model.eval(q.column(0)).unwrap() - 4.5).abs() <= 1e-12);
        }
    }

    #[test]
    fn reproduces_linear_functions() {
        let x = random_points(3, 10, 1);
        let f = |v: DVectorView<'_, f64>| 2.0 + v[0] - 3.0 * v[1] + 0.5 * v[2];
        let y = DVector::from_fn(10, |j, _| f(x.column(j)));
        let model = fit(&x, &y, RbfKernel::ThinPlateSpline).unwrap();
        let probes = random_points(3, 20, 2);
        for j in 0..20 {
            let got = model.eval(probes.column(j)).unwrap();
            let want = f(probes.column(j));
            assert!(
                (got - want).abs() <= 1e-8 * (1.0 + want.abs()),
                "probe {j}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn interpolates_at_centers_for_every_kernel() {
        let x = random_points(2, 12, 3);
        let y = DVector::from_fn(12, |j, _| (3.0 * x[(0, j)]).sin() + x[(1, j)]);
        for kernel in [
            RbfKernel::ThinPlateSpline,
            RbfKernel::Gaussian { shape: 1.0 },
            RbfKernel::Multiquadric { shape: 1.0 },
        ] {
            let model = fit(&x, &y, kernel).unwrap();
            for j in 0..12 {
                let got = model.eval(x.column(j)).unwrap();
                assert!(
                    (got - y[j]).abs() <= 1e-8 * (1.0 + y[j].abs()),
                    "{}: center {j}",
                    kernel.label()
                );
            }
        }
    }

    #[test]
    fn duplicate_centers_rejected() {
        let mut x = random_points(2, 5, 4);
        let dup = x.column(1).into_owned();
        x.set_column(3, &dup);
        let y = DVector::from_element(5, 1.0);
        assert!(matches!(
            fit(&x, &y, RbfKernel::ThinPlateSpline),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn far_field_stays_finite() {
        let x = random_points(2, 8, 5);
        let y = DVector::from_fn(8, |j, _| x[(0, j)]);
        let model = fit(&x, &y, RbfKernel::ThinPlateSpline).unwrap();
        for &s in &[10.0, 100.0, 1000.0] {
            let q = DVector::from_vec(vec![s, -s]);
            assert!(model.eval(q.column(0)).unwrap().is_finite());
        }
    }

    #[test]
    fn batch_matches_pointwise() {
        let x = random_points(2, 6, 6);
        let y = DVector::from_fn(6, |j, _| x[(0, j)] * x[(1, j)]);
        let model = fit(&x, &y, RbfKernel::Gaussian { shape: 0.7 }).unwrap();
        let probes = random_points(2, 9, 7);
        let batch = model.eval_batch(&probes).unwrap();
        for j in 0..9 {
            assert_eq!(batch[j], model.eval(probes.column(j)).unwrap());
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let x = random_points(3, 4, 8);
        let y = DVector::from_element(4, 1.0);
        let model = fit(&x, &y, RbfKernel::ThinPlateSpline).unwrap();
        let q = DVector::from_vec(vec![0.0, 0.0]);
        assert!(model.eval(q.column(0)).is_err());
    }
}
