//! Parameter-space definition, uniform sampling, and the affine rescaling
//! between physical bounds and the origin-centered reference cube `[-1, 1]^p`
//! in which all active-subspace computations take place.

use nalgebra::{DMatrix, DVector, DVectorView};
use rand::distributions::Uniform;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{real, Real};

/// Sampling density over the parameter space. Only the uniform density is
/// supported; Monte Carlo weights are therefore a constant `1/n` everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Density {
    Uniform,
}

/// Coordinate system a sample matrix is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinates {
    /// Physical units, each axis within its `[lower, upper]` bounds.
    Physical,
    /// Reference cube `[-1, 1]^p`.
    Reference,
}

/// A box-bounded parameter domain in `R^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSpace<T: Real> {
    lower: DVector<T>,
    upper: DVector<T>,
    density: Density,
}

impl<T: Real> ParameterSpace<T> {
    /// Builds a space from per-axis bounds. Requires `lower[i] < upper[i]`
    /// on every axis and at least one axis.
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::invalid(format!(
                "bounds must be non-empty and of equal length (got {} and {})",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(*lo < *hi) {
                return Err(Error::invalid(format!(
                    "axis {i}: lower bound must be strictly below upper bound"
                )));
            }
        }
        Ok(Self {
            lower: DVector::from_vec(lower),
            upper: DVector::from_vec(upper),
            density: Density::Uniform,
        })
    }

    /// The same bounds `[lo, hi]` replicated over `dim` axes.
    pub fn hypercube(lo: T, hi: T, dim: usize) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &DVector<T> {
        &self.lower
    }

    pub fn upper(&self) -> &DVector<T> {
        &self.upper
    }

    pub fn density(&self) -> Density {
        self.density
    }

    /// Draws `n` i.i.d. uniform samples, one per column, in physical
    /// coordinates. Deterministic for a fixed seed.
    pub fn sample_uniform(&self, n: usize, seed: u64) -> Result<ParameterSamples<T>> {
        if n == 0 {
            return Err(Error::invalid("sample count must be at least 1"));
        }
        let p = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let axes: Vec<Uniform<T>> = (0..p)
            .map(|i| Uniform::new_inclusive(self.lower[i], self.upper[i]))
            .collect();
        let mut data = DMatrix::zeros(p, n);
        for j in 0..n {
            for i in 0..p {
                data[(i, j)] = rng.sample(&axes[i]);
            }
        }
        Ok(ParameterSamples {
            data,
            coords: Coordinates::Physical,
        })
    }

    /// Rescales physical samples to the reference cube:
    /// `x_ref = 2 (x - lower) / (upper - lower) - 1`, componentwise.
    ///
    /// Rejects out-of-bounds samples, naming the offending axis.
    pub fn to_reference(&self, samples: &ParameterSamples<T>) -> Result<ParameterSamples<T>> {
        self.check_dim(samples)?;
        if samples.coords == Coordinates::Reference {
            return Err(Error::invalid("samples are already in reference coordinates"));
        }
        let slack_rel = real::<T>(1e-12).max(T::default_epsilon() * real::<T>(4.0));
        for j in 0..samples.len() {
            for i in 0..self.dim() {
                let x = samples.data[(i, j)];
                let slack = (self.upper[i] - self.lower[i]) * slack_rel;
                if x < self.lower[i] - slack || x > self.upper[i] + slack {
                    return Err(Error::invalid(format!(
                        "sample {j} is out of bounds on axis {i}"
                    )));
                }
            }
        }
        let two = real::<T>(2.0);
        let mut data = samples.data.clone();
        for j in 0..data.ncols() {
            for i in 0..self.dim() {
                data[(i, j)] = two * (data[(i, j)] - self.lower[i])
                    / (self.upper[i] - self.lower[i])
                    - T::one();
            }
        }
        Ok(ParameterSamples {
            data,
            coords: Coordinates::Reference,
        })
    }

    /// Exact inverse of [`Self::to_reference`]:
    /// `x = lower + (x_ref + 1) (upper - lower) / 2`.
    pub fn from_reference(&self, samples: &ParameterSamples<T>) -> Result<ParameterSamples<T>> {
        self.check_dim(samples)?;
        if samples.coords == Coordinates::Physical {
            return Err(Error::invalid("samples are already in physical coordinates"));
        }
        let one = T::one();
        let slack = real::<T>(2e-12).max(T::default_epsilon() * real::<T>(8.0));
        for j in 0..samples.len() {
            for i in 0..self.dim() {
                let x = samples.data[(i, j)];
                if x < -one - slack || x > one + slack {
                    return Err(Error::invalid(format!(
                        "reference sample {j} is outside [-1, 1] on axis {i}"
                    )));
                }
            }
        }
        let half = real::<T>(0.5);
        let mut data = samples.data.clone();
        for j in 0..data.ncols() {
            for i in 0..self.dim() {
                data[(i, j)] = self.lower[i]
                    + (data[(i, j)] + T::one()) * (self.upper[i] - self.lower[i]) * half;
            }
        }
        Ok(ParameterSamples {
            data,
            coords: Coordinates::Physical,
        })
    }

    /// Rescales a single physical point to reference coordinates without a
    /// bounds check. Out-of-bounds points extrapolate linearly; used by ROM
    /// prediction, which flags rather than rejects them.
    pub fn point_to_reference(&self, x: DVectorView<'_, T>) -> DVector<T> {
        let two = real::<T>(2.0);
        DVector::from_fn(self.dim(), |i, _| {
            two * (x[i] - self.lower[i]) / (self.upper[i] - self.lower[i]) - T::one()
        })
    }

    /// Inverse of [`Self::point_to_reference`], also unchecked.
    pub fn point_from_reference(&self, x_ref: DVectorView<'_, T>) -> DVector<T> {
        let half = real::<T>(0.5);
        DVector::from_fn(self.dim(), |i, _| {
            self.lower[i] + (x_ref[i] + T::one()) * (self.upper[i] - self.lower[i]) * half
        })
    }

    /// True when the physical point lies within bounds on every axis.
    pub fn contains(&self, x: DVectorView<'_, T>) -> bool {
        (0..self.dim()).all(|i| x[i] >= self.lower[i] && x[i] <= self.upper[i])
    }

    fn check_dim(&self, samples: &ParameterSamples<T>) -> Result<()> {
        if samples.dim() != self.dim() {
            return Err(Error::invalid(format!(
                "sample dimension {} does not match space dimension {}",
                samples.dim(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// A set of parameter samples, one per column.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSamples<T: Real> {
    data: DMatrix<T>,
    coords: Coordinates,
}

impl<T: Real> ParameterSamples<T> {
    /// Wraps a `p x n` matrix of samples. Entries must be finite.
    pub fn new(data: DMatrix<T>, coords: Coordinates) -> Result<Self> {
        if data.ncols() == 0 || data.nrows() == 0 {
            return Err(Error::invalid("sample matrix must be non-empty"));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("sample matrix contains non-finite entries"));
        }
        Ok(Self { data, coords })
    }

    /// Number of samples (columns).
    pub fn len(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.data.ncols() == 0
    }

    /// Parameter dimension `p`.
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn coords(&self) -> Coordinates {
        self.coords
    }

    /// The underlying `p x n` matrix, column `j` = sample `j`.
    pub fn matrix(&self) -> &DMatrix<T> {
        &self.data
    }

    pub fn column(&self, j: usize) -> DVectorView<'_, T> {
        self.data.column(j)
    }

    /// Keeps the selected columns, preserving the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            data: self.data.select_columns(indices),
            coords: self.coords,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn beam_space() -> ParameterSpace<f64> {
        ParameterSpace::hypercube(5.0, 10.0, 6).unwrap()
    }

    #[test]
    fn rejects_inverted_bounds() {
        assert!(ParameterSpace::new(vec![1.0], vec![1.0]).is_err());
        assert!(ParameterSpace::new(vec![2.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(ParameterSpace::<f64>::new(vec![], vec![]).is_err());
    }

    #[test]
    fn uniform_samples_respect_bounds() {
        let space = beam_space();
        let samples = space.sample_uniform(200, 7).unwrap();
        assert_eq!(samples.len(), 200);
        assert_eq!(samples.dim(), 6);
        assert!(samples.matrix().iter().all(|&x| (5.0..=10.0).contains(&x)));
    }

    #[test]
    fn single_scalar_sample() {
        let space = ParameterSpace::hypercube(0.0, 1.0, 1).unwrap();
        let samples = space.sample_uniform(1, 3).unwrap();
        assert_eq!(samples.len(), 1);
        assert!((0.0..=1.0).contains(&samples.matrix()[(0, 0)]));
    }

    #[test]
    fn sampling_is_deterministic() {
        let space = beam_space();
        let a = space.sample_uniform(50, 42).unwrap();
        let b = space.sample_uniform(50, 42).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        let c = space.sample_uniform(50, 43).unwrap();
        assert_ne!(a.matrix(), c.matrix());
    }

    #[test]
    fn zero_samples_rejected() {
        let space = beam_space();
        assert!(matches!(
            space.sample_uniform(0, 1),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn midpoint_maps_to_origin() {
        let space = ParameterSpace::new(vec![5.0, 0.0], vec![10.0, 4.0]).unwrap();
        let mid = DMatrix::from_column_slice(2, 1, &[7.5, 2.0]);
        let samples = ParameterSamples::new(mid, Coordinates::Physical).unwrap();
        let scaled = space.to_reference(&samples).unwrap();
        assert_relative_eq!(scaled.matrix()[(0, 0)], 0.0, epsilon = 1e-14);
        assert_relative_eq!(scaled.matrix()[(1, 0)], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn upper_bound_maps_to_plus_one() {
        let space = ParameterSpace::hypercube(5.0, 10.0, 1).unwrap();
        let samples = ParameterSamples::new(
            DMatrix::from_column_slice(1, 1, &[10.0]),
            Coordinates::Physical,
        )
        .unwrap();
        let scaled = space.to_reference(&samples).unwrap();
        assert_relative_eq!(scaled.matrix()[(0, 0)], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn beam_lower_corner_maps_to_minus_ones() {
        let space = beam_space();
        let samples = ParameterSamples::new(
            DMatrix::from_element(6, 1, 5.0),
            Coordinates::Physical,
        )
        .unwrap();
        let scaled = space.to_reference(&samples).unwrap();
        for i in 0..6 {
            assert_relative_eq!(scaled.matrix()[(i, 0)], -1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn reference_corners_map_to_bounds() {
        let space = beam_space();
        let ones = ParameterSamples::new(DMatrix::from_element(6, 1, 1.0), Coordinates::Reference)
            .unwrap();
        let phys = space.from_reference(&ones).unwrap();
        for i in 0..6 {
            assert_relative_eq!(phys.matrix()[(i, 0)], 10.0, epsilon = 1e-12);
        }
        let zeros = ParameterSamples::new(DMatrix::from_element(6, 1, 0.0), Coordinates::Reference)
            .unwrap();
        let phys = space.from_reference(&zeros).unwrap();
        for i in 0..6 {
            assert_relative_eq!(phys.matrix()[(i, 0)], 7.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let space = ParameterSpace::new(vec![5.0, -3.0, 0.1], vec![10.0, -1.0, 0.2]).unwrap();
        let samples = space.sample_uniform(100, 11).unwrap();
        let back = space
            .from_reference(&space.to_reference(&samples).unwrap())
            .unwrap();
        for (a, b) in samples.matrix().iter().zip(back.matrix().iter()) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn out_of_bounds_sample_names_axis() {
        let space = beam_space();
        let mut data = DMatrix::from_element(6, 1, 7.0);
        data[(3, 0)] = 10.5;
        let samples = ParameterSamples::new(data, Coordinates::Physical).unwrap();
        let err = space.to_reference(&samples).unwrap_err();
        match err {
            Error::InvalidArgument(msg) => assert!(msg.contains("axis 3"), "{msg}"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn reference_mean_shrinks_with_sample_count() {
        let space = beam_space();
        for &n in &[100usize, 400, 1600] {
            let scaled = space
                .to_reference(&space.sample_uniform(n, 5).unwrap())
                .unwrap();
            let bound = 3.0 / (3.0 * n as f64).sqrt();
            for i in 0..space.dim() {
                let mean = scaled.matrix().row(i).sum() / n as f64;
                assert!(
                    mean.abs() <= bound,
                    "axis {i}: |mean| = {} exceeds {bound} at n = {n}",
                    mean.abs()
                );
            }
        }
    }

    #[test]
    fn f32_round_trip() {
        let space = ParameterSpace::<f32>::hypercube(5.0, 10.0, 3).unwrap();
        let samples = space.sample_uniform(20, 9).unwrap();
        let back = space
            .from_reference(&space.to_reference(&samples).unwrap())
            .unwrap();
        for (a, b) in samples.matrix().iter().zip(back.matrix().iter()) {
            assert_relative_eq!(a, b, max_relative = 1e-5);
        }
    }
}
