//! The two response-surface engines used to reconstruct modal coefficients:
//! multivariate radial basis function interpolation over the full parameter
//! space (the baseline) and a univariate Gaussian process with a squared
//! exponential kernel (the active-subspace path).

pub mod gpr;
pub mod rbf;

pub use gpr::{GpHyper, GpModel1d, HyperSelection};
pub use rbf::{RbfInterpolant, RbfKernel};
