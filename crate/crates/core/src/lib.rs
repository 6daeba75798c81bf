//! Non-intrusive reduced-order modeling via POD with interpolation (PODI).
//!
//! The pipeline: collect full-order snapshots at sampled parameters, extract a
//! POD basis by thin SVD, project the snapshots to modal coefficients, and fit
//! one regressor per retained mode so fields at new parameters can be
//! reconstructed without touching the full-order solver. Two coefficient
//! regressors are provided:
//!
//! * full-parameter-space radial basis function interpolation (the baseline),
//! * a univariate Gaussian process on the one-dimensional active-subspace
//!   coordinate of each coefficient.
//!
//! The [`evaluation`] module contains the k-fold cross-validation harness and
//! synthetic ridge-structured benchmark problems used to compare the two as a
//! function of training-set size.
//!
//! All numerical code is generic over the scalar type through the [`Real`]
//! trait (`f32` or `f64`); concrete `f64` aliases for the main types live at
//! the crate root.

pub mod active_subspace;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod param_space;
pub mod pod;
pub mod regression;
pub mod rom;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` parameter space.
pub type ParameterSpace64 = param_space::ParameterSpace<f64>;
/// `f64` parameter sample set.
pub type ParameterSamples64 = param_space::ParameterSamples<f64>;
/// `f64` snapshot set.
pub type SnapshotSet64 = pod::SnapshotSet<f64>;
/// `f64` POD basis.
pub type PodBasis64 = pod::PodBasis<f64>;
/// `f64` active subspace.
pub type ActiveSubspace64 = active_subspace::ActiveSubspace<f64>;
/// `f64` trained ROM.
pub type RomModel64 = rom::RomModel<f64>;
/// `f64` synthetic benchmark problem.
pub type SyntheticProblem64 = evaluation::SyntheticProblem<f64>;

/// `f32` parameter space.
pub type ParameterSpace32 = param_space::ParameterSpace<f32>;
/// `f32` snapshot set.
pub type SnapshotSet32 = pod::SnapshotSet<f32>;
/// `f32` POD basis.
pub type PodBasis32 = pod::PodBasis<f32>;
/// `f32` trained ROM.
pub type RomModel32 = rom::RomModel<f32>;
