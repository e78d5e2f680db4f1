//! Soliton dynamics guided by linear pilot waves, trajectory ensembles and
//! gravitational phase calculations for a two-spin interferometer.
//!
//! Everything numeric is generic over [`Real`] (implemented for `f32` and
//! `f64`). The aliases below fix the scalar to `f64`.

// NaN must fail validity checks, so `!(x > 0.0)` style guards are intended.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod constants;
mod error;
pub mod gaussian;
pub mod gravity;
pub mod guidance;
pub mod pilot;
pub mod scalar;
pub mod soliton;
pub mod spectral;

pub use constants::PhysicalConstants;
pub use error::{Error, Result, Warning};
pub use scalar::{Point, Real};

pub type Constants = PhysicalConstants<f64>;
pub type Grid = spectral::Grid<f64>;
pub type ComplexField = spectral::ComplexField<f64>;
pub type PilotSpec = pilot::PilotSpec<f64>;
pub type PilotWave = pilot::PilotWave<f64>;
pub type SolitonState = soliton::SolitonState<f64>;
pub type GaussianSolitonParams = gaussian::GaussianSolitonParams<f64>;
pub type Trajectory = guidance::Trajectory<f64>;
pub type Ensemble = guidance::Ensemble<f64>;
pub type ManyBodyPilot = guidance::ManyBodyPilot<f64>;
pub type ExperimentConfig = gravity::ExperimentConfig<f64>;
pub type SpinDensityMatrix = gravity::SpinDensityMatrix<f64>;
