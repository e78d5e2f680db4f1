//! Grids, complex fields, spectral derivatives and split-step propagation.

mod fft;
mod field;
mod grid;
pub mod io;
mod propagate;

pub use fft::{spectral_laplacian, Spectral};
pub use field::{expectation_position, l2_norm, overlap, ComplexField};
pub use grid::{make_grid, Grid, GridSpec};
pub use propagate::{split_step_linear, LinearPotential, LinearPropagator, EDGE_AMPLITUDE_THRESHOLD};
