//! Periodic-grid spectral layer: transforms, multipliers, projectors, norms.

pub mod fft;
mod field;
mod grid;
mod lattice;
pub mod io;
mod multiplier;
pub mod norms;
mod project;

pub use field::SpectralField;
pub use grid::GridSpec;
pub use lattice::Lattice;
pub use multiplier::{apply_multiplier, MultiplierSpec};
pub use norms::{norm_suite, NormConfig, NormReport};
pub use project::{
    degenerate_shell_project, lp_project, lp_project_above, lp_project_below, window_multiplier,
};
