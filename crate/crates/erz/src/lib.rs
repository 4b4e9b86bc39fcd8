//! Pseudospectral simulator and verification toolkit for the irrotational
//! Euler-Riesz system in three dimensions.

pub mod acceptance;
pub mod cli;
pub mod error;
pub mod linflow;
pub mod normalform;
pub mod solver;
pub mod spectral;
pub mod verify;

pub use error::{ErzError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
