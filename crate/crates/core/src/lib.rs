#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bounds;
pub mod cutoff;
pub mod dispersion;
pub mod error;
pub mod fit;
pub mod jet;
pub mod kernel;
pub mod phase;
pub mod quad;
pub mod shell;
pub mod symbol;
pub mod tolerance;
pub mod vec3;

pub use dispersion::{DecayExponent, DispersionParams, Regime};
pub use error::{Error, Result};
pub use fit::{fit_decay, DecayFit, LineFit};
pub use kernel::KernelParams;
pub use phase::{FreqTriple, SignPair};
pub use tolerance::Tolerances;
pub use vec3::Vec3;
