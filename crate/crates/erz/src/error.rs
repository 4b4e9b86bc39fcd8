use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ErzError {
    #[error(transparent)]
    Core(#[from] erz_core::Error),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("grids differ: {0}")]
    GridMismatch(&'static str),

    #[error("multiplier {label} is not finite at frequency {xi:?}")]
    NonFiniteSymbol { label: String, xi: [f64; 3] },

    #[error("field is not mean-zero (zero mode {0:e})")]
    NotMeanZero(f64),

    #[error("vacuum crossing: max |n| = {0} (density must stay positive)")]
    VacuumCrossing(f64),

    #[error("rotational component would be discarded: curl ratio {0:e}")]
    Rotational(f64),

    #[error("periodic wrap: decay invalid (t = {t} exceeds wrap time {wrap})")]
    WrapTime { t: f64, wrap: f64 },

    #[error("unbounded group velocity: band must start above 0 (r_min = {0})")]
    UnboundedGroupVelocity(f64),

    #[error("empty frequency band [{0}, {1}]")]
    EmptyBand(f64, f64),

    #[error("quadrature budget exceeded at t = {t}, |x| = {x}: {nodes:e} nodes")]
    QuadratureBudget { t: f64, x: f64, nodes: f64 },

    #[error("grid too large for dense bilinear: {0:e} pairs")]
    DenseTooLarge(f64),

    #[error("exact resonance on lattice at xi index {0}")]
    ExactResonance(usize),

    #[error("non-finite value at step {0}")]
    NotFinite(usize),

    #[error("invalid parameter: {0}")]
    Invalid(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config: {0}")]
    Config(String),
}

impl ErzError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ErzError::Io {
            path: path.into(),
            source,
        }
    }

    /// Precondition and domain violations map to exit code 2; I/O and
    /// encoding failures to 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            ErzError::Io { .. } | ErzError::Json(_) | ErzError::Csv(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, ErzError>;
