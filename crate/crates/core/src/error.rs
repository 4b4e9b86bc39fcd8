use core::fmt;

/// Precondition and domain failures raised by the scalar and kernel routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    SigmaOutOfRange(f64),
    NonPositiveRadius(f64),
    NoDegeneratePoint { sigma: f64 },
    ExponentNotIntegrable { sigma: f64, lebesgue_p: f64, min_p: f64 },
    DegenerateInsideWindow { r0: f64, lo: f64, hi: f64 },
    InvalidWindow { lo: f64, hi: f64 },
    TooFewSamples { got: usize, need: usize },
    ShortTimeSpan { decades: f64 },
    NonPositiveSample { index: usize, value: f64 },
    SingularDerivative,
    OnResonance,
    DegenerateTriple,
    KernelParams(&'static str),
    ShellWidth { eps: f64, r0: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SigmaOutOfRange(s) => write!(f, "sigma = {s} outside (0, 2)"),
            Error::NonPositiveRadius(r) => {
                write!(f, "radius {r} must be positive (derivative diverges at 0)")
            }
            Error::NoDegeneratePoint { sigma } => {
                write!(f, "no degenerate point for sigma = {sigma} (requires 1 < sigma < 2)")
            }
            Error::ExponentNotIntegrable { sigma, lebesgue_p, min_p } => write!(
                f,
                "exponent not integrable: sigma = {sigma} needs p > {min_p}, got p = {lebesgue_p}"
            ),
            Error::DegenerateInsideWindow { r0, lo, hi } => write!(
                f,
                "degenerate point inside window: r0 = {r0} within 10% of [{lo}, {hi}]"
            ),
            Error::InvalidWindow { lo, hi } => write!(f, "invalid fit window [{lo}, {hi}]"),
            Error::TooFewSamples { got, need } => {
                write!(f, "insufficient samples: got {got}, need at least {need}")
            }
            Error::ShortTimeSpan { decades } => {
                write!(f, "samples span {decades:.3} decades, need at least 1")
            }
            Error::NonPositiveSample { index, value } => {
                write!(f, "sample {index} has nonpositive value {value} (log undefined)")
            }
            Error::SingularDerivative => write!(f, "phase derivative singular"),
            Error::OnResonance => write!(f, "on resonance set"),
            Error::DegenerateTriple => write!(f, "degenerate frequency argument"),
            Error::KernelParams(msg) => write!(f, "kernel parameters: {msg}"),
            Error::ShellWidth { eps, r0 } => {
                write!(f, "shell half-width violates 2*eps < r0 (eps = {eps}, r0 = {r0})")
            }
        }
    }
}

#[cfg(feature = "std")]
extern crate std;

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
