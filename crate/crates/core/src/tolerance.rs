/// Fixed numerical thresholds shared by the slope validators and root checks.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tolerances {
    /// Allowed deviation of a fitted log-log slope from its target.
    pub slope: f64,
    /// Allowed magnitude of p'' at the degenerate point.
    pub root: f64,
    /// Logarithmically spaced samples per decade in slope fits.
    pub samples_per_decade: usize,
    /// Relative exclusion radius around r0 for fit windows.
    pub degenerate_exclusion: f64,
    /// Minimum r^2 for a decay fit to count as clean.
    pub clean_r_squared: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        slope: 0.05,
        root: 1e-12,
        samples_per_decade: 50,
        degenerate_exclusion: 0.1,
        clean_r_squared: 0.95,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
