//! The dispersion relation `p(r) = (r^2 + r^(2 - sigma))^(1/2)` of the
//! linearized system and the quantities derived from it.

#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::float::Float as _;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fit::{logspace, ols};
use crate::tolerance::Tolerances;

/// Interaction exponent `sigma`, strictly inside `(0, 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DispersionParams {
    sigma: f64,
}

impl DispersionParams {
    pub fn new(sigma: f64) -> Result<Self> {
        if sigma > 0.0 && sigma < 2.0 {
            Ok(Self { sigma })
        } else {
            Err(Error::SigmaOutOfRange(sigma))
        }
    }

    #[inline]
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `p(r)`, extended by `p(0) = 0`.
    #[inline]
    pub fn p(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        (r * r + r.powf(2.0 - self.sigma)).sqrt()
    }

    /// `p'(r)` without the domain check; `r` must be positive.
    #[inline]
    pub fn dp(&self, r: f64) -> f64 {
        let s = self.sigma;
        let rs = r.powf(s);
        (2.0 * rs + 2.0 - s) / (2.0 * r.powf(0.5 * s) * (rs + 1.0).sqrt())
    }

    /// `p''(r)` without the domain check; `r` must be positive.
    #[inline]
    pub fn d2p(&self, r: f64) -> f64 {
        let s = self.sigma;
        let rs = r.powf(s);
        (2.0 * s * (s - 1.0) * rs - s * (2.0 - s))
            / (4.0 * r.powf(1.0 + 0.5 * s) * (rs + 1.0).powf(1.5))
    }

    pub fn p_prime(&self, r: f64) -> Result<f64> {
        if r > 0.0 {
            Ok(self.dp(r))
        } else {
            Err(Error::NonPositiveRadius(r))
        }
    }

    pub fn p_second(&self, r: f64) -> Result<f64> {
        if r > 0.0 {
            Ok(self.d2p(r))
        } else {
            Err(Error::NonPositiveRadius(r))
        }
    }

    /// `p(r) / r`, which decreases from infinity towards 1.
    pub fn q_ratio(&self, r: f64) -> f64 {
        let rs = r.powf(self.sigma);
        ((1.0 + rs) / rs).sqrt()
    }

    /// Radius where `p''` vanishes; exists only for `1 < sigma < 2`.
    pub fn degenerate_point(&self) -> Result<f64> {
        let s = self.sigma;
        if s <= 1.0 {
            return Err(Error::NoDegeneratePoint { sigma: s });
        }
        Ok(((2.0 - s) / (2.0 * (s - 1.0))).powf(1.0 / s))
    }

    pub fn beta_exponent(&self, lebesgue_p: f64) -> Result<DecayExponent> {
        let (min_p, factor) = if self.sigma <= 1.0 {
            (6.0, 3.0)
        } else {
            (8.0, 8.0 / 3.0)
        };
        if !(lebesgue_p > min_p) {
            return Err(Error::ExponentNotIntegrable {
                sigma: self.sigma,
                lebesgue_p,
                min_p,
            });
        }
        let beta = if lebesgue_p.is_infinite() {
            0.5 * factor
        } else {
            factor * (0.5 - 1.0 / lebesgue_p)
        };
        Ok(DecayExponent {
            beta,
            lebesgue_p,
            sigma: self.sigma,
        })
    }
}

/// Time-decay exponent `beta` of the `L^p` norm.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecayExponent {
    pub beta: f64,
    pub lebesgue_p: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Regime {
    Low,
    High,
}

/// Tabulated power of `|p''(r)|` in each regime.
pub fn psecond_target_slope(sigma: f64, regime: Regime) -> f64 {
    match regime {
        Regime::Low => -(1.0 + 0.5 * sigma),
        Regime::High => {
            if sigma < 1.0 {
                -(1.0 + sigma)
            } else if sigma == 1.0 {
                -3.0
            } else if sigma <= 4.0 / 3.0 {
                -(1.0 + 2.0 * sigma)
            } else {
                -(1.0 + sigma)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SlopeCheck {
    pub sigma: f64,
    pub regime: Regime,
    pub window: (f64, f64),
    pub slope: f64,
    pub target: f64,
    pub r_squared: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Log10-log10 least-squares slope of `|p''|` over `window`, judged against
/// [`psecond_target_slope`].
pub fn psecond_slope_check(
    params: &DispersionParams,
    regime: Regime,
    window: (f64, f64),
    tol: &Tolerances,
) -> Result<SlopeCheck> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidWindow { lo, hi });
    }
    if let Ok(r0) = params.degenerate_point() {
        let ex = tol.degenerate_exclusion;
        if hi >= r0 * (1.0 - ex) && lo <= r0 * (1.0 + ex) {
            return Err(Error::DegenerateInsideWindow { r0, lo, hi });
        }
    }
    let decades = (hi / lo).log10();
    let count = ((decades * tol.samples_per_decade as f64).ceil() as usize).max(2);
    let rs = logspace(lo, hi, count);
    let xs: Vec<f64> = rs.iter().map(|r| r.log10()).collect();
    let ys: Vec<f64> = rs.iter().map(|&r| params.d2p(r).abs().log10()).collect();
    let line = ols(&xs, &ys);
    let target = psecond_target_slope(params.sigma(), regime);
    Ok(SlopeCheck {
        sigma: params.sigma(),
        regime,
        window,
        slope: line.slope,
        target,
        r_squared: line.r_squared,
        samples: count,
        pass: (line.slope - target).abs() <= tol.slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn par(s: f64) -> DispersionParams {
        DispersionParams::new(s).unwrap()
    }

    #[test]
    fn rejects_sigma_outside_range() {
        for s in [0.0, 2.0, -1.0, 3.0, f64::NAN] {
            assert!(DispersionParams::new(s).is_err());
        }
    }

    #[test]
    fn point_values() {
        assert_eq!(par(1.0).p(0.0), 0.0);
        for s in [0.3, 1.0, 1.5, 1.9] {
            assert_relative_eq!(par(s).p(1.0), 2f64.sqrt(), epsilon = 1e-15);
        }
        assert_relative_eq!(par(1.0).p(4.0), 20f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(
            par(1.0).p_prime(1.0).unwrap(),
            3.0 / (2.0 * 2f64.sqrt()),
            epsilon = 1e-15
        );
        assert_relative_eq!(
            par(1.0).p_second(1.0).unwrap(),
            -1.0 / (8.0 * 2f64.sqrt()),
            epsilon = 1e-15
        );
        assert!(par(0.5).p_second(3.0).unwrap() < 0.0);
        assert!(par(1.0).p_prime(0.0).is_err());
        assert!(par(1.0).p_second(-1.0).is_err());
    }

    #[test]
    fn derivative_asymptotics() {
        let big = par(0.5).p_prime(1e6).unwrap();
        assert!((big - 1.0).abs() < 0.01);
        // p'(r) ~ C r^(-sigma/2) near zero with C = (2 - sigma) / 2.
        let s = par(1.0);
        let c = s.dp(1e-8) * 1e-4;
        let r = 1e-6;
        assert!((s.dp(r) / (c * r.powf(-0.5)) - 1.0).abs() < 0.01);
    }

    #[test]
    fn degenerate_point_values() {
        assert!((par(4.0 / 3.0).degenerate_point().unwrap() - 1.0).abs() < 1e-15);
        assert_relative_eq!(
            par(1.5).degenerate_point().unwrap(),
            0.5f64.powf(2.0 / 3.0),
            epsilon = 1e-15
        );
        assert_relative_eq!(
            par(1.5).degenerate_point().unwrap(),
            0.629_960_524_947_436_6,
            epsilon = 1e-12
        );
        let r0 = par(1.5).degenerate_point().unwrap();
        assert!(par(1.5).d2p(r0).abs() < 1e-12);
        assert!(matches!(
            par(0.5).degenerate_point(),
            Err(Error::NoDegeneratePoint { .. })
        ));
    }

    #[test]
    fn beta_values() {
        assert_relative_eq!(par(1.0).beta_exponent(8.0).unwrap().beta, 9.0 / 8.0);
        assert_relative_eq!(
            par(1.5).beta_exponent(12.0).unwrap().beta,
            10.0 / 9.0,
            epsilon = 1e-15
        );
        assert!(par(1.0).beta_exponent(6.0).is_err());
        assert!(par(1.5).beta_exponent(8.0).is_err());
        assert!(par(1.5).beta_exponent(9.0).unwrap().beta > 1.0);
    }

    #[test]
    fn slope_examples() {
        let tol = Tolerances::DEFAULT;
        let c = psecond_slope_check(&par(0.5), Regime::High, (1e2, 1e4), &tol).unwrap();
        assert!((c.slope + 1.5).abs() < 0.05 && c.pass);
        let c = psecond_slope_check(&par(1.0), Regime::High, (1e2, 1e4), &tol).unwrap();
        assert!((c.slope + 3.0).abs() < 0.05 && c.pass);
        let c = psecond_slope_check(&par(1.5), Regime::Low, (1e-4, 1e-2), &tol).unwrap();
        assert!((c.slope + 1.75).abs() < 0.05 && c.pass);
        assert_eq!(c.samples, 100);
    }

    #[test]
    fn slope_window_around_r0_rejected() {
        let p = par(1.5);
        let r0 = p.degenerate_point().unwrap();
        let e = psecond_slope_check(&p, Regime::High, (r0 * 1.05, 10.0), &Tolerances::DEFAULT);
        assert!(matches!(e, Err(Error::DegenerateInsideWindow { .. })));
        assert!(psecond_slope_check(&p, Regime::High, (2.0, 1.0), &Tolerances::DEFAULT).is_err());
    }
}
