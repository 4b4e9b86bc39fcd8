//! Least-squares power-law fits on log-log data.

#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::float::Float as _;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// Ordinary least-squares line `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn ols(xs: &[f64], ys: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss_res = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let e = y - (slope * x + intercept);
        ss_res += e * e;
    }
    // A constant response is fitted exactly by the flat line.
    let r_squared = if syy <= f64::MIN_POSITIVE {
        1.0
    } else {
        (1.0 - ss_res / syy).max(0.0)
    };
    LineFit {
        slope,
        intercept,
        r_squared,
    }
}

/// Power-law fit `value ~ exp(intercept) * t^exponent`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecayFit {
    pub exponent: f64,
    /// Natural-log intercept.
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub samples: Vec<(f64, f64)>,
    pub clean: bool,
}

pub const MIN_DECAY_SAMPLES: usize = 8;

pub fn fit_decay(samples: &[(f64, f64)]) -> Result<DecayFit> {
    if samples.len() < MIN_DECAY_SAMPLES {
        return Err(Error::TooFewSamples {
            got: samples.len(),
            need: MIN_DECAY_SAMPLES,
        });
    }
    let mut xs = Vec::with_capacity(samples.len());
    let mut ys = Vec::with_capacity(samples.len());
    let mut t_min = f64::INFINITY;
    let mut t_max = 0.0_f64;
    for (index, &(t, v)) in samples.iter().enumerate() {
        if !(t > 0.0) {
            return Err(Error::NonPositiveSample { index, value: t });
        }
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::NonPositiveSample { index, value: v });
        }
        t_min = t_min.min(t);
        t_max = t_max.max(t);
        xs.push(t.ln());
        ys.push(v.ln());
    }
    let decades = (t_max / t_min).log10();
    if decades < 1.0 - 1e-12 {
        return Err(Error::ShortTimeSpan { decades });
    }
    let line = ols(&xs, &ys);
    Ok(DecayFit {
        exponent: line.slope,
        intercept: line.intercept,
        r_squared: line.r_squared,
        window: (t_min, t_max),
        samples: samples.to_vec(),
        clean: line.r_squared >= Tolerances::DEFAULT.clean_r_squared,
    })
}

/// `count` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && lo > 0.0 && hi > lo);
    let a = lo.ln();
    let b = hi.ln();
    (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let s: Vec<_> = logspace(1.0, 100.0, 12)
            .into_iter()
            .map(|t| (t, 7.0 * t.powf(-1.5)))
            .collect();
        let fit = fit_decay(&s).unwrap();
        assert!((fit.exponent + 1.5).abs() < 1e-10);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(fit.clean);
    }

    #[test]
    fn perturbed_power_law() {
        let s: Vec<_> = logspace(1.0, 1e4, 64)
            .into_iter()
            .map(|t| (t, t.powf(-4.0 / 3.0) * (1.0 + 0.05 * t.ln().sin())))
            .collect();
        let fit = fit_decay(&s).unwrap();
        assert!((fit.exponent + 4.0 / 3.0).abs() < 0.02, "{}", fit.exponent);
    }

    #[test]
    fn constant_samples() {
        let s: Vec<_> = logspace(1.0, 10.0, 8).into_iter().map(|t| (t, 3.0)).collect();
        let fit = fit_decay(&s).unwrap();
        assert!(fit.exponent.abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            fit_decay(&[(1.0, 1.0)]),
            Err(Error::TooFewSamples { .. })
        ));
        let mut s: Vec<_> = logspace(1.0, 10.0, 8).into_iter().map(|t| (t, 1.0)).collect();
        s[3].1 = 0.0;
        assert!(matches!(
            fit_decay(&s),
            Err(Error::NonPositiveSample { index: 3, .. })
        ));
        let s: Vec<_> = logspace(1.0, 5.0, 8).into_iter().map(|t| (t, 1.0 / t)).collect();
        assert!(matches!(fit_decay(&s), Err(Error::ShortTimeSpan { .. })));
    }
}
