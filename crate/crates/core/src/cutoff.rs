//! Smooth radial cutoffs: the step `psi` (1 on `[0, 1]`, 0 on `[2, oo)`),
//! dyadic annuli and the three windows around the degenerate radius.


#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::float::Float as _;
use crate::error::{Error, Result};
use crate::jet::Taylor2;

include!(concat!(env!("OUT_DIR"), "/step_table.rs"));

fn mollifier(t: f64) -> (f64, f64) {
    let q = 1.0 - t * t;
    if q <= 0.0 {
        return (0.0, 0.0);
    }
    let b = (-1.0 / q).exp();
    (b, b * (-2.0 * t / (q * q)))
}

/// Normalized cumulative mollifier on `[-1, 1]`: 0 at -1, 1 at 1.
pub fn smooth_step(s: f64) -> Taylor2 {
    if s <= -1.0 {
        return Taylor2::constant(0.0);
    }
    if s >= 1.0 {
        return Taylor2::constant(1.0);
    }
    let h = 2.0 / STEP_INTERVALS as f64;
    let x = (s + 1.0) / h;
    let i = (x.floor() as usize).min(STEP_INTERVALS - 1);
    let u = x - i as f64;
    let [f0, a0, b0] = STEP_TABLE[i];
    let [f1, a1, b1] = STEP_TABLE[i + 1];
    // Quintic Hermite on the cell; derivatives are exact.
    let u2 = u * u;
    let u3 = u2 * u;
    let u4 = u3 * u;
    let u5 = u4 * u;
    let h0 = 1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5;
    let h1 = u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5;
    let h2 = 0.5 * (u2 - 3.0 * u3 + 3.0 * u4 - u5);
    let h3 = 10.0 * u3 - 15.0 * u4 + 6.0 * u5;
    let h4 = -4.0 * u3 + 7.0 * u4 - 3.0 * u5;
    let h5 = 0.5 * (u3 - 2.0 * u4 + u5);
    let v = f0 * h0 + h * a0 * h1 + h * h * b0 * h2 + f1 * h3 + h * a1 * h4 + h * h * b1 * h5;
    let (m, dm) = mollifier(s);
    Taylor2 {
        v,
        d1: m / MOLLIFIER_MASS,
        d2: dm / MOLLIFIER_MASS,
    }
}

/// The step `psi(x)` for `x >= 0`.
pub fn cutoff(x: f64) -> Taylor2 {
    if x <= 1.0 {
        return Taylor2::constant(1.0);
    }
    if x >= 2.0 {
        return Taylor2::constant(0.0);
    }
    let f = smooth_step(3.0 - 2.0 * x);
    Taylor2 {
        v: f.v,
        d1: -2.0 * f.d1,
        d2: 4.0 * f.d2,
    }
}

/// `psi(x / scale)` as a function of `x`.
pub fn cutoff_scaled(x: f64, scale: f64) -> Taylor2 {
    let c = cutoff(x / scale);
    Taylor2 {
        v: c.v,
        d1: c.d1 / scale,
        d2: c.d2 / (scale * scale),
    }
}

/// Littlewood-Paley annulus `psi(x/N) - psi(2x/N)`, supported in `[N/2, 2N]`.
pub fn dyadic(x: f64, n: f64) -> Taylor2 {
    cutoff_scaled(x, n) - cutoff_scaled(x, 0.5 * n)
}

/// Windows around the degenerate radius: `shell` is 1 within `eps` of `r0`
/// and vanishes beyond `2 eps`; `inner` and `outer` complete the partition.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShellWindow {
    pub r0: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ShellPart {
    Inner,
    Shell,
    Outer,
}

impl ShellWindow {
    pub fn new(r0: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || 2.0 * eps >= r0 {
            return Err(Error::ShellWidth { eps, r0 });
        }
        Ok(Self { r0, eps })
    }

    pub fn shell(&self, r: f64) -> Taylor2 {
        let d = r - self.r0;
        let c = cutoff(d.abs() / self.eps);
        let sgn = if d < 0.0 { -1.0 } else { 1.0 };
        Taylor2 {
            v: c.v,
            d1: sgn * c.d1 / self.eps,
            d2: c.d2 / (self.eps * self.eps),
        }
    }

    pub fn part(&self, part: ShellPart, r: f64) -> Taylor2 {
        let s = self.shell(r);
        match part {
            ShellPart::Shell => s,
            ShellPart::Inner if r < self.r0 => Taylor2::constant(1.0) - s,
            ShellPart::Outer if r >= self.r0 => Taylor2::constant(1.0) - s,
            _ => Taylor2::constant(0.0),
        }
    }

    /// Radial support `[lo, hi]` of one part (`hi` infinite for the outer part).
    pub fn support(&self, part: ShellPart) -> (f64, f64) {
        match part {
            ShellPart::Inner => (0.0, self.r0 - self.eps),
            ShellPart::Shell => (self.r0 - 2.0 * self.eps, self.r0 + 2.0 * self.eps),
            ShellPart::Outer => (self.r0 + self.eps, f64::INFINITY),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_endpoints_and_symmetry() {
        assert_eq!(smooth_step(-1.0).v, 0.0);
        assert_eq!(smooth_step(1.0).v, 1.0);
        assert!((smooth_step(0.0).v - 0.5).abs() < 1e-14);
        for k in 0..200 {
            let s = -0.995 + k as f64 * 0.01;
            let a = smooth_step(s).v;
            let b = smooth_step(-s).v;
            assert!((a + b - 1.0).abs() < 1e-13, "{s}");
        }
    }

    #[test]
    fn step_derivatives_match_differences() {
        let h = 1e-5;
        for k in 1..40 {
            let s = -0.95 + k as f64 * 0.047;
            let d = (smooth_step(s + h).v - smooth_step(s - h).v) / (2.0 * h);
            assert!((d - smooth_step(s).d1).abs() < 1e-8, "{s}");
            let dd = (smooth_step(s + h).d1 - smooth_step(s - h).d1) / (2.0 * h);
            assert!((dd - smooth_step(s).d2).abs() < 1e-6, "{s}");
        }
    }

    #[test]
    fn cutoff_support_and_monotone() {
        assert_eq!(cutoff(0.3).v, 1.0);
        assert_eq!(cutoff(1.0).v, 1.0);
        assert_eq!(cutoff(2.0).v, 0.0);
        let mut prev = 1.0;
        for k in 0..=100 {
            let v = cutoff(1.0 + k as f64 / 100.0).v;
            assert!(v <= prev + 1e-15 && (0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn dyadic_support() {
        let n = 4.0;
        assert_eq!(dyadic(1.9, n).v, 0.0);
        assert_eq!(dyadic(8.1, n).v, 0.0);
        assert!((dyadic(4.0, n).v - 1.0).abs() < 1e-15);
        let mut sum = 0.0;
        for j in -20..20 {
            sum += dyadic(3.3, 2f64.powi(j)).v;
        }
        assert!((sum - 1.0).abs() < 1e-14);
    }

    #[test]
    fn window_partition() {
        let w = ShellWindow::new(0.63, 0.63 / 8.0).unwrap();
        for k in 0..300 {
            let r = k as f64 * 0.01;
            let t = w.part(ShellPart::Inner, r).v
                + w.part(ShellPart::Shell, r).v
                + w.part(ShellPart::Outer, r).v;
            assert!((t - 1.0).abs() < 1e-14);
        }
        assert_eq!(w.part(ShellPart::Shell, 0.63).v, 1.0);
        assert_eq!(w.part(ShellPart::Outer, 2.52).v, 1.0);
        assert!(ShellWindow::new(0.63, 0.4).is_err());
    }
}
