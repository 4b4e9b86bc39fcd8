//! Regularized normal-form kernel
//! `|xi|^a |eta|^a |xi-eta|^a / (<xi-eta>^(2 lambda) <eta>^(2 lambda) Phi)`
//! with `a = (2 - sigma) / 2`.


#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::float::Float as _;
use crate::dispersion::DispersionParams;
use crate::error::{Error, Result};
use crate::phase::{phase_radial, FreqTriple, SignPair};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KernelParams {
    pub dispersion: DispersionParams,
    pub lambda: f64,
    /// Sobolev order of the shell norm, in `[0, 3/2]`.
    pub k: f64,
}

impl KernelParams {
    pub fn new(sigma: f64, lambda: f64, k: f64) -> Result<Self> {
        let dispersion = DispersionParams::new(sigma)?;
        if !(lambda > 0.0) {
            return Err(Error::KernelParams("lambda must be positive"));
        }
        if !(0.0..=1.5).contains(&k) {
            return Err(Error::KernelParams("k must lie in [0, 3/2]"));
        }
        Ok(KernelParams {
            dispersion,
            lambda,
            k,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.dispersion.sigma()
    }

    /// `lambda >= 7/4 + sigma k`; the boundary value `7/4 + 3 sigma / 2` at `k = 3/2` is admitted.
    pub fn is_summable(&self) -> bool {
        self.lambda >= 1.75 + self.sigma() * self.k - 1e-12
    }

    /// Exponent `(2 - sigma) / 2`.
    pub fn a(&self) -> f64 {
        1.0 - 0.5 * self.sigma()
    }
}

#[inline]
fn bracket_neg(x: f64, lambda: f64) -> f64 {
    (1.0 + x * x).powf(-lambda)
}

/// Kernel value from the magnitudes `|xi|`, `|xi - eta|`, `|eta|`.
pub fn kernel_radial(sp: SignPair, kp: &KernelParams, a: f64, b: f64, c: f64) -> Result<f64> {
    let phi = phase_radial(sp, &kp.dispersion, a, b, c);
    if phi == 0.0 {
        return Err(Error::OnResonance);
    }
    let e = kp.a();
    let num = (a * b * c).powf(e);
    Ok(num * bracket_neg(b, kp.lambda) * bracket_neg(c, kp.lambda) / phi)
}

pub fn kernel_m(sp: SignPair, kp: &KernelParams, t: &FreqTriple) -> Result<f64> {
    kernel_radial(sp, kp, t.xi.norm(), t.zeta().norm(), t.eta.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec3::Vec3;

    #[test]
    fn resonance_rejected() {
        let kp = KernelParams::new(1.0, 3.25, 1.5).unwrap();
        let xi = Vec3::new(1.0, 0.0, 0.0);
        let t = FreqTriple::new(xi, xi);
        assert_eq!(kernel_m(SignPair { r: 1, l: 1 }, &kp, &t), Err(Error::OnResonance));
        assert!(kp.is_summable());
        assert!(!KernelParams::new(1.0, 3.0, 1.5).unwrap().is_summable());
        assert!(KernelParams::new(1.0, 3.0, 2.0).is_err());
    }

    #[test]
    fn bounded_near_resonance() {
        let kp = KernelParams::new(1.0, 3.25, 1.5).unwrap();
        let xi = Vec3::new(0.8, -0.3, 0.5);
        let mut prev = None;
        for t in [0.9, 0.99, 0.999, 0.9999] {
            let v = kernel_m(SignPair { r: 1, l: 1 }, &kp, &FreqTriple::new(xi, xi * t)).unwrap();
            assert!(v.is_finite() && v.abs() < 10.0);
            prev = Some(v);
        }
        assert!(prev.unwrap() < 0.0);
    }

    #[test]
    fn fixture_values() {
        // High-precision reference at sigma = 1, lambda = 3.25,
        // xi = (2, 0, 0), eta = (0, 1, 0).
        let kp = KernelParams::new(1.0, 3.25, 1.5).unwrap();
        let t = FreqTriple::new(Vec3::new(2.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0));
        let want = [
            -3.973_694_661_372_093e-4,
            5.602_191_100_604_937e-4,
            1.765_064_855_176_145e-4,
            1.003_302_899_381_541_6e-4,
        ];
        for sp in SignPair::ALL {
            let v = kernel_m(sp, &kp, &t).unwrap();
            let w = want[sp.index()];
            assert!(((v - w) / w).abs() < 1e-13, "{sp:?} {v} {w}");
        }
    }
}
