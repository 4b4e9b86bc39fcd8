//! Resonance phases `p(xi) +- p(xi - eta) +- p(eta)` and their derivatives.

use crate::dispersion::DispersionParams;
use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// Signs `(r, l)`: index 1 is the profile, index 2 its conjugate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SignPair {
    pub r: u8,
    pub l: u8,
}

impl SignPair {
    pub const ALL: [SignPair; 4] = [
        SignPair { r: 1, l: 1 },
        SignPair { r: 1, l: 2 },
        SignPair { r: 2, l: 1 },
        SignPair { r: 2, l: 2 },
    ];

    pub fn new(r: u8, l: u8) -> Option<Self> {
        ((1..=2).contains(&r) && (1..=2).contains(&l)).then_some(SignPair { r, l })
    }

    /// `(-1)^r`
    #[inline]
    pub fn sr(self) -> f64 {
        if self.r == 1 {
            -1.0
        } else {
            1.0
        }
    }

    /// `(-1)^l`
    #[inline]
    pub fn sl(self) -> f64 {
        if self.l == 1 {
            -1.0
        } else {
            1.0
        }
    }

    pub fn swapped(self) -> SignPair {
        SignPair {
            r: self.l,
            l: self.r,
        }
    }

    /// Linear index `0..4` in [`SignPair::ALL`] order.
    pub fn index(self) -> usize {
        ((self.r - 1) * 2 + (self.l - 1)) as usize
    }
}

/// Output frequency `xi`, input frequency `eta` and the derived `xi - eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FreqTriple {
    pub xi: Vec3,
    pub eta: Vec3,
}

impl FreqTriple {
    pub fn new(xi: Vec3, eta: Vec3) -> Self {
        FreqTriple { xi, eta }
    }

    #[inline]
    pub fn zeta(&self) -> Vec3 {
        self.xi - self.eta
    }

    /// The partner triple `(xi, xi - eta)`.
    pub fn swapped(&self) -> FreqTriple {
        FreqTriple {
            xi: self.xi,
            eta: self.zeta(),
        }
    }

    /// Angle between `xi` and `eta`.
    pub fn theta(&self) -> f64 {
        self.xi.angle(self.eta)
    }

    /// Angle between `xi` and `xi - eta`.
    pub fn gamma(&self) -> f64 {
        self.xi.angle(self.zeta())
    }

    /// Supplement of the angle between `eta` and `eta - xi`.
    pub fn beta(&self) -> f64 {
        core::f64::consts::PI - self.eta.angle(-self.zeta())
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.xi.norm() > 0.0 && self.eta.norm() > 0.0 && self.zeta().norm() > 0.0
    }
}

pub fn phase(sp: SignPair, params: &DispersionParams, t: &FreqTriple) -> f64 {
    phase_radial(sp, params, t.xi.norm(), t.zeta().norm(), t.eta.norm())
}

/// Phase from the three magnitudes `|xi|`, `|xi - eta|`, `|eta|`.
#[inline]
pub fn phase_radial(sp: SignPair, params: &DispersionParams, a: f64, b: f64, c: f64) -> f64 {
    params.p(a) + sp.sr() * params.p(b) + sp.sl() * params.p(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Variable {
    Xi,
    Eta,
}

fn check(t: &FreqTriple) -> Result<(f64, f64, f64)> {
    let a = t.xi.norm();
    let b = t.zeta().norm();
    let c = t.eta.norm();
    if a > 0.0 && b > 0.0 && c > 0.0 {
        Ok((a, b, c))
    } else {
        Err(Error::SingularDerivative)
    }
}

pub fn phase_gradient(
    sp: SignPair,
    params: &DispersionParams,
    t: &FreqTriple,
    wrt: Variable,
) -> Result<Vec3> {
    let (a, b, c) = check(t)?;
    let z = t.zeta();
    Ok(match wrt {
        Variable::Xi => t.xi * (params.dp(a) / a) + z * (sp.sr() * params.dp(b) / b),
        Variable::Eta => z * (-sp.sr() * params.dp(b) / b) + t.eta * (sp.sl() * params.dp(c) / c),
    })
}

/// `Delta p(|x|) = p'' + 2 p' / |x|` in three dimensions.
#[inline]
pub fn radial_laplacian(params: &DispersionParams, r: f64) -> f64 {
    params.d2p(r) + 2.0 * params.dp(r) / r
}

pub fn phase_laplacian(
    sp: SignPair,
    params: &DispersionParams,
    t: &FreqTriple,
    wrt: Variable,
) -> Result<f64> {
    let (a, b, c) = check(t)?;
    Ok(match wrt {
        Variable::Xi => radial_laplacian(params, a) + sp.sr() * radial_laplacian(params, b),
        Variable::Eta => sp.sr() * radial_laplacian(params, b) + sp.sl() * radial_laplacian(params, c),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn par(s: f64) -> DispersionParams {
        DispersionParams::new(s).unwrap()
    }

    #[test]
    fn phase_examples() {
        let p = par(1.0);
        let xi = Vec3::new(1.0, 0.0, 0.0);
        let t = FreqTriple::new(xi, xi);
        assert_eq!(phase(SignPair { r: 1, l: 1 }, &p, &t), 0.0);
        let t = FreqTriple::new(xi, Vec3::new(0.2, 0.5, -0.1));
        assert!(phase(SignPair { r: 2, l: 2 }, &p, &t) >= p.p(1.0));
        // p(1) - 2 p(0.5) = sqrt(2) - 2 sqrt(0.25 + 0.5)
        let t = FreqTriple::new(xi, Vec3::new(0.5, 0.0, 0.0));
        let v = phase(SignPair { r: 1, l: 1 }, &p, &t);
        assert!((v - (-0.317_837_245_195_782_2)).abs() < 1e-15, "{v}");
    }

    #[test]
    fn collinear_gradient() {
        let p = par(0.7);
        let xi = Vec3::new(0.3, -1.2, 0.5);
        let t = FreqTriple::new(xi, xi * 2.0);
        let g = phase_gradient(SignPair { r: 1, l: 1 }, &p, &t, Variable::Xi).unwrap();
        let want = xi.unit() * (2.0 * p.dp(xi.norm()));
        assert!((g - want).norm() < 1e-14);
        let z = FreqTriple::new(xi, Vec3::ZERO);
        assert_eq!(
            phase_gradient(SignPair { r: 1, l: 1 }, &p, &z, Variable::Xi),
            Err(Error::SingularDerivative)
        );
    }

    #[test]
    fn law_of_sines() {
        let t = FreqTriple::new(Vec3::new(1.0, 0.3, -0.2), Vec3::new(0.4, -0.9, 0.6));
        let a = t.zeta().norm() / t.theta().sin();
        let b = t.xi.norm() / t.beta().sin();
        let c = t.eta.norm() / t.gamma().sin();
        assert!((a - b).abs() < 1e-10 && (a - c).abs() < 1e-10);
    }
}
