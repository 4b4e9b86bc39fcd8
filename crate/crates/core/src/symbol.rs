//! Fourier symbols of the quadratic nonlinearity written in the profile
//! variables `alpha_1 = alpha`, `alpha_2 = conj(alpha)`.
//!
//! With `n = (|D|/p)(alpha + conj alpha)/2` and `u = (i D/|D|)(alpha - conj alpha)/2`
//! the quadratic part of the profile equation is
//! `sum_{r,l} sum_eta m_{r,l}(xi, eta) alpha_r(xi - eta) alpha_l(eta)` with
//!
//! ```text
//! m_{r,l} = i ( -(-1)^l m1 / 4 + m2 / 8 + (-1)^(r+l) m3 / 8 )
//! m1 = p(xi) |xi-eta| / p(xi-eta) * (xi.eta) / (|xi| |eta|)
//! m2 = |xi| |xi-eta| |eta| / (p(xi-eta) p(eta))
//! m3 = |xi| ((xi-eta).eta) / (|xi-eta| |eta|)
//! ```
//!
//! The first slot carries the density, the second the velocity of the
//! transport term. The symmetrized symbol averages a pair with its partner
//! under `eta -> xi - eta`, which also swaps `r` and `l`.

use num_complex::Complex64;

use crate::dispersion::DispersionParams;
use crate::error::{Error, Result};
use crate::phase::{FreqTriple, SignPair};

/// The three real building blocks `(m1, m2, m3)`; zero at `xi = 0`.
pub fn components(params: &DispersionParams, t: &FreqTriple) -> Result<[f64; 3]> {
    let z = t.zeta();
    let a = t.xi.norm();
    let b = z.norm();
    let c = t.eta.norm();
    if b == 0.0 || c == 0.0 {
        return Err(Error::DegenerateTriple);
    }
    if a == 0.0 {
        return Ok([0.0; 3]);
    }
    let pb = params.p(b);
    let m1 = params.p(a) * (b / pb) * t.xi.dot(t.eta) / (a * c);
    let m2 = a * b * c / (pb * params.p(c));
    let m3 = a * z.dot(t.eta) / (b * c);
    Ok([m1, m2, m3])
}

fn combine(sp: SignPair, m: [f64; 3]) -> Complex64 {
    let sl = sp.sl();
    let srl = sp.sr() * sp.sl();
    Complex64::new(0.0, -sl * m[0] / 4.0 + m[1] / 8.0 + srl * m[2] / 8.0)
}

/// Unsymmetrized symbol.
pub fn symbol_raw(sp: SignPair, params: &DispersionParams, t: &FreqTriple) -> Result<Complex64> {
    Ok(combine(sp, components(params, t)?))
}

/// Symmetrized symbol; satisfies `m_{r,l}(xi, eta) = m_{l,r}(xi, xi - eta)`.
pub fn symbol_m(sp: SignPair, params: &DispersionParams, t: &FreqTriple) -> Result<Complex64> {
    let a = symbol_raw(sp, params, t)?;
    let b = symbol_raw(sp.swapped(), params, &t.swapped())?;
    Ok(0.5 * (a + b))
}

/// All four symmetrized symbols in [`SignPair::ALL`] order, sharing the
/// component evaluations.
pub fn symbols_all(params: &DispersionParams, t: &FreqTriple) -> Result<[Complex64; 4]> {
    let m = components(params, t)?;
    let w = components(params, &t.swapped())?;
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for sp in SignPair::ALL {
        out[sp.index()] = 0.5 * (combine(sp, m) + combine(sp.swapped(), w));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec3::Vec3;

    #[test]
    fn ortho_kills_first_component() {
        let p = DispersionParams::new(1.0).unwrap();
        let t = FreqTriple::new(Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 2.0, 0.0));
        assert_eq!(components(&p, &t).unwrap()[0], 0.0);
    }

    #[test]
    fn partner_symmetry() {
        let p = DispersionParams::new(1.3).unwrap();
        let t = FreqTriple::new(Vec3::new(0.7, -0.2, 1.1), Vec3::new(-0.3, 0.8, 0.4));
        for sp in SignPair::ALL {
            let a = symbol_m(sp, &p, &t).unwrap();
            let b = symbol_m(sp.swapped(), &p, &t.swapped()).unwrap();
            assert!((a - b).norm() < 1e-15);
        }
        let all = symbols_all(&p, &t).unwrap();
        for sp in SignPair::ALL {
            assert!((all[sp.index()] - symbol_m(sp, &p, &t).unwrap()).norm() < 1e-15);
        }
    }
}
