//! Pointwise ratios for the lower bounds on `|p(a) - p(b) - p(c)|` and the
//! upper bounds on the first and second derivatives of `Phi_{1,1}`.
//!
//! Sampling lives in the std crate; everything here is a closed-form
//! evaluation at a single configuration.

#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::float::Float as _;

use crate::dispersion::DispersionParams;
use crate::error::Result;
use crate::phase::{phase_gradient, phase_laplacian, FreqTriple, SignPair, Variable};
use crate::vec3::Vec3;

/// Hypothesis branch of the phase lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LowerRegime {
    /// `|b| >= 1`.
    BLarge,
    /// `|c| < 1`.
    CSmall,
}

impl LowerRegime {
    pub const ALL: [LowerRegime; 2] = [LowerRegime::BLarge, LowerRegime::CSmall];

    pub fn label(self) -> &'static str {
        match self {
            LowerRegime::BLarge => "b_large",
            LowerRegime::CSmall => "c_small",
        }
    }
}

/// `1 - cos(theta)` without cancellation for small angles.
#[inline]
fn one_minus_cos(theta: f64) -> f64 {
    let s = (0.5 * theta).sin();
    2.0 * s * s
}

/// `p(|b + c|) - p(|b|) - p(|c|)`.
///
/// The difference `p(|a|) - p(|b|)` is formed from `|a|^2 - |b|^2 = c.(2b + c)`
/// so that it stays accurate when `|c|` is many orders below `|b|`.
pub fn phase_gap(params: &DispersionParams, b: Vec3, c: Vec3) -> f64 {
    let a = b + c;
    let na = a.norm();
    let nb = b.norm();
    let nc = c.norm();
    let e = 2.0 - params.sigma();
    let pa = params.p(na);
    let pb = params.p(nb);
    let diff_sq = c.dot(b * 2.0 + c);
    let dpab = if nb > 0.0 && na > 0.0 {
        let d = diff_sq / (na + nb);
        // a^e - b^e = b^e (exp(e ln(1 + d / b)) - 1)
        let pow_diff = nb.powf(e) * (e * (d / nb).ln_1p()).exp_m1();
        (diff_sq + pow_diff) / (pa + pb)
    } else {
        pa - pb
    };
    dpab - params.p(nc)
}

/// Right-hand side of the lower bound in the given regime.
pub fn lower_bound_rhs(params: &DispersionParams, regime: LowerRegime, b: Vec3, c: Vec3) -> f64 {
    let s = params.sigma();
    let a = b + c;
    let nc = c.norm();
    match regime {
        LowerRegime::BLarge => {
            let na = a.norm();
            nc / (1.0 + (na * nc).powf(s))
                + nc * (one_minus_cos(a.angle(c)) + one_minus_cos(a.angle(b)))
        }
        LowerRegime::CSmall => nc.powf(1.0 - 0.5 * s) / (1.0 + b.norm().powf(s)).sqrt(),
    }
}

/// `|c| <= min(|a|, |b|)` together with the regime condition.
pub fn lower_bound_admissible(regime: LowerRegime, b: Vec3, c: Vec3) -> bool {
    let nb = b.norm();
    let nc = c.norm();
    let na = (b + c).norm();
    if !(nc > 0.0 && nc <= na && nc <= nb) {
        return false;
    }
    match regime {
        LowerRegime::BLarge => nb >= 1.0,
        LowerRegime::CSmall => nc < 1.0,
    }
}

/// `|p(a) - p(b) - p(c)| / RHS`, or `None` outside the hypothesis.
pub fn lower_bound_ratio(
    params: &DispersionParams,
    regime: LowerRegime,
    b: Vec3,
    c: Vec3,
) -> Option<f64> {
    if !lower_bound_admissible(regime, b, c) {
        return None;
    }
    Some(phase_gap(params, b, c).abs() / lower_bound_rhs(params, regime, b, c))
}

/// One of the displayed derivative bounds on `Phi_{1,1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DerivativeBound {
    GradXiHigh,
    GradXiLow,
    GradEtaHigh,
    GradEtaLow,
    LapXiHigh,
    LapXiLow,
    LapEtaHigh,
    LapEtaLow,
    /// Sharper gradient bound for `min(|xi|, |xi - eta|) < 1`.
    GradXiReplacement,
    /// Sharper Laplacian bound for `min(|xi|, |xi - eta|) < 1`.
    LapXiReplacement,
}

impl DerivativeBound {
    pub const ALL: [DerivativeBound; 10] = [
        DerivativeBound::GradXiHigh,
        DerivativeBound::GradXiLow,
        DerivativeBound::GradEtaHigh,
        DerivativeBound::GradEtaLow,
        DerivativeBound::LapXiHigh,
        DerivativeBound::LapXiLow,
        DerivativeBound::LapEtaHigh,
        DerivativeBound::LapEtaLow,
        DerivativeBound::GradXiReplacement,
        DerivativeBound::LapXiReplacement,
    ];

    pub fn label(self) -> &'static str {
        match self {
            DerivativeBound::GradXiHigh => "grad_xi_high",
            DerivativeBound::GradXiLow => "grad_xi_low",
            DerivativeBound::GradEtaHigh => "grad_eta_high",
            DerivativeBound::GradEtaLow => "grad_eta_low",
            DerivativeBound::LapXiHigh => "lap_xi_high",
            DerivativeBound::LapXiLow => "lap_xi_low",
            DerivativeBound::LapEtaHigh => "lap_eta_high",
            DerivativeBound::LapEtaLow => "lap_eta_low",
            DerivativeBound::GradXiReplacement => "grad_xi_replacement",
            DerivativeBound::LapXiReplacement => "lap_xi_replacement",
        }
    }

    pub fn is_replacement(self) -> bool {
        matches!(
            self,
            DerivativeBound::GradXiReplacement | DerivativeBound::LapXiReplacement
        )
    }

    pub fn variable(self) -> Variable {
        match self {
            DerivativeBound::GradEtaHigh
            | DerivativeBound::GradEtaLow
            | DerivativeBound::LapEtaHigh
            | DerivativeBound::LapEtaLow => Variable::Eta,
            _ => Variable::Xi,
        }
    }

    pub fn is_laplacian(self) -> bool {
        matches!(
            self,
            DerivativeBound::LapXiHigh
                | DerivativeBound::LapXiLow
                | DerivativeBound::LapEtaHigh
                | DerivativeBound::LapEtaLow
                | DerivativeBound::LapXiReplacement
        )
    }

    /// Whether the bound requires `min >= 1` (high) or `min < 1` (low).
    pub fn is_high(self) -> bool {
        matches!(
            self,
            DerivativeBound::GradXiHigh
                | DerivativeBound::GradEtaHigh
                | DerivativeBound::LapXiHigh
                | DerivativeBound::LapEtaHigh
        )
    }

    /// The magnitude entering the case split: `min(|xi|, |xi-eta|)` for xi
    /// bounds and `min(|eta|, |xi-eta|)` for eta bounds.
    pub fn case_min(self, t: &FreqTriple) -> f64 {
        let z = t.zeta().norm();
        match self.variable() {
            Variable::Xi => t.xi.norm().min(z),
            Variable::Eta => t.eta.norm().min(z),
        }
    }

    pub fn applies(self, t: &FreqTriple) -> bool {
        let m = self.case_min(t);
        if self.is_high() {
            m >= 1.0
        } else {
            m < 1.0
        }
    }

    /// Analytic `|grad Phi|` or `|Delta Phi|` with `Phi = Phi_{1,1}`.
    pub fn lhs(self, params: &DispersionParams, t: &FreqTriple) -> Result<f64> {
        let sp = SignPair { r: 1, l: 1 };
        if self.is_laplacian() {
            phase_laplacian(sp, params, t, self.variable()).map(f64::abs)
        } else {
            phase_gradient(sp, params, t, self.variable()).map(Vec3::norm)
        }
    }

    pub fn rhs(self, params: &DispersionParams, t: &FreqTriple) -> f64 {
        let s = params.sigma();
        let nx = t.xi.norm();
        let ne = t.eta.norm();
        let z = t.zeta();
        let nz = z.norm();
        let m = self.case_min(t);
        let weight = 1f64.max(nz.powf(-0.5 * s));
        let half_sin = |theta: f64| 2.0 * (0.5 * theta).sin();
        match self {
            DerivativeBound::GradXiHigh => ne + half_sin(t.gamma()),
            DerivativeBound::GradXiLow => m.powf(-0.5 * s) + weight * half_sin(t.gamma()),
            DerivativeBound::GradEtaHigh => nx + half_sin(t.eta.angle(z)),
            DerivativeBound::GradEtaLow => m.powf(-0.5 * s) + weight * half_sin(t.eta.angle(z)),
            DerivativeBound::LapXiHigh => ne,
            DerivativeBound::LapEtaHigh => nx,
            DerivativeBound::LapXiLow | DerivativeBound::LapEtaLow => m.powf(-1.0 - 0.5 * s),
            DerivativeBound::GradXiReplacement => {
                ne * m.powf(-1.0 - 0.5 * s) + weight * half_sin(t.gamma())
            }
            DerivativeBound::LapXiReplacement => {
                ne * m.powf(-2.0 - 0.5 * s) + ne.powf(1.0 + 0.5 * s) * m.powf(-2.0 - s)
            }
        }
    }

    /// `LHS / RHS`, or `None` when the configuration is outside the case.
    pub fn ratio(self, params: &DispersionParams, t: &FreqTriple) -> Result<Option<f64>> {
        if !self.applies(t) {
            return Ok(None);
        }
        let lhs = self.lhs(params, t)?;
        Ok(Some(lhs / self.rhs(params, t)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn par(s: f64) -> DispersionParams {
        DispersionParams::new(s).unwrap()
    }

    #[test]
    fn gap_matches_naive_where_naive_is_accurate() {
        let p = par(1.0);
        let b = Vec3::new(1.3, -0.4, 0.2);
        let c = Vec3::new(0.2, 0.5, -0.1);
        let naive = p.p((b + c).norm()) - p.p(b.norm()) - p.p(c.norm());
        assert!((phase_gap(&p, b, c) - naive).abs() < 1e-14);
    }

    #[test]
    fn gap_accurate_at_large_separation() {
        // Collinear b, c with |b| = 1e6, |c| = 1e3: the gap is about -0.016,
        // so one ulp of p(|b|) is already a 1e-8 relative error.
        let p = par(1.5);
        let b = Vec3::new(1e6, 0.0, 0.0);
        let c = Vec3::new(1e3, 0.0, 0.0);
        let gap = phase_gap(&p, b, c);
        // Series in 1/r: p(r) = r + r^(1-s)/2 - r^(1-2s)/8 + ...
        let s = 1.5;
        let f = |r: f64| 0.5 * r.powf(1.0 - s) - r.powf(1.0 - 2.0 * s) / 8.0;
        let approx = f(1.001e6) - f(1e6) - f(1e3);
        assert!(((gap - approx) / approx).abs() < 1e-9, "{gap} {approx}");
        assert!(gap < 0.0);
    }

    #[test]
    fn collinear_doubling_is_admissible() {
        let p = par(0.5);
        let c = Vec3::new(0.3, 0.1, 0.0);
        for regime in [LowerRegime::CSmall] {
            let r = lower_bound_ratio(&p, regime, c, c).unwrap();
            assert!(r.is_finite() && r > 0.0);
        }
        let c = Vec3::new(2.0, 0.0, 0.0);
        let r = lower_bound_ratio(&p, LowerRegime::BLarge, c, c).unwrap();
        assert!(r.is_finite() && r > 0.0);
        assert!(lower_bound_ratio(&p, LowerRegime::BLarge, c * 0.1, c).is_none());
    }

    #[test]
    fn gradient_vanishes_linearly_in_eta() {
        let p = par(1.0);
        let xi = Vec3::new(2.0, 1.0, -0.5);
        let dir = Vec3::new(0.3, -0.7, 0.2);
        let mut prev = None;
        for k in 1..6 {
            let h = 10f64.powi(-k);
            let t = FreqTriple::new(xi, dir * h);
            let lhs = DerivativeBound::GradXiHigh.lhs(&p, &t).unwrap();
            if let Some(q) = prev {
                let r: f64 = q / lhs;
                assert!((r - 10.0).abs() < 0.1, "{r}");
            }
            prev = Some(lhs);
        }
    }

    #[test]
    fn eta_laplacian_does_not_cancel_as_xi_vanishes() {
        // Delta_eta Phi_{1,1} = -Delta p(|xi-eta|) - Delta p(|eta|): a sum,
        // not a difference, so it tends to -2 Delta p(|eta|) while |xi| -> 0.
        let p = par(1.0);
        let eta = Vec3::new(3.0, 0.0, 1.0);
        let mut last = 0.0;
        for k in 1..5 {
            let xi = Vec3::new(0.0, 10f64.powi(-k), 0.0);
            let t = FreqTriple::new(xi, eta);
            last = DerivativeBound::LapEtaHigh.ratio(&p, &t).unwrap().unwrap();
        }
        assert!(last > 1e3);
    }

    #[test]
    fn case_split() {
        let t = FreqTriple::new(Vec3::new(0.5, 0.0, 0.0), Vec3::new(0.0, 2.0, 0.0));
        assert!(DerivativeBound::GradXiLow.applies(&t));
        assert!(!DerivativeBound::GradXiHigh.applies(&t));
        assert!(DerivativeBound::GradEtaHigh.applies(&t));
        assert!(DerivativeBound::GradXiReplacement.applies(&t));
    }
}
