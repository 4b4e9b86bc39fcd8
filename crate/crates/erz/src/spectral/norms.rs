use std::collections::BTreeMap;

use erz_core::DispersionParams;
use serde::{Deserialize, Serialize};

use super::field::SpectralField;
use super::grid::GridSpec;
use super::multiplier::{apply_multiplier, MultiplierSpec};
use crate::error::{ErzError, Result};

/// Relative size of a zero mode still treated as mean-zero.
pub const MEAN_ZERO_TOL: f64 = 1e-12;

fn check_components(fields: &[SpectralField]) -> Result<GridSpec> {
    let first = fields
        .first()
        .ok_or_else(|| ErzError::Invalid("norm of an empty component list".into()))?;
    for f in &fields[1..] {
        first.check_grid(f)?;
    }
    Ok(*first.grid())
}

fn require_mean_zero(fields: &[SpectralField]) -> Result<()> {
    for f in fields {
        if !f.is_mean_zero(MEAN_ZERO_TOL) {
            return Err(ErzError::NotMeanZero(f.zero_mode().norm()));
        }
    }
    Ok(())
}

/// `L^p` norm of pointwise Euclidean magnitudes; `p = inf` takes the grid max.
pub fn lp_of_values(grid: &GridSpec, comps: &[Vec<f64>], p: f64) -> f64 {
    let m = grid.len();
    if p.is_infinite() {
        return (0..m)
            .map(|i| comps.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
    }
    let mut acc = 0.0;
    for i in 0..m {
        let s: f64 = comps.iter().map(|c| c[i] * c[i]).sum();
        acc += s.powf(0.5 * p);
    }
    (acc * grid.cell_volume()).powf(1.0 / p)
}

pub fn lp_norm(fields: &[SpectralField], p: f64) -> Result<f64> {
    let g = check_components(fields)?;
    let comps: Vec<Vec<f64>> = fields.iter().map(|f| f.to_real()).collect();
    Ok(lp_of_values(&g, &comps, p))
}

/// `( L^d sum_k w(|xi_k|)^2 |c_k|^2 )^(1/2)` over all components; `w0` at `xi = 0`.
pub fn weighted_l2(fields: &[SpectralField], w0: f64, w: impl Fn(f64) -> f64) -> Result<f64> {
    let g = check_components(fields)?;
    let weights: Vec<f64> = (0..g.len())
        .map(|i| if i == 0 { w0 } else { w(g.xi_norm(i)) })
        .collect();
    let mut acc = 0.0;
    for f in fields {
        for (c, wk) in f.coeffs().iter().zip(&weights) {
            acc += wk * wk * c.norm_sqr();
        }
    }
    Ok((g.volume() * acc).sqrt())
}

/// Inhomogeneous `H^s`.
pub fn h_norm(fields: &[SpectralField], s: f64) -> Result<f64> {
    weighted_l2(fields, 1.0, |r| (1.0 + r * r).powf(0.5 * s))
}

/// Homogeneous `H^s`; negative `s` requires mean-zero input.
pub fn hdot_norm(fields: &[SpectralField], s: f64) -> Result<f64> {
    if s < 0.0 {
        require_mean_zero(fields)?;
    }
    let w0 = if s == 0.0 { 1.0 } else { 0.0 };
    weighted_l2(fields, w0, |r| r.powf(s))
}

/// `sum_{a = 0..=s} || |D|^a f ||_{L^p}`.
pub fn wsp_norm(fields: &[SpectralField], s: u32, p: f64) -> Result<f64> {
    let g = check_components(fields)?;
    let mut total = 0.0;
    for a in 0..=s {
        let m = MultiplierSpec::abs_grad(a as f64);
        let comps = fields
            .iter()
            .map(|f| Ok(apply_multiplier(f, &m)?.to_real()))
            .collect::<Result<Vec<_>>>()?;
        total += lp_of_values(&g, &comps, p);
    }
    Ok(total)
}

/// `|| (1 + n)^(-1/2) |D|^s f ||_{L^2}`.
pub fn modified_hdot(fields: &[SpectralField], s: f64, weight_n: &SpectralField) -> Result<f64> {
    let g = check_components(fields)?;
    weight_n.check_grid(&fields[0])?;
    let n = weight_n.to_real();
    let min = n.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= -1.0 {
        return Err(ErzError::VacuumCrossing(-min));
    }
    let m = MultiplierSpec::abs_grad(s);
    let comps = fields
        .iter()
        .map(|f| {
            let v = apply_multiplier(f, &m)?.to_real();
            Ok(v.iter().zip(&n).map(|(x, w)| x / (1.0 + w).sqrt()).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(lp_of_values(&g, &comps, 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormConfig {
    pub sigma: f64,
    pub s: u32,
    pub lebesgue_p: f64,
    /// Time fed to the `(1 + t)^beta` weight of the X norm.
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub norms: BTreeMap<String, f64>,
    pub grid: GridSpec,
    pub config: NormConfig,
    pub beta: f64,
}

impl NormReport {
    pub fn get(&self, key: &str) -> f64 {
        self.norms.get(key).copied().unwrap_or(f64::NAN)
    }

    pub fn csv_header(&self) -> Vec<String> {
        let mut h = vec!["t".to_string(), "sigma".into(), "s".into(), "p".into()];
        h.extend(self.norms.keys().cloned());
        h
    }

    pub fn csv_row(&self) -> Vec<String> {
        let c = &self.config;
        let mut r = vec![
            format!("{:e}", c.t),
            format!("{}", c.sigma),
            format!("{}", c.s),
            format!("{}", c.lebesgue_p),
        ];
        r.extend(self.norms.values().map(|v| format!("{v:e}")));
        r
    }
}

/// Every norm of the bootstrap argument for one (vector-valued) field.
///
/// Keys: `l2`, `linf`, `lp`, `wsp`, `h2s`, `hdot_neg`, `y`, `x_raw`,
/// `x_weighted`, and with a density weight `hdot_s` and `hcal_s`.
pub fn norm_suite(
    fields: &[SpectralField],
    cfg: &NormConfig,
    weight_n: Option<&SpectralField>,
) -> Result<NormReport> {
    let g = check_components(fields)?;
    let params = DispersionParams::new(cfg.sigma)?;
    let beta = params.beta_exponent(cfg.lebesgue_p)?.beta;
    require_mean_zero(fields)?;
    let neg = -(2.0 - cfg.sigma) / 2.0;
    let two_s = 2.0 * cfg.s as f64;
    let mut norms = BTreeMap::new();
    norms.insert("l2".to_string(), hdot_norm(fields, 0.0)?);
    norms.insert("linf".into(), lp_norm(fields, f64::INFINITY)?);
    norms.insert("lp".into(), lp_norm(fields, cfg.lebesgue_p)?);
    let wsp = wsp_norm(fields, cfg.s, cfg.lebesgue_p)?;
    norms.insert("wsp".into(), wsp);
    norms.insert("h2s".into(), h_norm(fields, two_s)?);
    norms.insert("hdot_neg".into(), hdot_norm(fields, neg)?);
    let y = weighted_l2(fields, 0.0, |r| r.powf(neg) * (1.0 + r * r).powf(0.5 * two_s))?;
    norms.insert("y".into(), y);
    norms.insert("x_raw".into(), y + wsp);
    norms.insert("x_weighted".into(), y + (1.0 + cfg.t).powf(beta) * wsp);
    if let Some(w) = weight_n {
        norms.insert("hdot_s".into(), hdot_norm(fields, cfg.s as f64)?);
        norms.insert("hcal_s".into(), modified_hdot(fields, cfg.s as f64, w)?);
    }
    for (k, v) in &norms {
        if !(v.is_finite() && *v >= 0.0) {
            return Err(ErzError::Invalid(format!("norm {k} evaluated to {v}")));
        }
    }
    Ok(NormReport {
        norms,
        grid: g,
        config: *cfg,
        beta,
    })
}
