//! The linear group `e^{itp(|D|)}`: exact propagation on the grid, the
//! whole-space kernel by radial oscillatory quadrature, and decay fits.

use std::f64::consts::PI;

use erz_core::cutoff::{cutoff, dyadic, ShellPart, ShellWindow};
use erz_core::fit::fit_decay;
use erz_core::quad::GaussLegendre;
use erz_core::{DecayFit, DispersionParams};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ErzError, Result};
use crate::spectral::norms::lp_of_values;
use crate::spectral::{GridSpec, SpectralField};

/// Node budget of a single radial quadrature.
pub const MAX_QUAD_NODES: f64 = 1e8;
const PANEL_ORDER: usize = 16;

/// Multiplies every coefficient by `e^{itp(|xi|)}`.
pub fn propagate(field: &SpectralField, params: &DispersionParams, t: f64) -> SpectralField {
    let g = *field.grid();
    let coeffs = field
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| c * Complex64::from_polar(1.0, t * params.p(g.xi_norm(i))))
        .collect();
    let mut out = SpectralField::from_coeffs(g, coeffs, false).expect("same grid");
    out.set_hermitian(field.is_hermitian() && t == 0.0);
    out
}

/// Compactly supported radial profile used as the frequency window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Window {
    /// `psi(r/N) - psi(2r/N)` on `[N/2, 2N]`.
    Dyadic { n: f64 },
    /// 1 on `[center - half/2, center + half/2]`, 0 beyond `half` from `center`.
    Bump { center: f64, half: f64 },
    /// The shell window around the degenerate radius.
    Shell { shell: ShellWindow },
    /// Inner or outer part of the degenerate partition, cut to one annulus.
    Part {
        shell: ShellWindow,
        part: ShellPart,
        n: f64,
    },
}

impl Window {
    pub fn degenerate_shell(params: &DispersionParams, eps: f64) -> Result<Self> {
        let r0 = params.degenerate_point()?;
        Ok(Window::Shell {
            shell: ShellWindow::new(r0, eps)?,
        })
    }

    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            Window::Dyadic { n } => dyadic(r, n).v,
            Window::Bump { center, half } => cutoff(2.0 * (r - center).abs() / half).v,
            Window::Shell { shell } => shell.shell(r).v,
            Window::Part { shell, part, n } => shell.part(part, r).v * dyadic(r, n).v,
        }
    }

    pub fn support(&self) -> Result<(f64, f64)> {
        let (a, b) = match *self {
            Window::Dyadic { n } => (0.5 * n, 2.0 * n),
            Window::Bump { center, half } => ((center - half).max(0.0), center + half),
            Window::Shell { shell } => shell.support(ShellPart::Shell),
            Window::Part { shell, part, n } => {
                let (a, b) = shell.support(part);
                (a.max(0.5 * n), b.min(2.0 * n))
            }
        };
        if !(b > a) || !(a >= 0.0) {
            return Err(ErzError::EmptyBand(a, b));
        }
        Ok((a, b))
    }

    /// Shortest transition length of the profile.
    pub fn feature_length(&self) -> f64 {
        match *self {
            Window::Dyadic { n } => 0.25 * n,
            Window::Bump { half, .. } => 0.5 * half,
            Window::Shell { shell } => shell.eps,
            Window::Part { shell, n, .. } => shell.eps.min(0.25 * n),
        }
    }

    pub fn id(&self) -> String {
        match *self {
            Window::Dyadic { n } => format!("dyadic_{n}"),
            Window::Bump { center, half } => format!("bump_{center}_{half}"),
            Window::Shell { shell } => format!("shell_eps{}", shell.eps),
            Window::Part { shell, part, n } => {
                let p = match part {
                    ShellPart::Inner => "inner",
                    ShellPart::Shell => "shell",
                    ShellPart::Outer => "outer",
                };
                format!("{p}_eps{}_n{n}", shell.eps)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    /// Gauss nodes per `2 pi` of the fastest local phase.
    pub panels_per_oscillation: usize,
    pub max_radius: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            panels_per_oscillation: 8,
            max_radius: 1e3,
        }
    }
}

/// Maximum of `p'` on `[a, b]`; `p'` is smooth there, so dense sampling
/// followed by golden-section polishing of the best cell suffices.
pub fn max_group_velocity(params: &DispersionParams, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(ErzError::UnboundedGroupVelocity(a));
    }
    if !(b >= a) {
        return Err(ErzError::EmptyBand(a, b));
    }
    if b == a {
        return Ok(params.dp(a));
    }
    let m = 256;
    let h = (b - a) / m as f64;
    let (mut best, mut arg) = (f64::NEG_INFINITY, 0);
    for i in 0..=m {
        let v = params.dp(a + h * i as f64);
        if v > best {
            best = v;
            arg = i;
        }
    }
    let mut lo = (a + h * (arg as f64 - 1.0)).max(a);
    let mut hi = (a + h * (arg as f64 + 1.0)).min(b);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if params.dp(x1) > params.dp(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    Ok(best.max(params.dp(0.5 * (lo + hi))))
}

/// Panel count for `[a, b]` under local phase rate `rate`, never coarser
/// than `per_osc` panels per feature length of the window.
fn panel_count(rate: f64, a: f64, b: f64, per_osc: usize, feature: f64) -> f64 {
    let osc = (rate * (b - a) / (2.0 * PI) * per_osc as f64 / PANEL_ORDER as f64).ceil() + 4.0;
    osc.max((per_osc as f64 * (b - a) / feature).ceil())
}

/// `F^{-1}(e^{itp(|xi|)} W(|xi|))(x)` with `|x| = x_norm` in three dimensions,
/// normalized so that `f(x) = (2 pi)^{-3} int e^{ix.xi} f^(xi) dxi`.
///
/// The radial reduction with `J_{1/2}(s) = sqrt(2/(pi s)) sin s` gives
/// `(2 pi^2 |x|)^{-1} int e^{itp(r)} W(r) r sin(r |x|) dr`.
pub fn fundamental_value(
    params: &DispersionParams,
    window: &Window,
    t: f64,
    x_norm: f64,
    quad: &QuadSpec,
) -> Result<Complex64> {
    if quad.panels_per_oscillation < 8 {
        return Err(ErzError::Invalid(format!(
            "panels_per_oscillation = {} (need >= 8)",
            quad.panels_per_oscillation
        )));
    }
    let (a, b) = window.support()?;
    let b = b.min(quad.max_radius);
    let a_eff = a.max(1e-12 * b);
    let rate = t.abs() * max_group_velocity(params, a_eff, b)? + x_norm;
    let panels = panel_count(rate, a, b, quad.panels_per_oscillation, window.feature_length());
    let nodes = panels * PANEL_ORDER as f64;
    if nodes > MAX_QUAD_NODES {
        return Err(ErzError::QuadratureBudget {
            t,
            x: x_norm,
            nodes,
        });
    }
    let panels = panels as usize;
    let gl = GaussLegendre::new(PANEL_ORDER);
    let h = (b - a) / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..panels {
        let lo = a + h * k as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (r, w) in gl.mapped(lo, lo + h) {
            let wr = window.eval(r);
            if wr == 0.0 {
                continue;
            }
            let radial = if x_norm > 0.0 {
                r * (r * x_norm).sin() / x_norm
            } else {
                r * r
            };
            acc += Complex64::from_polar(w * wr * radial, t * params.p(r));
        }
        total += acc;
    }
    Ok(total / (2.0 * PI * PI))
}

/// Evaluation points along a ray.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "snake_case")]
pub enum Rays {
    /// `|x| = v t` for each speed `v`.
    Speeds(Vec<f64>),
    /// Fixed radii.
    Points(Vec<f64>),
}

impl Rays {
    pub fn radii(&self, t: f64) -> Vec<f64> {
        match self {
            Rays::Speeds(v) => v.iter().map(|s| s * t).collect(),
            Rays::Points(p) => p.clone(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Rays::Speeds(v) | Rays::Points(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Group speeds `p'(r_i)` at `count` evenly spaced radii of the window support.
pub fn group_speed_fan(params: &DispersionParams, window: &Window, count: usize) -> Result<Rays> {
    let (a, b) = window.support()?;
    let a = a.max(1e-9 * b);
    let v = (0..count)
        .map(|i| {
            let r = a + (b - a) * (i as f64 + 0.5) / count as f64;
            params.dp(r)
        })
        .collect();
    Ok(Rays::Speeds(v))
}

/// The critical ray `|x| = p'(r0) t` together with `{0.8, ..., 1.2} p'(r0) t`.
pub fn critical_fan(params: &DispersionParams) -> Result<(f64, Rays)> {
    let r0 = params.degenerate_point()?;
    let v0 = params.dp(r0);
    let fan = [1.0, 0.8, 0.9, 1.1, 1.2].iter().map(|f| f * v0).collect();
    Ok((v0, Rays::Speeds(fan)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatorySpec {
    pub window: Window,
    pub t_samples: Vec<f64>,
    pub rays: Rays,
    pub quad: QuadSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeRow {
    pub t: f64,
    /// Largest modulus over the rays.
    pub amplitude: f64,
    /// Modulus on the first ray.
    pub first_ray: f64,
    pub argmax_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatoryDecay {
    pub sigma: f64,
    pub window_id: String,
    pub rows: Vec<AmplitudeRow>,
    /// Fit of the sup over rays.
    pub fit: DecayFit,
    /// Fit of the first ray alone.
    pub first_ray_fit: DecayFit,
}

/// Evaluates the kernel on every `(t, ray)` pair and fits the sup over rays.
pub fn oscillatory_decay(params: &DispersionParams, spec: &OscillatorySpec) -> Result<OscillatoryDecay> {
    for w in spec.t_samples.windows(2) {
        if !(w[1] > w[0]) {
            return Err(ErzError::Invalid("t_samples must be strictly increasing".into()));
        }
    }
    if spec.rays.is_empty() {
        return Err(ErzError::Invalid("empty ray set".into()));
    }
    let mut pairs = Vec::new();
    for (ti, &t) in spec.t_samples.iter().enumerate() {
        for x in spec.rays.radii(t) {
            pairs.push((ti, t, x));
        }
    }
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(_, t, x)| Ok(fundamental_value(params, &spec.window, t, x, &spec.quad)?.norm()))
        .collect::<Result<_>>()?;
    let per = spec.rays.len();
    let mut rows = Vec::with_capacity(spec.t_samples.len());
    for (ti, &t) in spec.t_samples.iter().enumerate() {
        let mut best = (f64::NEG_INFINITY, 0.0);
        let mut first = 0.0;
        for j in 0..per {
            let k = ti * per + j;
            let v = values[k];
            if j == 0 {
                first = v;
            }
            if v > best.0 {
                best = (v, pairs[k].2);
            }
        }
        rows.push(AmplitudeRow {
            t,
            amplitude: best.0,
            first_ray: first,
            argmax_radius: best.1,
        });
    }
    let fit = fit_decay(&rows.iter().map(|r| (r.t, r.amplitude)).collect::<Vec<_>>())?;
    let first_ray_fit = fit_decay(&rows.iter().map(|r| (r.t, r.first_ray)).collect::<Vec<_>>())?;
    Ok(OscillatoryDecay {
        sigma: params.sigma(),
        window_id: spec.window.id(),
        rows,
        fit,
        first_ray_fit,
    })
}

/// `L / (2 max_{[r_min, r_max]} p')`: the time after which the fastest
/// packet has crossed half the box.
pub fn wrap_time(grid: &GridSpec, params: &DispersionParams, band: (f64, f64)) -> Result<f64> {
    let (lo, hi) = band;
    if !(lo > 0.0) {
        return Err(ErzError::UnboundedGroupVelocity(lo));
    }
    Ok(grid.length / (2.0 * max_group_velocity(params, lo, hi)?))
}

/// Smallest and largest `|xi|` carrying a coefficient above `rel * max`.
pub fn active_band(field: &SpectralField, rel: f64) -> Result<(f64, f64)> {
    let g = field.grid();
    let cut = rel * field.max_abs();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for (i, c) in field.coeffs().iter().enumerate() {
        if c.norm() > cut {
            let r = g.xi_norm(i);
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    if !(hi >= lo) {
        return Err(ErzError::EmptyBand(lo, hi));
    }
    Ok((lo, hi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpDecay {
    pub sigma: f64,
    pub lebesgue_p: f64,
    pub beta: f64,
    pub band: (f64, f64),
    pub wrap_time: f64,
    pub fit: DecayFit,
}

/// `|| e^{itp} f ||_{L^p}` on the torus at each `t`, fitted as a power law.
pub fn lp_decay_experiment(
    params: &DispersionParams,
    lebesgue_p: f64,
    data: &SpectralField,
    t_samples: &[f64],
) -> Result<LpDecay> {
    let beta = params.beta_exponent(lebesgue_p)?.beta;
    let band = active_band(data, 1e-12)?;
    let wrap = wrap_time(data.grid(), params, band)?;
    if let Some(&t) = t_samples.iter().find(|&&t| t > wrap) {
        return Err(ErzError::WrapTime { t, wrap });
    }
    let g = *data.grid();
    let samples = t_samples
        .iter()
        .map(|&t| {
            let phys = propagate(data, params, t).to_physical();
            let comps = vec![
                phys.iter().map(|c| c.re).collect::<Vec<_>>(),
                phys.iter().map(|c| c.im).collect(),
            ];
            (t, lp_of_values(&g, &comps, lebesgue_p))
        })
        .collect::<Vec<_>>();
    let fit = fit_decay(&samples)?;
    Ok(LpDecay {
        sigma: params.sigma(),
        lebesgue_p,
        beta,
        band,
        wrap_time: wrap,
        fit,
    })
}

/// Radial frequency bump with plateau on the middle half of `[r1, r2]`.
pub fn band_bump(grid: GridSpec, r1: f64, r2: f64) -> Result<SpectralField> {
    if !(r2 > r1 && r1 > 0.0) {
        return Err(ErzError::EmptyBand(r1, r2));
    }
    let w = Window::Bump {
        center: 0.5 * (r1 + r2),
        half: 0.5 * (r2 - r1),
    };
    let mut f = SpectralField::from_fn(grid, true, |xi| {
        let r = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
        Complex64::new(w.eval(r), 0.0)
    });
    f.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
    Ok(f.dealiased())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_support_and_plateau() {
        let w = Window::Bump {
            center: 1.0,
            half: 0.4,
        };
        assert_eq!(w.eval(1.1), 1.0);
        assert_eq!(w.eval(1.41), 0.0);
        assert!(w.eval(1.3) > 0.0 && w.eval(1.3) < 1.0);
        assert_eq!(w.support().unwrap(), (0.6, 1.4));
    }

    #[test]
    fn group_velocity_max() {
        let p = DispersionParams::new(1.0).unwrap();
        // p' is decreasing for sigma <= 1.
        let v = max_group_velocity(&p, 0.5, 2.0).unwrap();
        assert!((v - p.dp(0.5)).abs() < 1e-12);
        assert!(max_group_velocity(&p, 0.0, 1.0).is_err());
    }
}
