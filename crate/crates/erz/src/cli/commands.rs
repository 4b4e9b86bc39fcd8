//! Per-subcommand parameters, defaults and experiment bodies.

use std::f64::consts::PI;
use std::fmt::Write as _;

use clap::Args;
use erz_core::bounds::{DerivativeBound, LowerRegime};
use erz_core::dispersion::{psecond_slope_check, DecayExponent, SlopeCheck};
use erz_core::fit::logspace;
use erz_core::kernel::KernelParams;
use erz_core::phase::SignPair;
use erz_core::shell::ShellDirection;
use erz_core::{DispersionParams, Regime, Tolerances};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{parse_positive_range, parse_range, ExperimentConfig, Output};
use crate::acceptance::{run_criterion, Criterion, CRITERIA};
use crate::linflow::{
    active_band, band_bump, critical_fan, group_speed_fan, lp_decay_experiment, oscillatory_decay,
    wrap_time, OscillatoryDecay, OscillatorySpec, QuadSpec, Window,
};
use crate::normalform::{alpha_from_state, NormalForm};
use crate::solver::{init_irrotational, run, InitProfile, InitSpec, Scheme, SolverConfig};
use crate::spectral::GridSpec;
use crate::verify::{
    dyadic_shells, kernel_sweep, verify_derivative_bound, verify_phase_lower_bound, BoundReport, KernelSweep,
    MagnitudeRange,
};
use crate::{ErzError, Result};

fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| ErzError::Invalid(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| ErzError::Invalid(e.to_string()))
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn params(sigma: f64) -> Result<DispersionParams> {
    Ok(DispersionParams::new(sigma)?)
}

flag_args!(DispersionArgs {
    /// Interaction exponent in (0, 2).
    sigma: f64,
    /// Lebesgue exponents for the decay table (comma separated).
    #[arg(value_delimiter = ',')]
    lebesgue_p: Vec<f64>,
    /// Small-r fit window lo:hi.
    low_window: String,
    /// Large-r fit window lo:hi.
    high_window: String,
    /// Radius range of the CSV table.
    r_range: String,
    /// Rows of the CSV table.
    samples: usize,
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionConfig {
    pub sigma: f64,
    pub lebesgue_p: Vec<f64>,
    pub low_window: String,
    pub high_window: String,
    pub r_range: String,
    pub samples: usize,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        DispersionConfig {
            sigma: 1.5,
            lebesgue_p: vec![10.0, 12.0, 16.0],
            low_window: "1e-4:1e-2".into(),
            high_window: "1e2:1e4".into(),
            r_range: "1e-3:1e3".into(),
            samples: 121,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct DispersionResults {
    pub sigma: f64,
    pub degenerate_point: Option<f64>,
    pub p_second_at_degenerate_point: Option<f64>,
    pub decay_exponents: Vec<DecayExponent>,
    pub slopes: Vec<SlopeCheck>,
}

pub fn dispersion(cfg: &ExperimentConfig<DispersionConfig>) -> Result<Output<DispersionResults>> {
    let c = &cfg.params;
    let p = params(c.sigma)?;
    let r0 = p.degenerate_point().ok();
    let p2 = r0.map(|r| p.p_second(r)).transpose()?;
    let decay_exponents = c
        .lebesgue_p
        .iter()
        .map(|&q| Ok(p.beta_exponent(q)?))
        .collect::<Result<Vec<_>>>()?;
    let tol = Tolerances::DEFAULT;
    let slopes = vec![
        psecond_slope_check(&p, Regime::Low, parse_positive_range(&c.low_window)?, &tol)?,
        psecond_slope_check(&p, Regime::High, parse_positive_range(&c.high_window)?, &tol)?,
    ];
    if c.samples < 2 {
        return Err(ErzError::Invalid("samples must be >= 2".into()));
    }
    let (lo, hi) = parse_positive_range(&c.r_range)?;
    let rows: Vec<Vec<String>> = logspace(lo, hi, c.samples)
        .into_iter()
        .map(|r| vec![num(r), num(p.p(r)), num(p.dp(r)), num(p.d2p(r))])
        .collect();
    let csv = csv_string(&["r", "p", "dp", "d2p"], &rows)?;

    let mut s = String::new();
    writeln!(s, "sigma = {}", c.sigma).ok();
    match (r0, p2) {
        (Some(r), Some(v)) => writeln!(s, "r0 = {r:.12e}  p''(r0) = {v:.3e}").ok(),
        _ => writeln!(s, "r0: none (no degenerate point for sigma = {})", c.sigma).ok(),
    };
    writeln!(s, "{:>8}  {:>10}", "p", "beta").ok();
    for e in &decay_exponents {
        writeln!(s, "{:>8}  {:>10.6}", e.lebesgue_p, e.beta).ok();
    }
    for sc in &slopes {
        writeln!(
            s,
            "p'' slope {:?} on [{:e}, {:e}]: {:.4} (target {:.4}, r^2 {:.6}) {}",
            sc.regime,
            sc.window.0,
            sc.window.1,
            sc.slope,
            sc.target,
            sc.r_squared,
            verdict(sc.pass)
        )
        .ok();
    }
    Ok(Output {
        results: DispersionResults {
            sigma: c.sigma,
            degenerate_point: r0,
            p_second_at_degenerate_point: p2,
            decay_exponents,
            slopes,
        },
        csv: Some(csv),
        plot: Some(
            "set logscale xy\nset xlabel 'r'\nplot 'dispersion.csv' using 1:(abs($4)) with lines title \"|p''|\", \
             '' using 1:3 with lines title \"p'\"\n"
                .into(),
        ),
        summary: s,
        code: 0,
    })
}

flag_args!(DecayLinearArgs {
    /// kernel (radial quadrature) or torus (L^p norm of a propagated bump).
    mode: String,
    sigma: f64,
    /// Centre of the dyadic window in kernel mode.
    window_n: f64,
    /// Time range lo:hi; torus mode defaults to the wrap window.
    t: String,
    t_samples: usize,
    /// Rays of the group-speed fan in kernel mode.
    rays: usize,
    panels_per_oscillation: usize,
    /// Points per side in torus mode.
    grid: usize,
    /// Box side in torus mode.
    length: f64,
    /// Frequency band lo:hi of the torus bump.
    band: String,
    lebesgue_p: f64,
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayLinearConfig {
    pub mode: String,
    pub sigma: f64,
    pub window_n: f64,
    pub t: Option<String>,
    pub t_samples: usize,
    pub rays: usize,
    pub panels_per_oscillation: usize,
    pub grid: usize,
    pub length: f64,
    pub band: String,
    pub lebesgue_p: f64,
}

impl Default for DecayLinearConfig {
    fn default() -> Self {
        DecayLinearConfig {
            mode: "kernel".into(),
            sigma: 1.0,
            window_n: 1.0,
            t: None,
            t_samples: 12,
            rays: 24,
            panels_per_oscillation: QuadSpec::default().panels_per_oscillation,
            grid: 64,
            length: 64.0 * PI,
            band: "0.05:0.5".into(),
            lebesgue_p: 8.0,
        }
    }
}

fn kernel_rows(d: &OscillatoryDecay) -> Result<String> {
    let rows: Vec<Vec<String>> = d
        .rows
        .iter()
        .map(|r| vec![num(r.t), num(r.amplitude), num(r.first_ray), num(r.argmax_radius)])
        .collect();
    csv_string(&["t", "amplitude", "first_ray", "argmax_radius"], &rows)
}

const DECAY_PLOT: &str = "set logscale xy\nset xlabel 't'\nplot FILE using 1:2 with linespoints\n";

pub fn decay_linear(cfg: &ExperimentConfig<DecayLinearConfig>) -> Result<Output<serde_json::Value>> {
    let c = &cfg.params;
    let p = params(c.sigma)?;
    let quad = QuadSpec {
        panels_per_oscillation: c.panels_per_oscillation,
        ..QuadSpec::default()
    };
    let plot = Some(DECAY_PLOT.replace("FILE", "'decay-linear.csv'"));
    match c.mode.as_str() {
        "kernel" => {
            let (lo, hi) = parse_positive_range(c.t.as_deref().unwrap_or("1e3:1e5"))?;
            let window = Window::Dyadic { n: c.window_n };
            let spec = OscillatorySpec {
                window,
                t_samples: logspace(lo, hi, c.t_samples.max(2)),
                rays: group_speed_fan(&p, &window, c.rays)?,
                quad,
            };
            let d = oscillatory_decay(&p, &spec)?;
            let summary = format!(
                "sup-over-rays exponent {:.4} (r^2 {:.6}, expected -1.5 for sigma = 1)\n",
                d.fit.exponent, d.fit.r_squared
            );
            Ok(Output {
                csv: Some(kernel_rows(&d)?),
                results: json!({ "mode": "kernel", "expected_exponent": -1.5, "decay": d }),
                plot,
                summary,
                code: 0,
            })
        }
        "torus" => {
            let grid = GridSpec::cube(c.grid, c.length)?;
            let (b0, b1) = parse_positive_range(&c.band)?;
            let data = band_bump(grid, b0, b1)?;
            let wrap = wrap_time(&grid, &p, active_band(&data, 1e-12)?)?;
            let (lo, hi) = match &c.t {
                Some(t) => parse_positive_range(t)?,
                None => (0.1 * wrap, wrap),
            };
            let d = lp_decay_experiment(&p, c.lebesgue_p, &data, &logspace(lo, hi, c.t_samples.max(2)))?;
            let rows: Vec<Vec<String>> = d.fit.samples.iter().map(|&(t, v)| vec![num(t), num(v)]).collect();
            let summary = format!(
                "L^{} exponent {:.4} on [{lo:.3}, {hi:.3}] (wrap time {wrap:.3}, envelope -beta = {:.4})\n",
                c.lebesgue_p, d.fit.exponent, -d.beta
            );
            Ok(Output {
                csv: Some(csv_string(&["t", "lp_norm"], &rows)?),
                results: json!({ "mode": "torus", "decay": d }),
                plot,
                summary,
                code: 0,
            })
        }
        other => Err(ErzError::Invalid(format!("mode {other:?} (expected kernel or torus)"))),
    }
}

flag_args!(DecayDegenerateArgs {
    /// Interaction exponent in (1, 2).
    sigma: f64,
    /// Time range lo:hi.
    t: String,
    t_samples: usize,
    /// Shell half-width as a fraction of r0.
    shell_fraction: f64,
    panels_per_oscillation: usize,
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayDegenerateConfig {
    pub sigma: f64,
    pub t: String,
    pub t_samples: usize,
    pub shell_fraction: f64,
    pub panels_per_oscillation: usize,
}

impl Default for DecayDegenerateConfig {
    fn default() -> Self {
        DecayDegenerateConfig {
            sigma: 1.5,
            t: "1e5:1e7".into(),
            t_samples: 10,
            shell_fraction: 0.125,
            panels_per_oscillation: QuadSpec::default().panels_per_oscillation,
        }
    }
}

pub fn decay_degenerate(cfg: &ExperimentConfig<DecayDegenerateConfig>) -> Result<Output<serde_json::Value>> {
    let c = &cfg.params;
    let p = params(c.sigma)?;
    let r0 = p.degenerate_point()?;
    let (lo, hi) = parse_positive_range(&c.t)?;
    let (v0, rays) = critical_fan(&p)?;
    let spec = OscillatorySpec {
        window: Window::degenerate_shell(&p, c.shell_fraction * r0)?,
        t_samples: logspace(lo, hi, c.t_samples.max(2)),
        rays,
        quad: QuadSpec {
            panels_per_oscillation: c.panels_per_oscillation,
            ..QuadSpec::default()
        },
    };
    let d = oscillatory_decay(&p, &spec)?;
    // Below t* the cubic term of the phase has not yet resolved the shell.
    let h = 1e-4 * r0;
    let p3 = (p.d2p(r0 + h) - p.d2p(r0 - h)) / (2.0 * h);
    let crossover = 1.0 / (p3.abs() * (c.shell_fraction * r0).powi(3));
    let mut summary = format!(
        "r0 = {r0:.6e}, critical speed {v0:.6e}\ncritical-ray exponent {:.4} (r^2 {:.6}, expected -4/3 = -1.3333)\n\
         sup-over-fan exponent {:.4}\n",
        d.first_ray_fit.exponent, d.first_ray_fit.r_squared, d.fit.exponent
    );
    if lo < 10.0 * crossover {
        writeln!(
            summary,
            "warning: window starts at {lo:e}, below 10 t* = {:.3e}; the fit is pre-asymptotic",
            10.0 * crossover
        )
        .ok();
    }
    Ok(Output {
        csv: Some(kernel_rows(&d)?),
        results: json!({
            "degenerate_point": r0,
            "critical_speed": v0,
            "crossover_time": crossover,
            "expected_exponent": -4.0 / 3.0,
            "decay": d,
        }),
        plot: Some(DECAY_PLOT.replace("FILE", "'decay-degenerate.csv'").replace("1:2", "1:3")),
        summary,
        code: 0,
    })
}

const BOUND_HEADER: [&str; 16] = [
    "bound_id",
    "sigma",
    "n_samples",
    "seed",
    "range_lo",
    "range_hi",
    "extremal_ratio",
    "half_ratio",
    "stability_delta",
    "widening_delta",
    "xi_0",
    "xi_1",
    "xi_2",
    "eta_0",
    "eta_1",
    "eta_2",
];

fn bound_csv(reports: &[BoundReport]) -> Result<String> {
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let mut row = vec![
                r.bound_id.clone(),
                num(r.sigma),
                r.n_samples.to_string(),
                r.seed.to_string(),
                num(r.range.lo),
                num(r.range.hi),
                num(r.extremal_ratio),
                num(r.half_ratio),
                num(r.stability_delta),
                opt(r.widening_delta),
            ];
            match r.extremal_triple {
                Some((xi, eta)) => row.extend(xi.iter().chain(&eta).map(|&v| num(v))),
                None => row.extend(std::iter::repeat_n(String::new(), 6)),
            }
            row
        })
        .collect();
    csv_string(&BOUND_HEADER, &rows)
}

fn bound_summary(reports: &[BoundReport], lower: bool) -> String {
    let mut s = String::new();
    for r in reports {
        let pass = if lower { r.lower_passes() } else { r.upper_passes() };
        writeln!(
            s,
            "{:<22} {} {:.6e}  doubling change {:.3e}{}  {}",
            r.bound_id,
            if lower { "min" } else { "max" },
            r.extremal_ratio,
            r.stability_delta,
            r.widening_delta.map(|w| format!("  widening change {w:.3e}")).unwrap_or_default(),
            verdict(pass)
        )
        .ok();
    }
    s
}

fn magnitude_range(s: &str) -> Result<MagnitudeRange> {
    let (lo, hi) = parse_positive_range(s)?;
    Ok(MagnitudeRange { lo, hi })
}

flag_args!(PhaseBoundsArgs {
    sigma: f64,
    samples: usize,
    /// Magnitude range lo:hi of the sampled frequencies.
    range: String,
    /// b_large, c_small or both.
    regime: String,
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseBoundsConfig {
    pub sigma: f64,
    pub samples: usize,
    pub range: String,
    pub regime: String,
}

impl Default for PhaseBoundsConfig {
    fn default() -> Self {
        PhaseBoundsConfig {
            sigma: 1.0,
            samples: 1_000_000,
            range: "1e-6:1e6".into(),
            regime: "both".into(),
        }
    }
}

pub fn phase_bounds(cfg: &ExperimentConfig<PhaseBoundsConfig>) -> Result<Output<Vec<BoundReport>>> {
    let c = &cfg.params;
    let p = params(c.sigma)?;
    let range = magnitude_range(&c.range)?;
    let regimes: Vec<LowerRegime> = match c.regime.as_str() {
        "both" => LowerRegime::ALL.to_vec(),
        s => vec![LowerRegime::ALL
            .into_iter()
            .find(|r| r.label() == s)
            .ok_or_else(|| ErzError::Invalid(format!("regime {s:?} (expected b_large, c_small or both)")))?],
    };
    let reports = regimes
        .into_iter()
        .map(|r| verify_phase_lower_bound(&p, r, c.samples, cfg.seed, range))
        .collect::<Result<Vec<_>>>()?;
    Ok(Output {
        csv: Some(bound_csv(&reports)?),
        summary: bound_summary(&reports, true),
        results: reports,
        plot: None,
        code: 0,
    })
}

flag_args!(DerivativeBoundsArgs {
    sigma: f64,
    samples: usize,
    range: String,
    /// Wider range for the domain-widening check; "none" disables it.
    widen: String,
    /// Bound labels (comma separated); empty for all.
    #[arg(value_delimiter = ',')]
    bounds: Vec<String>,
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DerivativeBoundsConfig {
    pub sigma: f64,
    pub samples: usize,
    pub range: String,
    pub widen: String,
    pub bounds: Vec<String>,
}

impl Default for DerivativeBoundsConfig {
    fn default() -> Self {
        DerivativeBoundsConfig {
            sigma: 1.0,
            samples: 1_000_000,
            range: "1e-6:1e6".into(),
            widen: "1e-8:1e8".into(),
            bounds: vec![],
        }
    }
}

pub fn derivative_bounds(cfg: &ExperimentConfig<DerivativeBoundsConfig>) -> Result<Output<Vec<BoundReport>>> {
    let c = &cfg.params;
    let p = params(c.sigma)?;
    let range = magnitude_range(&c.range)?;
    let wide = match c.widen.as_str() {
        "none" => None,
        s => Some(magnitude_range(s)?),
    };
    let chosen: Vec<DerivativeBound> = if c.bounds.is_empty() {
        DerivativeBound::ALL.to_vec()
    } else {
        c.bounds
            .iter()
            .map(|l| {
                DerivativeBound::ALL
                    .into_iter()
                    .find(|b| b.label() == l)
                    .ok_or_else(|| ErzError::Invalid(format!("unknown bound {l:?}")))
            })
            .collect::<Result<_>>()?
    };
    let reports = chosen
        .into_iter()
        .map(|b| {
            let mut r = verify_derivative_bound(&p, b, c.samples, cfg.seed, range)?;
            if let Some(w) = wide {
                let rw = verify_derivative_bound(&p, b, c.samples, cfg.seed, w)?;
                r.widening_delta = Some((rw.extremal_ratio / r.extremal_ratio - 1.0).abs());
            }
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Output {
        csv: Some(bound_csv(&reports)?),
        summary: bound_summary(&reports, false),
        results: reports,
        plot: None,
        code: 0,
    })
}

flag_args!(KernelNormsArgs {
    sigma: f64,
    lambda: f64,
    k: f64,
    r: u8,
    l: u8,
    /// Dyadic exponents lo:hi, shells N = 2^lo ..= 2^hi.
    shells: String,
    /// Smallest N graded for the per-octave ratio.
    n_from: f64,
    /// eta_shells, xi_shells or both.
    direction: String,
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelNormsConfig {
    pub sigma: f64,
    pub lambda: f64,
    pub k: f64,
    pub r: u8,
    pub l: u8,
    pub shells: String,
    pub n_from: f64,
    pub direction: String,
}

impl Default for KernelNormsConfig {
    fn default() -> Self {
        KernelNormsConfig {
            sigma: 1.0,
            lambda: 3.25,
            k: 1.5,
            r: 1,
            l: 1,
            shells: "2:6".into(),
            n_from: 4.0,
            direction: "both".into(),
        }
    }
}

pub fn kernel_norms(cfg: &ExperimentConfig<KernelNormsConfig>) -> Result<Output<Vec<KernelSweep>>> {
    let c = &cfg.params;
    let kp = KernelParams::new(c.sigma, c.lambda, c.k)?;
    let sp = SignPair::new(c.r, c.l).ok_or_else(|| ErzError::Invalid(format!("sign pair ({}, {})", c.r, c.l)))?;
    let (lo, hi) = parse_range(&c.shells)?;
    if lo.fract() != 0.0 || hi.fract() != 0.0 {
        return Err(ErzError::Invalid(format!("shells {:?} must be integer exponents", c.shells)));
    }
    let shells = dyadic_shells(lo as i32, hi as i32);
    let dirs: Vec<ShellDirection> = match c.direction.as_str() {
        "both" => ShellDirection::ALL.to_vec(),
        s => vec![ShellDirection::ALL
            .into_iter()
            .find(|d| d.label() == s)
            .ok_or_else(|| ErzError::Invalid(format!("direction {s:?}")))?],
    };
    let sweeps = dirs
        .into_iter()
        .map(|d| kernel_sweep(sp, &kp, d, &shells, c.n_from))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut s = String::new();
    for sw in &sweeps {
        for r in &sw.rows {
            rows.push(vec![
                r.sp.clone(),
                r.direction.clone(),
                num(r.n),
                num(r.k),
                num(r.lambda),
                num(r.value),
                num(r.fine_value),
                num(r.argmax),
                num(r.consistency),
                opt(r.octave_ratio),
            ]);
        }
        let dir = sw.rows.first().map(|r| r.direction.as_str()).unwrap_or("");
        writeln!(
            s,
            "{dir}: max octave ratio {:.4} for N >= {} (<= 0.9 {}), quadrature consistency {:.3e}, tail fraction {:.3e}",
            sw.max_ratio,
            sw.n_from,
            verdict(sw.max_ratio <= 0.9),
            sw.max_consistency,
            sw.tail_fraction
        )
        .ok();
    }
    let header = [
        "sign_pair",
        "direction",
        "n",
        "k",
        "lambda",
        "value",
        "fine_value",
        "argmax",
        "consistency",
        "octave_ratio",
    ];
    Ok(Output {
        csv: Some(csv_string(&header, &rows)?),
        results: sweeps,
        plot: Some("set logscale xy\nset xlabel 'N'\nplot 'kernel-norms.csv' using 3:6 with linespoints\n".into()),
        summary: s,
        code: 0,
    })
}

flag_args!(SimulateArgs {
    /// Points per side.
    grid: usize,
    /// Box side.
    length: f64,
    sigma: f64,
    /// Target Y-norm of the initial data.
    eps: f64,
    /// Initial frequency band lo:hi; defaults to [dk, 0.9 * dealiasing radius].
    band: String,
    /// random or packet.
    profile: String,
    /// etdrk4_alpha or ifrk4_primitive.
    scheme: String,
    dt: f64,
    t_end: f64,
    monitor_stride: usize,
    sobolev_s: u32,
    lebesgue_p: f64,
    fit_start: f64,
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub grid: usize,
    pub length: f64,
    pub sigma: f64,
    pub eps: f64,
    pub band: Option<String>,
    pub profile: InitProfile,
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    pub monitor_stride: usize,
    pub sobolev_s: u32,
    pub lebesgue_p: f64,
    pub fit_start: f64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            grid: 32,
            length: 2.0 * PI,
            sigma: 1.0,
            eps: 1e-3,
            band: None,
            profile: InitProfile::Random,
            scheme: Scheme::Etdrk4Alpha,
            dt: 0.01,
            t_end: 1.0,
            monitor_stride: 10,
            sobolev_s: 1,
            lebesgue_p: 8.0,
            fit_start: 0.0,
        }
    }
}

fn initial_band(grid: &GridSpec, band: &Option<String>) -> Result<(f64, f64)> {
    match band {
        Some(b) => parse_positive_range(b),
        None => Ok((grid.dk(), 0.9 * grid.active_radius())),
    }
}

pub fn simulate(cfg: &ExperimentConfig<SimulateConfig>) -> Result<Output<serde_json::Value>> {
    let c = &cfg.params;
    let grid = GridSpec::cube(c.grid, c.length)?;
    let init = InitSpec {
        sigma: c.sigma,
        eps: c.eps,
        band: initial_band(&grid, &c.band)?,
        seed: cfg.seed,
        sobolev_s: c.sobolev_s,
        profile: c.profile,
    };
    let state = init_irrotational(grid, &init)?;
    let sc = SolverConfig {
        scheme: c.scheme,
        sigma: c.sigma,
        dt: c.dt,
        t_end: c.t_end,
        monitor_stride: c.monitor_stride,
        sobolev_s: c.sobolev_s,
        lebesgue_p: c.lebesgue_p,
        fit_start: c.fit_start,
        store_trajectory: false,
    };
    let rec = run(&sc, &state)?;
    let sm = rec.summary();
    let mut csv = Vec::new();
    rec.write_csv_to(&mut csv)?;
    let mut s = format!(
        "steps {}  wrap time {:.4}  oscillation number {:.3}\nmass drift {:.3e}  max curl/|u| {:.3e}  sup X/X(0) {:.6}\n",
        sc.steps()?,
        rec.wrap_time,
        rec.oscillation_number,
        sm.mass_drift,
        sm.max_curl_relative,
        sm.x_ratio
    );
    match &sm.decay_fit {
        Some(f) => writeln!(s, "W^{{s,p}} decay exponent {:.4} (r^2 {:.4})", f.exponent, f.r_squared).ok(),
        None => writeln!(s, "{}", sm.decay_note).ok(),
    };
    for w in &rec.warnings {
        writeln!(s, "warning: {w}").ok();
    }
    Ok(Output {
        csv: Some(String::from_utf8(csv).map_err(|e| ErzError::Invalid(e.to_string()))?),
        results: json!({ "initial": init, "summary": sm, "record": rec }),
        plot: Some("set xlabel 't'\nplot 'simulate.csv' using 1:5 with lines\n".into()),
        summary: s,
        code: 0,
    })
}

flag_args!(NormalFormArgs {
    grid: usize,
    length: f64,
    sigma: f64,
    eps: f64,
    /// Final time.
    t: f64,
    dt: f64,
    band: String,
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalFormConfig {
    pub grid: usize,
    pub length: f64,
    pub sigma: f64,
    pub eps: f64,
    pub t: f64,
    pub dt: f64,
    pub band: Option<String>,
}

impl Default for NormalFormConfig {
    fn default() -> Self {
        NormalFormConfig {
            grid: 16,
            length: 2.0 * PI,
            sigma: 1.0,
            eps: 1e-3,
            t: 1.0,
            dt: 1e-3,
            band: None,
        }
    }
}

pub fn normal_form(cfg: &ExperimentConfig<NormalFormConfig>) -> Result<Output<serde_json::Value>> {
    let c = &cfg.params;
    let grid = GridSpec::cube(c.grid, c.length)?;
    let init = InitSpec {
        sigma: c.sigma,
        eps: c.eps,
        band: initial_band(&grid, &c.band)?,
        seed: cfg.seed,
        sobolev_s: 1,
        profile: InitProfile::Random,
    };
    let state = init_irrotational(grid, &init)?;
    let nf = NormalForm::new(grid, c.sigma)?;
    let sc = SolverConfig {
        scheme: Scheme::Etdrk4Alpha,
        sigma: c.sigma,
        dt: c.dt,
        t_end: c.t,
        monitor_stride: usize::MAX,
        sobolev_s: 1,
        lebesgue_p: 8.0,
        fit_start: 0.0,
        store_trajectory: true,
    };
    let traj = run(&sc, &state)?
        .trajectory
        .ok_or_else(|| ErzError::Invalid("trajectory not stored".into()))?;
    let k = traj.times.len() - 1;
    let residual = nf.residual(&traj, k)?;
    let a0 = alpha_from_state(&state, c.sigma)?.alpha.l2_norm();
    let g = nf.boundary_g(&traj.alpha[k]);
    let g_norm = (g.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.volume()).sqrt();
    let summary = format!(
        "residual at t = {}: {residual:.6e} (|alpha(0)| = {a0:.6e}, |g(t)| = {g_norm:.6e}, {} pairs)\n",
        c.t,
        nf.pair_count()
    );
    Ok(Output {
        results: json!({
            "t": c.t,
            "steps": k,
            "residual": residual,
            "alpha0_l2": a0,
            "g_l2": g_norm,
            "pair_count": nf.pair_count(),
        }),
        csv: None,
        plot: None,
        summary,
        code: 0,
    })
}

flag_args!(AllArgs {
    /// Criteria to run (comma separated); empty for all.
    #[arg(value_delimiter = ',')]
    criteria: Vec<u8>,
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AllConfig {
    pub criteria: Vec<u8>,
}

impl Default for AllConfig {
    fn default() -> Self {
        AllConfig {
            criteria: CRITERIA.to_vec(),
        }
    }
}

/// Exit code 1 when any criterion fails.
pub fn acceptance(cfg: &ExperimentConfig<AllConfig>) -> Result<Output<Vec<Criterion>>> {
    let mut out = Vec::new();
    let mut s = String::new();
    for &id in &cfg.params.criteria {
        let c = run_criterion(id)?;
        writeln!(s, "{}", c.line()).ok();
        out.push(c);
    }
    let mut rows = Vec::new();
    for c in &out {
        for k in &c.checks {
            let (kind, limit) = match serde_json::to_value(k.rule)? {
                serde_json::Value::Object(m) => (
                    m.get("kind").and_then(|v| v.as_str()).unwrap_or("").to_string(),
                    m.get("limit").and_then(|v| v.as_f64()).map(num).unwrap_or_default(),
                ),
                _ => (String::new(), String::new()),
            };
            rows.push(vec![
                c.id.to_string(),
                c.title.clone(),
                c.pass.to_string(),
                k.name.clone(),
                num(k.value),
                kind,
                limit,
                k.pass.to_string(),
            ]);
        }
    }
    let header = ["criterion", "title", "criterion_pass", "check", "value", "rule", "limit", "check_pass"];
    let code = if out.iter().all(|c| c.pass) { 0 } else { 1 };
    Ok(Output {
        csv: Some(csv_string(&header, &rows)?),
        results: out,
        plot: None,
        summary: s,
        code,
    })
}
