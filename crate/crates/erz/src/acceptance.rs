//! The acceptance suite: ten criteria, each a list of graded checks.

use std::f64::consts::PI;

use erz_core::bounds::{DerivativeBound, LowerRegime};
use erz_core::dispersion::psecond_slope_check;
use erz_core::fit::logspace;
use erz_core::kernel::KernelParams;
use erz_core::phase::SignPair;
use erz_core::shell::ShellDirection;
use erz_core::{DispersionParams, Regime, Tolerances};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::linflow::{
    active_band, band_bump, critical_fan, group_speed_fan, lp_decay_experiment, oscillatory_decay, propagate,
    wrap_time, OscillatorySpec, QuadSpec, Window,
};
use crate::normalform::NormalForm;
use crate::solver::{
    init_irrotational, mms_error, observed_order, rhs_primitive, run, FluidState, InitProfile, InitSpec,
    Manufactured, PrimitiveSystem, Scheme, SolverConfig, SpectralState,
};
use crate::spectral::{GridSpec, SpectralField};
use crate::verify::{
    dyadic_shells, kernel_sweep, verify_derivative_bounds, verify_phase_lower_bound, MagnitudeRange,
};
use crate::{ErzError, Result};

pub const CRITERIA: [u8; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "limit", rename_all = "snake_case")]
pub enum Rule {
    AtMost(f64),
    AtLeast(f64),
    Above(f64),
    Finite,
}

impl Rule {
    fn holds(self, v: f64) -> bool {
        match self {
            Rule::AtMost(l) => v <= l,
            Rule::AtLeast(l) => v >= l,
            Rule::Above(l) => v > l,
            Rule::Finite => v.is_finite(),
        }
    }

    fn describe(self) -> String {
        match self {
            Rule::AtMost(l) => format!("<= {l:e}"),
            Rule::AtLeast(l) => format!(">= {l:e}"),
            Rule::Above(l) => format!("> {l:e}"),
            Rule::Finite => "finite".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub rule: Rule,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, rule: Rule) -> Self {
        Check {
            name: name.into(),
            value,
            pass: rule.holds(value),
            rule,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub id: u8,
    pub title: String,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl Criterion {
    fn new(id: u8, title: &str, checks: Vec<Check>) -> Self {
        Criterion {
            id,
            title: title.into(),
            pass: !checks.is_empty() && checks.iter().all(|c| c.pass),
            checks,
        }
    }

    /// One line: verdict, title, then the failing checks or a short digest.
    pub fn line(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        let shown: Vec<&Check> = if self.pass {
            self.checks.iter().take(4).collect()
        } else {
            self.checks.iter().filter(|c| !c.pass).collect()
        };
        let detail: Vec<String> = shown
            .iter()
            .map(|c| format!("{} = {:.4e} ({})", c.name, c.value, c.rule.describe()))
            .collect();
        let more = if self.pass && self.checks.len() > shown.len() {
            format!("; {} more checks pass", self.checks.len() - shown.len())
        } else {
            String::new()
        };
        format!(
            "criterion {:>2} {verdict}: {} [{}{more}]",
            self.id,
            self.title,
            detail.join("; ")
        )
    }
}

pub fn run_criterion(id: u8) -> Result<Criterion> {
    match id {
        1 => dispersion_exactness(),
        2 => slope_table(),
        3 => linear_unitarity(),
        4 => kernel_decay(),
        5 => lp_envelope(),
        6 => phase_bounds(),
        7 => kernel_summability(),
        8 => normal_form_identity(),
        9 => solver_invariants(),
        10 => stability_surrogate(),
        _ => Err(ErzError::Invalid(format!("no acceptance criterion {id} (valid: 1..=10)"))),
    }
}

fn par(sigma: f64) -> Result<DispersionParams> {
    Ok(DispersionParams::new(sigma)?)
}

fn dispersion_exactness() -> Result<Criterion> {
    let mut checks = vec![Check::new(
        "|r0(4/3) - 1|",
        (par(4.0 / 3.0)?.degenerate_point()? - 1.0).abs(),
        Rule::AtMost(1e-12),
    )];
    for s in [1.2, 1.5, 1.8] {
        let p = par(s)?;
        let r0 = p.degenerate_point()?;
        checks.push(Check::new(
            format!("|p''(r0)| sigma={s}"),
            p.p_second(r0)?.abs(),
            Rule::AtMost(1e-10),
        ));
    }
    Ok(Criterion::new(1, "dispersion exactness", checks))
}

/// The five asymptotic regimes of `|p''|` and a two-decade window for each.
pub const SLOPE_REGIMES: [(f64, Regime, (f64, f64)); 5] = [
    (1.5, Regime::Low, (1e-4, 1e-2)),
    (0.5, Regime::High, (1e2, 1e4)),
    (1.0, Regime::High, (1e2, 1e4)),
    (1.2, Regime::High, (1e2, 1e4)),
    (1.5, Regime::High, (1e2, 1e4)),
];

fn slope_table() -> Result<Criterion> {
    let tol = Tolerances::DEFAULT;
    let mut checks = Vec::new();
    for (s, regime, window) in SLOPE_REGIMES {
        let c = psecond_slope_check(&par(s)?, regime, window, &tol)?;
        let name = format!(
            "|slope - target| sigma={s} {regime:?} (slope {:.4}, target {:.4})",
            c.slope, c.target
        );
        checks.push(Check::new(name, (c.slope - c.target).abs(), Rule::AtMost(tol.slope)));
    }
    Ok(Criterion::new(2, "p'' slope table", checks))
}

/// Uniform random complex values on the grid, transformed to coefficients.
pub fn random_field(grid: GridSpec, seed: u64) -> Result<SpectralField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vals: Vec<Complex64> = (0..grid.len())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    SpectralField::from_complex(grid, &vals)
}

fn linear_unitarity() -> Result<Criterion> {
    let grid = GridSpec::cube(32, 2.0 * PI)?;
    let mut checks = Vec::new();
    for (seed, s) in [(1u64, 0.5), (2, 1.0), (3, 1.5)] {
        let p = par(s)?;
        let f = random_field(grid, seed)?;
        let n0 = f.l2_norm();
        let mut worst: f64 = 0.0;
        for t in [0.7, 10.0, 100.0] {
            worst = worst.max((propagate(&f, &p, t).l2_norm() / n0 - 1.0).abs());
        }
        checks.push(Check::new(format!("L2 drift sigma={s}"), worst, Rule::AtMost(1e-12)));
        let ab = propagate(&propagate(&f, &p, 1.3), &p, 2.9);
        let c = propagate(&f, &p, 4.2);
        checks.push(Check::new(
            format!("semigroup defect sigma={s}"),
            ab.l2_distance(&c)? / n0,
            Rule::AtMost(1e-12),
        ));
        let back = propagate(&propagate(&f, &p, 3.0), &p, -3.0);
        checks.push(Check::new(
            format!("inverse defect sigma={s}"),
            back.l2_distance(&f)? / n0,
            Rule::AtMost(1e-12),
        ));
    }
    Ok(Criterion::new(3, "linear unitarity and semigroup", checks))
}

/// Kernel decay for sigma = 1 on a unit dyadic window.
pub fn nondegenerate_spec(p: &DispersionParams) -> Result<OscillatorySpec> {
    let window = Window::Dyadic { n: 1.0 };
    Ok(OscillatorySpec {
        window,
        t_samples: logspace(1e3, 1e5, 12),
        rays: group_speed_fan(p, &window, 24)?,
        quad: QuadSpec::default(),
    })
}

/// Kernel decay on the degenerate shell, sampled along the critical ray fan.
pub fn degenerate_spec(p: &DispersionParams, t: (f64, f64), samples: usize) -> Result<OscillatorySpec> {
    let r0 = p.degenerate_point()?;
    let (_, rays) = critical_fan(p)?;
    Ok(OscillatorySpec {
        window: Window::degenerate_shell(p, r0 / 8.0)?,
        t_samples: logspace(t.0, t.1, samples),
        rays,
        quad: QuadSpec::default(),
    })
}

fn kernel_decay() -> Result<Criterion> {
    let p1 = par(1.0)?;
    let a = oscillatory_decay(&p1, &nondegenerate_spec(&p1)?)?.fit.exponent;
    let p2 = par(1.5)?;
    let b = oscillatory_decay(&p2, &degenerate_spec(&p2, (1e5, 1e7), 10)?)?
        .first_ray_fit
        .exponent;
    let checks = vec![
        Check::new(format!("|exp + 3/2| sigma=1 (exp {a:.4})"), (a + 1.5).abs(), Rule::AtMost(0.05)),
        Check::new(
            format!("|exp + 4/3| sigma=1.5 critical ray (exp {b:.4})"),
            (b + 4.0 / 3.0).abs(),
            Rule::AtMost(0.05),
        ),
        Check::new("exponent separation", (a - b).abs(), Rule::AtLeast(0.1)),
    ];
    Ok(Criterion::new(4, "dispersive kernel decay exponents", checks))
}

/// The torus used for the envelope and stability runs: `64^3` with
/// `L = 64 pi` so that `[0.05, 0.5]` sits below the dealiasing radius.
pub fn wide_torus() -> Result<GridSpec> {
    GridSpec::cube(64, 64.0 * PI)
}

pub const ENVELOPE_BAND: (f64, f64) = (0.05, 0.5);

fn lp_envelope() -> Result<Criterion> {
    let p = par(1.0)?;
    let grid = wide_torus()?;
    let data = band_bump(grid, ENVELOPE_BAND.0, ENVELOPE_BAND.1)?;
    let wrap = wrap_time(&grid, &p, active_band(&data, 1e-12)?)?;
    let d = lp_decay_experiment(&p, 8.0, &data, &logspace(0.1 * wrap, wrap, 16))?;
    let checks = vec![Check::new(
        format!("L^8 exponent over [{:.2}, {:.2}]", 0.1 * wrap, wrap),
        d.fit.exponent,
        Rule::AtMost(-9.0 / 8.0 + 0.2),
    )];
    Ok(Criterion::new(5, "torus L^p decay envelope", checks))
}

pub const BOUND_SIGMAS: [f64; 3] = [0.5, 1.0, 1.5];
pub const BOUND_SAMPLES: usize = 2_000_000;

fn phase_bounds() -> Result<Criterion> {
    let mut checks = Vec::new();
    for s in BOUND_SIGMAS {
        let p = par(s)?;
        for regime in LowerRegime::ALL {
            let r = verify_phase_lower_bound(&p, regime, BOUND_SAMPLES, 11, MagnitudeRange::DEFAULT)?;
            checks.push(Check::new(
                format!("min ratio {} sigma={s}", r.bound_id),
                r.extremal_ratio,
                Rule::Above(0.0),
            ));
            checks.push(Check::new(
                format!("doubling change {} sigma={s}", r.bound_id),
                r.stability_delta,
                Rule::AtMost(0.1),
            ));
        }
        for r in verify_derivative_bounds(&p, BOUND_SAMPLES, 12)? {
            checks.push(Check::new(
                format!("max ratio {} sigma={s}", r.bound_id),
                r.extremal_ratio,
                Rule::Finite,
            ));
            checks.push(Check::new(
                format!("doubling change {} sigma={s}", r.bound_id),
                r.stability_delta,
                Rule::AtMost(0.1),
            ));
            checks.push(Check::new(
                format!("widening change {} sigma={s}", r.bound_id),
                r.widening_delta.unwrap_or(f64::INFINITY),
                Rule::AtMost(0.1),
            ));
        }
    }
    debug_assert_eq!(DerivativeBound::ALL.len(), 10);
    Ok(Criterion::new(6, "phase lower and derivative bounds", checks))
}

fn kernel_summability() -> Result<Criterion> {
    let kp = KernelParams::new(1.0, 3.25, 1.5)?;
    let sp = SignPair { r: 1, l: 1 };
    let mut checks = Vec::new();
    for dir in ShellDirection::ALL {
        let s = kernel_sweep(sp, &kp, dir, &dyadic_shells(2, 6), 4.0)?;
        checks.push(Check::new(
            format!("max octave ratio {}", dir.label()),
            s.max_ratio,
            Rule::AtMost(0.9),
        ));
        checks.push(Check::new(
            format!("quadrature consistency {}", dir.label()),
            s.max_consistency,
            Rule::AtMost(0.05),
        ));
    }
    Ok(Criterion::new(7, "kernel shell-norm summability", checks))
}

/// The `16^3` torus with `L = 2 pi` used by the normal-form and order studies.
pub fn unit_torus(n: usize) -> Result<GridSpec> {
    GridSpec::cube(n, 2.0 * PI)
}

/// Random irrotational data on `[1, 0.9 * active radius]`.
pub fn random_state(grid: GridSpec, sigma: f64, eps: f64, seed: u64) -> Result<FluidState> {
    init_irrotational(
        grid,
        &InitSpec {
            sigma,
            eps,
            band: (1.0, 0.9 * grid.active_radius()),
            seed,
            sobolev_s: 1,
            profile: InitProfile::Random,
        },
    )
}

pub fn solver_config(scheme: Scheme, sigma: f64, dt: f64, t_end: f64) -> SolverConfig {
    SolverConfig {
        scheme,
        sigma,
        dt,
        t_end,
        monitor_stride: 10,
        sobolev_s: 1,
        lebesgue_p: 8.0,
        fit_start: 0.0,
        store_trajectory: false,
    }
}

/// `shatah_residual` at `t_end` for an ETDRK4 trajectory with step `dt`.
pub fn normal_form_residual(nf: &NormalForm, initial: &FluidState, sigma: f64, dt: f64, t_end: f64) -> Result<f64> {
    let cfg = SolverConfig {
        monitor_stride: usize::MAX,
        store_trajectory: true,
        ..solver_config(Scheme::Etdrk4Alpha, sigma, dt, t_end)
    };
    let traj = run(&cfg, initial)?
        .trajectory
        .ok_or_else(|| ErzError::Invalid("trajectory not stored".into()))?;
    nf.residual(&traj, traj.times.len() - 1)
}

pub const NORMAL_FORM_DTS: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];

fn normal_form_identity() -> Result<Criterion> {
    let grid = unit_torus(16)?;
    let sigma = 1.0;
    let s = random_state(grid, sigma, 1e-3, 5)?;
    let nf = NormalForm::new(grid, sigma)?;
    let res = normal_form_residual(&nf, &s, sigma, 1e-3, 1.0)?;
    let errs: Vec<f64> = NORMAL_FORM_DTS
        .iter()
        .map(|&dt| normal_form_residual(&nf, &s, sigma, dt, 1.0))
        .collect::<Result<_>>()?;
    let checks = vec![
        Check::new("residual at t=1, dt=1e-3", res, Rule::AtMost(1e-3)),
        Check::new("refinement order", observed_order(&errs), Rule::AtLeast(3.5)),
    ];
    Ok(Criterion::new(8, "normal-form identity", checks))
}

fn relative(a: &SpectralState, b: &SpectralState) -> f64 {
    a.distance(b) / b.l2_norm()
}

fn solver_invariants() -> Result<Criterion> {
    let grid = unit_torus(64)?;
    let sigma = 1.0;
    let s = random_state(grid, sigma, 1e-3, 3)?;
    let mut checks = Vec::new();
    let mut finals = Vec::new();
    for scheme in [Scheme::Etdrk4Alpha, Scheme::Ifrk4Primitive] {
        let rec = run(&solver_config(scheme, sigma, 0.01, 1.0), &s)?;
        let sm = rec.summary();
        checks.push(Check::new(format!("mass drift {scheme:?}"), sm.mass_drift, Rule::AtMost(1e-12)));
        checks.push(Check::new(
            format!("relative curl {scheme:?}"),
            sm.max_curl_relative,
            Rule::AtMost(1e-10),
        ));
        finals.push(rec.final_state);
    }
    checks.push(Check::new("scheme cross-agreement", relative(&finals[0], &finals[1]), Rule::AtMost(1e-6)));

    let ms = Manufactured {
        amplitude: 0.1,
        k: [1, 1, 0],
    };
    let errs: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&dt| mms_error(grid, sigma, &ms, dt, 1.0))
        .collect::<Result<_>>()?;
    checks.push(Check::new("manufactured-solution order", observed_order(&errs), Rule::AtLeast(3.5)));

    let sys = PrimitiveSystem::new(grid, par(sigma)?);
    let mut consts = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4] {
        let st = random_state(grid, sigma, eps, 9)?;
        let r = rhs_primitive(&st, sigma)?;
        let lin = SpectralState {
            grid,
            data: sys.linear(&st.to_spectral().data),
        };
        consts.push(r.distance(&lin) / (eps * eps));
    }
    let spread = consts[1..].iter().map(|c| (c / consts[0] - 1.0).abs()).fold(0.0, f64::max);
    checks.push(Check::new("quadratic remainder constant spread", spread, Rule::AtMost(1e-3)));
    Ok(Criterion::new(9, "nonlinear solver invariants", checks))
}

pub const STABILITY_DT: f64 = 0.1;

fn stability_surrogate() -> Result<Criterion> {
    let grid = wide_torus()?;
    let sigma = 1.0;
    let p = par(sigma)?;
    let s = init_irrotational(
        grid,
        &InitSpec {
            sigma,
            eps: 1e-3,
            band: ENVELOPE_BAND,
            seed: 10,
            sobolev_s: 1,
            profile: InitProfile::Random,
        },
    )?;
    let wrap = wrap_time(&grid, &p, s.to_spectral().active_band())?;
    let t_end = (wrap / STABILITY_DT).floor() * STABILITY_DT;
    let rec = run(&solver_config(Scheme::Etdrk4Alpha, sigma, STABILITY_DT, t_end), &s)?;
    let sm = rec.summary();
    let checks = vec![
        Check::new(format!("sup X(t)/X(0) on [0, {t_end:.1}]"), sm.x_ratio, Rule::AtMost(2.0)),
        Check::new("run ends inside wrap window", (t_end > rec.wrap_time) as u8 as f64, Rule::AtMost(0.0)),
    ];
    Ok(Criterion::new(10, "finite-window stability surrogate", checks))
}
