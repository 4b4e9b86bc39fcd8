//! Extremal sampling of the phase lower bounds and derivative bounds, and
//! sweeps of the dyadic kernel shell norms.
//!
//! Samples are drawn in fixed-size chunks, each from its own ChaCha stream,
//! so reports depend on the seed only and not on the thread count.

use std::f64::consts::PI;

use erz_core::bounds::{lower_bound_ratio, DerivativeBound, LowerRegime};
use erz_core::kernel::KernelParams;
use erz_core::phase::{FreqTriple, SignPair};
use erz_core::shell::{default_probes, dyadic_kernel_norm, ShellDirection, ShellQuadrature};
use erz_core::{DispersionParams, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ErzError, Result};

/// Samples per ChaCha stream.
pub const CHUNK: usize = 4096;
/// Relative change of an extremum under doubling that still counts as stable.
pub const STABILITY_TOL: f64 = 0.1;
/// Rejection attempts allowed per accepted sample.
const MAX_ATTEMPTS: usize = 1000;

/// Log-uniform magnitude range of the sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MagnitudeRange {
    pub lo: f64,
    pub hi: f64,
}

impl MagnitudeRange {
    pub const DEFAULT: MagnitudeRange = MagnitudeRange { lo: 1e-6, hi: 1e6 };
    /// Two decades wider on each side, for the domain-widening check.
    pub const WIDE: MagnitudeRange = MagnitudeRange { lo: 1e-8, hi: 1e8 };

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        let (a, b) = (self.lo.ln(), self.hi.ln());
        rng.gen_range(a..b).exp()
    }
}

/// Parses an `ERZ_THREADS` value; zero and non-integers are rejected.
pub fn threads_from_env(v: &str) -> Result<usize> {
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(ErzError::Config(format!("ERZ_THREADS = {v:?} is not a positive integer"))),
    }
}

/// Thread pool sized by `ERZ_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("ERZ_THREADS") {
        b = b.num_threads(threads_from_env(&v)?);
    }
    b.build().map_err(|e| ErzError::Config(e.to_string()))
}

fn unit(rng: &mut ChaCha8Rng) -> Vec3 {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..2.0 * PI);
    let s = (1.0 - z * z).sqrt();
    Vec3::new(s * phi.cos(), s * phi.sin(), z)
}

fn vector(rng: &mut ChaCha8Rng, range: &MagnitudeRange) -> Vec3 {
    unit(rng) * range.draw(rng)
}

/// A random triple from one of the three parametrizations `(xi, eta)`,
/// `(xi, xi - eta)`, `(eta, xi - eta)`, so that each of the three
/// magnitudes can be small independently of the others.
fn triple(rng: &mut ChaCha8Rng, range: &MagnitudeRange) -> FreqTriple {
    let u = vector(rng, range);
    let v = vector(rng, range);
    match rng.gen_range(0..3) {
        0 => FreqTriple::new(u, v),
        1 => FreqTriple::new(u, u - v),
        _ => FreqTriple::new(u + v, u),
    }
}

fn nondegenerate(t: &FreqTriple) -> bool {
    t.xi.norm() > 0.0 && t.eta.norm() > 0.0 && t.zeta().norm() > 0.0
}

/// One extremal statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Extremum {
    value: f64,
    at: Option<FreqTriple>,
}

impl Extremum {
    fn min() -> Self {
        Extremum {
            value: f64::INFINITY,
            at: None,
        }
    }

    fn max() -> Self {
        Extremum {
            value: f64::NEG_INFINITY,
            at: None,
        }
    }
}

/// Runs `count` accepted samples of `eval` and reduces chunk extrema in
/// chunk order. `eval` returns `None` to reject.
fn extremal<F>(count: usize, seed: u64, minimize: bool, eval: F) -> Result<(Extremum, Extremum)>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Option<(f64, FreqTriple)>> + Sync,
{
    let chunks = count.div_ceil(CHUNK);
    let half_chunks = chunks.div_ceil(2);
    let pool = thread_pool()?;
    let per_chunk: Vec<Result<Extremum>> = pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(c as u64);
                let n = CHUNK.min(count - c * CHUNK);
                let mut best = if minimize { Extremum::min() } else { Extremum::max() };
                let mut accepted = 0;
                let mut attempts = 0;
                while accepted < n {
                    attempts += 1;
                    if attempts > MAX_ATTEMPTS * n {
                        return Err(ErzError::Invalid(
                            "sampler could not satisfy the case constraints".into(),
                        ));
                    }
                    if let Some((r, t)) = eval(&mut rng)? {
                        accepted += 1;
                        let better = if minimize { r < best.value } else { r > best.value };
                        if better || best.at.is_none() {
                            best = Extremum { value: r, at: Some(t) };
                        }
                    }
                }
                Ok(best)
            })
            .collect()
    });
    let fold = |xs: &[Result<Extremum>]| -> Result<Extremum> {
        let mut best = if minimize { Extremum::min() } else { Extremum::max() };
        for e in xs {
            let e = e.as_ref().map_err(|e| ErzError::Invalid(e.to_string()))?;
            let better = if minimize { e.value < best.value } else { e.value > best.value };
            if better || best.at.is_none() {
                best = *e;
            }
        }
        Ok(best)
    };
    Ok((fold(&per_chunk[..half_chunks])?, fold(&per_chunk)?))
}

/// Report of one bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound_id: String,
    pub sigma: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// Minimum ratio for lower bounds, maximum for upper bounds.
    pub extremal_ratio: f64,
    /// The same statistic over the first half of the samples.
    pub half_ratio: f64,
    /// `(xi, eta)` of the extremum.
    pub extremal_triple: Option<([f64; 3], [f64; 3])>,
    /// `|extremal_ratio / half_ratio - 1|`.
    pub stability_delta: f64,
    /// Relative change when the magnitude range is widened, if checked.
    pub widening_delta: Option<f64>,
    pub range: MagnitudeRange,
}

impl BoundReport {
    pub fn is_stable(&self) -> bool {
        self.stability_delta < STABILITY_TOL && self.widening_delta.is_none_or(|d| d < STABILITY_TOL)
    }

    /// Lower bounds: strictly positive and stable.
    pub fn lower_passes(&self) -> bool {
        self.extremal_ratio > 0.0 && self.extremal_ratio.is_finite() && self.is_stable()
    }

    /// Upper bounds: finite and stable.
    pub fn upper_passes(&self) -> bool {
        self.extremal_ratio.is_finite() && self.is_stable()
    }
}

fn report(
    id: &str,
    sigma: f64,
    n: usize,
    seed: u64,
    range: MagnitudeRange,
    (half, full): (Extremum, Extremum),
) -> BoundReport {
    BoundReport {
        bound_id: id.to_string(),
        sigma,
        n_samples: n,
        seed,
        extremal_ratio: full.value,
        half_ratio: half.value,
        extremal_triple: full.at.map(|t| (t.xi.0, t.eta.0)),
        stability_delta: (full.value / half.value - 1.0).abs(),
        widening_delta: None,
        range,
    }
}

/// Sampling of `a = b + c`, with `b` and `c` log-uniform in magnitude and
/// uniform in direction.
fn lower_sample(
    params: &DispersionParams,
    regime: LowerRegime,
    range: &MagnitudeRange,
    rng: &mut ChaCha8Rng,
) -> Option<(f64, FreqTriple)> {
    let b = vector(rng, range);
    let c = vector(rng, range);
    let r = lower_bound_ratio(params, regime, b, c)?;
    // In triple form: xi = a, eta = c, xi - eta = b.
    Some((r, FreqTriple::new(b + c, c)))
}

/// Minimum of `|p(a) - p(b) - p(c)| / RHS` over `n` admissible samples.
pub fn verify_phase_lower_bound(
    params: &DispersionParams,
    regime: LowerRegime,
    n_samples: usize,
    seed: u64,
    range: MagnitudeRange,
) -> Result<BoundReport> {
    if n_samples < 2 {
        return Err(ErzError::Invalid("need at least two samples".into()));
    }
    let ex = extremal(n_samples, seed, true, |rng| Ok(lower_sample(params, regime, &range, rng)))?;
    Ok(report(regime.label(), params.sigma(), n_samples, seed, range, ex))
}

/// Maximum of `LHS / RHS` for one derivative bound.
pub fn verify_derivative_bound(
    params: &DispersionParams,
    bound: DerivativeBound,
    n_samples: usize,
    seed: u64,
    range: MagnitudeRange,
) -> Result<BoundReport> {
    if n_samples < 2 {
        return Err(ErzError::Invalid("need at least two samples".into()));
    }
    let ex = extremal(n_samples, seed, false, |rng| {
        let t = triple(rng, &range);
        if !nondegenerate(&t) {
            return Ok(None);
        }
        Ok(bound.ratio(params, &t)?.map(|r| (r, t)))
    })?;
    Ok(report(bound.label(), params.sigma(), n_samples, seed, range, ex))
}

/// All derivative bounds, each with the domain-widening check.
pub fn verify_derivative_bounds(
    params: &DispersionParams,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<BoundReport>> {
    DerivativeBound::ALL
        .iter()
        .map(|&b| {
            let mut r = verify_derivative_bound(params, b, n_samples, seed, MagnitudeRange::DEFAULT)?;
            let w = verify_derivative_bound(params, b, n_samples, seed, MagnitudeRange::WIDE)?;
            r.widening_delta = Some((w.extremal_ratio / r.extremal_ratio - 1.0).abs());
            Ok(r)
        })
        .collect()
}

/// Relative change of an extremum between two seeds.
pub fn seed_delta(a: &BoundReport, b: &BoundReport) -> f64 {
    (a.extremal_ratio / b.extremal_ratio - 1.0).abs()
}

/// One row of the kernel shell-norm table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShellRow {
    pub sp: String,
    pub direction: String,
    pub n: f64,
    pub k: f64,
    pub lambda: f64,
    pub value: f64,
    pub fine_value: f64,
    pub argmax: f64,
    /// `|value / fine_value - 1|`.
    pub consistency: f64,
    /// `value(N) / value(N/2)`, when the previous octave is in the sweep.
    pub octave_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelSweep {
    pub rows: Vec<ShellRow>,
    /// Largest per-octave ratio among rows with `N >= n_from`.
    pub max_ratio: f64,
    pub n_from: f64,
    /// Largest coarse/fine disagreement.
    pub max_consistency: f64,
    /// Geometric tail bound beyond the last shell, relative to the partial sum.
    pub tail_fraction: f64,
}

/// Probes per dyadic shell for the supremum over the free variable.
pub const PROBES: usize = 32;
/// Golden-section steps near the best probe.
pub const REFINE_STEPS: usize = 24;

pub fn kernel_sweep(
    sp: SignPair,
    kp: &KernelParams,
    dir: ShellDirection,
    shells: &[f64],
    n_from: f64,
) -> Result<KernelSweep> {
    if !kp.is_summable() {
        return Err(ErzError::Invalid(format!(
            "lambda = {} is below 7/4 + sigma k = {}",
            kp.lambda,
            1.75 + kp.sigma() * kp.k
        )));
    }
    let pool = thread_pool()?;
    let coarse = ShellQuadrature::coarse();
    let fine = ShellQuadrature::fine();
    let vals: Vec<Result<(f64, f64, f64)>> = pool.install(|| {
        shells
            .par_iter()
            .map(|&n| {
                let probes = default_probes(n, PROBES);
                let c = dyadic_kernel_norm(sp, kp, dir, n, &probes, &coarse, REFINE_STEPS)?;
                let f = dyadic_kernel_norm(sp, kp, dir, n, &probes, &fine, REFINE_STEPS)?;
                Ok((c.value, f.value, c.argmax))
            })
            .collect()
    });
    let mut rows: Vec<ShellRow> = Vec::with_capacity(shells.len());
    for (i, (&n, v)) in shells.iter().zip(vals).enumerate() {
        let (value, fine_value, argmax) = v?;
        let octave_ratio = (i > 0 && (shells[i - 1] * 2.0 - n).abs() < 1e-12 * n)
            .then(|| value / rows[i - 1].value);
        rows.push(ShellRow {
            sp: format!("{}{}", sp.r, sp.l),
            direction: dir.label().to_string(),
            n,
            k: kp.k,
            lambda: kp.lambda,
            value,
            fine_value,
            argmax,
            consistency: (value / fine_value - 1.0).abs(),
            octave_ratio,
        });
    }
    let max_ratio = rows
        .iter()
        .filter(|r| r.n >= n_from)
        .filter_map(|r| r.octave_ratio)
        .fold(0.0, f64::max);
    let max_consistency = rows.iter().map(|r| r.consistency).fold(0.0, f64::max);
    let sum: f64 = rows.iter().filter(|r| r.n >= n_from).map(|r| r.value).sum();
    let last = rows.last().map(|r| r.value).unwrap_or(0.0);
    let tail_fraction = if max_ratio < 1.0 && sum > 0.0 {
        last * max_ratio / (1.0 - max_ratio) / sum
    } else {
        f64::INFINITY
    };
    Ok(KernelSweep {
        rows,
        max_ratio,
        n_from,
        max_consistency,
        tail_fraction,
    })
}

/// Dyadic shells `2^lo ..= 2^hi`.
pub fn dyadic_shells(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|j| 2f64.powi(j)).collect()
}
