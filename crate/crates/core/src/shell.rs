//! Dyadic shell norms `|| M(q, .) phi_N ||_{H^k}` of the regularized kernel.
//!
//! For a probe `q` with `|q| = s` the kernel depends on the integration
//! variable `v` only through `u = |v|` and `rho = |v - q|`, so all shell
//! integrals reduce to two-dimensional bipolar quadratures
//! `int f d^3v = (2 pi / s) int int f(u, rho) u rho du drho` over the triangle
//! `|u - rho| <= s <= u + rho`.
//!
//! The kernel is only Holder continuous at `rho = 0`, and its `H^2` norm can
//! diverge there (logarithmically at `sigma = 1`). The fractional norm is
//! therefore estimated piecewise: the kernel is split with a dyadic partition
//! in `rho` around that point, the interpolation bound
//! `||f||_{H^k} <= ||f||_{L^2}^(1 - k/2) ||f||_{H^2}^(k/2)` is applied to each
//! piece, and the pieces are summed.

#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::float::Float as _;

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::cutoff::{cutoff_scaled, dyadic};
use crate::error::{Error, Result};
use crate::jet::{Jet2, Taylor2};
use crate::kernel::KernelParams;
use crate::phase::SignPair;
use crate::quad::{geometric_breaks, merge_breaks, GaussLegendre};

/// Which variable carries the Littlewood-Paley shell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ShellDirection {
    /// `sup_xi || P_N^eta M ||_{H^k_eta}`.
    EtaShells,
    /// `sup_eta || P_N^xi M ||_{H^k_xi}`.
    XiShells,
}

impl ShellDirection {
    pub const ALL: [ShellDirection; 2] = [ShellDirection::EtaShells, ShellDirection::XiShells];

    pub fn label(self) -> &'static str {
        match self {
            ShellDirection::EtaShells => "eta_shells",
            ShellDirection::XiShells => "xi_shells",
        }
    }
}

/// Quadrature resolution for a single shell integral.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellQuadrature {
    rule: GaussLegendre,
    /// Geometric panels per octave in `rho`.
    pub per_octave: usize,
    /// Panels per half of the shell in `u`.
    pub u_panels: usize,
    /// Dyadic pieces resolved explicitly before the geometric tail.
    pub pieces: usize,
}

impl ShellQuadrature {
    pub fn new(order: usize, per_octave: usize, u_panels: usize, pieces: usize) -> Self {
        ShellQuadrature {
            rule: GaussLegendre::new(order),
            per_octave,
            u_panels,
            pieces,
        }
    }

    /// Base resolution.
    pub fn coarse() -> Self {
        Self::new(12, 2, 2, 40)
    }

    /// Every parameter refined, for the self-consistency check.
    pub fn fine() -> Self {
        Self::new(20, 4, 4, 56)
    }

    pub fn order(&self) -> usize {
        self.rule.len()
    }
}

/// `L^2`, `H^2` and interpolated `H^k` sizes of one shell.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShellEstimate {
    pub l2: f64,
    /// `H^2` norm of the undecomposed shell as returned by the quadrature;
    /// only meaningful when `pieces == 0`.
    pub h2: f64,
    pub hk: f64,
    /// Number of dyadic pieces used around `rho = 0` (0 if none).
    pub pieces: usize,
    /// Geometric ratio of successive pieces' `H^k` bounds.
    pub piece_ratio: f64,
}

/// Closed form `Taylor2` of `p` at `r`.
fn p_jet(kp: &KernelParams, r: f64) -> Taylor2 {
    let d = &kp.dispersion;
    Taylor2 {
        v: d.p(r),
        d1: d.dp(r),
        d2: d.d2p(r),
    }
}

struct Setting<'a> {
    sp: SignPair,
    kp: &'a KernelParams,
    dir: ShellDirection,
    s: f64,
    n: f64,
    s_pow: f64,
    p_s: f64,
    bracket_s: f64,
}

impl Setting<'_> {
    /// Kernel as a jet in `(u, rho)`.
    fn kernel(&self, u: f64, rho: f64) -> Jet2 {
        let a = self.kp.a();
        let lam = self.kp.lambda;
        let num = Jet2::of_u(Taylor2::power(u, a)) * Jet2::of_rho(Taylor2::power(rho, a));
        let pr = Jet2::of_rho(p_jet(self.kp, rho)).scale(self.sp.sr());
        match self.dir {
            ShellDirection::EtaShells => {
                let br = Jet2::of_rho(Taylor2::japanese_neg(rho, lam))
                    * Jet2::of_u(Taylor2::japanese_neg(u, lam));
                let phi = Jet2::constant(self.p_s)
                    + pr
                    + Jet2::of_u(p_jet(self.kp, u)).scale(self.sp.sl());
                (num * br * phi.recip()).scale(self.s_pow)
            }
            ShellDirection::XiShells => {
                let br = Jet2::of_rho(Taylor2::japanese_neg(rho, lam));
                let phi = Jet2::of_u(p_jet(self.kp, u)) + pr + Jet2::constant(self.sp.sl() * self.p_s);
                (num * br * phi.recip()).scale(self.s_pow * self.bracket_s)
            }
        }
    }

    /// Limit of the kernel as `rho -> 0`, where `u -> s` and `Phi` reduces
    /// to `(-1)^r p(rho)` when `l = 1`.
    fn rho_limit(&self) -> f64 {
        if self.sp.l == 1 {
            self.sp.sr() * self.s_pow * self.s_pow * (1.0 + self.s * self.s).powf(-self.kp.lambda)
        } else {
            0.0
        }
    }

    fn shell(&self, u: f64) -> Jet2 {
        Jet2::of_u(dyadic(u, self.n))
    }

    /// `rho` range where the shell `[N/2, 2N]` meets the triangle.
    fn rho_range(&self) -> (f64, f64) {
        let lo = 0.5 * self.n;
        let hi = 2.0 * self.n;
        let d = if self.s < lo {
            lo - self.s
        } else if self.s > hi {
            self.s - hi
        } else {
            0.0
        };
        (d, self.s + hi)
    }

    fn kinks(&self) -> [f64; 10] {
        let s = self.s;
        let n = self.n;
        [
            (s - 0.5 * n).abs(),
            (s - 0.75 * n).abs(),
            (s - n).abs(),
            (s - 1.5 * n).abs(),
            (s - 2.0 * n).abs(),
            s + 0.5 * n,
            s + 0.75 * n,
            s + n,
            s + 1.5 * n,
            s + 2.0 * n,
        ]
    }
}

/// `(int F^2, int (Delta F)^2)` over `rho in [lo, hi]` for
/// `F = shell(u) * build(u, rho)`.
fn integrate_piece<F>(st: &Setting<'_>, q: &ShellQuadrature, lo: f64, hi: f64, build: F) -> (f64, f64)
where
    F: Fn(f64, f64) -> Jet2,
{
    let (rlo, rhi) = st.rho_range();
    let lo = lo.max(rlo);
    let hi = hi.min(rhi);
    if !(hi > lo) {
        return (0.0, 0.0);
    }
    let mut breaks = if lo > 0.0 {
        geometric_breaks(lo, hi, q.per_octave)
    } else {
        let mut g = geometric_breaks(hi * 1e-6, hi, q.per_octave);
        g.insert(0, 0.0);
        g
    };
    breaks.extend_from_slice(&st.kinks());
    let breaks = merge_breaks(lo, hi, &breaks);

    let u_lo = 0.5 * st.n;
    let u_hi = 2.0 * st.n;
    let mut u_edges: Vec<f64> = Vec::with_capacity(2 * q.u_panels + 1);
    for half in 0..2 {
        let (a, b) = if half == 0 { (u_lo, st.n) } else { (st.n, u_hi) };
        for i in 0..q.u_panels {
            u_edges.push(a + (b - a) * i as f64 / q.u_panels as f64);
        }
    }
    u_edges.push(u_hi);

    let mut sum0 = 0.0;
    let mut sum2 = 0.0;
    for w in breaks.windows(2) {
        for (rho, wr) in q.rule.mapped(w[0], w[1]) {
            let ua = u_lo.max((rho - st.s).abs());
            let ub = u_hi.min(rho + st.s);
            if !(ub > ua) {
                continue;
            }
            let mut edges: Vec<f64> = u_edges.iter().copied().filter(|&e| e > ua && e < ub).collect();
            edges.insert(0, ua);
            edges.push(ub);
            for e in edges.windows(2) {
                for (u, wu) in q.rule.mapped(e[0], e[1]) {
                    let f = st.shell(u) * build(u, rho);
                    let lap = f.laplacian(u, rho, st.s);
                    let m = wr * wu * u * rho;
                    sum0 += m * f.v * f.v;
                    sum2 += m * lap * lap;
                }
            }
        }
    }
    let c = 2.0 * PI / st.s;
    (c * sum0, c * sum2)
}

fn interpolate(l2: f64, h2: f64, k: f64) -> f64 {
    if k == 0.0 {
        l2
    } else if l2 == 0.0 {
        0.0
    } else {
        l2.powf(1.0 - 0.5 * k) * h2.powf(0.5 * k)
    }
}

/// Shell estimate for `sp`, `kp`, dyadic `n` and probe magnitude `s`.
pub fn shell_estimate(
    sp: SignPair,
    kp: &KernelParams,
    dir: ShellDirection,
    n: f64,
    s: f64,
    q: &ShellQuadrature,
) -> Result<ShellEstimate> {
    if !(n > 0.0 && s > 0.0 && n.is_finite() && s.is_finite()) {
        return Err(Error::DegenerateTriple);
    }
    let lam = kp.lambda;
    let st = Setting {
        sp,
        kp,
        dir,
        s,
        n,
        s_pow: s.powf(kp.a()),
        p_s: kp.dispersion.p(s),
        bracket_s: match dir {
            ShellDirection::EtaShells => 1.0,
            ShellDirection::XiShells => (1.0 + s * s).powf(-lam),
        },
    };
    let k = kp.k;
    let rho0 = s.min(n).min(1.0) / 4.0;
    let (rlo, rhi) = st.rho_range();

    let (m0, m2) = integrate_piece(&st, q, rlo, rhi, |u, r| st.kernel(u, r));
    let l2 = m0.sqrt();
    if rlo >= 2.0 * rho0 || k == 0.0 {
        let h2 = m2.sqrt();
        return Ok(ShellEstimate {
            l2,
            h2,
            hk: interpolate(l2, h2, k),
            pieces: 0,
            piece_ratio: 0.0,
        });
    }

    let c = st.rho_limit();
    let outer = |u: f64, r: f64| {
        let w = Jet2::of_rho(cutoff_scaled(r, rho0));
        st.kernel(u, r) * (Jet2::constant(1.0) - w)
    };
    let (o0, o2) = integrate_piece(&st, q, rho0, rhi, outer);
    let mut hk = interpolate(o0.sqrt(), o2.sqrt(), k);
    if c != 0.0 {
        let constant = |_u: f64, r: f64| Jet2::of_rho(cutoff_scaled(r, rho0)).scale(c);
        let (c0, c2) = integrate_piece(&st, q, 0.0, 2.0 * rho0, constant);
        hk += interpolate(c0.sqrt(), c2.sqrt(), k);
    }
    let mut last = 0.0;
    let mut prev = 0.0;
    let mut used = 0;
    // Below this scale the u-interval [s - rho, s + rho] is not resolved.
    let floor = 1e-11 * s.max(n);
    let mut reaches_zero = true;
    for j in 0..q.pieces {
        let rj = rho0 * 0.5f64.powi(j as i32);
        if 2.0 * rj <= rlo {
            reaches_zero = false;
            break;
        }
        if rj < floor {
            break;
        }
        let piece = |u: f64, r: f64| {
            (st.kernel(u, r) - Jet2::constant(c)) * Jet2::of_rho(dyadic(r, rj))
        };
        let (p0, p2) = integrate_piece(&st, q, 0.5 * rj, 2.0 * rj, piece);
        let h = interpolate(p0.sqrt(), p2.sqrt(), k);
        hk += h;
        prev = last;
        last = h;
        used = j + 1;
    }
    let ratio = if prev > 0.0 { last / prev } else { 0.0 };
    if reaches_zero {
        if ratio < 1.0 {
            hk += last * ratio / (1.0 - ratio);
        } else {
            hk = f64::INFINITY;
        }
    }
    Ok(ShellEstimate {
        l2,
        h2: m2.sqrt(),
        hk,
        pieces: used,
        piece_ratio: ratio,
    })
}

/// Supremum of the shell estimate over probe magnitudes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProbeSup {
    pub value: f64,
    pub argmax: f64,
    pub estimate: ShellEstimate,
    pub evaluations: usize,
}

/// Log-spaced probes covering `[min(N, 1) / 16, 16 max(N, 1)]`.
pub fn default_probes(n: f64, count: usize) -> Vec<f64> {
    crate::fit::logspace(n.min(1.0) / 16.0, 16.0 * n.max(1.0), count)
}

/// Sup over `probes`, then golden-section refinement in `log s` between the
/// neighbours of the best probe.
pub fn dyadic_kernel_norm(
    sp: SignPair,
    kp: &KernelParams,
    dir: ShellDirection,
    n: f64,
    probes: &[f64],
    q: &ShellQuadrature,
    refine_steps: usize,
) -> Result<ProbeSup> {
    if probes.is_empty() {
        return Err(Error::TooFewSamples { got: 0, need: 1 });
    }
    let mut best_i = 0;
    let mut best = shell_estimate(sp, kp, dir, n, probes[0], q)?;
    let mut evaluations = 1;
    for (i, &s) in probes.iter().enumerate().skip(1) {
        let e = shell_estimate(sp, kp, dir, n, s, q)?;
        evaluations += 1;
        if e.hk > best.hk {
            best = e;
            best_i = i;
        }
    }
    let mut arg = probes[best_i];
    let mut lo = probes[best_i.saturating_sub(1)].ln();
    let mut hi = probes[(best_i + 1).min(probes.len() - 1)].ln();
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let eval = |x: f64| shell_estimate(sp, kp, dir, n, x.exp(), q);
    if hi > lo && refine_steps > 0 {
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let mut f1 = eval(x1)?;
        let mut f2 = eval(x2)?;
        evaluations += 2;
        for _ in 0..refine_steps {
            if f1.hk > f2.hk {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = eval(x1)?;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = eval(x2)?;
            }
            evaluations += 1;
        }
        for (x, f) in [(x1, f1), (x2, f2)] {
            if f.hk > best.hk {
                best = f;
                arg = x.exp();
            }
        }
    }
    Ok(ProbeSup {
        value: best.hk,
        argmax: arg,
        estimate: best,
        evaluations,
    })
}
