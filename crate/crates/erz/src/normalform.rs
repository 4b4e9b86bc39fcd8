//! Profile variable, the quadratic term `Q(alpha)`, dense bilinear operators
//! and the normal-form identity
//! `alpha(t) = e^{itp} alpha(0) + g(t) - e^{itp} g(0) + h(t)`.
//!
//! Dense sums use the coefficient convolution
//! `B[m](f, g)^(xi) = sum_eta m(xi, eta) f^(xi - eta) g^(eta)`, so `m = 1`
//! reproduces the coefficients of the pointwise product `f g`.

use std::sync::Arc;

use erz_core::phase::{phase, FreqTriple, SignPair};
use erz_core::symbol::{symbol_m, symbol_raw, symbols_all};
use erz_core::{DispersionParams, Vec3};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{ErzError, Result};
use crate::solver::{FluidState, SpectralState, Trajectory, VACUUM_HARD};
use crate::spectral::{GridSpec, Lattice, SpectralField};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Ceiling on `M^2` for dense lattice sums.
pub const DENSE_BUDGET: f64 = 1e9;
/// `|Phi|` below this with a nonzero symbol is an exact lattice resonance.
pub const RESONANCE_TOL: f64 = 1e-13;
/// Curl tolerance of the profile map, relative to `||u||`.
pub const CURL_TOL: f64 = 1e-8;

/// `alpha = (p/|D|) n + i (D/|D|).u`.
#[derive(Debug, Clone)]
pub struct AlphaProfile {
    pub alpha: SpectralField,
    pub sigma: f64,
}

impl AlphaProfile {
    pub fn new(alpha: SpectralField, sigma: f64) -> Result<Self> {
        DispersionParams::new(sigma)?;
        let mut alpha = alpha;
        alpha.set_hermitian(false);
        alpha.coeffs_mut()[0] = ZERO;
        Ok(AlphaProfile { alpha, sigma })
    }

    pub fn grid(&self) -> &GridSpec {
        self.alpha.grid()
    }

    pub fn params(&self) -> DispersionParams {
        DispersionParams::new(self.sigma).expect("validated")
    }
}

/// Profile coefficients from `(n^, u^)`; the zero mode is 0.
pub fn alpha_coeffs(
    lat: &Lattice,
    params: &DispersionParams,
    n: &[Complex64],
    u: &[&[Complex64]],
) -> Vec<Complex64> {
    let mut a = vec![ZERO; lat.len()];
    for i in 1..lat.len() {
        let r = lat.abs[i];
        let mut b = ZERO;
        for (j, c) in u.iter().enumerate() {
            b += lat.xi[j][i] / r * c[i];
        }
        a[i] = params.p(r) / r * n[i] - b;
    }
    a
}

/// Inverse of [`alpha_coeffs`] on gradient fields.
pub fn state_coeffs_from_alpha(
    lat: &Lattice,
    params: &DispersionParams,
    a: &[Complex64],
) -> (Vec<Complex64>, Vec<Vec<Complex64>>) {
    let m = lat.len();
    let d = lat.dim();
    let mut n = vec![ZERO; m];
    let mut u = vec![vec![ZERO; m]; d];
    for i in 1..m {
        let r = lat.abs[i];
        let a2 = a[lat.neg[i]].conj();
        n[i] = r / params.p(r) * 0.5 * (a[i] + a2);
        let b = -0.5 * (a[i] - a2);
        for j in 0..d {
            u[j][i] = lat.xi[j][i] / r * b;
        }
    }
    (n, u)
}

pub fn alpha_from_state(state: &FluidState, sigma: f64) -> Result<AlphaProfile> {
    let params = DispersionParams::new(sigma)?;
    let lat = Lattice::new(*state.grid());
    let w = state.to_spectral();
    let scale = w.l2_norm().max(f64::MIN_POSITIVE);
    for c in w.data.chunks(lat.len()) {
        if c[0].norm() * state.grid().volume().sqrt() > 1e-12 * scale {
            return Err(ErzError::NotMeanZero(c[0].norm()));
        }
    }
    let un = w.u_norm();
    if un > 0.0 {
        let ratio = w.curl_norm() / un;
        if ratio > CURL_TOL {
            return Err(ErzError::Rotational(ratio));
        }
    }
    let us: Vec<&[Complex64]> = (0..lat.dim()).map(|j| w.u(j)).collect();
    let a = alpha_coeffs(&lat, &params, w.n(), &us);
    AlphaProfile::new(SpectralField::from_coeffs(lat.grid, a, false)?, sigma)
}

pub fn state_from_alpha(profile: &AlphaProfile) -> Result<FluidState> {
    let lat = Lattice::new(*profile.grid());
    let (n, u) = state_coeffs_from_alpha(&lat, &profile.params(), profile.alpha.coeffs());
    let mut data = n;
    for c in u {
        data.extend(c);
    }
    FluidState::from_spectral(&SpectralState {
        grid: lat.grid,
        data,
    })
}

/// `Q = -(p/|D|) div(n u) + i |D| (n^2/2 + |u|^2/2)` in coefficients, with
/// `(n, u)` rebuilt from `alpha`; products are dealiased.
pub fn quadratic_q_coeffs(
    lat: &Lattice,
    params: &DispersionParams,
    a: &[Complex64],
) -> Result<Vec<Complex64>> {
    let m = lat.len();
    let mut ad = a.to_vec();
    lat.dealias(&mut ad);
    let (nh, uh) = state_coeffs_from_alpha(lat, params, &ad);
    let n = lat.to_real(&nh);
    let nmax = n.iter().fold(0.0_f64, |x, v| x.max(v.abs()));
    if nmax >= VACUUM_HARD {
        return Err(ErzError::VacuumCrossing(nmax));
    }
    let u: Vec<Vec<f64>> = uh.iter().map(|c| lat.to_real(c)).collect();
    let mut g: Vec<f64> = n.iter().map(|v| 0.5 * v * v).collect();
    for c in &u {
        for (gi, v) in g.iter_mut().zip(c) {
            *gi += 0.5 * v * v;
        }
    }
    let gh = lat.from_real(&g);
    let mut q = vec![ZERO; m];
    let mut div = vec![ZERO; m];
    for (j, c) in u.iter().enumerate() {
        let prod: Vec<f64> = n.iter().zip(c).map(|(x, y)| x * y).collect();
        let f = lat.from_real(&prod);
        for i in 0..m {
            div[i] += I * lat.xi[j][i] * f[i];
        }
    }
    for i in 1..m {
        let r = lat.abs[i];
        q[i] = -(params.p(r) / r) * div[i] + I * r * gh[i];
    }
    lat.dealias(&mut q);
    Ok(q)
}

pub fn quadratic_q(profile: &AlphaProfile) -> Result<SpectralField> {
    let lat = Lattice::new(*profile.grid());
    let q = quadratic_q_coeffs(&lat, &profile.params(), profile.alpha.coeffs())?;
    SpectralField::from_coeffs(lat.grid, q, false)
}

type KernelFn = dyn Fn([f64; 3], [f64; 3]) -> Complex64 + Send + Sync;
type GuardFn = dyn Fn([f64; 3], [f64; 3]) -> bool + Send + Sync;

/// `m(xi, eta)` with a guard that drops singular lattice pairs.
#[derive(Clone)]
pub struct BilinearKernel {
    pub label: String,
    eval: Arc<KernelFn>,
    guard: Arc<GuardFn>,
}

impl std::fmt::Debug for BilinearKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BilinearKernel").field("label", &self.label).finish()
    }
}

fn is_zero(v: [f64; 3]) -> bool {
    v == [0.0; 3]
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Zero output or zero input frequency.
fn zero_mode_guard(xi: [f64; 3], eta: [f64; 3]) -> bool {
    is_zero(xi) || is_zero(eta) || is_zero(sub(xi, eta))
}

impl BilinearKernel {
    pub fn new(
        label: impl Into<String>,
        eval: impl Fn([f64; 3], [f64; 3]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        BilinearKernel {
            label: label.into(),
            eval: Arc::new(eval),
            guard: Arc::new(|_, _| false),
        }
    }

    pub fn with_guard(mut self, g: impl Fn([f64; 3], [f64; 3]) -> bool + Send + Sync + 'static) -> Self {
        self.guard = Arc::new(g);
        self
    }

    pub fn one() -> Self {
        Self::new("one", |_, _| Complex64::new(1.0, 0.0))
    }

    /// `m_{r,l}`, symmetrized or not.
    pub fn symbol(sp: SignPair, params: DispersionParams, symmetrized: bool) -> Self {
        let label = format!("m{}{}{}", sp.r, sp.l, if symmetrized { "" } else { "_raw" });
        Self::new(label, move |xi, eta| {
            let t = FreqTriple::new(Vec3(xi), Vec3(eta));
            let v = if symmetrized {
                symbol_m(sp, &params, &t)
            } else {
                symbol_raw(sp, &params, &t)
            };
            v.expect("guarded triple")
        })
        .with_guard(zero_mode_guard)
    }

    /// `m_{r,l} / Phi_{r,l}` (symmetrized).
    pub fn symbol_over_phase(sp: SignPair, params: DispersionParams) -> Self {
        Self::new(format!("m{}{}/phi", sp.r, sp.l), move |xi, eta| {
            let t = FreqTriple::new(Vec3(xi), Vec3(eta));
            symbol_m(sp, &params, &t).expect("guarded triple") / phase(sp, &params, &t)
        })
        .with_guard(zero_mode_guard)
    }

    pub fn eval(&self, xi: [f64; 3], eta: [f64; 3]) -> Option<Complex64> {
        (!(self.guard)(xi, eta)).then(|| (self.eval)(xi, eta))
    }
}

fn dense_check(grid: &GridSpec) -> Result<()> {
    let m2 = (grid.len() as f64).powi(2);
    if m2 > DENSE_BUDGET {
        return Err(ErzError::DenseTooLarge(m2));
    }
    Ok(())
}

/// Active `(eta, xi - eta)` index pairs for each active `xi`.
fn active_pairs(lat: &Lattice, xi: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
    let g = lat.grid;
    let kx = g.k_index(xi);
    let kmax = g.kmax();
    (0..lat.len()).filter_map(move |e| {
        if !lat.active[e] {
            return None;
        }
        let ke = g.k_index(e);
        let kz = [kx[0] - ke[0], kx[1] - ke[1], kx[2] - ke[2]];
        if kz.iter().any(|v| v.abs() > kmax) {
            return None;
        }
        let z = g.index_of(kz);
        lat.active[z].then_some((e, z))
    })
}

/// Dense `B[m](f, g)` over the dealias ball; guarded pairs contribute 0.
pub fn bilinear_apply(kernel: &BilinearKernel, f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.check_grid(g)?;
    let grid = *f.grid();
    dense_check(&grid)?;
    let lat = Lattice::new(grid);
    let (fc, gc) = (f.coeffs(), g.coeffs());
    let out: Vec<Complex64> = (0..lat.len())
        .into_par_iter()
        .map(|i| {
            if !lat.active[i] {
                return Ok(ZERO);
            }
            let xi = grid.xi(i);
            let mut acc = ZERO;
            for (e, z) in active_pairs(&lat, i) {
                if let Some(m) = kernel.eval(xi, grid.xi(e)) {
                    if !(m.re.is_finite() && m.im.is_finite()) {
                        return Err(ErzError::NonFiniteSymbol {
                            label: kernel.label.clone(),
                            xi,
                        });
                    }
                    acc += m * fc[z] * gc[e];
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    SpectralField::from_coeffs(grid, out, false)
}

/// Cached `m_{r,l}/Phi_{r,l}` on all active lattice pairs. The symmetrized
/// symbols are purely imaginary; `weights` holds `Im m / Phi`.
pub struct NormalForm {
    lat: Lattice,
    params: DispersionParams,
    p: Vec<f64>,
    offsets: Vec<usize>,
    outputs: Vec<usize>,
    eta: Vec<u32>,
    zeta: Vec<u32>,
    weights: Vec<[f64; 4]>,
}

impl NormalForm {
    pub fn new(grid: GridSpec, sigma: f64) -> Result<Self> {
        dense_check(&grid)?;
        let params = DispersionParams::new(sigma)?;
        let lat = Lattice::new(grid);
        let p = lat.abs.iter().map(|&r| params.p(r)).collect();
        let outputs: Vec<usize> = (1..lat.len()).filter(|&i| lat.active[i]).collect();
        let rows: Vec<Result<Vec<(u32, u32, [f64; 4])>>> = outputs
            .par_iter()
            .map(|&i| {
                let xi = grid.xi(i);
                let mut row = Vec::new();
                for (e, z) in active_pairs(&lat, i) {
                    if e == 0 || z == 0 {
                        continue;
                    }
                    let t = FreqTriple::new(Vec3(xi), Vec3(grid.xi(e)));
                    let m = symbols_all(&params, &t)?;
                    let mut w = [0.0; 4];
                    for sp in SignPair::ALL {
                        let k = sp.index();
                        let ph = phase(sp, &params, &t);
                        if m[k].norm() == 0.0 {
                            continue;
                        }
                        if ph.abs() < RESONANCE_TOL {
                            return Err(ErzError::ExactResonance(i));
                        }
                        w[k] = m[k].im / ph;
                    }
                    row.push((e as u32, z as u32, w));
                }
                Ok(row)
            })
            .collect();
        let mut offsets = vec![0];
        let (mut eta, mut zeta, mut weights) = (vec![], vec![], vec![]);
        for row in rows {
            for (e, z, w) in row? {
                eta.push(e);
                zeta.push(z);
                weights.push(w);
            }
            offsets.push(eta.len());
        }
        Ok(NormalForm {
            lat,
            params,
            p,
            offsets,
            outputs,
            eta,
            zeta,
            weights,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lat
    }

    pub fn pair_count(&self) -> usize {
        self.eta.len()
    }

    /// `sum_{r,l} B[m_{r,l}/Phi_{r,l}](f_r, g_l)`.
    pub fn apply(&self, f: [&[Complex64]; 2], g: [&[Complex64]; 2]) -> Vec<Complex64> {
        let vals: Vec<Complex64> = (0..self.outputs.len())
            .into_par_iter()
            .map(|o| {
                let mut acc = ZERO;
                for k in self.offsets[o]..self.offsets[o + 1] {
                    let (e, z) = (self.eta[k] as usize, self.zeta[k] as usize);
                    let w = &self.weights[k];
                    let (f1, f2) = (f[0][z], f[1][z]);
                    acc += (w[0] * f1 + w[2] * f2) * g[0][e] + (w[1] * f1 + w[3] * f2) * g[1][e];
                }
                I * acc
            })
            .collect();
        let mut out = vec![ZERO; self.lat.len()];
        for (o, v) in self.outputs.iter().zip(vals) {
            out[*o] = v;
        }
        out
    }

    pub fn boundary_g(&self, a: &[Complex64]) -> Vec<Complex64> {
        let a2 = self.lat.conj_field(a);
        self.apply([a, &a2], [a, &a2]).into_iter().map(|v| I * v).collect()
    }

    /// `e^{-i tau p} sum B[m/Phi](alpha_r, Q_l)` at one instant.
    fn h_integrand(&self, tau: f64, a: &[Complex64]) -> Result<Vec<Complex64>> {
        let q = quadratic_q_coeffs(&self.lat, &self.params, a)?;
        let a2 = self.lat.conj_field(a);
        let q2 = self.lat.conj_field(&q);
        let mut v = self.apply([a, &a2], [&q, &q2]);
        for (vi, p) in v.iter_mut().zip(&self.p) {
            *vi *= Complex64::from_polar(1.0, -tau * p);
        }
        Ok(v)
    }

    /// `h(t_k)` by composite Simpson over the first `k + 1` samples.
    pub fn cubic_h(&self, traj: &Trajectory, k: usize) -> Result<Vec<Complex64>> {
        let m = self.lat.len();
        if k == 0 {
            return Ok(vec![ZERO; m]);
        }
        let dt = uniform_step(traj, k)?;
        if k % 2 != 0 {
            return Err(ErzError::Invalid(format!(
                "composite Simpson needs an even number of steps, got {k}"
            )));
        }
        let mut acc = vec![ZERO; m];
        for j in 0..=k {
            let w = if j == 0 || j == k {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let v = self.h_integrand(traj.times[j], &traj.alpha[j])?;
            for (a, x) in acc.iter_mut().zip(v) {
                *a += w * x;
            }
        }
        let t = traj.times[k];
        Ok(acc
            .into_iter()
            .zip(&self.p)
            .map(|(s, p)| -2.0 * I * Complex64::from_polar(1.0, t * p) * s * (dt / 3.0))
            .collect())
    }

    /// Relative L^2 defect of the identity at sample `k`.
    pub fn residual(&self, traj: &Trajectory, k: usize) -> Result<f64> {
        if k == 0 {
            return Ok(0.0);
        }
        let t = traj.times[k];
        let a0 = &traj.alpha[0];
        let at = &traj.alpha[k];
        let g0 = self.boundary_g(a0);
        let gt = self.boundary_g(at);
        let h = self.cubic_h(traj, k)?;
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..self.lat.len() {
            let e = Complex64::from_polar(1.0, t * self.p[i]);
            let rhs = e * (a0[i] - g0[i]) + gt[i] + h[i];
            num += (at[i] - rhs).norm_sqr();
            den += at[i].norm_sqr();
        }
        if den == 0.0 {
            return Ok(num.sqrt());
        }
        Ok((num / den).sqrt())
    }
}

fn uniform_step(traj: &Trajectory, k: usize) -> Result<f64> {
    if traj.times.len() <= k || traj.alpha.len() != traj.times.len() {
        return Err(ErzError::Invalid(format!(
            "trajectory has {} samples, need {}",
            traj.times.len(),
            k + 1
        )));
    }
    let dt = traj.times[1] - traj.times[0];
    let uneven = traj.times[..=k]
        .windows(2)
        .any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt);
    if !(dt > 0.0) || uneven {
        return Err(ErzError::Invalid("trajectory is not on a uniform time grid".into()));
    }
    Ok(dt)
}

fn sample_index(traj: &Trajectory, t: f64) -> Result<usize> {
    traj.times
        .iter()
        .position(|&s| (s - t).abs() <= 1e-9 * t.abs().max(1.0))
        .ok_or_else(|| ErzError::Invalid(format!("t = {t} is not a trajectory sample")))
}

pub fn boundary_g(profile: &AlphaProfile) -> Result<SpectralField> {
    let nf = NormalForm::new(*profile.grid(), profile.sigma)?;
    SpectralField::from_coeffs(*profile.grid(), nf.boundary_g(profile.alpha.coeffs()), false)
}

pub fn cubic_h(grid: GridSpec, sigma: f64, traj: &Trajectory, t: f64) -> Result<SpectralField> {
    let nf = NormalForm::new(grid, sigma)?;
    let k = sample_index(traj, t)?;
    SpectralField::from_coeffs(grid, nf.cubic_h(traj, k)?, false)
}

pub fn shatah_residual(grid: GridSpec, sigma: f64, traj: &Trajectory, t: f64) -> Result<f64> {
    let nf = NormalForm::new(grid, sigma)?;
    nf.residual(traj, sample_index(traj, t)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cosine_profile_is_real() {
        let grid = GridSpec::cube(8, 2.0 * std::f64::consts::PI).unwrap();
        let lat = Lattice::new(grid);
        let params = DispersionParams::new(1.0).unwrap();
        let mut n = vec![ZERO; grid.len()];
        n[grid.index_of([1, 0, 0])] = Complex64::new(0.5, 0.0);
        n[grid.index_of([-1, 0, 0])] = Complex64::new(0.5, 0.0);
        let zero = vec![ZERO; grid.len()];
        let a = alpha_coeffs(&lat, &params, &n, &[&zero, &zero, &zero]);
        let k = params.p(1.0);
        assert!((a[grid.index_of([1, 0, 0])] - Complex64::new(0.5 * k, 0.0)).norm() < 1e-15);
        assert!((a[grid.index_of([-1, 0, 0])] - Complex64::new(0.5 * k, 0.0)).norm() < 1e-15);
    }
}
