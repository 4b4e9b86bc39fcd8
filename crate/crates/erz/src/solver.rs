//! Time integration of the primitive system and of the profile equation,
//! with the run-time monitors.

use std::f64::consts::PI;
use std::path::Path;

use erz_core::fit::fit_decay;
use erz_core::{DecayFit, DispersionParams};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ErzError, Result};
use crate::linflow::{active_band, Window};
use crate::normalform::{alpha_coeffs, quadratic_q_coeffs, state_coeffs_from_alpha};
use crate::spectral::norms::weighted_l2;
use crate::spectral::{norm_suite, GridSpec, Lattice, NormConfig, NormReport, SpectralField};

pub use crate::linflow::wrap_time;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Hard vacuum guard on `max |n|`.
pub const VACUUM_HARD: f64 = 0.9;
/// Soft warning threshold on `max |n|`.
pub const VACUUM_SOFT: f64 = 0.5;

/// Density perturbation `n = rho - 1` and velocity `u` on the physical grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    grid: GridSpec,
    n: Vec<f64>,
    u: Vec<Vec<f64>>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

impl FluidState {
    /// Rejects data that is not mean-zero or that reaches vacuum.
    pub fn new(grid: GridSpec, n: Vec<f64>, u: Vec<Vec<f64>>) -> Result<Self> {
        if n.len() != grid.len() || u.len() != grid.dim || u.iter().any(|c| c.len() != grid.len()) {
            return Err(ErzError::Grid("state arrays do not match the grid".into()));
        }
        let scale = n
            .iter()
            .chain(u.iter().flatten())
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        for c in std::iter::once(&n).chain(u.iter()) {
            let m = mean(c);
            if m.abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) && m != 0.0 {
                return Err(ErzError::NotMeanZero(m));
            }
        }
        let s = FluidState { grid, n, u };
        let nmax = s.max_abs_n();
        if nmax >= 1.0 {
            return Err(ErzError::VacuumCrossing(nmax));
        }
        Ok(s)
    }

    /// Subtracts the means before validating.
    pub fn with_mean_removed(grid: GridSpec, mut n: Vec<f64>, mut u: Vec<Vec<f64>>) -> Result<Self> {
        for c in std::iter::once(&mut n).chain(u.iter_mut()) {
            let m = mean(c);
            c.iter_mut().for_each(|v| *v -= m);
        }
        Self::new(grid, n, u)
    }

    pub fn zeros(grid: GridSpec) -> Self {
        FluidState {
            grid,
            n: vec![0.0; grid.len()],
            u: vec![vec![0.0; grid.len()]; grid.dim],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn n(&self) -> &[f64] {
        &self.n
    }

    pub fn u(&self) -> &[Vec<f64>] {
        &self.u
    }

    pub fn max_abs_n(&self) -> f64 {
        self.n.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `int n dx` by the rectangle rule.
    pub fn mass(&self) -> f64 {
        self.n.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn to_spectral(&self) -> SpectralState {
        let lat = Lattice::new(self.grid);
        let mut data = lat.from_real(&self.n);
        for c in &self.u {
            data.extend(lat.from_real(c));
        }
        SpectralState {
            grid: self.grid,
            data,
        }
    }

    /// Physical state of spectral data; only the vacuum guard is applied.
    pub fn from_spectral(s: &SpectralState) -> Result<Self> {
        let lat = Lattice::new(s.grid);
        let n = lat.to_real(s.n());
        let u = (0..s.grid.dim).map(|j| lat.to_real(s.u(j))).collect();
        let st = FluidState { grid: s.grid, n, u };
        let nmax = st.max_abs_n();
        if nmax >= 1.0 {
            return Err(ErzError::VacuumCrossing(nmax));
        }
        Ok(st)
    }
}

/// Coefficients `[n^ | u^_0 | ... | u^_{d-1}]` stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub grid: GridSpec,
    pub data: Vec<Complex64>,
}

impl SpectralState {
    pub fn zeros(grid: GridSpec) -> Self {
        SpectralState {
            grid,
            data: vec![ZERO; grid.len() * (1 + grid.dim)],
        }
    }

    pub fn n(&self) -> &[Complex64] {
        &self.data[..self.grid.len()]
    }

    pub fn u(&self, j: usize) -> &[Complex64] {
        let m = self.grid.len();
        &self.data[(1 + j) * m..(2 + j) * m]
    }

    pub fn fields(&self) -> Vec<SpectralField> {
        let m = self.grid.len();
        self.data
            .chunks(m)
            .map(|c| SpectralField::from_coeffs(self.grid, c.to_vec(), true).expect("sized"))
            .collect()
    }

    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.data.iter().map(|c| c.norm_sqr()).sum();
        (self.grid.volume() * s).sqrt()
    }

    pub fn distance(&self, other: &SpectralState) -> f64 {
        let s: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        (self.grid.volume() * s).sqrt()
    }

    /// `||curl u||_{L^2}` from the coefficients.
    pub fn curl_norm(&self) -> f64 {
        let g = self.grid;
        let m = g.len();
        let mut acc = 0.0;
        for i in 0..m {
            let xi = g.xi(i);
            let u: Vec<Complex64> = (0..g.dim).map(|j| self.u(j)[i]).collect();
            let uc = |j: usize| if j < g.dim { u[j] } else { ZERO };
            let w = [
                xi[1] * uc(2) - xi[2] * uc(1),
                xi[2] * uc(0) - xi[0] * uc(2),
                xi[0] * uc(1) - xi[1] * uc(0),
            ];
            acc += w.iter().map(|c| c.norm_sqr()).sum::<f64>();
        }
        (g.volume() * acc).sqrt()
    }

    /// Union of the active bands of the four components; empty as `(inf, 0)`.
    pub fn active_band(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0_f64;
        for f in &self.fields() {
            if let Ok((a, b)) = active_band(f, 1e-12) {
                lo = lo.min(a);
                hi = hi.max(b);
            }
        }
        (lo, hi)
    }

    pub fn u_norm(&self) -> f64 {
        let m = self.grid.len();
        let s: f64 = self.data[m..].iter().map(|c| c.norm_sqr()).sum();
        (self.grid.volume() * s).sqrt()
    }
}

/// The linear operator and the quadratic terms of the primitive system.
#[derive(Debug, Clone)]
pub struct PrimitiveSystem {
    pub lat: Lattice,
    pub params: DispersionParams,
    p: Vec<f64>,
}

impl PrimitiveSystem {
    pub fn new(grid: GridSpec, params: DispersionParams) -> Self {
        let lat = Lattice::new(grid);
        let p = lat.abs.iter().map(|&r| params.p(r)).collect();
        PrimitiveSystem { lat, params, p }
    }

    fn m(&self) -> usize {
        self.lat.len()
    }

    /// `L w`: `(-div u, -grad (1 + |D|^-sigma) n)`.
    pub fn linear(&self, w: &[Complex64]) -> Vec<Complex64> {
        let m = self.m();
        let d = self.lat.dim();
        let mut out = vec![ZERO; w.len()];
        for i in 1..m {
            let r = self.lat.abs[i];
            let mut div = ZERO;
            for j in 0..d {
                div += self.lat.xi[j][i] * w[(1 + j) * m + i];
            }
            out[i] = -I * div;
            let s = 1.0 + r.powf(-self.params.sigma());
            for j in 0..d {
                out[(1 + j) * m + i] = -I * self.lat.xi[j][i] * s * w[i];
            }
        }
        out
    }

    /// Quadratic part `(-div(n u), -grad G)`, `G = n^2/2 + |u|^2/2`, with the
    /// vacuum guard; inputs and output are dealiased.
    pub fn nonlinear(&self, w: &[Complex64]) -> Result<Vec<Complex64>> {
        let m = self.m();
        let d = self.lat.dim();
        let n = self.lat.to_real(&w[..m]);
        let nmax = n.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if nmax >= VACUUM_HARD {
            return Err(ErzError::VacuumCrossing(nmax));
        }
        let u: Vec<Vec<f64>> = (0..d)
            .map(|j| self.lat.to_real(&w[(1 + j) * m..(2 + j) * m]))
            .collect();
        let mut g: Vec<f64> = n.iter().map(|v| 0.5 * v * v).collect();
        for c in &u {
            for (gi, v) in g.iter_mut().zip(c) {
                *gi += 0.5 * v * v;
            }
        }
        let mut out = vec![ZERO; w.len()];
        for (j, c) in u.iter().enumerate() {
            let prod: Vec<f64> = n.iter().zip(c).map(|(a, b)| a * b).collect();
            let f = self.lat.from_real(&prod);
            for i in 0..m {
                out[i] -= I * self.lat.xi[j][i] * f[i];
            }
        }
        let gh = self.lat.from_real(&g);
        for j in 0..d {
            for i in 0..m {
                out[(1 + j) * m + i] = -I * self.lat.xi[j][i] * gh[i];
            }
        }
        for c in out.chunks_mut(m) {
            self.lat.dealias(c);
        }
        Ok(out)
    }

    /// Exact linear flow over time `h`, mode by mode on `(n^, xi^.u^)`.
    pub fn propagate(&self, w: &[Complex64], h: f64) -> Vec<Complex64> {
        let m = self.m();
        let d = self.lat.dim();
        let mut out = w.to_vec();
        for i in 1..m {
            let r = self.lat.abs[i];
            let p = self.p[i];
            let a0 = w[i];
            let mut b0 = ZERO;
            for j in 0..d {
                b0 += self.lat.xi[j][i] / r * w[(1 + j) * m + i];
            }
            let (s, c) = (p * h).sin_cos();
            let a = c * a0 - I * (r / p) * s * b0;
            let b = -I * (p / r) * s * a0 + c * b0;
            out[i] = a;
            for j in 0..d {
                out[(1 + j) * m + i] += self.lat.xi[j][i] / r * (b - b0);
            }
        }
        out
    }
}

/// External forcing `F(t)` added to the tendency.
pub type Forcing<'a> = &'a (dyn Fn(f64) -> Vec<Complex64> + Sync);

/// Tendency `L w + N(w)`.
pub fn rhs_primitive(state: &FluidState, sigma: f64) -> Result<SpectralState> {
    let params = DispersionParams::new(sigma)?;
    let sys = PrimitiveSystem::new(state.grid, params);
    let mut w = state.to_spectral();
    for c in w.data.chunks_mut(state.grid.len()) {
        sys.lat.dealias(c);
    }
    let l = sys.linear(&w.data);
    let n = sys.nonlinear(&w.data)?;
    Ok(SpectralState {
        grid: state.grid,
        data: l.iter().zip(&n).map(|(a, b)| a + b).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// ETDRK4 on the profile equation `alpha' = i p alpha + Q(alpha)`.
    Etdrk4Alpha,
    /// Integrating-factor RK4 on the primitive system.
    Ifrk4Primitive,
}

/// Kassam-Trefethen contour coefficients of ETDRK4 for a diagonal linear
/// part `c_k = i p(|xi_k|)`.
#[derive(Debug, Clone)]
struct EtdCoefficients {
    e: Vec<Complex64>,
    e2: Vec<Complex64>,
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
}

const CONTOUR_POINTS: usize = 32;

impl EtdCoefficients {
    fn new(p: &[f64], h: f64) -> Self {
        let m = p.len();
        let mut out = EtdCoefficients {
            e: Vec::with_capacity(m),
            e2: Vec::with_capacity(m),
            q: Vec::with_capacity(m),
            f1: Vec::with_capacity(m),
            f2: Vec::with_capacity(m),
            f3: Vec::with_capacity(m),
        };
        let roots: Vec<Complex64> = (0..CONTOUR_POINTS)
            .map(|j| Complex64::from_polar(1.0, PI * (j as f64 + 0.5) * 2.0 / CONTOUR_POINTS as f64))
            .collect();
        for &pk in p {
            let lh = I * pk * h;
            out.e.push(lh.exp());
            out.e2.push((0.5 * lh).exp());
            let (mut q, mut f1, mut f2, mut f3) = (ZERO, ZERO, ZERO, ZERO);
            for r in &roots {
                let z = lh + r;
                let ez = z.exp();
                let z3 = z * z * z;
                q += ((0.5 * z).exp() - 1.0) / z;
                f1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
                f2 += (2.0 + z + ez * (z - 2.0)) / z3;
                f3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
            }
            let k = h / CONTOUR_POINTS as f64;
            // The contour average of a real-symmetric integrand is real on the
            // real axis; for imaginary `lh` keep the complex mean.
            out.q.push(q * k);
            out.f1.push(f1 * k);
            out.f2.push(f2 * k);
            out.f3.push(f3 * k);
        }
        out
    }
}

/// One-step integrators on a flat coefficient vector.
pub struct Integrator {
    scheme: Scheme,
    dt: f64,
    params: DispersionParams,
    prim: PrimitiveSystem,
    etd: Option<EtdCoefficients>,
    nonlinear: bool,
}

impl Integrator {
    pub fn new(grid: GridSpec, sigma: f64, scheme: Scheme, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(ErzError::Invalid(format!("dt = {dt} must be positive")));
        }
        let params = DispersionParams::new(sigma)?;
        let prim = PrimitiveSystem::new(grid, params);
        let etd = match scheme {
            Scheme::Etdrk4Alpha => Some(EtdCoefficients::new(&prim.p, dt)),
            Scheme::Ifrk4Primitive => None,
        };
        Ok(Integrator {
            scheme,
            dt,
            params,
            prim,
            etd,
            nonlinear: true,
        })
    }

    /// Drops the quadratic terms (linear-flow check).
    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn lattice(&self) -> &Lattice {
        &self.prim.lat
    }

    /// `dt * max_k p(|xi_k|)` over retained modes.
    pub fn oscillation_number(&self) -> f64 {
        let l = &self.prim.lat;
        self.dt
            * (0..l.len())
                .filter(|&i| l.active[i])
                .map(|i| self.prim.p[i])
                .fold(0.0, f64::max)
    }

    fn tendency(&self, w: &[Complex64], t: f64, forcing: Option<Forcing>) -> Result<Vec<Complex64>> {
        let mut out = if self.nonlinear {
            match self.scheme {
                Scheme::Ifrk4Primitive => self.prim.nonlinear(w)?,
                Scheme::Etdrk4Alpha => quadratic_q_coeffs(&self.prim.lat, &self.params, w)?,
            }
        } else {
            vec![ZERO; w.len()]
        };
        if let Some(f) = forcing {
            for (o, v) in out.iter_mut().zip(f(t)) {
                *o += v;
            }
        }
        if out.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(ErzError::Invalid("non-finite tendency".into()));
        }
        Ok(out)
    }

    /// Advances `w` from `t` to `t + dt`.
    pub fn step(&self, w: &mut Vec<Complex64>, t: f64, forcing: Option<Forcing>) -> Result<()> {
        match self.scheme {
            Scheme::Ifrk4Primitive => self.step_ifrk4(w, t, forcing),
            Scheme::Etdrk4Alpha => self.step_etdrk4(w, t, forcing),
        }
    }

    fn step_ifrk4(&self, w: &mut Vec<Complex64>, t: f64, forcing: Option<Forcing>) -> Result<()> {
        let h = self.dt;
        let sys = &self.prim;
        let axpy = |a: &[Complex64], c: f64, b: &[Complex64]| -> Vec<Complex64> {
            a.iter().zip(b).map(|(x, y)| x + c * y).collect()
        };
        let k1 = self.tendency(w, t, forcing)?;
        let ew = sys.propagate(w, 0.5 * h);
        let k2 = self.tendency(&sys.propagate(&axpy(w, 0.5 * h, &k1), 0.5 * h), t + 0.5 * h, forcing)?;
        let k3 = self.tendency(&axpy(&ew, 0.5 * h, &k2), t + 0.5 * h, forcing)?;
        let ek3 = sys.propagate(&k3, 0.5 * h);
        let ew_full = sys.propagate(&ew, 0.5 * h);
        let k4 = self.tendency(&axpy(&ew_full, h, &ek3), t + h, forcing)?;
        let ek1 = sys.propagate(&k1, h);
        let mid: Vec<Complex64> = k2.iter().zip(&k3).map(|(a, b)| a + b).collect();
        let emid = sys.propagate(&mid, 0.5 * h);
        for i in 0..w.len() {
            w[i] = ew_full[i] + h / 6.0 * (ek1[i] + 2.0 * emid[i] + k4[i]);
        }
        Ok(())
    }

    fn step_etdrk4(&self, w: &mut Vec<Complex64>, t: f64, forcing: Option<Forcing>) -> Result<()> {
        let h = self.dt;
        let c = self.etd.as_ref().expect("etd coefficients");
        let m = w.len();
        let nv = self.tendency(w, t, forcing)?;
        let a: Vec<Complex64> = (0..m).map(|i| c.e2[i] * w[i] + c.q[i] * nv[i]).collect();
        let na = self.tendency(&a, t + 0.5 * h, forcing)?;
        let b: Vec<Complex64> = (0..m).map(|i| c.e2[i] * w[i] + c.q[i] * na[i]).collect();
        let nb = self.tendency(&b, t + 0.5 * h, forcing)?;
        let cc: Vec<Complex64> = (0..m)
            .map(|i| c.e2[i] * a[i] + c.q[i] * (2.0 * nb[i] - nv[i]))
            .collect();
        let nc = self.tendency(&cc, t + h, forcing)?;
        for i in 0..m {
            w[i] = c.e[i] * w[i] + nv[i] * c.f1[i] + 2.0 * (na[i] + nb[i]) * c.f2[i] + nc[i] * c.f3[i];
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitProfile {
    /// Random coefficients on the band.
    Random,
    /// Smooth radial bump in frequency for `n`, `u = 0`.
    Packet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitSpec {
    pub sigma: f64,
    pub eps: f64,
    pub band: (f64, f64),
    pub seed: u64,
    pub sobolev_s: u32,
    pub profile: InitProfile,
}

/// `||(n, u)||_Y = || |D|^{-(2-sigma)/2} (n, u) ||_{H^{2s}}`.
pub fn y_norm(fields: &[SpectralField], sigma: f64, s: u32) -> Result<f64> {
    let neg = -(2.0 - sigma) / 2.0;
    weighted_l2(fields, 0.0, |r| r.powf(neg) * (1.0 + r * r).powf(s as f64))
}

/// Irrotational band-limited data scaled to `||(n0, u0)||_Y = eps`.
pub fn init_irrotational(grid: GridSpec, spec: &InitSpec) -> Result<FluidState> {
    let (r1, r2) = spec.band;
    DispersionParams::new(spec.sigma)?;
    if !(r1 > 0.0 && r2 > r1 && r2 < grid.nyquist()) {
        return Err(ErzError::EmptyBand(r1, r2));
    }
    if !(spec.eps > 0.0) {
        return Err(ErzError::Invalid(format!("amplitude eps = {}", spec.eps)));
    }
    let lat = Lattice::new(grid);
    let m = grid.len();
    let d = grid.dim;
    let inband = |i: usize| lat.active[i] && lat.abs[i] >= r1 && lat.abs[i] <= r2;
    if !(0..m).any(inband) {
        return Err(ErzError::EmptyBand(r1, r2));
    }
    let mut n = vec![ZERO; m];
    let mut phi = vec![ZERO; m];
    match spec.profile {
        InitProfile::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            for i in 0..m {
                let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let b = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                if inband(i) {
                    n[i] = a;
                    phi[i] = b / lat.abs[i];
                }
            }
        }
        InitProfile::Packet => {
            let w = Window::Bump {
                center: 0.5 * (r1 + r2),
                half: 0.5 * (r2 - r1),
            };
            for i in 0..m {
                if inband(i) {
                    n[i] = Complex64::new(w.eval(lat.abs[i]), 0.0);
                }
            }
        }
    }
    lat.symmetrize(&mut n);
    lat.symmetrize(&mut phi);
    let mut data = n;
    for j in 0..d {
        data.extend((0..m).map(|i| I * lat.xi[j][i] * phi[i]));
    }
    let mut st = SpectralState { grid, data };
    let y = y_norm(&st.fields(), spec.sigma, spec.sobolev_s)?;
    if !(y > 0.0) {
        return Err(ErzError::EmptyBand(r1, r2));
    }
    let k = spec.eps / y;
    st.data.iter_mut().for_each(|c| *c *= k);
    let fs = FluidState::from_spectral(&st)?;
    // Exact zero means: the transform of Hermitian data without a zero mode.
    FluidState::with_mean_removed(grid, fs.n, fs.u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub sigma: f64,
    pub dt: f64,
    pub t_end: f64,
    pub monitor_stride: usize,
    pub sobolev_s: u32,
    pub lebesgue_p: f64,
    /// Start of the decay-fit window.
    pub fit_start: f64,
    pub store_trajectory: bool,
}

impl SolverConfig {
    pub fn steps(&self) -> Result<usize> {
        let k = (self.t_end / self.dt).round();
        if !(k >= 1.0) || (k * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(1.0) {
            return Err(ErzError::Invalid(format!(
                "t_end = {} is not a positive multiple of dt = {}",
                self.t_end, self.dt
            )));
        }
        if self.monitor_stride == 0 {
            return Err(ErzError::Invalid("monitor_stride must be >= 1".into()));
        }
        Ok(k as usize)
    }
}

/// Profile coefficients at every step of a run.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub alpha: Vec<Vec<Complex64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub config: SolverConfig,
    pub grid: GridSpec,
    pub band: (f64, f64),
    pub wrap_time: f64,
    pub oscillation_number: f64,
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub curl: Vec<f64>,
    pub curl_relative: Vec<f64>,
    pub max_n: Vec<f64>,
    pub reports: Vec<NormReport>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub final_state: SpectralState,
    #[serde(skip)]
    pub trajectory: Option<Trajectory>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub mass_drift: f64,
    pub max_curl_relative: f64,
    /// `sup_t X(t) / X(0)` with the `(1 + t)^beta` weight.
    pub x_ratio: f64,
    pub decay_fit: Option<DecayFit>,
    pub decay_note: String,
    pub beyond_wrap: bool,
}

impl RunRecord {
    pub fn summary(&self) -> RunSummary {
        let m0 = self.mass[0];
        let mass_drift = self.mass.iter().map(|m| (m - m0).abs()).fold(0.0, f64::max);
        let max_curl_relative = self.curl_relative.iter().cloned().fold(0.0, f64::max);
        let x0 = self.reports[0].get("x_weighted");
        let x_ratio = self
            .reports
            .iter()
            .map(|r| r.get("x_weighted") / x0)
            .fold(0.0, f64::max);
        let end = self.wrap_time.min(self.config.t_end);
        let samples: Vec<(f64, f64)> = self
            .times
            .iter()
            .zip(&self.reports)
            .filter(|(t, _)| **t >= self.config.fit_start && **t <= end)
            .map(|(t, r)| (*t, r.get("wsp")))
            .collect();
        let (decay_fit, decay_note) = match fit_decay(&samples) {
            Ok(f) => (Some(f), "fit over [fit_start, min(wrap_time, t_end)]".to_string()),
            Err(e) => (None, format!("no decay fit: {e}")),
        };
        RunSummary {
            mass_drift,
            max_curl_relative,
            x_ratio,
            decay_fit,
            decay_note,
            beyond_wrap: self.config.t_end > self.wrap_time,
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| ErzError::io(path, e))?;
        self.write_csv_to(f)
    }

    /// Monitor time series: `t, mass, curl, curl_relative, max_n` followed by
    /// the norm-suite keys in sorted order.
    pub fn write_csv_to<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let keys: Vec<String> = self.reports[0].norms.keys().cloned().collect();
        let mut header = vec!["t", "mass", "curl", "curl_relative", "max_n"]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>();
        header.extend(keys.iter().cloned());
        w.write_record(&header)?;
        for k in 0..self.times.len() {
            let mut row = vec![
                format!("{:e}", self.times[k]),
                format!("{:e}", self.mass[k]),
                format!("{:e}", self.curl[k]),
                format!("{:e}", self.curl_relative[k]),
                format!("{:e}", self.max_n[k]),
            ];
            row.extend(keys.iter().map(|key| format!("{:e}", self.reports[k].get(key))));
            w.write_record(&row)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

fn to_alpha(lat: &Lattice, params: &DispersionParams, w: &SpectralState) -> Vec<Complex64> {
    let us: Vec<&[Complex64]> = (0..lat.dim()).map(|j| w.u(j)).collect();
    alpha_coeffs(lat, params, w.n(), &us)
}

fn from_alpha(lat: &Lattice, params: &DispersionParams, a: &[Complex64]) -> SpectralState {
    let (n, u) = state_coeffs_from_alpha(lat, params, a);
    let mut data = n;
    for c in u {
        data.extend(c);
    }
    SpectralState {
        grid: lat.grid,
        data,
    }
}

/// Integrates from `initial` to `t_end`, recording the monitors every
/// `monitor_stride` steps and at the end.
pub fn run(config: &SolverConfig, initial: &FluidState) -> Result<RunRecord> {
    run_forced(config, initial, None)
}

pub fn run_forced(
    config: &SolverConfig,
    initial: &FluidState,
    forcing: Option<Forcing>,
) -> Result<RunRecord> {
    let steps = config.steps()?;
    let grid = *initial.grid();
    let params = DispersionParams::new(config.sigma)?;
    params.beta_exponent(config.lebesgue_p)?;
    let integ = Integrator::new(grid, config.sigma, config.scheme, config.dt)?;
    let lat = integ.lattice().clone();
    let mut w0 = initial.to_spectral();
    for c in w0.data.chunks_mut(grid.len()) {
        lat.dealias(c);
    }
    let band = w0.active_band();
    let wrap = if band.1 >= band.0 {
        wrap_time(&grid, &params, band)?
    } else {
        f64::INFINITY
    };
    let mut rec = RunRecord {
        config: *config,
        grid,
        band,
        wrap_time: wrap,
        oscillation_number: integ.oscillation_number(),
        times: vec![],
        mass: vec![],
        curl: vec![],
        curl_relative: vec![],
        max_n: vec![],
        reports: vec![],
        warnings: vec![],
        final_state: w0.clone(),
        trajectory: None,
    };
    if rec.oscillation_number > 1.0 {
        rec.warnings.push(format!(
            "dt * max p = {:.3} exceeds 1; accuracy degrades",
            rec.oscillation_number
        ));
    }
    if config.t_end > wrap {
        rec.warnings
            .push(format!("t_end = {} beyond wrap time {wrap:.3}", config.t_end));
    }
    let mut vec_state = match config.scheme {
        Scheme::Ifrk4Primitive => w0.data.clone(),
        Scheme::Etdrk4Alpha => to_alpha(&lat, &params, &w0),
    };
    let mut traj = Trajectory::default();
    let mut soft_warned = false;
    let mut t = 0.0;
    for k in 0..=steps {
        if k > 0 {
            integ.step(&mut vec_state, t, forcing)?;
            t = k as f64 * config.dt;
            if vec_state.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
                return Err(ErzError::NotFinite(k));
            }
        }
        if config.store_trajectory {
            traj.times.push(t);
            traj.alpha.push(match config.scheme {
                Scheme::Etdrk4Alpha => vec_state.clone(),
                Scheme::Ifrk4Primitive => {
                    to_alpha(&lat, &params, &SpectralState { grid, data: vec_state.clone() })
                }
            });
        }
        if k % config.monitor_stride == 0 || k == steps {
            let w = match config.scheme {
                Scheme::Ifrk4Primitive => SpectralState {
                    grid,
                    data: vec_state.clone(),
                },
                Scheme::Etdrk4Alpha => from_alpha(&lat, &params, &vec_state),
            };
            let fields = w.fields();
            let nfield = &fields[0];
            let nphys = nfield.to_real();
            let nmax = nphys.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            if nmax >= VACUUM_HARD {
                return Err(ErzError::VacuumCrossing(nmax));
            }
            if nmax >= VACUUM_SOFT && !soft_warned {
                soft_warned = true;
                rec.warnings
                    .push(format!("max |n| = {nmax:.3} at t = {t}: norm equivalence threshold"));
            }
            let cfg = NormConfig {
                sigma: config.sigma,
                s: config.sobolev_s,
                lebesgue_p: config.lebesgue_p,
                t,
            };
            let report = norm_suite(&fields, &cfg, Some(nfield))?;
            let curl = w.curl_norm();
            let un = w.u_norm();
            rec.times.push(t);
            rec.mass.push(w.n()[0].re * grid.volume());
            rec.curl.push(curl);
            rec.curl_relative.push(if un > 0.0 { curl / un } else { 0.0 });
            rec.max_n.push(nmax);
            rec.reports.push(report);
            if k == steps {
                rec.final_state = w;
            }
        }
    }
    if config.store_trajectory {
        rec.trajectory = Some(traj);
    }
    Ok(rec)
}

/// Manufactured solution `n* = a cos(k.x) f(t)`, `u* = grad(a sin(k.x) g(t) / |k|)`
/// with `f = 1 + sin(t)/2` and `g = cos(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Manufactured {
    pub amplitude: f64,
    pub k: [i64; 3],
}

impl Manufactured {
    fn parts(t: f64) -> (f64, f64, f64, f64) {
        (1.0 + 0.5 * t.sin(), 0.5 * t.cos(), t.cos(), -t.sin())
    }

    fn fill(&self, grid: &GridSpec, fa: f64, ga: f64) -> SpectralState {
        let mut s = SpectralState::zeros(*grid);
        let m = grid.len();
        let kk = self.k;
        let dk = grid.dk();
        let xi = [kk[0] as f64 * dk, kk[1] as f64 * dk, kk[2] as f64 * dk];
        let r = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
        for idx in [grid.index_of(kk), grid.index_of([-kk[0], -kk[1], -kk[2]])] {
            s.data[idx] = Complex64::new(0.5 * self.amplitude * fa, 0.0);
            // grad sin(k.x) = k cos(k.x): real even coefficients.
            for j in 0..grid.dim {
                s.data[(1 + j) * m + idx] = Complex64::new(0.5 * self.amplitude * ga * xi[j] / r, 0.0);
            }
        }
        s
    }

    pub fn exact(&self, grid: &GridSpec, t: f64) -> SpectralState {
        let (f, _, g, _) = Self::parts(t);
        self.fill(grid, f, g)
    }

    pub fn time_derivative(&self, grid: &GridSpec, t: f64) -> SpectralState {
        let (_, df, _, dg) = Self::parts(t);
        self.fill(grid, df, dg)
    }

    /// `F = d/dt w* - (L w* + N(w*))`, evaluated pseudospectrally.
    pub fn forcing(&self, sys: &PrimitiveSystem, t: f64) -> Vec<Complex64> {
        let g = sys.lat.grid;
        let w = self.exact(&g, t);
        let dw = self.time_derivative(&g, t);
        let l = sys.linear(&w.data);
        let n = sys.nonlinear(&w.data).expect("manufactured amplitude below vacuum");
        (0..w.data.len()).map(|i| dw.data[i] - l[i] - n[i]).collect()
    }
}

/// Relative error at `t_end` of the forced primitive integration against the
/// manufactured solution.
pub fn mms_error(grid: GridSpec, sigma: f64, ms: &Manufactured, dt: f64, t_end: f64) -> Result<f64> {
    let integ = Integrator::new(grid, sigma, Scheme::Ifrk4Primitive, dt)?;
    let sys = PrimitiveSystem::new(grid, DispersionParams::new(sigma)?);
    let force = move |t: f64| ms.forcing(&sys, t);
    let steps = (t_end / dt).round() as usize;
    let mut w = ms.exact(&grid, 0.0).data;
    for k in 0..steps {
        integ.step(&mut w, k as f64 * dt, Some(&force))?;
    }
    let exact = ms.exact(&grid, steps as f64 * dt);
    let got = SpectralState { grid, data: w };
    Ok(got.distance(&exact) / exact.l2_norm())
}

/// `log2(e(dt) / e(dt/2))` averaged over consecutive refinements.
pub fn observed_order(errors: &[f64]) -> f64 {
    let k: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    k.iter().sum::<f64>() / k.len() as f64
}
