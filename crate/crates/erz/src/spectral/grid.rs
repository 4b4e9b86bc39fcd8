use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ErzError, Result};

/// Periodic box `[0, L)^dim` sampled with `n` points per axis.
///
/// Fields are stored in a three-axis layout; axes beyond `dim` have size 1.
/// The flat index of `(i0, i1, i2)` is `(i0 * s1 + i1) * s2 + i2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
    pub dealias: f64,
}

impl GridSpec {
    pub const DEFAULT_DEALIAS: f64 = 2.0 / 3.0;

    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        Self::with_dealias(dim, n, length, Self::DEFAULT_DEALIAS)
    }

    pub fn cube(n: usize, length: f64) -> Result<Self> {
        Self::new(3, n, length)
    }

    pub fn with_dealias(dim: usize, n: usize, length: f64, dealias: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(ErzError::Grid(format!("dim = {dim} not in 1..=3")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(ErzError::Grid(format!("n = {n} must be a power of two >= 8")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(ErzError::Grid(format!("box length {length} must be positive")));
        }
        if !(dealias > 0.0 && dealias <= 1.0) {
            return Err(ErzError::Grid(format!("dealias fraction {dealias} not in (0, 1]")));
        }
        Ok(GridSpec {
            dim,
            n,
            length,
            dealias,
        })
    }

    pub fn shape(&self) -> [usize; 3] {
        let mut s = [1; 3];
        for v in s.iter_mut().take(self.dim) {
            *v = self.n;
        }
        s
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lattice spacing `2 pi / L` in frequency.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    /// Axis index to signed integer wavenumber.
    #[inline]
    pub fn wavenumber(&self, j: usize, size: usize) -> i64 {
        if size == 1 {
            0
        } else if j < size / 2 {
            j as i64
        } else {
            j as i64 - size as i64
        }
    }

    #[inline]
    pub fn split(&self, idx: usize) -> [usize; 3] {
        let [_, s1, s2] = self.shape();
        [idx / (s1 * s2), (idx / s2) % s1, idx % s2]
    }

    #[inline]
    pub fn k_index(&self, idx: usize) -> [i64; 3] {
        let s = self.shape();
        let j = self.split(idx);
        [
            self.wavenumber(j[0], s[0]),
            self.wavenumber(j[1], s[1]),
            self.wavenumber(j[2], s[2]),
        ]
    }

    #[inline]
    pub fn xi(&self, idx: usize) -> [f64; 3] {
        let k = self.k_index(idx);
        let dk = self.dk();
        [k[0] as f64 * dk, k[1] as f64 * dk, k[2] as f64 * dk]
    }

    #[inline]
    pub fn xi_norm(&self, idx: usize) -> f64 {
        let x = self.xi(idx);
        (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
    }

    /// Index of the integer wavenumber `k`, wrapping periodically.
    pub fn index_of(&self, k: [i64; 3]) -> usize {
        let s = self.shape();
        let w = |v: i64, n: usize| v.rem_euclid(n as i64) as usize;
        (w(k[0], s[0]) * s[1] + w(k[1], s[1])) * s[2] + w(k[2], s[2])
    }

    /// Index of `-k`.
    pub fn negate(&self, idx: usize) -> usize {
        let k = self.k_index(idx);
        self.index_of([-k[0], -k[1], -k[2]])
    }

    /// Largest retained `|k_i|` under the dealias rule.
    pub fn kmax(&self) -> i64 {
        let v = (self.dealias * self.n as f64 / 2.0 + 1e-9).floor() as i64;
        // The Nyquist wavenumber has no conjugate partner; never keep it.
        v.min(self.n as i64 / 2 - 1)
    }

    #[inline]
    pub fn is_active(&self, idx: usize) -> bool {
        let m = self.kmax();
        self.k_index(idx).iter().all(|k| k.abs() <= m)
    }

    /// Per-axis Nyquist frequency `pi n / L`.
    pub fn nyquist(&self) -> f64 {
        self.dk() * (self.n / 2) as f64
    }

    /// Largest `|xi|` on the lattice (box corner).
    pub fn max_radius(&self) -> f64 {
        self.nyquist() * (self.dim as f64).sqrt()
    }

    /// Largest radius whose whole sphere survives dealiasing.
    pub fn active_radius(&self) -> f64 {
        self.kmax() as f64 * self.dk()
    }

    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let j = self.split(idx);
        let h = self.dx();
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = j[a] as f64 * h;
        }
        x
    }

    /// Dyadic scales `2^j` spanning from below the lattice spacing to
    /// twice the corner radius.
    pub fn dyadic_range(&self) -> Vec<f64> {
        let lo = (0.5 * self.dk()).log2().floor() as i32;
        let hi = (2.0 * self.max_radius()).log2().ceil() as i32;
        (lo..=hi).map(|j| 2f64.powi(j)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_layout() {
        let g = GridSpec::cube(8, 2.0 * PI).unwrap();
        assert_eq!(g.len(), 512);
        assert_eq!(g.kmax(), 2);
        for idx in 0..g.len() {
            assert_eq!(g.index_of(g.k_index(idx)), idx);
            assert_eq!(g.negate(g.negate(idx)), idx);
        }
        assert_eq!(g.k_index(g.index_of([-3, 1, 2])), [-3, 1, 2]);
        let g16 = GridSpec::cube(16, 1.0).unwrap();
        assert_eq!((0..g16.len()).filter(|&i| g16.is_active(i)).count(), 1331);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(4, 8, 1.0).is_err());
        assert!(GridSpec::new(3, 12, 1.0).is_err());
        assert!(GridSpec::new(3, 4, 1.0).is_err());
        assert!(GridSpec::new(3, 8, -1.0).is_err());
        assert!(GridSpec::with_dealias(3, 8, 1.0, 0.0).is_err());
    }

    #[test]
    fn lower_dimensions() {
        let g = GridSpec::new(1, 16, 1.0).unwrap();
        assert_eq!(g.shape(), [16, 1, 1]);
        assert_eq!(g.k_index(15), [-1, 0, 0]);
        let g = GridSpec::new(2, 8, 1.0).unwrap();
        assert_eq!(g.shape(), [8, 8, 1]);
        assert_eq!(g.k_index(9), [1, 1, 0]);
    }
}
