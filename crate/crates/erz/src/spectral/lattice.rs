use num_complex::Complex64;

use super::fft;
use super::grid::GridSpec;

/// Per-mode tables for the hot loops of the time steppers.
#[derive(Debug, Clone)]
pub struct Lattice {
    pub grid: GridSpec,
    pub xi: [Vec<f64>; 3],
    pub abs: Vec<f64>,
    /// Index of `-k`.
    pub neg: Vec<usize>,
    pub active: Vec<bool>,
}

impl Lattice {
    pub fn new(grid: GridSpec) -> Self {
        let m = grid.len();
        let mut xi = [vec![0.0; m], vec![0.0; m], vec![0.0; m]];
        let mut abs = vec![0.0; m];
        let mut neg = vec![0; m];
        let mut active = vec![false; m];
        for i in 0..m {
            let x = grid.xi(i);
            for a in 0..3 {
                xi[a][i] = x[a];
            }
            abs[i] = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            neg[i] = grid.negate(i);
            active[i] = grid.is_active(i);
        }
        Lattice {
            grid,
            xi,
            abs,
            neg,
            active,
        }
    }

    pub fn len(&self) -> usize {
        self.abs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    pub fn dealias(&self, c: &mut [Complex64]) {
        for (v, &a) in c.iter_mut().zip(&self.active) {
            if !a {
                *v = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Real parts of the physical values of `c`.
    pub fn to_real(&self, c: &[Complex64]) -> Vec<f64> {
        let mut d = c.to_vec();
        fft::inverse(&mut d, self.grid.shape());
        d.into_iter().map(|v| v.re).collect()
    }

    /// Coefficients of real physical values, Hermitian-projected.
    pub fn from_real(&self, v: &[f64]) -> Vec<Complex64> {
        let mut d: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fft::forward(&mut d, self.grid.shape());
        self.symmetrize(&mut d);
        d
    }

    pub fn symmetrize(&self, c: &mut [Complex64]) {
        for i in 0..c.len() {
            let j = self.neg[i];
            if j > i {
                let a = 0.5 * (c[i] + c[j].conj());
                c[i] = a;
                c[j] = a.conj();
            } else if j == i {
                c[i] = Complex64::new(c[i].re, 0.0);
            }
        }
    }

    /// `conj c(-k)`: coefficients of the pointwise conjugate field.
    pub fn conj_field(&self, c: &[Complex64]) -> Vec<Complex64> {
        self.neg.iter().map(|&j| c[j].conj()).collect()
    }
}
