use num_complex::Complex64;

use super::fft;
use super::grid::GridSpec;
use crate::error::{ErzError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Fourier coefficients `c_k` of a field `f(x) = sum_k c_k e^{i xi_k . x}`.
///
/// Coefficients carry the `1 / M` normalization, so `||f||_2^2 = L^d sum |c_k|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
    hermitian: bool,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        SpectralField {
            grid,
            coeffs: vec![ZERO; grid.len()],
            hermitian: true,
        }
    }

    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>, hermitian: bool) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(ErzError::Grid(format!(
                "{} coefficients for a grid of {} points",
                coeffs.len(),
                grid.len()
            )));
        }
        Ok(SpectralField {
            grid,
            coeffs,
            hermitian,
        })
    }

    pub fn from_real(grid: GridSpec, values: &[f64]) -> Result<Self> {
        let data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let mut f = Self::from_coeffs(grid, data, true)?;
        fft::forward(&mut f.coeffs, grid.shape());
        f.symmetrize();
        Ok(f)
    }

    pub fn from_complex(grid: GridSpec, values: &[Complex64]) -> Result<Self> {
        let mut f = Self::from_coeffs(grid, values.to_vec(), false)?;
        fft::forward(&mut f.coeffs, grid.shape());
        Ok(f)
    }

    /// Field with `c_k = f(xi_k)` on the lattice.
    pub fn from_fn(grid: GridSpec, hermitian: bool, f: impl Fn([f64; 3]) -> Complex64) -> Self {
        let coeffs = (0..grid.len()).map(|i| f(grid.xi(i))).collect();
        SpectralField {
            grid,
            coeffs,
            hermitian,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn set_hermitian(&mut self, h: bool) {
        self.hermitian = h;
    }

    pub fn zero_mode(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn to_physical(&self) -> Vec<Complex64> {
        let mut data = self.coeffs.clone();
        fft::inverse(&mut data, self.grid.shape());
        data
    }

    /// Real part of the physical values.
    pub fn to_real(&self) -> Vec<f64> {
        self.to_physical().into_iter().map(|v| v.re).collect()
    }

    /// Max over `k` of `|c(-k) - conj c(k)|`, relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let g = &self.grid;
        let mut worst = 0.0_f64;
        for i in 0..self.coeffs.len() {
            let j = g.negate(i);
            worst = worst.max((self.coeffs[j] - self.coeffs[i].conj()).norm());
        }
        worst / scale
    }

    /// Projects onto Hermitian-symmetric coefficients (the real part of the field).
    pub fn symmetrize(&mut self) {
        let g = self.grid;
        let old = self.coeffs.clone();
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            *c = 0.5 * (old[i] + old[g.negate(i)].conj());
        }
        self.hermitian = true;
    }

    /// Coefficients of the pointwise conjugate `conj f`: `conj c(-k)`.
    pub fn conj_field(&self) -> SpectralField {
        let g = self.grid;
        let coeffs = (0..g.len()).map(|i| self.coeffs[g.negate(i)].conj()).collect();
        SpectralField {
            grid: g,
            coeffs,
            hermitian: self.hermitian,
        }
    }

    pub fn dealias_in_place(&mut self) {
        let g = self.grid;
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            if !g.is_active(i) {
                *c = ZERO;
            }
        }
    }

    pub fn dealiased(mut self) -> Self {
        self.dealias_in_place();
        self
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `||f||_{L^2}` from the coefficients (Plancherel).
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (self.grid.volume() * s).sqrt()
    }

    pub fn check_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(ErzError::GridMismatch("fields live on different grids"));
        }
        Ok(())
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: Complex64, other: &SpectralField, b: Complex64) -> Result<Self> {
        self.check_grid(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(SpectralField {
            grid: self.grid,
            coeffs,
            hermitian: self.hermitian && other.hermitian && a.im == 0.0 && b.im == 0.0,
        })
    }

    pub fn add(&self, other: &SpectralField) -> Result<Self> {
        self.lin_comb(Complex64::new(1.0, 0.0), other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &SpectralField) -> Result<Self> {
        self.lin_comb(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        SpectralField {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| a * c).collect(),
            hermitian: self.hermitian && a.im == 0.0,
        }
    }

    /// `||self - other||_{L^2}`.
    pub fn l2_distance(&self, other: &SpectralField) -> Result<f64> {
        Ok(self.sub(other)?.l2_norm())
    }

    /// Mean-zero test relative to the field's own size.
    pub fn is_mean_zero(&self, rel: f64) -> bool {
        let c0 = self.coeffs[0].norm();
        let s: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        c0 <= rel * s || c0 == 0.0
    }

    /// Pointwise product of the physical fields, followed by dealiasing.
    pub fn product(&self, other: &SpectralField) -> Result<SpectralField> {
        self.check_grid(other)?;
        let a = self.to_physical();
        let b = other.to_physical();
        let prod: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        let mut out = SpectralField::from_complex(self.grid, &prod)?;
        if self.hermitian && other.hermitian {
            out.symmetrize();
        }
        Ok(out.dealiased())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn real_round_trip() {
        let g = GridSpec::cube(8, 2.0 * PI).unwrap();
        let vals: Vec<f64> = (0..g.len()).map(|i| ((i * 37 % 101) as f64).sin()).collect();
        let f = SpectralField::from_real(g, &vals).unwrap();
        assert!(f.hermitian_defect() < 1e-14);
        let back = f.to_real();
        for (a, b) in vals.iter().zip(&back) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn conj_field_is_pointwise_conjugate() {
        let g = GridSpec::new(2, 8, 3.0).unwrap();
        let vals: Vec<Complex64> = (0..g.len())
            .map(|i| Complex64::new((i as f64).cos(), (0.3 * i as f64).sin()))
            .collect();
        let f = SpectralField::from_complex(g, &vals).unwrap();
        let phys = f.conj_field().to_physical();
        for (a, b) in vals.iter().zip(&phys) {
            assert!((a.conj() - b).norm() < 1e-13);
        }
    }
}
