use std::fmt;
use std::sync::Arc;

use erz_core::DispersionParams;
use num_complex::Complex64;

use super::field::SpectralField;
use crate::error::{ErzError, Result};

type Symbol = Arc<dyn Fn([f64; 3]) -> Complex64 + Send + Sync>;

/// Fourier multiplier with an explicitly chosen value at `xi = 0`.
#[derive(Clone)]
pub struct MultiplierSpec {
    label: String,
    symbol: Symbol,
    zero_mode: Complex64,
    preserves_real: bool,
}

impl fmt::Debug for MultiplierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplierSpec")
            .field("label", &self.label)
            .field("zero_mode", &self.zero_mode)
            .finish()
    }
}

fn norm3(x: [f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

impl MultiplierSpec {
    /// General symbol. `preserves_real` must hold only if `m(-xi) = conj m(xi)`.
    pub fn vector(
        label: impl Into<String>,
        zero_mode: Complex64,
        preserves_real: bool,
        f: impl Fn([f64; 3]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        MultiplierSpec {
            label: label.into(),
            symbol: Arc::new(f),
            zero_mode,
            preserves_real,
        }
    }

    /// Real radial symbol `m(|xi|)`.
    pub fn radial(
        label: impl Into<String>,
        zero_mode: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::vector(label, Complex64::new(zero_mode, 0.0), true, move |x| {
            Complex64::new(f(norm3(x)), 0.0)
        })
    }

    pub fn identity() -> Self {
        Self::radial("1", 1.0, |_| 1.0)
    }

    /// `|D|^s`; the zero mode is 1 only for `s = 0`.
    pub fn abs_grad(s: f64) -> Self {
        let z = if s == 0.0 { 1.0 } else { 0.0 };
        Self::radial(format!("|D|^{s}"), z, move |r| r.powf(s))
    }

    /// `<D>^s = (1 + |D|^2)^(s/2)`.
    pub fn bracket(s: f64) -> Self {
        Self::radial(format!("<D>^{s}"), 1.0, move |r| (1.0 + r * r).powf(0.5 * s))
    }

    pub fn dispersion(params: DispersionParams) -> Self {
        Self::radial("p(|D|)", 0.0, move |r| params.p(r))
    }

    /// `p(|D|) / |D|`.
    pub fn p_over_abs(params: DispersionParams) -> Self {
        Self::radial("p(|D|)/|D|", 0.0, move |r| params.q_ratio(r))
    }

    /// `|D| / p(|D|)`.
    pub fn abs_over_p(params: DispersionParams) -> Self {
        Self::radial("|D|/p(|D|)", 0.0, move |r| 1.0 / params.q_ratio(r))
    }

    /// `d/dx_j`, symbol `i xi_j`.
    pub fn derivative(j: usize) -> Self {
        Self::vector(format!("d_{j}"), Complex64::new(0.0, 0.0), true, move |x| {
            Complex64::new(0.0, x[j])
        })
    }

    /// `D_j / |D|`, symbol `i xi_j / |xi|`.
    pub fn riesz(j: usize) -> Self {
        Self::vector(format!("d_{j}/|D|"), Complex64::new(0.0, 0.0), true, move |x| {
            Complex64::new(0.0, x[j] / norm3(x))
        })
    }

    /// `e^{i t p(|D|)}`.
    pub fn propagator(params: DispersionParams, t: f64) -> Self {
        Self::vector("exp(itp)", Complex64::new(1.0, 0.0), false, move |x| {
            Complex64::from_polar(1.0, t * params.p(norm3(x)))
        })
    }

    /// Coefficientwise product of two symbols.
    pub fn then(&self, other: &MultiplierSpec) -> Self {
        let a = self.symbol.clone();
        let b = other.symbol.clone();
        MultiplierSpec {
            label: format!("{}*{}", self.label, other.label),
            symbol: Arc::new(move |x| a(x) * b(x)),
            zero_mode: self.zero_mode * other.zero_mode,
            preserves_real: self.preserves_real && other.preserves_real,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn zero_mode(&self) -> Complex64 {
        self.zero_mode
    }

    pub fn preserves_real(&self) -> bool {
        self.preserves_real
    }

    /// Symbol value; the origin returns the explicit zero-mode value.
    pub fn eval(&self, xi: [f64; 3]) -> Complex64 {
        if xi == [0.0; 3] {
            self.zero_mode
        } else {
            (self.symbol)(xi)
        }
    }

    /// Symbol values on every lattice point of a grid.
    pub fn table(&self, grid: &super::GridSpec) -> Result<Vec<Complex64>> {
        let mut out = Vec::with_capacity(grid.len());
        out.push(self.zero_mode);
        for i in 1..grid.len() {
            let xi = grid.xi(i);
            let v = (self.symbol)(xi);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(ErzError::NonFiniteSymbol {
                    label: self.label.clone(),
                    xi,
                });
            }
            out.push(v);
        }
        Ok(out)
    }
}

pub fn apply_multiplier(field: &SpectralField, m: &MultiplierSpec) -> Result<SpectralField> {
    let table = m.table(field.grid())?;
    let coeffs = field
        .coeffs()
        .iter()
        .zip(&table)
        .map(|(c, s)| c * s)
        .collect();
    SpectralField::from_coeffs(
        *field.grid(),
        coeffs,
        field.is_hermitian() && m.preserves_real(),
    )
}
