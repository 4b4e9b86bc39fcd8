//! Littlewood-Paley pieces and the windows around the degenerate radius.

use erz_core::cutoff::{cutoff_scaled, dyadic, ShellPart, ShellWindow};
use erz_core::DispersionParams;

use super::field::SpectralField;
use super::multiplier::{apply_multiplier, MultiplierSpec};
use crate::error::Result;

/// `P_N f`, symbol `psi(|xi|/N) - psi(2|xi|/N)`.
pub fn lp_project(field: &SpectralField, n: f64) -> SpectralField {
    let m = MultiplierSpec::radial(format!("P_{n}"), 0.0, move |r| dyadic(r, n).v);
    apply_multiplier(field, &m).expect("cutoff symbols are finite")
}

/// `P_{<=N} f`, symbol `psi(|xi|/N)`.
pub fn lp_project_below(field: &SpectralField, n: f64) -> SpectralField {
    let m = MultiplierSpec::radial(format!("P_<={n}"), 1.0, move |r| cutoff_scaled(r, n).v);
    apply_multiplier(field, &m).expect("cutoff symbols are finite")
}

/// `P_{>N} f = f - P_{<=N} f`.
pub fn lp_project_above(field: &SpectralField, n: f64) -> SpectralField {
    let m =
        MultiplierSpec::radial(format!("P_>{n}"), 0.0, move |r| 1.0 - cutoff_scaled(r, n).v);
    apply_multiplier(field, &m).expect("cutoff symbols are finite")
}

pub fn window_multiplier(w: ShellWindow, part: ShellPart) -> MultiplierSpec {
    let label = match part {
        ShellPart::Inner => "Psi_<r0",
        ShellPart::Shell => "Psi_r0",
        ShellPart::Outer => "Psi_>r0",
    };
    MultiplierSpec::radial(label, w.part(part, 0.0).v, move |r| w.part(part, r).v)
}

/// Splits `field` into the inner, shell and outer pieces around `r0`.
pub fn degenerate_shell_project(
    field: &SpectralField,
    params: &DispersionParams,
    eps: f64,
) -> Result<(SpectralField, SpectralField, SpectralField)> {
    let r0 = params.degenerate_point()?;
    let w = ShellWindow::new(r0, eps)?;
    let go = |part| apply_multiplier(field, &window_multiplier(w, part));
    Ok((go(ShellPart::Inner)?, go(ShellPart::Shell)?, go(ShellPart::Outer)?))
}
