//! Flat little-endian binary of `(re, im)` pairs plus a JSON sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::SpectralField;
use super::grid::GridSpec;
use crate::error::{ErzError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub grid: GridSpec,
    pub hermitian: bool,
    pub len: usize,
    pub layout: String,
    pub version: String,
}

fn paths(base: &Path) -> (PathBuf, PathBuf) {
    (base.with_extension("bin"), base.with_extension("json"))
}

pub fn write_field(field: &SpectralField, base: &Path) -> Result<()> {
    let (bin, json) = paths(base);
    let mut bytes = Vec::with_capacity(field.coeffs().len() * 16);
    for c in field.coeffs() {
        bytes.extend_from_slice(&c.re.to_le_bytes());
        bytes.extend_from_slice(&c.im.to_le_bytes());
    }
    fs::write(&bin, bytes).map_err(|e| ErzError::io(&bin, e))?;
    let header = FieldHeader {
        grid: *field.grid(),
        hermitian: field.is_hermitian(),
        len: field.coeffs().len(),
        layout: "row-major (k0, k1, k2), f64 le re/im pairs, coefficients scaled by 1/M".into(),
        version: crate::VERSION.into(),
    };
    let text = serde_json::to_string_pretty(&header)?;
    fs::write(&json, text).map_err(|e| ErzError::io(&json, e))?;
    Ok(())
}

pub fn read_field(base: &Path) -> Result<SpectralField> {
    let (bin, json) = paths(base);
    let text = fs::read_to_string(&json).map_err(|e| ErzError::io(&json, e))?;
    let header: FieldHeader = serde_json::from_str(&text)?;
    let bytes = fs::read(&bin).map_err(|e| ErzError::io(&bin, e))?;
    if bytes.len() != header.len * 16 {
        return Err(ErzError::Grid(format!(
            "{} holds {} bytes, header expects {}",
            bin.display(),
            bytes.len(),
            header.len * 16
        )));
    }
    let coeffs = bytes
        .chunks_exact(16)
        .map(|ch| {
            let re = f64::from_le_bytes(ch[..8].try_into().unwrap());
            let im = f64::from_le_bytes(ch[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    SpectralField::from_coeffs(header.grid, coeffs, header.hermitian)
}
