//! Tabulates the normalized integral of the mollifier `exp(-1/(1-t^2))` on
//! `[-1, 1]` together with its first two derivatives.

use std::env;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

const INTERVALS: usize = 2048;
const SUBSTEPS: usize = 64;

fn bump(t: f64) -> f64 {
    let q = 1.0 - t * t;
    if q <= 0.0 {
        0.0
    } else {
        (-1.0 / q).exp()
    }
}

fn bump_prime(t: f64) -> f64 {
    let q = 1.0 - t * t;
    if q <= 0.0 {
        0.0
    } else {
        bump(t) * (-2.0 * t / (q * q))
    }
}

fn main() {
    let h = 2.0 / INTERVALS as f64;
    let mut cumulative = vec![0.0f64; INTERVALS + 1];
    for i in 0..INTERVALS {
        let a = -1.0 + i as f64 * h;
        let step = h / SUBSTEPS as f64;
        let mut acc = 0.0;
        for j in 0..SUBSTEPS {
            let x0 = a + j as f64 * step;
            acc += step / 6.0 * (bump(x0) + 4.0 * bump(x0 + 0.5 * step) + bump(x0 + step));
        }
        cumulative[i + 1] = cumulative[i] + acc;
    }
    let total = cumulative[INTERVALS];
    let mut out = String::new();
    writeln!(out, "pub(crate) const MOLLIFIER_MASS: f64 = {total:e};").unwrap();
    writeln!(out, "pub(crate) const STEP_INTERVALS: usize = {INTERVALS};").unwrap();
    writeln!(
        out,
        "pub(crate) static STEP_TABLE: [[f64; 3]; {}] = [",
        INTERVALS + 1
    )
    .unwrap();
    for (i, c) in cumulative.iter().enumerate() {
        let t = -1.0 + i as f64 * h;
        let (f, d1, d2) = if i == 0 {
            (0.0, 0.0, 0.0)
        } else if i == INTERVALS {
            (1.0, 0.0, 0.0)
        } else {
            (c / total, bump(t) / total, bump_prime(t) / total)
        };
        writeln!(out, "    [{f:e}, {d1:e}, {d2:e}],").unwrap();
    }
    writeln!(out, "];").unwrap();
    let dest = Path::new(&env::var("OUT_DIR").unwrap()).join("step_table.rs");
    fs::write(dest, out).unwrap();
    println!("cargo::rerun-if-changed=build.rs");
}
