//! Multi-axis FFTs on the grid layout, one 1D transform per axis.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Unnormalized in-place transform over every axis of size > 1.
pub fn transform(data: &mut [Complex64], shape: [usize; 3], inverse: bool) {
    assert_eq!(data.len(), shape.iter().product::<usize>());
    let [s0, s1, s2] = shape;
    if s2 > 1 {
        let f = plan(s2, inverse);
        let mut scratch = vec![Complex64::new(0.0, 0.0); f.get_inplace_scratch_len()];
        f.process_with_scratch(data, &mut scratch);
    }
    if s1 > 1 {
        let f = plan(s1, inverse);
        let mut scratch = vec![Complex64::new(0.0, 0.0); f.get_inplace_scratch_len()];
        let mut line = vec![Complex64::new(0.0, 0.0); s1];
        for i0 in 0..s0 {
            let base = i0 * s1 * s2;
            for i2 in 0..s2 {
                for (i1, v) in line.iter_mut().enumerate() {
                    *v = data[base + i1 * s2 + i2];
                }
                f.process_with_scratch(&mut line, &mut scratch);
                for (i1, v) in line.iter().enumerate() {
                    data[base + i1 * s2 + i2] = *v;
                }
            }
        }
    }
    if s0 > 1 {
        let f = plan(s0, inverse);
        let mut scratch = vec![Complex64::new(0.0, 0.0); f.get_inplace_scratch_len()];
        let stride = s1 * s2;
        // Batch several columns at a time to keep the gathers cache-friendly.
        let batch = stride.min(16);
        let mut lines = vec![Complex64::new(0.0, 0.0); s0 * batch];
        let mut start = 0;
        while start < stride {
            let w = batch.min(stride - start);
            for i0 in 0..s0 {
                for c in 0..w {
                    lines[c * s0 + i0] = data[i0 * stride + start + c];
                }
            }
            f.process_with_scratch(&mut lines[..w * s0], &mut scratch);
            for i0 in 0..s0 {
                for c in 0..w {
                    data[i0 * stride + start + c] = lines[c * s0 + i0];
                }
            }
            start += w;
        }
    }
}

/// Physical values to coefficients normalized by `1 / M`.
pub fn forward(data: &mut [Complex64], shape: [usize; 3]) {
    transform(data, shape, false);
    let scale = 1.0 / data.len() as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
}

/// Coefficients back to physical values.
pub fn inverse(data: &mut [Complex64], shape: [usize; 3]) {
    transform(data, shape, true);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_lands_on_its_index() {
        let shape = [8, 8, 8];
        let n = 8;
        let k = [1usize, 3, 6];
        let mut data: Vec<Complex64> = (0..512)
            .map(|idx| {
                let j = [idx / 64, (idx / 8) % 8, idx % 8];
                let ph = 2.0 * std::f64::consts::PI
                    * (k[0] * j[0] + k[1] * j[1] + k[2] * j[2]) as f64
                    / n as f64;
                Complex64::from_polar(1.0, ph)
            })
            .collect();
        forward(&mut data, shape);
        let hit = (k[0] * 8 + k[1]) * 8 + k[2];
        for (i, v) in data.iter().enumerate() {
            let want = if i == hit { 1.0 } else { 0.0 };
            assert!((v - want).norm() < 1e-13, "{i} {v}");
        }
    }
}
