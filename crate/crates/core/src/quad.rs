#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::float::Float as _;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        for i in 0..(n + 1) / 2 {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (c + h * x, h * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Breakpoints `lo = e_0 < ... < e_m = hi` spaced geometrically with
/// `per_octave` panels per factor of two.
pub fn geometric_breaks(lo: f64, hi: f64, per_octave: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo);
    let octaves = (hi / lo).log2();
    let m = ((octaves * per_octave as f64).ceil() as usize).max(1);
    let ratio = (hi / lo).powf(1.0 / m as f64);
    let mut e = Vec::with_capacity(m + 1);
    let mut x = lo;
    for _ in 0..m {
        e.push(x);
        x *= ratio;
    }
    e.push(hi);
    e
}

/// Sorted, deduplicated breakpoints restricted to `[lo, hi]`.
pub fn merge_breaks(lo: f64, hi: f64, extra: &[f64]) -> Vec<f64> {
    let mut e: Vec<f64> = extra
        .iter()
        .copied()
        .filter(|&x| x > lo && x < hi && x.is_finite())
        .collect();
    e.push(lo);
    e.push(hi);
    e.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tol = 1e-12 * (hi - lo).abs().max(f64::MIN_POSITIVE);
    e.dedup_by(|a, b| (*a - *b).abs() <= tol);
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_polynomials() {
        let g = GaussLegendre::new(8);
        let s: f64 = g.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let v = g.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-9);
        let g = GaussLegendre::new(40);
        let v = g.integrate(0.0, PI, |x| x.sin());
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn breaks() {
        let e = geometric_breaks(1.0, 8.0, 2);
        assert_eq!(e.len(), 7);
        assert!((e[2] - 2.0).abs() < 1e-12);
        let m = merge_breaks(0.0, 1.0, &[0.5, 2.0, -1.0, 0.5]);
        assert_eq!(m, alloc::vec![0.0, 0.5, 1.0]);
    }
}
