use erz_core::cutoff::{cutoff, cutoff_scaled, dyadic, ShellPart, ShellWindow};
use erz_core::fit::{fit_decay, logspace, ols};
use erz_core::phase::{phase, phase_gradient, Variable};
use erz_core::quad::GaussLegendre;
use erz_core::symbol::{symbol_m, symbols_all};
use erz_core::{DispersionParams, FreqTriple, SignPair, Vec3};
use proptest::prelude::*;

fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
    prop::array::uniform3(-r..r).prop_map(Vec3)
}

fn triple() -> impl Strategy<Value = FreqTriple> {
    (vec3(4.0), vec3(4.0))
        .prop_map(|(xi, eta)| FreqTriple::new(xi, eta))
        .prop_filter("nonzero magnitudes", |t| {
            t.xi.norm() > 0.05 && t.eta.norm() > 0.05 && t.zeta().norm() > 0.05
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn dispersion_derivatives_match_differences(sigma in 0.05f64..1.95, r in 0.05f64..50.0) {
        let p = DispersionParams::new(sigma).unwrap();
        let h = 1e-5 * r;
        prop_assert!(p.p(r) > 0.0 && p.dp(r) > 0.0);
        let fd1 = (p.p(r + h) - p.p(r - h)) / (2.0 * h);
        let fd2 = (p.dp(r + h) - p.dp(r - h)) / (2.0 * h);
        prop_assert!((fd1 - p.dp(r)).abs() <= 1e-7 * p.dp(r).abs().max(1.0));
        prop_assert!((fd2 - p.d2p(r)).abs() <= 1e-6 * (p.d2p(r).abs() + p.dp(r) / r));
    }

    #[test]
    fn degenerate_point_is_a_sign_change(sigma in 1.02f64..1.98) {
        let p = DispersionParams::new(sigma).unwrap();
        let r0 = p.degenerate_point().unwrap();
        prop_assert!(p.d2p(r0).abs() <= 1e-12 * p.dp(r0) / r0);
        prop_assert!(p.d2p(0.99 * r0) < 0.0 && p.d2p(1.01 * r0) > 0.0);
    }

    #[test]
    fn decay_exponent_grows_with_lebesgue_index(sigma in 0.05f64..1.95, a in 8.5f64..50.0, d in 0.1f64..50.0) {
        let p = DispersionParams::new(sigma).unwrap();
        let lo = p.beta_exponent(a).unwrap().beta;
        let hi = p.beta_exponent(a + d).unwrap().beta;
        let sup = p.beta_exponent(f64::INFINITY).unwrap().beta;
        prop_assert!(0.0 < lo && lo < hi && hi < sup);
    }

    #[test]
    fn phase_and_symbol_respect_the_swap(sigma in 0.05f64..1.95, t in triple()) {
        let p = DispersionParams::new(sigma).unwrap();
        let all = symbols_all(&p, &t).unwrap();
        for sp in SignPair::ALL {
            let a = phase(sp, &p, &t);
            let b = phase(sp.swapped(), &p, &t.swapped());
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            let m = symbol_m(sp, &p, &t).unwrap();
            let w = symbol_m(sp.swapped(), &p, &t.swapped()).unwrap();
            prop_assert!((m - w).norm() <= 1e-12 * m.norm().max(1.0));
            prop_assert!((all[sp.index()] - m).norm() <= 1e-12 * m.norm().max(1.0));
        }
    }

    #[test]
    fn phase_gradient_matches_differences(sigma in 0.05f64..1.95, t in triple(), axis in 0usize..3) {
        let p = DispersionParams::new(sigma).unwrap();
        let h = 1e-6;
        for sp in SignPair::ALL {
            for wrt in [Variable::Xi, Variable::Eta] {
                let g = phase_gradient(sp, &p, &t, wrt).unwrap();
                let shift = |s: f64| {
                    let mut e = [0.0; 3];
                    e[axis] = s;
                    let e = Vec3(e);
                    match wrt {
                        Variable::Xi => FreqTriple::new(t.xi + e, t.eta),
                        Variable::Eta => FreqTriple::new(t.xi, t.eta + e),
                    }
                };
                let fd = (phase(sp, &p, &shift(h)) - phase(sp, &p, &shift(-h))) / (2.0 * h);
                prop_assert!((fd - g.0[axis]).abs() <= 1e-5 * g.norm().max(1.0));
            }
        }
    }

    #[test]
    fn cutoffs_are_bounded_and_telescope(x in 0.0f64..300.0, k in 1u32..8) {
        let c = cutoff(x).v;
        prop_assert!((0.0..=1.0).contains(&c));
        let mut sum = cutoff(x).v;
        let mut n = 2.0;
        for _ in 0..k {
            let d = dyadic(x, n).v;
            prop_assert!((0.0..=1.0).contains(&d));
            sum += d;
            n *= 2.0;
        }
        prop_assert!((sum - cutoff_scaled(x, 0.5 * n).v).abs() <= 1e-14);
    }

    #[test]
    fn shell_window_parts_partition_unity(frac in 0.01f64..0.49, r in 0.0f64..3.0) {
        let w = ShellWindow::new(1.0, frac).unwrap();
        let s: f64 = [ShellPart::Inner, ShellPart::Shell, ShellPart::Outer]
            .iter()
            .map(|&part| w.part(part, r).v)
            .sum();
        prop_assert!((s - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn gauss_legendre_is_exact_on_polynomials(n in 1usize..24, a in -3.0f64..3.0, w in 0.1f64..4.0, c in prop::collection::vec(-1.0f64..1.0, 48)) {
        let q = GaussLegendre::new(n);
        let b = a + w;
        let deg = 2 * n - 1;
        let f = |x: f64| c.iter().take(deg + 1).rev().fold(0.0, |acc, &k| acc * x + k);
        let exact: f64 = c
            .iter()
            .take(deg + 1)
            .enumerate()
            .map(|(j, &k)| k * (b.powi(j as i32 + 1) - a.powi(j as i32 + 1)) / (j as f64 + 1.0))
            .sum();
        let got: f64 = q.mapped(a, b).map(|(x, wt)| wt * f(x)).sum();
        let scale: f64 = 1.0 + (a.abs().max(b.abs())).powi(deg as i32 + 1);
        prop_assert!((got - exact).abs() <= 1e-12 * scale);
    }

    #[test]
    fn power_laws_are_recovered(exponent in -3.0f64..0.5, amp in 0.01f64..100.0, lo in 0.1f64..10.0, decades in 1.0f64..4.0) {
        let ts = logspace(lo, lo * 10f64.powf(decades), 16);
        prop_assert!((ts[0] - lo).abs() <= 1e-12 * lo);
        prop_assert!(ts.windows(2).all(|w| w[1] > w[0]));
        let samples: Vec<(f64, f64)> = ts.iter().map(|&t| (t, amp * t.powf(exponent))).collect();
        let fit = fit_decay(&samples).unwrap();
        prop_assert!((fit.exponent - exponent).abs() <= 1e-10);
        prop_assert!((fit.intercept - amp.ln()).abs() <= 1e-8);
        prop_assert!(fit.clean);
        let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let line = ols(&xs, &ys);
        prop_assert!((line.slope - 2.0).abs() <= 1e-12 && (line.r_squared - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn fit_rejects_short_or_nonpositive_samples() {
    let ts = logspace(1.0, 5.0, 10);
    let short: Vec<(f64, f64)> = ts.iter().map(|&t| (t, 1.0 / t)).collect();
    assert!(fit_decay(&short).is_err());
    let mut bad: Vec<(f64, f64)> = logspace(1.0, 100.0, 10).iter().map(|&t| (t, 1.0 / t)).collect();
    bad[3].1 = 0.0;
    assert!(fit_decay(&bad).is_err());
    assert!(fit_decay(&bad[..4]).is_err());
}
