use std::f64::consts::PI;

use erz::linflow::{
    band_bump, critical_fan, fundamental_value, group_speed_fan, lp_decay_experiment,
    oscillatory_decay, propagate, wrap_time, OscillatorySpec, QuadSpec, Rays, Window,
};
use erz::spectral::{GridSpec, SpectralField};
use erz::ErzError;
use erz_core::cutoff::{ShellPart, ShellWindow};
use erz_core::fit::logspace;
use erz_core::DispersionParams;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(grid: GridSpec, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vals: Vec<Complex64> = (0..grid.len())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    SpectralField::from_complex(grid, &vals).unwrap()
}

#[test]
fn propagation_is_unitary_and_a_group() {
    let g = GridSpec::cube(32, 2.0 * PI).unwrap();
    let p = DispersionParams::new(1.0).unwrap();
    let f = random_field(g, 7);
    let n0 = f.l2_norm();
    assert_eq!(propagate(&f, &p, 0.0), f);
    for t in [1.0, 10.0, 100.0] {
        let n = propagate(&f, &p, t).l2_norm();
        assert!(((n - n0) / n0).abs() < 1e-12);
    }
    let a = propagate(&propagate(&f, &p, 1.3), &p, 2.9);
    let b = propagate(&f, &p, 4.2);
    assert!(a.l2_distance(&b).unwrap() / n0 < 1e-12);
}

#[test]
fn kernel_at_time_zero_matches_fine_radial_grid() {
    // Odd extension g(r) = W(|r|) r sampled finely; its DFT sine part is the
    // radial transform at the lattice frequencies, with exponentially small aliasing.
    let p = DispersionParams::new(1.0).unwrap();
    let w = Window::Bump {
        center: 1.0,
        half: 0.5,
    };
    let n = 1usize << 17;
    let lr = 64.0 * PI;
    let h = lr / n as f64;
    let mut data: Vec<Complex64> = (0..n)
        .map(|j| {
            let r = j as f64 * h;
            Complex64::new(w.eval(r) * r, 0.0)
        })
        .collect();
    rustfft::FftPlanner::new()
        .plan_fft_forward(n)
        .process(&mut data);
    let q = QuadSpec::default();
    for m in [32usize, 96, 192] {
        let x = 2.0 * PI * m as f64 / lr;
        let grid = -data[m].im * h / (2.0 * PI * PI * x);
        let quad = fundamental_value(&p, &w, 0.0, x, &q).unwrap();
        let rel = (quad.re - grid).abs() / grid.abs();
        assert!(rel < 1e-6, "x = {x}: {} vs {grid} ({rel:e})", quad.re);
        assert!(quad.im.abs() < 1e-14);
    }
}

#[test]
fn kernel_normalization_matches_box_transform() {
    // Periodic images of the slowly decaying kernel limit this oracle to ~1e-4.
    let p = DispersionParams::new(1.0).unwrap();
    let w = Window::Bump {
        center: 1.0,
        half: 0.5,
    };
    let l = 40.0 * PI;
    let g = GridSpec::with_dealias(3, 128, l, 1.0).unwrap();
    let f = SpectralField::from_fn(g, true, |xi| {
        let r = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
        Complex64::new(w.eval(r), 0.0)
    });
    // c_k = L^{-3} f^(xi_k) for f(x) = (2 pi)^-3 int f^ e^{ix.xi}.
    let phys = f.to_physical();
    let scale = (2.0 * PI / l).powi(3) / (2.0 * PI).powi(3);
    for i in [0i64, 1, 3] {
        let idx = g.index_of([i, 0, 0]);
        let x = g.coords(idx)[0];
        let quad = fundamental_value(&p, &w, 0.0, x, &QuadSpec::default()).unwrap();
        let rel = (quad.re - phys[idx].re * scale).abs() / quad.re.abs();
        assert!(rel < 1e-3, "x = {x}: {rel:e}");
    }
}

#[test]
fn quadrature_self_convergence() {
    let p = DispersionParams::new(1.5).unwrap();
    let w = Window::degenerate_shell(&p, p.degenerate_point().unwrap() / 8.0).unwrap();
    for &(t, v) in &[(100.0, 1.0), (1e3, 0.9), (1e4, 1.1)] {
        let x = v * p.dp(p.degenerate_point().unwrap()) * t;
        let a = fundamental_value(&p, &w, t, x, &QuadSpec::default()).unwrap();
        let fine = QuadSpec {
            panels_per_oscillation: 16,
            ..QuadSpec::default()
        };
        let b = fundamental_value(&p, &w, t, x, &fine).unwrap();
        assert!((a - b).norm() / b.norm() < 1e-8, "t = {t}");
    }
}

#[test]
fn quadrature_budget_is_enforced() {
    let p = DispersionParams::new(1.0).unwrap();
    let w = Window::Dyadic { n: 1.0 };
    match fundamental_value(&p, &w, 1e12, 0.0, &QuadSpec::default()) {
        Err(ErzError::QuadratureBudget { t, .. }) => assert_eq!(t, 1e12),
        other => panic!("{other:?}"),
    }
}

#[test]
fn nondegenerate_sup_decays_like_t_to_minus_three_halves() {
    let p = DispersionParams::new(1.0).unwrap();
    let w = Window::Dyadic { n: 1.0 };
    let spec = OscillatorySpec {
        window: w,
        t_samples: logspace(1e3, 1e5, 12),
        rays: group_speed_fan(&p, &w, 24).unwrap(),
        quad: QuadSpec::default(),
    };
    let d = oscillatory_decay(&p, &spec).unwrap();
    assert!((d.fit.exponent + 1.5).abs() < 0.05, "{}", d.fit.exponent);
}

#[test]
fn degenerate_shell_decays_like_t_to_minus_four_thirds() {
    let p = DispersionParams::new(1.5).unwrap();
    let r0 = p.degenerate_point().unwrap();
    let (_, fan) = critical_fan(&p).unwrap();
    let spec = OscillatorySpec {
        window: Window::degenerate_shell(&p, r0 / 8.0).unwrap(),
        t_samples: logspace(1e5, 1e7, 10),
        rays: fan,
        quad: QuadSpec::default(),
    };
    let d = oscillatory_decay(&p, &spec).unwrap();
    assert!(
        (d.first_ray_fit.exponent + 4.0 / 3.0).abs() < 0.05,
        "{}",
        d.first_ray_fit.exponent
    );
}

#[test]
fn frequency_growth_octave_scaling() {
    // sup_x |e^{itp} P_N delta| at fixed t over N in {1, 2, 4, 8}, sigma = 1.
    let p = DispersionParams::new(1.0).unwrap();
    let t = 200.0;
    let mut sups = Vec::new();
    for n in [1.0, 2.0, 4.0, 8.0] {
        let w = Window::Dyadic { n };
        let Rays::Speeds(v) = group_speed_fan(&p, &w, 24).unwrap() else {
            unreachable!()
        };
        let s = v
            .iter()
            .map(|s| fundamental_value(&p, &w, t, s * t, &QuadSpec::default()).unwrap().norm())
            .fold(0.0, f64::max);
        sups.push(s);
    }
    for k in 1..sups.len() {
        let ratio = sups[k] / sups[k - 1] / 2f64.powf(2.5);
        assert!(ratio > 0.5 && ratio < 2.0, "octave {k}: {ratio}");
    }
}

#[test]
fn wrap_time_properties() {
    let p = DispersionParams::new(1.0).unwrap();
    let g = GridSpec::cube(64, 256.0 * PI).unwrap();
    let w = wrap_time(&g, &p, (0.5, 4.0)).unwrap();
    assert!((w - 128.0 * PI / p.dp(0.5)).abs() < 1e-9);
    let g2 = GridSpec::cube(64, 512.0 * PI).unwrap();
    assert!((wrap_time(&g2, &p, (0.5, 4.0)).unwrap() / w - 2.0).abs() < 1e-12);
    let pt = wrap_time(&g, &p, (1.3, 1.3)).unwrap();
    assert!((pt - g.length / (2.0 * p.dp(1.3))).abs() < 1e-9);
    assert!(matches!(
        wrap_time(&g, &p, (0.0, 1.0)),
        Err(ErzError::UnboundedGroupVelocity(_))
    ));
}

#[test]
fn lp_experiment_rejects_wrap_and_short_samples() {
    let p = DispersionParams::new(1.0).unwrap();
    let g = GridSpec::cube(16, 16.0 * PI).unwrap();
    let f = band_bump(g, 0.2, 0.6).unwrap();
    assert!(lp_decay_experiment(&p, 8.0, &f, &[0.0]).is_err());
    assert!(matches!(
        lp_decay_experiment(&p, 8.0, &f, &[1.0, 1e6]),
        Err(ErzError::WrapTime { .. })
    ));
    assert!(lp_decay_experiment(&p, 6.0, &f, &[1.0, 2.0]).is_err());
}

#[test]
fn outer_part_window_is_an_annulus_piece() {
    let p = DispersionParams::new(1.5).unwrap();
    let r0 = p.degenerate_point().unwrap();
    let s = ShellWindow::new(r0, r0 / 8.0).unwrap();
    let w = Window::Part {
        shell: s,
        part: ShellPart::Outer,
        n: 2.0,
    };
    assert_eq!(w.support().unwrap(), (1.0, 4.0));
    assert_eq!(w.eval(2.0), 1.0);
    let inner = Window::Part {
        shell: s,
        part: ShellPart::Inner,
        n: 8.0,
    };
    assert!(inner.support().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn propagation_preserves_l2(seed in 0u64..1000, t in -50.0f64..50.0, sigma in 0.1f64..1.9) {
        let g = GridSpec::new(2, 16, 5.0).unwrap();
        let p = DispersionParams::new(sigma).unwrap();
        let f = random_field(g, seed);
        let n0 = f.l2_norm();
        prop_assert!((propagate(&f, &p, t).l2_norm() - n0).abs() <= 1e-12 * n0);
    }
}
