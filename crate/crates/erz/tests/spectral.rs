use std::f64::consts::PI;

use erz::spectral::io::{read_field, write_field};
use erz::spectral::norms::lp_norm;
use erz::spectral::{
    apply_multiplier, degenerate_shell_project, lp_project, lp_project_below, norm_suite, GridSpec, MultiplierSpec,
    NormConfig, SpectralField,
};
use erz::ErzError;
use erz_core::DispersionParams;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_real(grid: GridSpec, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vals: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut f = SpectralField::from_real(grid, &vals).unwrap().dealiased();
    f.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
    f
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn physical_round_trip_is_exact_to_rounding() {
    let g = GridSpec::cube(16, 5.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let vals: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let f = SpectralField::from_real(g, &vals).unwrap();
    assert!(max_diff(&f.to_real(), &vals) < 1e-14);
    assert!(f.hermitian_defect() < 1e-15);
}

#[test]
fn parseval_matches_physical_l2() {
    let g = GridSpec::cube(16, 2.0 * PI).unwrap();
    let f = random_real(g, 4);
    let phys = lp_norm(std::slice::from_ref(&f), 2.0).unwrap();
    assert!((phys / f.l2_norm() - 1.0).abs() < 1e-13);
}

#[test]
fn derivative_of_a_plane_wave() {
    let l = 4.0;
    let g = GridSpec::cube(16, l).unwrap();
    let k = 2.0 * PI * 3.0 / l;
    let vals: Vec<f64> = (0..g.len()).map(|i| (k * g.coords(i)[1]).sin()).collect();
    let f = SpectralField::from_real(g, &vals).unwrap();
    let d = apply_multiplier(&f, &MultiplierSpec::derivative(1)).unwrap();
    let expect: Vec<f64> = (0..g.len()).map(|i| k * (k * g.coords(i)[1]).cos()).collect();
    assert!(max_diff(&d.to_real(), &expect) < 1e-12);
}

#[test]
fn riesz_squares_sum_to_minus_identity() {
    let g = GridSpec::cube(16, 2.0 * PI).unwrap();
    let f = random_real(g, 5);
    let mut acc = SpectralField::zeros(g);
    for j in 0..3 {
        let r = MultiplierSpec::riesz(j);
        let rr = apply_multiplier(&apply_multiplier(&f, &r).unwrap(), &r).unwrap();
        acc = acc.add(&rr).unwrap();
    }
    assert!(acc.add(&f).unwrap().l2_norm() < 1e-13 * f.l2_norm());
}

#[test]
fn fractional_powers_invert_on_mean_zero_fields() {
    let g = GridSpec::cube(16, 3.0).unwrap();
    let f = random_real(g, 6);
    for s in [0.4, 1.0, 1.7] {
        let m = MultiplierSpec::abs_grad(s).then(&MultiplierSpec::abs_grad(-s));
        let back = apply_multiplier(&f, &m).unwrap();
        assert!(back.l2_distance(&f).unwrap() < 1e-13 * f.l2_norm(), "s = {s}");
    }
}

#[test]
fn littlewood_paley_pieces_telescope() {
    let g = GridSpec::cube(32, 2.0 * PI).unwrap();
    let f = random_real(g, 7);
    let mut sum = lp_project_below(&f, 1.0);
    let mut n = 2.0;
    while n <= 64.0 {
        sum = sum.add(&lp_project(&f, n)).unwrap();
        let below = lp_project_below(&f, n);
        assert!(sum.l2_distance(&below).unwrap() < 1e-13 * f.l2_norm(), "N = {n}");
        n *= 2.0;
    }
    // The cutoff at 64 exceeds every active frequency.
    assert!(sum.l2_distance(&f).unwrap() < 1e-13 * f.l2_norm());
}

#[test]
fn degenerate_shell_pieces_sum_to_the_field() {
    let g = GridSpec::cube(32, 8.0 * PI).unwrap();
    let f = random_real(g, 8);
    let p = DispersionParams::new(1.5).unwrap();
    let r0 = p.degenerate_point().unwrap();
    let (a, b, c) = degenerate_shell_project(&f, &p, r0 / 8.0).unwrap();
    let s = a.add(&b).unwrap().add(&c).unwrap();
    assert!(s.l2_distance(&f).unwrap() < 1e-13 * f.l2_norm());
    assert!(b.l2_norm() > 0.0);
    assert!(degenerate_shell_project(&f, &DispersionParams::new(1.0).unwrap(), 0.1).is_err());
}

#[test]
fn field_files_round_trip() {
    let d = tempfile::tempdir().unwrap();
    let g = GridSpec::cube(8, 2.0).unwrap();
    let f = random_real(g, 9);
    let base = d.path().join("f");
    write_field(&f, &base).unwrap();
    let back = read_field(&base).unwrap();
    assert_eq!(back, f);
    std::fs::write(base.with_extension("bin"), [0u8; 3]).unwrap();
    assert!(matches!(read_field(&base), Err(ErzError::Grid(_))));
}

#[test]
fn norm_suite_rejects_mean_and_reports_every_key() {
    let g = GridSpec::cube(8, 2.0 * PI).unwrap();
    let f = random_real(g, 10);
    let cfg = NormConfig {
        sigma: 1.0,
        s: 1,
        lebesgue_p: 8.0,
        t: 2.0,
    };
    let r = norm_suite(std::slice::from_ref(&f), &cfg, None).unwrap();
    for k in ["l2", "linf", "lp", "wsp", "h2s", "hdot_neg", "y", "x_raw", "x_weighted"] {
        assert!(r.get(k) > 0.0, "{k}");
    }
    assert!((r.get("l2") / f.l2_norm() - 1.0).abs() < 1e-13);
    let x = r.get("y") + 3f64.powf(r.beta) * r.get("wsp");
    assert!((r.get("x_weighted") - x).abs() < 1e-12 * x);
    let mut m = f.clone();
    m.coeffs_mut()[0] = Complex64::new(1.0, 0.0);
    assert!(matches!(
        norm_suite(std::slice::from_ref(&m), &cfg, None),
        Err(ErzError::NotMeanZero(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn real_multipliers_keep_fields_real(seed in 0u64..1000, s in -1.5f64..2.5) {
        let g = GridSpec::cube(8, 3.0).unwrap();
        let f = random_real(g, seed);
        let out = apply_multiplier(&f, &MultiplierSpec::abs_grad(s)).unwrap();
        let phys = out.to_physical();
        let scale = phys.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
        prop_assert!(phys.iter().all(|c| c.im.abs() <= 1e-13 * scale));
    }

    #[test]
    fn propagator_multiplier_is_unitary(seed in 0u64..1000, t in -20.0f64..20.0) {
        let g = GridSpec::cube(8, 3.0).unwrap();
        let f = random_real(g, seed);
        let m = MultiplierSpec::propagator(DispersionParams::new(1.0).unwrap(), t);
        let out = apply_multiplier(&f, &m).unwrap();
        prop_assert!((out.l2_norm() / f.l2_norm() - 1.0).abs() < 1e-13);
    }
}
