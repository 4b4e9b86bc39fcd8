use erz::verify::*;
use erz_core::bounds::LowerRegime;
use erz_core::DispersionParams;

#[test]
fn thread_count_does_not_change_reports() {
    let p = DispersionParams::new(1.0).unwrap();
    let run = || verify_phase_lower_bound(&p, LowerRegime::BLarge, 30_000, 11, MagnitudeRange::DEFAULT).unwrap();
    std::env::set_var("ERZ_THREADS", "1");
    let one = run();
    std::env::set_var("ERZ_THREADS", "3");
    let three = run();
    std::env::set_var("ERZ_THREADS", "zero");
    assert!(thread_pool().is_err());
    std::env::remove_var("ERZ_THREADS");
    assert_eq!(one, three);
}
