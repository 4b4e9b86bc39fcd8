use std::fs;
use std::path::Path;
use std::process::Command;

use erz::cli::{main_with_args, parse_range};
use erz::verify::threads_from_env;

fn erz(dir: &Path, args: &[&str]) -> i32 {
    let mut argv = vec!["erz", "--output-dir", dir.to_str().unwrap()];
    argv.extend_from_slice(args);
    main_with_args(argv)
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn dispersion_outputs_embed_version_and_config() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(erz(d.path(), &["dispersion", "--sigma", "1.5"]), 0);
    let v = json(&d.path().join("dispersion.json"));
    assert_eq!(v["version"], erz::VERSION);
    assert_eq!(v["config"]["params"]["sigma"], 1.5);
    assert_eq!(v["config"]["params"]["lebesgue_p"], serde_json::json!([10.0, 12.0, 16.0]));
    let r0 = v["results"]["degenerate_point"].as_f64().unwrap();
    assert!((r0 - 0.5f64.powf(1.0 / 1.5)).abs() < 1e-14);
    let betas: Vec<f64> = v["results"]["decay_exponents"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["beta"].as_f64().unwrap())
        .collect();
    let expect = [8.0 / 3.0 * 0.4, 8.0 / 3.0 * (0.5 - 1.0 / 12.0), 8.0 / 3.0 * (0.5 - 1.0 / 16.0)];
    for (b, e) in betas.iter().zip(expect) {
        assert!((b - e).abs() < 1e-14);
    }
    let csv = fs::read_to_string(d.path().join("dispersion.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), format!("# erz {}", erz::VERSION));
    assert!(lines.next().unwrap().starts_with("# config {"));
    assert_eq!(lines.next().unwrap(), "r,p,dp,d2p");
    assert_eq!(lines.count(), 121);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let cases: [(&[&str], &str); 2] = [
        (&["--seed", "4", "phase-bounds", "--samples", "20000", "--sigma", "0.7"], "phase-bounds"),
        (&["--seed", "4", "simulate", "--grid", "8", "--dt", "0.05", "--t-end", "0.5"], "simulate"),
    ];
    for (args, stem) in cases {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        assert_eq!(erz(a.path(), args), 0);
        assert_eq!(erz(b.path(), args), 0);
        for ext in ["json", "csv"] {
            let f = format!("{stem}.{ext}");
            let x = fs::read_to_string(a.path().join(&f)).unwrap();
            let y = fs::read_to_string(b.path().join(&f)).unwrap();
            // The output directory is part of the embedded config.
            let strip = |s: &str, d: &Path| s.replace(d.to_str().unwrap(), "DIR");
            assert_eq!(strip(&x, a.path()), strip(&y, b.path()), "{f}");
        }
        assert_eq!(json(&a.path().join(format!("{stem}.json")))["config"]["seed"], 4);
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.toml");
    fs::write(
        &cfg,
        format!(
            "seed = 9\noutput_dir = {:?}\n[dispersion]\nsigma = 1.2\nsamples = 5\n",
            d.path().join("out").to_str().unwrap()
        ),
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    assert_eq!(main_with_args(["erz", "--config", c, "dispersion"]), 0);
    let v = json(&d.path().join("out/dispersion.json"));
    assert_eq!(v["config"]["seed"], 9);
    assert_eq!(v["config"]["params"]["sigma"], 1.2);
    assert_eq!(v["config"]["params"]["samples"], 5);
    assert_eq!(main_with_args(["erz", "--config", c, "--seed", "2", "dispersion", "--sigma", "0.8"]), 0);
    let v = json(&d.path().join("out/dispersion.json"));
    assert_eq!(v["config"]["seed"], 2);
    assert_eq!(v["config"]["params"]["sigma"], 0.8);
    assert_eq!(v["config"]["params"]["samples"], 5);
    assert!(v["results"]["degenerate_point"].is_null());
}

#[test]
fn precondition_violations_exit_with_two() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(erz(d.path(), &["dispersion", "--sigma", "2.5"]), 2);
    assert_eq!(erz(d.path(), &["dispersion", "--lebesgue-p", "4"]), 2);
    assert_eq!(erz(d.path(), &["dispersion", "--low-window", "1e-2:1e-4"]), 2);
    assert_eq!(erz(d.path(), &["decay-degenerate", "--sigma", "1.0"]), 2);
    assert_eq!(erz(d.path(), &["decay-degenerate", "--shell-fraction", "0.6"]), 2);
    assert_eq!(erz(d.path(), &["kernel-norms", "--lambda", "2"]), 2);
    assert_eq!(erz(d.path(), &["simulate", "--grid", "8", "--eps", "1000"]), 2);
    assert_eq!(erz(d.path(), &["simulate", "--grid", "8", "--dt", "0.3"]), 2);
    assert_eq!(erz(d.path(), &["no-such-command"]), 2);
    assert_eq!(erz(d.path(), &["all", "--criteria", "11"]), 2);
    let cfg = d.path().join("bad.toml");
    fs::write(&cfg, "[dispersion]\nsigmaa = 1.0\n").unwrap();
    assert_eq!(main_with_args(["erz", "--config", cfg.to_str().unwrap(), "dispersion"]), 2);
    fs::write(&cfg, "extra = 1\n").unwrap();
    assert_eq!(main_with_args(["erz", "--config", cfg.to_str().unwrap(), "dispersion"]), 2);
    assert!(!d.path().join("dispersion.json").exists());
}

#[test]
fn thread_count_and_range_parsing() {
    assert_eq!(threads_from_env("3").unwrap(), 3);
    assert!(threads_from_env("0").is_err());
    assert!(threads_from_env("many").is_err());
    assert_eq!(parse_range("1e2:1e4").unwrap(), (100.0, 1e4));
    for bad in ["1e4:1e2", "1", "a:b", "1:inf"] {
        assert!(parse_range(bad).is_err(), "{bad}");
    }
}

#[test]
fn gnuplot_script_is_written_on_request() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(erz(d.path(), &["--gnuplot", "dispersion"]), 0);
    let gp = fs::read_to_string(d.path().join("dispersion.gp")).unwrap();
    assert!(gp.starts_with("# erz "));
    assert!(gp.contains("plot 'dispersion.csv'"));
    assert_eq!(erz(d.path(), &["dispersion", "--sigma", "1.1"]), 0);
}

#[test]
fn simulate_and_normal_form_small_runs() {
    let d = tempfile::tempdir().unwrap();
    let args = ["simulate", "--grid", "8", "--dt", "0.02", "--t-end", "0.2", "--monitor-stride", "5"];
    assert_eq!(erz(d.path(), &args), 0);
    let v = json(&d.path().join("simulate.json"));
    assert!(v["results"]["summary"]["mass_drift"].as_f64().unwrap() <= 1e-12);
    let csv = fs::read_to_string(d.path().join("simulate.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(rows[0].starts_with("t,mass,curl,curl_relative,max_n,"));
    assert_eq!(rows.len(), 1 + 3);

    let nf = ["normal-form", "--grid", "8", "--t", "0.1", "--dt", "0.01"];
    assert_eq!(erz(d.path(), &nf), 0);
    let v = json(&d.path().join("normal-form.json"));
    assert!(v["results"]["residual"].as_f64().unwrap() < 1e-8);
    assert_eq!(v["results"]["steps"], 10);
}

#[test]
fn kernel_norms_and_derivative_bounds_tables() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(erz(d.path(), &["kernel-norms", "--shells", "2:3", "--direction", "eta_shells"]), 0);
    let csv = fs::read_to_string(d.path().join("kernel-norms.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[2].starts_with("11,eta_shells,8e0,"));

    let args = ["derivative-bounds", "--samples", "20000", "--bounds", "grad_xi_high,lap_eta_high"];
    assert_eq!(erz(d.path(), &args), 0);
    let v = json(&d.path().join("derivative-bounds.json"));
    let r = v["results"].as_array().unwrap();
    assert_eq!(r.len(), 2);
    assert!(r[0]["widening_delta"].as_f64().unwrap() < 0.1);
    assert!(r[1]["widening_delta"].as_f64().unwrap() > 1.0);
}

#[test]
fn acceptance_subcommand_reports_verdicts() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(erz(d.path(), &["all", "--criteria", "1,3"]), 0);
    let v = json(&d.path().join("all.json"));
    assert_eq!(v["results"].as_array().unwrap().len(), 2);
    assert!(v["results"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    // The tabulated high-regime slope for 1 < sigma <= 4/3 is not the asymptotic one.
    assert_eq!(erz(d.path(), &["all", "--criteria", "2"]), 1);
}

#[test]
fn binary_examples() {
    let d = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_erz");
    let run = |args: &[&str]| {
        Command::new(bin)
            .arg("--output-dir")
            .arg(d.path())
            .args(args)
            .output()
            .unwrap()
    };
    let o = run(&["dispersion", "--sigma", "1.5"]);
    assert_eq!(o.status.code(), Some(0));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("r0 = 6.299605249474e-1"), "{out}");
    assert!(out.contains("PASS"));

    let o = run(&["dispersion", "--sigma", "2.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("sigma"));

    let o = run(&["normal-form", "--grid", "16", "--sigma", "1", "--eps", "1e-3", "--t", "1.0"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&d.path().join("normal-form.json"));
    assert!(v["results"]["residual"].as_f64().unwrap() <= 1e-3);

    let o = run(&["decay-degenerate", "--sigma", "1.5", "--t", "1e2:1e4"]);
    assert_eq!(o.status.code(), Some(0));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("pre-asymptotic"), "{out}");
    let csv = fs::read_to_string(d.path().join("decay-degenerate.csv")).unwrap();
    assert!(csv.contains("t,amplitude,first_ray,argmax_radius"));
}
