//! One PASS/FAIL line per criterion. `ERZ_CRITERIA=1,3` selects a subset.

use std::process::ExitCode;
use std::time::Instant;

use erz::acceptance::{run_criterion, CRITERIA};

fn selected() -> Vec<u8> {
    match std::env::var("ERZ_CRITERIA") {
        Ok(s) if !s.trim().is_empty() => s
            .split(',')
            .map(|t| t.trim().parse().expect("ERZ_CRITERIA must be a comma list of 1..=10"))
            .collect(),
        _ => CRITERIA.to_vec(),
    }
}

fn main() -> ExitCode {
    let mut failed = 0;
    for id in selected() {
        let start = Instant::now();
        let line = match run_criterion(id) {
            Ok(c) => {
                if !c.pass {
                    failed += 1;
                }
                c.line()
            }
            Err(e) => {
                failed += 1;
                format!("criterion {id:>2} FAIL: error: {e}")
            }
        };
        println!("{line} ({:.1} s)", start.elapsed().as_secs_f64());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
