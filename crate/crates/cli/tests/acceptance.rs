//! One PASS/FAIL line per acceptance criterion, each driven by its preset in
//! `configs/`. Exits nonzero if any criterion fails.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use trotter_lab_cli::{load_config, run_experiment};

const PRESETS: [&str; 12] = [
    "01-flow-suite",
    "02-free-kernel",
    "03-mehler",
    "04-zero-potential-collapse",
    "05-harmonic-cos-t1",
    "06-modbound",
    "07-exceptional-blowup",
    "08-operator-oracles",
    "09-sjostrand",
    "10-perturbation",
    "11-measure-bound",
    "12-free-slice",
];

fn main() -> ExitCode {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut failed = 0;
    for (i, stem) in PRESETS.iter().enumerate() {
        let path = dir.join(format!("{stem}.toml"));
        let start = Instant::now();
        let line = match load_config(&path) {
            Err(e) => Err(format!("config: {e}")),
            Ok(cfg) => match run_experiment(&cfg) {
                Err(e) => Err(format!("{}: {e}", e.name())),
                Ok(out) if out.checks.is_empty() => Err("no checks configured".into()),
                Ok(out) => {
                    let detail: Vec<String> =
                        out.checks.iter().map(|c| format!("{} {}", c.name, c.detail)).collect();
                    if out.passed() {
                        Ok(detail.join("; "))
                    } else {
                        let bad: Vec<String> = out
                            .checks
                            .iter()
                            .filter(|c| !c.passed)
                            .map(|c| format!("{} {}", c.name, c.detail))
                            .collect();
                        Err(bad.join("; "))
                    }
                }
            },
        };
        let secs = start.elapsed().as_secs_f64();
        match line {
            Ok(d) => println!("PASS criterion {} [{stem}, {secs:.1}s]: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {} [{stem}, {secs:.1}s]: {d}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", PRESETS.len() - failed, PRESETS.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
