//! Runs the verification suite on the default configuration and prints one
//! line per criterion. Exits non-zero if any criterion fails.

use multibump::pipeline::{verify, RunConfig, CHECK_IDS};
use std::process::ExitCode;

fn main() -> ExitCode {
    let report = verify(&RunConfig::default());
    assert_eq!(report.records.len(), CHECK_IDS.len());
    for (k, r) in report.records.iter().enumerate() {
        println!(
            "acceptance {:>2} {:<24} {}  measured {}  target {} ({})",
            k + 1,
            r.id,
            if r.passed { "PASS" } else { "FAIL" },
            r.measured,
            r.target,
            r.tolerance
        );
        if !r.passed && !r.detail.is_empty() {
            println!("    {}", r.detail);
        }
    }
    let failed = report.records.iter().filter(|r| !r.passed).count();
    println!("acceptance: {} of {} criteria passed", report.records.len() - failed, report.records.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
