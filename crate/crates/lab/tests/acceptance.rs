//! Runs AC-1 … AC-11 and prints one PASS/FAIL line per criterion.

use std::process::ExitCode;

use shearmix::acceptance::{criteria, run_criterion};

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| a.starts_with("AC-")).collect();
    let mut failed = Vec::new();
    for c in criteria().iter().filter(|c| filter.is_empty() || filter.iter().any(|f| f == c.id)) {
        let r = run_criterion(c);
        println!("{}", r.line());
        if !r.pass {
            failed.push(r.id);
        }
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failing criteria: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
