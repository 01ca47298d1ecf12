//! Runs the full acceptance suite and prints one line per criterion.
//! Built without the libtest harness so the lines always reach the console.

use hodgekit::suite::{run_suite_with_determinism, SuiteConfig};
use std::process::ExitCode;
use std::time::Instant;

fn main() -> ExitCode {
    let start = Instant::now();
    let report = match run_suite_with_determinism(SuiteConfig::default()) {
        Ok(r) => r,
        Err(e) => {
            println!("acceptance suite could not run: {e}");
            return ExitCode::FAILURE;
        }
    };
    println!("\nrunning acceptance suite (seed {}, {} metric)", report.seed, report.config.scheme);
    for criterion in &report.criteria {
        println!("{}", criterion.summary_line());
        for check in criterion.checks.iter().filter(|c| !c.passed) {
            println!(
                "    failed: {} measured {:?} bound {:?} {}",
                check.label,
                check.measured,
                check.bound,
                check.error.as_deref().unwrap_or("")
            );
        }
    }
    let failed: Vec<u32> = report.criteria.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    println!(
        "acceptance: {} of {} criteria passed in {:.1} s\n",
        report.criteria.len() - failed.len(),
        report.criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if report.criteria.len() == 10 && failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
