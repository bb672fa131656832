//! One pass/fail line per acceptance criterion. Runs without the libtest
//! harness so the table is printed even when output capture is on.
//! `ACCEPTANCE_VERBOSE=1` also lists every check.

use std::process::ExitCode;
use std::time::Instant;

use alignlab::acceptance::run_all;
use alignlab::experiments::Tolerances;

fn main() -> ExitCode {
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let verbose = std::env::var_os("ACCEPTANCE_VERBOSE").is_some();
    let start = Instant::now();
    let results = run_all(&Tolerances::default(), filter.as_deref());
    for r in &results {
        println!("{}", r.line());
        for c in r.checks.iter().filter(|c| verbose || !c.passed) {
            println!(
                "    {:<52} {} value {:.6e} limit {:.6e} {}",
                c.name,
                if c.passed { "ok  " } else { "FAIL" },
                c.value,
                c.limit,
                c.note.as_deref().unwrap_or("")
            );
        }
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("acceptance: {passed}/{} criteria passed in {:.2} s", results.len(), start.elapsed().as_secs_f64());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
