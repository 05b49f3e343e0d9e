//! Runs every acceptance criterion and prints one PASS/FAIL line each.

use delta_ionization::acceptance::{run_suite, Level};

fn main() {
    let report = run_suite(Level::Full);
    for c in &report.criteria {
        println!("{}", c.line());
    }
    let failed: Vec<_> = report.criteria.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", report.criteria.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
