//! Runs the property suites and prints the measured constants.

use karst_fem::verification::property_suites;

fn main() -> karst_fem::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let report = property_suites(seed)?;
    for suite in &report.suites {
        println!("{} [{}]", suite.name, if suite.passed { "pass" } else { "FAIL" });
        for (key, value) in &suite.measured {
            println!("    {key:<40} {value:.4e}");
        }
    }
    for f in report.failures() {
        println!("failure: {f}");
    }
    Ok(())
}
