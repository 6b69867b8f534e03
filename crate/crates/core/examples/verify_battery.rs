//! Runs the fast verification battery and prints one line per check.
//!
//! ```text
//! cargo run --release --example verify_battery
//! ```

use plaque::verify::{run_battery, BatteryOptions, Scale};

fn main() {
    let reports = run_battery(&BatteryOptions::new(Scale::Fast));
    for r in &reports {
        let first = r.measured.iter().map(|(k, v)| format!("{k} = {v:.3e}")).next().unwrap_or_default();
        println!("{:<4} {:<40} {first}", if r.passed { "PASS" } else { "FAIL" }, r.name);
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("{} of {} checks passed", reports.len() - failed, reports.len());
    if failed > 0 {
        std::process::exit(2);
    }
}
