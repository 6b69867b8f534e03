//! Analytic bifurcation points `L_n = C_1 / C_2` and their ordering near the wall.
//!
//! ```text
//! cargo run --release --example bifurcation_points
//! ```

use plaque::closed_form::ModelParams;
use plaque::spectral::{bifurcation_point, mode_monotonicity};

fn main() -> plaque::Result<()> {
    let params = ModelParams::reference();
    println!("{:>3} {:>16} {:>16} {:>16}", "n", "C1", "C2", "L_n");
    for n in 0..=8 {
        let b = bifurcation_point(&params, n)?;
        println!("{n:>3} {:>16.8e} {:>16.8e} {:>16.8}", b.c1_val, b.c2_val, b.l_n);
    }

    let near_wall = params.with_rho(0.975 * params.outer_radius);
    let report = mode_monotonicity(&near_wall, 8)?;
    println!(
        "\nrho = {:.3}: eps/R = {:.3}, C1 increasing {}, C2 positive and decreasing {}, L_n increasing {}",
        near_wall.rho, report.epsilon_ratio, report.c1_increasing, report.c2_positive && report.c2_decreasing, report.l_increasing
    );
    Ok(())
}
