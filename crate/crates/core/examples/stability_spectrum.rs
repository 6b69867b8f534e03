//! Largest growth rate of the radial state for arbitrary and for
//! angle-independent perturbations.
//!
//! ```text
//! cargo run --release --example stability_spectrum
//! ```

use plaque::closed_form::ModelParams;
use plaque::fb_solver::{linearized_spectrum, radial_solution, Discretization, Restriction};

fn main() -> plaque::Result<()> {
    let params = ModelParams::reference();

    let disc = Discretization::new(32, 8);
    println!("full operator, grid (32, 8)");
    for ldl in [0.0, 3.0, 15.0, 120.0, 200.0] {
        let s = radial_solution(&params.with_ldl(ldl), &disc)?;
        let spectrum = linearized_spectrum(&s, Restriction::Full)?;
        println!("  L = {ldl:>6}: re lambda_max = {:>12.4}", spectrum.re_max());
    }

    let disc = Discretization::new(8, 32);
    println!("angle-independent perturbations, n_r = 32");
    for ldl in [5.0, 10.0, 50.0, 100.0, 140.0, 150.0, 200.0] {
        let s = radial_solution(&params.with_ldl(ldl), &disc)?;
        let spectrum = linearized_spectrum(&s, Restriction::RadiallySymmetric)?;
        println!("  L = {ldl:>6}: re lambda_max = {:>10.4}", spectrum.re_max());
    }
    Ok(())
}
