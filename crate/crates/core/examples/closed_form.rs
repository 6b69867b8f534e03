//! Closed-form radial steady state: clearance rate and field profiles.
//!
//! ```text
//! cargo run --release --example closed_form
//! ```

use plaque::closed_form::{clearance_t, ModelParams, RadialSteadyState};

fn main() -> plaque::Result<()> {
    let params = ModelParams::reference();
    let state = RadialSteadyState::new(params)?;
    println!("T = {:.10}", clearance_t(&params)?);
    println!("{:>8} {:>14} {:>14} {:>14} {:>14}", "r", "M", "P", "M_r", "P_r");
    let steps = 8;
    for k in 0..=steps {
        let r = params.rho + (params.outer_radius - params.rho) * k as f64 / steps as f64;
        let v = state.eval(r)?;
        println!("{r:>8.4} {:>14.10} {:>14.10} {:>14.10} {:>14.10}", v.m, v.p, v.dm, v.dp);
    }
    for ldl in [0.0, 1.0, 3.0, 15.0] {
        println!("L = {ldl:>5}: T = {:.6e}", clearance_t(&params.with_ldl(ldl))?);
    }
    Ok(())
}
