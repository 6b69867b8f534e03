//! Growth rates of the radial state: the largest real root `a` of the
//! dispersion relation for each Fourier mode.
//!
//! ```text
//! cargo run --release --example dispersion
//! ```

use plaque::closed_form::ModelParams;
use plaque::spectral::{dispersion, growth_rates};

fn main() -> plaque::Result<()> {
    for ldl in [1.0, 3.0, 15.0] {
        let params = ModelParams::reference().with_ldl(ldl);
        println!("L = {ldl}");
        for g in growth_rates(&params, 12)? {
            match g.a {
                Some(a) => println!("  n = {:>2}: a = {a:>12.6}, h(a) = {:+.2e}", g.n, dispersion(a, g.n, &params)?),
                None => println!("  n = {:>2}: no growth", g.n),
            }
        }
    }
    Ok(())
}
