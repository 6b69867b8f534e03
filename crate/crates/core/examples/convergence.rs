//! Refinement study of the discrete radial fields against the closed form,
//! driven by the checked-in `configs/converge.toml`.
//!
//! ```text
//! cargo run --release --example convergence
//! ```

use plaque::config::RunConfig;
use plaque::polar_disc::radial_convergence;

fn main() -> plaque::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/converge.toml");
    let cfg = RunConfig::load(path)?;
    cfg.validate()?;
    let levels = radial_convergence(&cfg.params, &cfg.grid.ladder, cfg.grid.scheme)?;
    println!("{:>8} {:>10} {:>12} {:>12} {:>12} {:>7}", "h", "dtheta", "err", "err_M", "err_P", "order");
    for l in &levels {
        let order = l.order.map_or(String::from("-"), |o| format!("{o:.3}"));
        println!(
            "{:>8.4} {:>10.6} {:>12.4e} {:>12.4e} {:>12.4e} {order:>7}",
            l.h, l.dtheta, l.err, l.err_m, l.err_p
        );
    }
    Ok(())
}
