//! Tracks the discrete radial branch in `L` and locates the points where the
//! steady Jacobian becomes singular.
//!
//! ```text
//! cargo run --release --example detect_bifurcations
//! ```

use plaque::closed_form::ModelParams;
use plaque::continuation::{track_radial_branch, StepControl};
use plaque::fb_solver::Discretization;
use plaque::spectral::bifurcation_point;

fn main() -> plaque::Result<()> {
    let params = ModelParams::reference();
    let l_max = 1.1 * bifurcation_point(&params, 4)?.l_n;
    for (m, n_r) in [(20, 2), (40, 4), (80, 8)] {
        let disc = Discretization::new(m, n_r);
        let track = track_radial_branch(&params, &disc, 0.0, l_max, &StepControl::default())?;
        println!("grid ({m}, {n_r}): {} radial points", track.points.len());
        for d in &track.detections {
            let exact = bifurcation_point(&params, d.mode_estimate)?.l_n;
            println!(
                "  mode {}: L = {:>12.6}  analytic {:>12.6}  error {:.3e}",
                d.mode_estimate,
                d.l_tilde,
                exact,
                (d.l_tilde - exact).abs()
            );
        }
    }
    Ok(())
}
