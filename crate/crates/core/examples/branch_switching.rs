//! Switches from the radial branch onto the non-radial branch of each of
//! modes 2, 3, 4 and follows it for a few arclength steps.
//!
//! ```text
//! cargo run --release --example branch_switching
//! ```

use plaque::closed_form::ModelParams;
use plaque::continuation::{
    continue_branch, mode_purity, tangent_cone_switch, track_radial_branch, BranchPoint, ContinuationOptions,
    StepControl, SwitchOptions,
};
use plaque::fb_solver::Discretization;
use plaque::spectral::bifurcation_point;

fn main() -> plaque::Result<()> {
    let params = ModelParams::reference();
    let disc = Discretization::new(48, 8);
    let l_max = 1.1 * bifurcation_point(&params, 4)?.l_n;
    let track = track_radial_branch(&params, &disc, 0.0, l_max, &StepControl::default())?;
    let opts = ContinuationOptions {
        steps: 6,
        stability_every: 3,
        ..ContinuationOptions::default()
    };
    for d in &track.detections {
        let n = d.mode_estimate;
        let start = BranchPoint::new(format!("n{n}"), tangent_cone_switch(d, 1.0, &SwitchOptions::default())?);
        let run = continue_branch(&start, &opts)?;
        println!("mode {n} from L = {:.4}", d.l_tilde);
        for p in &run.points {
            let re = p.re_lambda_max.map_or(String::from("-"), |r| format!("{r:.2}"));
            println!(
                "  L = {:>10.5}  projection = {:.4e}  purity = {:.4}  re lambda_max = {re}",
                p.ldl,
                p.projection,
                mode_purity(&p.solution.curve, n as usize)
            );
        }
        if let Some(msg) = run.aborted {
            println!("  stopped: {msg}");
        }
    }
    Ok(())
}
