//! Continuation in `L`: the radial branch with bifurcation detection, branch
//! switching onto non-radial steady states, and arclength continuation of
//! those branches.

mod branch;
mod track;

pub use branch::{continue_branch, tangent_cone_switch, ContinuationOptions, ContinuationRun, SwitchOptions};
pub use track::{track_radial_branch, RadialTrack};

use serde::{Deserialize, Serialize};

use crate::fb_solver::FreeBoundarySolution;
use crate::output::{fmt_f64, fmt_opt, CsvTable};
use crate::polar_disc::BoundaryCurve;

/// Default bisection width in `L` and eigenvalue threshold for detections.
pub const DETECTION_TOL: f64 = 1e-4;

/// Step-size rules shared by radial tracking and branch continuation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepControl {
    pub initial: f64,
    pub min: f64,
    pub max: f64,
    /// Factor applied after an easy step.
    pub growth: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            initial: 0.5,
            min: 1e-5,
            max: 8.0,
            growth: 1.5,
        }
    }
}

impl StepControl {
    /// Rules for arclength steps in the `(rho, L)` metric.
    pub fn arclength() -> Self {
        Self {
            initial: 0.02,
            min: 1e-5,
            max: 0.1,
            growth: 1.5,
        }
    }
}

/// A steady state on a solution branch.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint {
    pub branch_id: String,
    pub ldl: f64,
    pub projection: f64,
    pub re_lambda_max: Option<f64>,
    pub solution: FreeBoundarySolution,
}

impl BranchPoint {
    pub fn new(branch_id: impl Into<String>, solution: FreeBoundarySolution) -> Self {
        Self {
            branch_id: branch_id.into(),
            ldl: solution.params.ldl,
            projection: projection(&solution.curve),
            re_lambda_max: None,
            solution,
        }
    }
}

/// A crossing of the steady Jacobian through singularity on the radial branch.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectedBifurcation {
    pub l_tilde: f64,
    pub mode_estimate: u32,
    pub smallest_eig_norm: f64,
    /// Boundary part of the near-kernel vector on every ray, max-norm one.
    pub kernel: Vec<f64>,
    /// Radial steady state at `l_tilde`.
    pub solution: FreeBoundarySolution,
}

/// `(rho_max - rho_min) |theta_max - theta_min|`, with each extremum taken at
/// the first grid node attaining it.
pub fn projection(curve: &BoundaryCurve) -> f64 {
    let v = curve.values();
    let (mut jmax, mut jmin) = (0, 0);
    for (j, &r) in v.iter().enumerate() {
        if r > v[jmax] {
            jmax = j;
        }
        if r < v[jmin] {
            jmin = j;
        }
    }
    (v[jmax] - v[jmin]) * (curve.theta(jmax) - curve.theta(jmin)).abs()
}

/// Energy of each Fourier mode `0..=m/2` of the boundary.
pub fn fourier_energy(curve: &BoundaryCurve) -> Vec<f64> {
    fourier_energy_of(curve.values())
}

pub(crate) fn fourier_energy_of(v: &[f64]) -> Vec<f64> {
    let m = v.len();
    (0..=m / 2)
        .map(|k| {
            let (mut c, mut s) = (0.0, 0.0);
            for (j, &x) in v.iter().enumerate() {
                let t = 2.0 * std::f64::consts::PI * (k * j) as f64 / m as f64;
                c += x * t.cos();
                s += x * t.sin();
            }
            c * c + s * s
        })
        .collect()
}

/// Share of mode `n` in the non-constant part of the boundary.
pub fn mode_purity(curve: &BoundaryCurve, n: usize) -> f64 {
    let e = fourier_energy(curve);
    let total: f64 = e[1..].iter().sum();
    if total == 0.0 {
        0.0
    } else {
        e[n] / total
    }
}

/// Dominant non-constant mode of a boundary vector (mode 0 if it is constant).
pub(crate) fn dominant_mode(v: &[f64]) -> u32 {
    let e = fourier_energy_of(v);
    let mut best = 0;
    for k in 0..e.len() {
        if e[k] > e[best] {
            best = k;
        }
    }
    best as u32
}

/// Bifurcation-diagram table `branch_id,L,projection,re_lambda_max`.
pub fn diagram_csv(points: &[BranchPoint], comment: &str) -> CsvTable {
    let mut t = CsvTable::new(comment, &["branch_id", "L", "projection", "re_lambda_max"]);
    for p in points {
        t.push(vec![
            p.branch_id.clone(),
            fmt_f64(p.ldl),
            fmt_f64(p.projection),
            fmt_opt(p.re_lambda_max),
        ]);
    }
    t
}

/// Detection table `mode,L_tilde,smallest_eig_norm`.
pub fn detections_csv(detections: &[DetectedBifurcation], comment: &str) -> CsvTable {
    let mut t = CsvTable::new(comment, &["mode", "L_tilde", "smallest_eig_norm"]);
    for d in detections {
        t.push(vec![
            d.mode_estimate.to_string(),
            fmt_f64(d.l_tilde),
            fmt_f64(d.smallest_eig_norm),
        ]);
    }
    t
}
