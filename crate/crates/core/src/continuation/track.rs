//! Homotopy along the radial branch with singularity monitoring.

use super::{dominant_mode, BranchPoint, DetectedBifurcation, StepControl, DETECTION_TOL};
use crate::closed_form::ModelParams;
use crate::error::{Error, Result};
use crate::fb_solver::{boundary_operator, radial_solution, Discretization, FreeBoundarySolution, Subspace};
use crate::linalg::eigen_decomposition;

/// Samples of the radial branch and the bifurcations found between them.
#[derive(Debug, Clone)]
pub struct RadialTrack {
    pub points: Vec<BranchPoint>,
    pub detections: Vec<DetectedBifurcation>,
    /// Set when the step size fell below the floor before reaching the end.
    pub aborted: Option<String>,
}

/// Radial state and the real eigenvalues of its condensed steady Jacobian.
#[derive(Clone)]
struct Sample {
    solution: FreeBoundarySolution,
    eigenvalues: Vec<f64>,
    vectors: Vec<Vec<f64>>,
}

impl Sample {
    fn negative_count(&self) -> usize {
        self.eigenvalues.iter().filter(|&&e| e < 0.0).count()
    }

    fn nearest_zero(&self) -> usize {
        (0..self.eigenvalues.len())
            .min_by(|&a, &b| self.eigenvalues[a].abs().total_cmp(&self.eigenvalues[b].abs()))
            .unwrap_or(0)
    }
}

fn sample(params: &ModelParams, disc: &Discretization, ldl: f64) -> Result<Sample> {
    let solution = radial_solution(&params.with_ldl(ldl), disc)?;
    let op = boundary_operator(&solution, Subspace::Even)?;
    let (values, vecs) = eigen_decomposition(&op.schur)?;
    let n = values.len();
    let mut eigenvalues = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for k in 0..n {
        // Complex pairs never change the count of negative real eigenvalues
        // through zero; they are recorded by real part only.
        eigenvalues.push(values[k].re);
        let v: Vec<f64> = (0..n).map(|i| vecs[(i, k)].re).collect();
        vectors.push(op.expand_boundary(&v));
    }
    Ok(Sample {
        solution,
        eigenvalues,
        vectors,
    })
}

/// Follows the radial branch over `[l_lo, l_hi]`, counting negative
/// eigenvalues of the boundary-condensed steady Jacobian (even
/// perturbations). A change in the count is bracketed by bisection to width
/// [`DETECTION_TOL`] and the crossing eigenvalue is then driven to zero by
/// the Illinois variant of regula falsi.
pub fn track_radial_branch(
    params: &ModelParams,
    disc: &Discretization,
    l_lo: f64,
    l_hi: f64,
    step: &StepControl,
) -> Result<RadialTrack> {
    if !(l_lo >= 0.0 && l_hi > l_lo) {
        return Err(Error::InvalidParams(format!("invalid L range [{l_lo}, {l_hi}]")));
    }
    // L = 0 is degenerate (every radius is steady), so tracking starts just above it.
    let start = if l_lo == 0.0 { step.initial.min(l_hi) } else { l_lo };
    let mut current = sample(params, disc, start)?;
    let mut l = start;
    let mut points = vec![BranchPoint::new("radial", current.solution.clone())];
    let mut detections = Vec::new();
    let mut ds = step.initial;
    let mut aborted = None;
    while l < l_hi {
        let next_l = (l + ds).min(l_hi);
        let next = match sample(params, disc, next_l) {
            Ok(s) => s,
            Err(e) => {
                ds *= 0.5;
                if ds < step.min {
                    aborted = Some(format!("step below {} at L = {l}: {e}", step.min));
                    break;
                }
                continue;
            }
        };
        if next.negative_count() != current.negative_count() {
            for (a, ca, b, cb) in isolate(params, disc, l, &current, next_l, &next)? {
                detections.push(polish(params, disc, a, &ca, b, &cb)?);
            }
        }
        l = next_l;
        points.push(BranchPoint::new("radial", next.solution.clone()));
        current = next;
        ds = (ds * step.growth).min(step.max);
    }
    detections.sort_by(|a, b| a.l_tilde.total_cmp(&b.l_tilde));
    Ok(RadialTrack {
        points,
        detections,
        aborted,
    })
}

type Bracket = (f64, Sample, f64, Sample);

/// Splits `[a, b]` into brackets of width at most the detection tolerance,
/// each containing one change of the negative count.
fn isolate(
    params: &ModelParams,
    disc: &Discretization,
    a: f64,
    sa: &Sample,
    b: f64,
    sb: &Sample,
) -> Result<Vec<Bracket>> {
    let mut stack = vec![(a, sa.clone(), b, sb.clone())];
    let mut out = Vec::new();
    while let Some((a, sa, b, sb)) = stack.pop() {
        let jump = sa.negative_count().abs_diff(sb.negative_count());
        if jump == 0 {
            continue;
        }
        if b - a <= DETECTION_TOL {
            out.push((a, sa, b, sb));
            continue;
        }
        let mid = 0.5 * (a + b);
        let sm = sample(params, disc, mid)?;
        stack.push((mid, sm.clone(), b, sb));
        stack.push((a, sa, mid, sm));
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(out)
}

fn polish(
    params: &ModelParams,
    disc: &Discretization,
    a: f64,
    sa: &Sample,
    b: f64,
    sb: &Sample,
) -> Result<DetectedBifurcation> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (sa.eigenvalues[sa.nearest_zero()], sb.eigenvalues[sb.nearest_zero()]);
    let mut best = if fa.abs() < fb.abs() { (a, sa.clone()) } else { (b, sb.clone()) };
    if fa * fb < 0.0 {
        for _ in 0..40 {
            let c = (a * fb - b * fa) / (fb - fa);
            let sc = sample(params, disc, c)?;
            let fc = sc.eigenvalues[sc.nearest_zero()];
            let done = fc.abs() < 1e-13 || (b - a).abs() < 1e-13 * b.abs();
            if fc.abs() <= best.1.eigenvalues[best.1.nearest_zero()].abs() {
                best = (c, sc);
            }
            if done {
                break;
            }
            if fc * fb < 0.0 {
                a = b;
                fa = fb;
            } else {
                fa *= 0.5;
            }
            b = c;
            fb = fc;
        }
    }
    let (l_tilde, s) = best;
    let k = s.nearest_zero();
    let mut kernel = s.vectors[k].clone();
    let scale = kernel.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let sign = if kernel[0] < 0.0 { -1.0 } else { 1.0 };
    kernel.iter_mut().for_each(|x| *x *= sign / scale);
    Ok(DetectedBifurcation {
        l_tilde,
        mode_estimate: dominant_mode(&kernel),
        smallest_eig_norm: s.eigenvalues[k].abs(),
        kernel,
        solution: s.solution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::bifurcation_point;

    #[test]
    fn detects_first_modes_in_order() {
        let p = ModelParams::reference();
        let disc = Discretization::new(40, 4);
        let track = track_radial_branch(&p, &disc, 0.0, 40.0, &StepControl::default()).unwrap();
        assert!(track.aborted.is_none());
        let modes: Vec<u32> = track.detections.iter().map(|d| d.mode_estimate).collect();
        assert_eq!(modes, vec![2, 3], "{:?}", track.detections.iter().map(|d| d.l_tilde).collect::<Vec<_>>());
        for d in &track.detections {
            let exact = bifurcation_point(&p, d.mode_estimate).unwrap().l_n;
            assert!((d.l_tilde - exact).abs() < 0.2 * exact);
            assert!(d.smallest_eig_norm < DETECTION_TOL);
        }
        assert!(track.points.iter().all(|pt| pt.projection == 0.0));
        assert!(track.points.windows(2).all(|w| w[0].ldl < w[1].ldl));
    }

    #[test]
    fn rejects_empty_range() {
        let p = ModelParams::reference();
        let disc = Discretization::new(8, 2);
        assert!(track_radial_branch(&p, &disc, 3.0, 3.0, &StepControl::default()).is_err());
    }
}
