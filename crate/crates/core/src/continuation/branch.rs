//! Branch switching at a detected bifurcation and arclength continuation of
//! non-radial branches. Both work on reflection-even states with `L` as an
//! extra unknown closed by one scalar constraint.

use super::{projection, BranchPoint, DetectedBifurcation, StepControl};
use crate::error::{Error, Result};
use crate::fb_solver::{
    boundary_operator, linearized_spectrum, newton_iterate, ColoredJacobian, FbProblem, FreeBoundarySolution,
    NewtonOptions, Restriction, Subspace, SubspaceMap,
};
use crate::linalg::{SparseLu, TripletMatrix};

/// Options for [`tangent_cone_switch`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchOptions {
    /// Kernel amplitude of the first guess; defaults to `1e-2` times the radius.
    pub amplitude: Option<f64>,
    /// Number of amplitude doublings after a failed correction.
    pub retries: usize,
    pub newton: NewtonOptions,
}

impl Default for SwitchOptions {
    fn default() -> Self {
        Self {
            amplitude: None,
            retries: 3,
            newton: NewtonOptions::default(),
        }
    }
}

/// Steady problem on the even subspace with `L` appended to the unknowns.
struct Augmented {
    problem: FbProblem,
    map: SubspaceMap,
    cj: ColoredJacobian,
    n: usize,
}

impl Augmented {
    fn new(solution: &FreeBoundarySolution) -> Result<Self> {
        let problem = solution.problem()?;
        let map = SubspaceMap::new(&problem.disc, Subspace::Even);
        let cj = ColoredJacobian::for_problem(&problem.disc, &map);
        Ok(Self {
            n: map.len(),
            problem,
            map,
            cj,
        })
    }

    fn state(&self, s: &FreeBoundarySolution) -> Vec<f64> {
        let mut z = self.map.restrict(&s.to_vector());
        z.push(s.params.ldl);
        z
    }

    fn residual(&self, z: &[f64]) -> Result<Vec<f64>> {
        let p = self.problem.with_ldl(z[self.n]);
        Ok(self.map.restrict(&p.residual(&self.map.expand(&z[..self.n]))?))
    }

    /// Jacobian of the steady rows with respect to `(y, L)`, plus `row` as the
    /// last row.
    fn jacobian(&self, z: &[f64], row: &[(usize, f64)]) -> Result<TripletMatrix> {
        let p = self.problem.with_ldl(z[self.n]);
        let f = |y: &[f64]| p.residual(&self.map.expand(y)).map(|r| self.map.restrict(&r));
        let jy = self.cj.jacobian(f, &z[..self.n])?;
        let dl = self.map.restrict(&p.residual_dl(&self.map.expand(&z[..self.n])));
        let mut j = TripletMatrix::new(self.n + 1, self.n + 1);
        for (r, c, v) in jy.iter() {
            j.push(r, c, v);
        }
        for (r, v) in dl.iter().enumerate() {
            j.push(r, self.n, *v);
        }
        for &(c, v) in row {
            j.push(self.n, c, v);
        }
        Ok(j)
    }

    /// Weighted metric on `(rho, L)`: mean square over every ray for the
    /// radii, unit weight for `L`, zero for the fields.
    fn metric(&self) -> Vec<(usize, f64)> {
        let base = self.map.n_field();
        let m = self.map.m as f64;
        let mut w: Vec<(usize, f64)> = (0..self.map.rays()).map(|k| (base + k, self.map.weight(k) / m)).collect();
        w.push((self.n, 1.0));
        w
    }

    fn solution(&self, z: &[f64], residual_norm: f64) -> Result<FreeBoundarySolution> {
        let p = self.problem.with_ldl(z[self.n]);
        FreeBoundarySolution::from_vector(&p, &self.map.expand(&z[..self.n]), residual_norm)
    }
}

/// Corrects `radial + amplitude * kernel` onto the branch leaving the radial
/// branch at `at`, with the kernel coefficient of the boundary held at
/// `direction * amplitude` and `L` free. The amplitude is doubled after a
/// failed correction, up to `opts.retries` times.
pub fn tangent_cone_switch(
    at: &DetectedBifurcation,
    direction: f64,
    opts: &SwitchOptions,
) -> Result<FreeBoundarySolution> {
    let aug = Augmented::new(&at.solution)?;
    let op = boundary_operator(&at.solution, Subspace::Even)?;
    let rays = aug.map.rays();
    let phi: Vec<f64> = at.kernel[..rays].to_vec();
    let dir = aug.map.restrict(&op.expand_direction(&phi));
    let base = aug.map.n_field();
    let norm: f64 = (0..rays).map(|k| aug.map.weight(k) * phi[k] * phi[k]).sum();
    let row: Vec<(usize, f64)> = (0..rays).map(|k| (base + k, aug.map.weight(k) * phi[k] / norm)).collect();
    let z_star = aug.state(&at.solution);
    let sign = if direction < 0.0 { -1.0 } else { 1.0 };
    let mut amplitude = opts.amplitude.unwrap_or(1e-2 * at.solution.curve.values()[0]);
    let mut last = String::new();
    for _ in 0..=opts.retries {
        let target = sign * amplitude;
        let f = |z: &[f64]| -> Result<Vec<f64>> {
            let mut r = aug.residual(z)?;
            let c: f64 = row.iter().map(|&(k, w)| w * (z[k] - z_star[k])).sum();
            r.push(c - target);
            Ok(r)
        };
        let mut z0 = z_star.clone();
        for (k, d) in dir.iter().enumerate() {
            z0[k] += target * d;
        }
        match newton_iterate(f, |z| aug.jacobian(z, &row), &z0, &opts.newton) {
            Ok(out) if out.converged => {
                let s = aug.solution(&out.x, out.residual_norm)?;
                if projection(&s.curve) > 1e-8 {
                    return Ok(s);
                }
                last = "correction collapsed onto the radial branch".into();
            }
            Ok(out) => last = format!("Newton stalled at residual {:.3e}", out.residual_norm),
            Err(e) => last = e.to_string(),
        }
        amplitude *= 2.0;
    }
    Err(Error::Continuation(format!(
        "branch switch at L = {} (mode {}) failed: {last}",
        at.l_tilde, at.mode_estimate
    )))
}

/// Options for [`continue_branch`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationOptions {
    pub steps: usize,
    /// `+1` continues towards growing boundary deformation, `-1` towards
    /// shrinking deformation.
    pub direction: f64,
    pub step: StepControl,
    pub newton: NewtonOptions,
    /// Compute the full-spectrum `re(lambda_max)` at every k-th point (0 = never).
    pub stability_every: usize,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            steps: 12,
            direction: 1.0,
            step: StepControl::arclength(),
            newton: NewtonOptions {
                tol: 1e-10,
                max_iter: 12,
                ..NewtonOptions::default()
            },
            stability_every: 0,
        }
    }
}

/// Points produced by [`continue_branch`], starting with the start point.
#[derive(Debug, Clone)]
pub struct ContinuationRun {
    pub points: Vec<BranchPoint>,
    pub aborted: Option<String>,
}

/// Arclength continuation in `(rho, L)`. Each new point lies at distance `ds`
/// from the previous one in the weighted metric (a sphere rather than a
/// tangent hyperplane), so a reversed run with equal steps revisits the
/// same points.
pub fn continue_branch(start: &BranchPoint, opts: &ContinuationOptions) -> Result<ContinuationRun> {
    let aug = Augmented::new(&start.solution)?;
    let metric = aug.metric();
    let n1 = aug.n + 1;
    let mut z = aug.state(&start.solution);
    let mut points = vec![start.clone()];
    if opts.stability_every > 0 {
        points[0].re_lambda_max = Some(linearized_spectrum(&start.solution, Restriction::Full)?.re_max());
    }

    // Orientation: the first tangent has positive component along the
    // current deformation of the boundary.
    let base = aug.map.n_field();
    let rays = aug.map.rays();
    let mean: f64 = (0..rays).map(|k| aug.map.weight(k) * z[base + k]).sum::<f64>() / aug.map.m as f64;
    let deformation: Vec<(usize, f64)> = (0..rays)
        .map(|k| (base + k, aug.map.weight(k) * (z[base + k] - mean)))
        .collect();
    let sign = if opts.direction < 0.0 { -1.0 } else { 1.0 };
    let mut tangent = tangent_at(&aug, &z, &deformation, &metric)?;
    tangent.iter_mut().for_each(|t| *t *= sign);

    let mut ds = opts.step.initial;
    let mut aborted = None;
    while points.len() <= opts.steps {
        let prev = z.clone();
        let f = |y: &[f64]| -> Result<Vec<f64>> {
            let mut r = aug.residual(y)?;
            let d2: f64 = metric.iter().map(|&(k, w)| w * (y[k] - prev[k]).powi(2)).sum();
            r.push(d2 - ds * ds);
            Ok(r)
        };
        let jac = |y: &[f64]| {
            let row: Vec<(usize, f64)> = metric.iter().map(|&(k, w)| (k, 2.0 * w * (y[k] - prev[k]))).collect();
            aug.jacobian(y, &row)
        };
        let guess: Vec<f64> = (0..n1).map(|k| prev[k] + ds * tangent[k]).collect();
        let outcome = newton_iterate(f, jac, &guess, &opts.newton);
        let forward = |y: &[f64]| metric.iter().map(|&(k, w)| w * (y[k] - prev[k]) * tangent[k]).sum::<f64>() > 0.0;
        match outcome {
            Ok(out) if out.converged && forward(&out.x) => {
                z = out.x;
                let solution = aug.solution(&z, out.residual_norm)?;
                let mut point = BranchPoint::new(start.branch_id.clone(), solution);
                if opts.stability_every > 0 && (points.len() % opts.stability_every == 0) {
                    point.re_lambda_max = Some(linearized_spectrum(&point.solution, Restriction::Full)?.re_max());
                }
                points.push(point);
                let row: Vec<(usize, f64)> = metric.iter().map(|&(k, w)| (k, w * tangent[k])).collect();
                tangent = tangent_at(&aug, &z, &row, &metric)?;
                if out.iterations <= 3 {
                    ds = (ds * opts.step.growth).min(opts.step.max);
                }
            }
            _ => {
                ds *= 0.5;
                if ds < opts.step.min {
                    aborted = Some(format!("arclength step below {} after {} points", opts.step.min, points.len()));
                    break;
                }
            }
        }
    }
    Ok(ContinuationRun { points, aborted })
}

/// Unit tangent of the branch at `z`, normalised so that `row . t > 0`.
fn tangent_at(aug: &Augmented, z: &[f64], row: &[(usize, f64)], metric: &[(usize, f64)]) -> Result<Vec<f64>> {
    let j = aug.jacobian(z, row)?;
    let mut rhs = vec![0.0; aug.n + 1];
    rhs[aug.n] = 1.0;
    let mut t = SparseLu::factor(&j)?.solve(&rhs)?;
    let norm = metric.iter().map(|&(k, w)| w * t[k] * t[k]).sum::<f64>().sqrt();
    t.iter_mut().for_each(|v| *v /= norm);
    Ok(t)
}
