//! Damped Newton iteration and the radially symmetric branch.

use super::{
    boundary_operator, max_norm, ColoredJacobian, Discretization, FbProblem, FreeBoundarySolution, Subspace,
    SubspaceMap, DEFAULT_TOL,
};
use crate::closed_form::ModelParams;
use crate::error::{Error, Result};
use crate::linalg::{smallest_singular, SparseLu, TripletMatrix};
use crate::polar_disc::{build_grid, solve_fields, BoundaryCurve};

/// Newton stopping rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Max-norm residual tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Smallest step fraction tried by the backtracking line search.
    pub min_damping: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: 50,
            min_damping: 1.0 / 64.0,
        }
    }
}

/// Result of a Newton run, converged or not.
#[derive(Debug, Clone)]
pub(crate) struct NewtonOutcome {
    pub x: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    #[cfg_attr(not(test), allow(dead_code))]
    pub history: Vec<f64>,
    pub converged: bool,
}

/// Newton's method with backtracking on the max-norm of the residual.
pub(crate) fn newton_iterate<F, J>(f: F, jac: J, x0: &[f64], opts: &NewtonOptions) -> Result<NewtonOutcome>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
    J: Fn(&[f64]) -> Result<TripletMatrix>,
{
    let mut x = x0.to_vec();
    let mut r = f(&x)?;
    let mut norm = max_norm(&r);
    let mut history = vec![norm];
    for it in 0..opts.max_iter {
        if norm < opts.tol {
            return Ok(NewtonOutcome {
                x,
                residual_norm: norm,
                iterations: it,
                history,
                converged: true,
            });
        }
        let lu = match SparseLu::factor(&jac(&x)?) {
            Ok(lu) => lu,
            Err(_) => break,
        };
        let dx = match lu.solve(&r) {
            Ok(dx) => dx,
            Err(_) => break,
        };
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha >= opts.min_damping {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a - alpha * d).collect();
            if let Ok(rt) = f(&trial) {
                let nt = max_norm(&rt);
                if nt.is_finite() && nt < norm {
                    x = trial;
                    r = rt;
                    norm = nt;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        history.push(norm);
        if !accepted {
            break;
        }
    }
    Ok(NewtonOutcome {
        converged: norm < opts.tol,
        iterations: history.len() - 1,
        x,
        residual_norm: norm,
        history,
    })
}

/// Newton on the full grid.
pub fn newton_solve(initial: &FreeBoundarySolution, opts: &NewtonOptions) -> Result<FreeBoundarySolution> {
    newton_solve_in(initial, Subspace::Full, opts)
}

/// Newton restricted to an invariant subspace. The initial state is projected
/// onto the subspace first.
pub fn newton_solve_in(
    initial: &FreeBoundarySolution,
    subspace: Subspace,
    opts: &NewtonOptions,
) -> Result<FreeBoundarySolution> {
    let problem = initial.problem()?;
    let map = SubspaceMap::new(&problem.disc, subspace);
    let cj = ColoredJacobian::for_problem(&problem.disc, &map);
    let f = |y: &[f64]| problem.residual(&map.expand(y)).map(|r| map.restrict(&r));
    let y0 = map.restrict(&initial.to_vector());
    let out = newton_iterate(f, |y| cj.jacobian(f, y), &y0, opts)?;
    let x = map.expand(&out.x);
    if out.converged {
        let norm = max_norm(&problem.residual(&x)?);
        return FreeBoundarySolution::from_vector(&problem, &x, norm);
    }
    let smallest = FreeBoundarySolution::from_vector(&problem, &x, out.residual_norm)
        .and_then(|s| boundary_operator(&s, subspace))
        .and_then(|op| smallest_singular(&op.schur))
        .ok()
        .map(|(s, _)| s);
    Err(Error::NewtonDiverged {
        iterations: out.iterations,
        residual: out.residual_norm,
        smallest_singular_value: smallest,
    })
}

/// Discrete radially symmetric steady state at `params.ldl`, solved on one
/// ray and copied to every ray. At `L = 0` every radius is steady; the
/// reference radius `params.rho` is returned.
pub fn radial_solution(params: &ModelParams, disc: &Discretization) -> Result<FreeBoundarySolution> {
    let single = FbProblem::new(*params, disc.single_ray())?;
    let curve = BoundaryCurve::circle(params.rho, 1)?;
    let grid = build_grid(&curve, params.outer_radius, 1, disc.n_r)?;
    let (mf, pf) = solve_fields(&grid, params, single.t, disc.scheme)?;
    let mut x: Vec<f64> = mf.values().to_vec();
    x.extend_from_slice(pf.values());
    x.push(params.rho);
    if params.ldl != 0.0 {
        let cj = ColoredJacobian::for_problem(&single.disc, &SubspaceMap::new(&single.disc, Subspace::Full));
        let f = |y: &[f64]| single.residual(y);
        let out = newton_iterate(f, |y| cj.jacobian(f, y), &x, &NewtonOptions::default())?;
        if !out.converged {
            return Err(Error::NewtonDiverged {
                iterations: out.iterations,
                residual: out.residual_norm,
                smallest_singular_value: None,
            });
        }
        x = out.x;
    }
    replicate(params, disc, &x)
}

fn replicate(params: &ModelParams, disc: &Discretization, ray: &[f64]) -> Result<FreeBoundarySolution> {
    let problem = FbProblem::new(*params, *disc)?;
    let nn = disc.n_r + 1;
    let np = problem.n_nodes();
    let mut x = vec![0.0; disc.n_unknowns()];
    for j in 0..disc.m {
        x[j * nn..(j + 1) * nn].copy_from_slice(&ray[..nn]);
        x[np + j * nn..np + (j + 1) * nn].copy_from_slice(&ray[nn..2 * nn]);
        x[2 * np + j] = ray[2 * nn];
    }
    let norm = max_norm(&problem.residual(&x)?);
    FreeBoundarySolution::from_vector(&problem, &x, norm)
}

/// Fields solving the interior and boundary equations for a prescribed curve
/// (the boundary-velocity rows are left unsatisfied).
pub fn fields_for_curve(problem: &FbProblem, curve: &BoundaryCurve) -> Result<FreeBoundarySolution> {
    let grid = build_grid(curve, problem.params.outer_radius, problem.disc.m, problem.disc.n_r)?;
    let np = grid.n_nodes();
    let mut x = vec![0.0; problem.disc.n_unknowns()];
    x[..np].fill(1.0);
    x[2 * np..].copy_from_slice(curve.values());
    let n_f = 2 * np;
    let map = SubspaceMap::new(&problem.disc, Subspace::Full);
    let cj = ColoredJacobian::for_problem(&problem.disc, &map);
    let jac = cj.jacobian(|y| problem.residual(y), &x)?;
    let mut a = TripletMatrix::new(n_f, n_f);
    for (r, c, v) in jac.iter() {
        if r < n_f && c < n_f {
            a.push(r, c, v);
        }
    }
    let r0 = problem.residual(&x)?;
    let dx = SparseLu::factor(&a)?.solve(&r0[..n_f])?;
    for k in 0..n_f {
        x[k] -= dx[k];
    }
    let norm = max_norm(&problem.residual(&x)?[..n_f]);
    FreeBoundarySolution::from_vector(problem, &x, norm)
}
