//! Steady states of the full free-boundary problem and their linear stability.
//!
//! Unknowns are stacked as `[M (all nodes), P (all nodes), rho (one per ray)]`
//! with the ray-major node order of [`PolarGrid`]. Residual rows follow the
//! same layout: field equations per node, then one boundary-velocity row
//! `g_j = P_r (1 + rho_t^2/rho^2) - gamma rho_t kappa_t / rho^2` per ray
//! (`rho_t = d rho / d theta`), the scaled normal derivative of `P` along the
//! free boundary.

mod analysis;
mod jacobian;
mod newton;

pub use analysis::{
    boundary_operator, fourier_sector_spectrum, frechet_kernel_check, linearized_spectrum, BoundaryOperator, KernelCheck, Restriction,
    Spectrum,
};
pub use newton::{fields_for_curve, newton_solve, newton_solve_in, radial_solution, NewtonOptions};

pub(crate) use jacobian::ColoredJacobian;
pub(crate) use newton::newton_iterate;

use serde::{Deserialize, Serialize};

use crate::closed_form::{clearance_t, ModelParams};
use crate::error::{Error, Result};
use crate::polar_disc::{
    build_grid, curvature, laplacian_row, laplacian_row_fourth, periodic_first_derivative, solve_fields, AngularScheme, BoundaryCurve, FieldKind,
    PolarGrid, SteadyField,
};

/// Default Newton tolerance on the max-norm of the residual.
pub const DEFAULT_TOL: f64 = 1e-9;

/// How the clearance rate `T` is tied to `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clearance {
    /// `T = L tau_h` with `tau_h` chosen so that the discrete radial state has
    /// radius exactly `params.rho`.
    #[default]
    Discrete,
    /// `T` from the closed-form radial state at `params.rho`; the discrete
    /// radial radius then differs from `params.rho` by `O(h^2)`.
    ClosedForm,
}

/// Accuracy of the angular part of the Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AngularOrder {
    /// The nine-point stencil on neighbouring rays.
    Second,
    /// Richardson combination of the nine-point stencils with spacing
    /// `dtheta` and `2 dtheta` (see [`laplacian_row_fourth`]).
    #[default]
    Fourth,
}

/// Grid resolution and angular treatment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub m: usize,
    pub n_r: usize,
    #[serde(default)]
    pub scheme: AngularScheme,
    #[serde(default)]
    pub angular_order: AngularOrder,
    #[serde(default)]
    pub clearance: Clearance,
}

impl Discretization {
    pub fn new(m: usize, n_r: usize) -> Self {
        Self {
            m,
            n_r,
            scheme: AngularScheme::default(),
            angular_order: AngularOrder::default(),
            clearance: Clearance::default(),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.m * (self.n_r + 1)
    }

    pub fn n_unknowns(&self) -> usize {
        2 * self.n_nodes() + self.m
    }

    /// Same radial resolution on a single ray.
    pub fn single_ray(&self) -> Self {
        Self { m: 1, ..*self }
    }
}

/// Invariant subspaces in which Newton iterations and spectra may be restricted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subspace {
    Full,
    /// Reflection `theta -> -theta`: ray `j` mirrors ray `m - j`.
    Even,
}

/// Index bookkeeping for a subspace of the stacked unknown vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SubspaceMap {
    pub m: usize,
    pub n_r: usize,
    pub kind: Subspace,
}

impl SubspaceMap {
    pub fn new(disc: &Discretization, kind: Subspace) -> Self {
        Self {
            m: disc.m,
            n_r: disc.n_r,
            kind,
        }
    }

    /// Independent rays.
    pub fn rays(&self) -> usize {
        match self.kind {
            Subspace::Full => self.m,
            Subspace::Even => self.m / 2 + 1,
        }
        .min(self.m)
    }

    pub fn per_field(&self) -> usize {
        self.rays() * (self.n_r + 1)
    }

    pub fn len(&self) -> usize {
        2 * self.per_field() + self.rays()
    }

    /// Number of field unknowns (the boundary unknowns follow them).
    pub fn n_field(&self) -> usize {
        2 * self.per_field()
    }

    /// Ray of the subspace that full ray `j` copies.
    pub fn source_ray(&self, j: usize) -> usize {
        match self.kind {
            Subspace::Full => j,
            Subspace::Even => j.min(self.m - j),
        }
    }

    /// Reflection multiplicity of reduced ray `k` (for full-grid inner products).
    pub fn weight(&self, k: usize) -> f64 {
        match self.kind {
            Subspace::Full => 1.0,
            Subspace::Even => {
                if k == 0 || 2 * k == self.m {
                    1.0
                } else {
                    2.0
                }
            }
        }
    }

    fn full_nodes(&self) -> usize {
        self.m * (self.n_r + 1)
    }

    pub fn expand(&self, y: &[f64]) -> Vec<f64> {
        if self.kind == Subspace::Full {
            return y.to_vec();
        }
        let (nn, np, pf) = (self.n_r + 1, self.full_nodes(), self.per_field());
        let mut x = vec![0.0; 2 * np + self.m];
        for j in 0..self.m {
            let k = self.source_ray(j);
            for i in 0..nn {
                x[j * nn + i] = y[k * nn + i];
                x[np + j * nn + i] = y[pf + k * nn + i];
            }
            x[2 * np + j] = y[2 * pf + k];
        }
        x
    }

    /// Keeps the entries (or residual rows) of rays `0..rays()`.
    pub fn restrict(&self, x: &[f64]) -> Vec<f64> {
        if self.kind == Subspace::Full {
            return x.to_vec();
        }
        let (nn, np, pf) = (self.n_r + 1, self.full_nodes(), self.per_field());
        let mut y = vec![0.0; self.len()];
        y[..pf].copy_from_slice(&x[..pf]);
        y[pf..2 * pf].copy_from_slice(&x[np..np + pf]);
        y[2 * pf..].copy_from_slice(&x[2 * np..2 * np + self.rays()]);
        let _ = nn;
        y
    }

    /// Full-vector index to reduced index, if the entry belongs to a kept ray.
    pub fn reduce_index(&self, full: usize) -> Option<usize> {
        if self.kind == Subspace::Full {
            return Some(full);
        }
        let (nn, np, pf) = (self.n_r + 1, self.full_nodes(), self.per_field());
        let rays = self.rays();
        if full < np {
            (full / nn < rays).then_some(full)
        } else if full < 2 * np {
            let local = full - np;
            (local / nn < rays).then_some(pf + local)
        } else {
            let j = full - 2 * np;
            (j < rays).then_some(2 * pf + j)
        }
    }

    /// Full-vector indices that copy reduced index `k`.
    pub fn preimage(&self, k: usize) -> Vec<usize> {
        if self.kind == Subspace::Full {
            return vec![k];
        }
        let (nn, np, pf) = (self.n_r + 1, self.full_nodes(), self.per_field());
        let (base_full, ray, i) = if k < pf {
            (0, k / nn, k % nn)
        } else if k < 2 * pf {
            (np, (k - pf) / nn, (k - pf) % nn)
        } else {
            (2 * np, k - 2 * pf, usize::MAX)
        };
        let mut rays = vec![ray];
        let mirror = (self.m - ray) % self.m;
        if mirror != ray {
            rays.push(mirror);
        }
        rays.into_iter()
            .map(|r| if i == usize::MAX { base_full + r } else { base_full + r * nn + i })
            .collect()
    }
}

/// Discrete free-boundary problem at fixed parameters. The clearance rate is
/// `T = L * tau`, with `tau` the rate per unit `L` that makes `params.rho`
/// the radius of the radial steady state (see [`Clearance`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FbProblem {
    pub params: ModelParams,
    pub disc: Discretization,
    pub t: f64,
    tau: f64,
}

impl FbProblem {
    pub fn new(params: ModelParams, disc: Discretization) -> Result<Self> {
        params.validate()?;
        if !(disc.m == 1 || (disc.m >= 8 && disc.m.is_multiple_of(2))) || disc.n_r < 2 {
            return Err(Error::InvalidGeometry(format!(
                "unsupported grid m = {}, n_r = {}",
                disc.m, disc.n_r
            )));
        }
        let tau = match disc.clearance {
            Clearance::ClosedForm => clearance_t(&params.with_ldl(1.0))?,
            Clearance::Discrete => discrete_clearance_rate(&params, disc.n_r, disc.scheme)?,
        };
        Ok(Self {
            params,
            disc,
            t: tau * params.ldl,
            tau,
        })
    }

    pub fn with_ldl(&self, ldl: f64) -> Self {
        Self {
            params: self.params.with_ldl(ldl),
            t: self.tau * ldl,
            ..*self
        }
    }

    pub fn clearance_per_ldl(&self) -> f64 {
        self.tau
    }

    pub fn n_nodes(&self) -> usize {
        self.disc.n_nodes()
    }

    /// Steady residual (boundary rows impose zero normal velocity).
    pub fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.evaluate(x, false)
    }

    /// Right-hand side of the semi-discrete evolution: `dM/dt` at the moving
    /// nodes `i >= 1`, `d rho/dt = -g`, and the algebraic rows (Dirichlet
    /// rows for `M`, all `P` rows) unchanged.
    pub fn time_rhs(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.evaluate(x, true)
    }

    /// Partial derivative of the steady residual with respect to `L`.
    pub fn residual_dl(&self, x: &[f64]) -> Vec<f64> {
        let np = self.n_nodes();
        let nn = self.disc.n_r + 1;
        let mut d = vec![0.0; x.len()];
        for j in 0..self.disc.m {
            for i in 1..nn {
                let k = j * nn + i;
                d[np + k] = x[k] - self.tau;
            }
        }
        d
    }

    pub fn grid_for(&self, rho: &[f64]) -> Result<PolarGrid> {
        let curve = BoundaryCurve::new(rho.to_vec())?;
        build_grid(&curve, self.params.outer_radius, self.disc.m, self.disc.n_r)
    }

    fn evaluate(&self, x: &[f64], moving: bool) -> Result<Vec<f64>> {
        let (m, n_r) = (self.disc.m, self.disc.n_r);
        let np = self.n_nodes();
        if x.len() != 2 * np + m {
            return Err(Error::InvalidGeometry(format!(
                "state has {} entries, expected {}",
                x.len(),
                2 * np + m
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGeometry("state contains non-finite values".into()));
        }
        let rho = &x[2 * np..];
        let grid = self.grid_for(rho)?;
        let curve = BoundaryCurve::new(rho.to_vec())?;
        let kappa = curvature(&curve);
        let dtheta = grid.dtheta();
        let rho_t = periodic_first_derivative(rho, dtheta);
        let kappa_t = periodic_first_derivative(&kappa, dtheta);
        let (mv, pv) = (&x[..np], &x[np..2 * np]);
        let p = &self.params;
        let scheme = self.disc.scheme;
        let fourth = self.disc.angular_order == AngularOrder::Fourth;
        let lap = |i: usize, j: usize, robin: f64, v: &[f64]| {
            if fourth {
                laplacian_row_fourth(&grid, i, j, scheme, robin).apply(v)
            } else {
                laplacian_row(&grid, i, j, scheme, robin).apply(v)
            }
        };
        let mut out = vec![0.0; x.len()];
        for j in 0..m {
            let h = grid.h(j);
            let base = grid.index(0, j);
            let p_r = boundary_flux(|i| pv[base + i], n_r, h);
            let r0 = rho[j];
            let g = p_r * (1.0 + rho_t[j] * rho_t[j] / (r0 * r0)) - p.gamma * rho_t[j] * kappa_t[j] / (r0 * r0);
            out[base] = mv[base] - 1.0;
            out[np + base] = pv[base] - p.gamma * kappa[j];
            for i in 1..=n_r {
                let k = base + i;
                let lap_m = lap(i, j, 1.0, mv);
                let lap_p = lap(i, j, 0.0, pv);
                let mut fm = p.diffusion * lap_m - p.hdl * mv[k];
                if moving && i < n_r {
                    let m_r = (mv[k + 1] - mv[k - 1]) / (2.0 * h);
                    fm -= (1.0 - i as f64 / n_r as f64) * m_r * g;
                }
                out[k] = fm;
                out[np + k] = lap_p + p.ldl * mv[k] - self.t;
            }
            out[2 * np + j] = if moving { -g } else { g };
        }
        Ok(out)
    }
}

/// One-sided `P_r` at the free boundary from the first nodes of a ray: the
/// five-point fourth-order formula, or the widest lower-order one that fits
/// on `n_r` intervals.
fn boundary_flux(p: impl Fn(usize) -> f64, n_r: usize, h: f64) -> f64 {
    match n_r {
        0 | 1 => unreachable!("grids have at least two intervals"),
        2 => (-3.0 * p(0) + 4.0 * p(1) - p(2)) / (2.0 * h),
        3 => (-11.0 * p(0) + 18.0 * p(1) - 9.0 * p(2) + 2.0 * p(3)) / (6.0 * h),
        _ => (-25.0 * p(0) + 48.0 * p(1) - 36.0 * p(2) + 16.0 * p(3) - 3.0 * p(4)) / (12.0 * h),
    }
}

/// Clearance rate per unit `L` for which the discrete radial problem on `n_r`
/// intervals is steady at radius `params.rho`. The boundary flux is affine in
/// `T`, so two field solves determine it.
pub fn discrete_clearance_rate(params: &ModelParams, n_r: usize, scheme: AngularScheme) -> Result<f64> {
    let unit = params.with_ldl(1.0);
    let curve = BoundaryCurve::circle(params.rho, 1)?;
    let grid = build_grid(&curve, params.outer_radius, 1, n_r)?;
    let h = grid.h(0);
    let flux = |t: f64| -> Result<f64> {
        let (_, p) = solve_fields(&grid, &unit, t, scheme)?;
        Ok(boundary_flux(|i| p.get(i, 0), n_r, h))
    };
    let (g0, g1) = (flux(0.0)?, flux(1.0)?);
    if g1 == g0 {
        return Err(Error::Singular("boundary flux does not depend on T".into()));
    }
    Ok(-g0 / (g1 - g0))
}

/// A discrete steady state (or any state) of the free-boundary problem.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeBoundarySolution {
    /// Model parameters; `params.rho` is the reference radius fixing `T`.
    pub params: ModelParams,
    pub disc: Discretization,
    /// Clearance rate used by the pressure equation.
    pub t: f64,
    pub curve: BoundaryCurve,
    pub m_field: SteadyField,
    pub p_field: SteadyField,
    pub residual_norm: f64,
}

impl FreeBoundarySolution {
    pub fn problem(&self) -> Result<FbProblem> {
        FbProblem::new(self.params, self.disc)
    }

    pub fn grid(&self) -> Result<PolarGrid> {
        build_grid(&self.curve, self.params.outer_radius, self.disc.m, self.disc.n_r)
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.disc.n_unknowns());
        x.extend_from_slice(self.m_field.values());
        x.extend_from_slice(self.p_field.values());
        x.extend_from_slice(self.curve.values());
        x
    }

    pub(crate) fn from_vector(problem: &FbProblem, x: &[f64], residual_norm: f64) -> Result<Self> {
        let np = problem.n_nodes();
        let curve = BoundaryCurve::new(x[2 * np..].to_vec())?;
        let grid = build_grid(&curve, problem.params.outer_radius, problem.disc.m, problem.disc.n_r)?;
        Ok(Self {
            params: problem.params,
            disc: problem.disc,
            t: problem.t,
            m_field: SteadyField::new(FieldKind::M, &grid, x[..np].to_vec())?,
            p_field: SteadyField::new(FieldKind::P, &grid, x[np..2 * np].to_vec())?,
            curve,
            residual_norm,
        })
    }

    /// Steady residual of this state.
    pub fn residual(&self) -> Result<Vec<f64>> {
        self.problem()?.residual(&self.to_vector())
    }

    /// The state rotated by `shift` grid steps.
    pub fn rotated(&self, shift: usize) -> Result<Self> {
        let m = self.disc.m;
        let nn = self.disc.n_r + 1;
        let x = self.to_vector();
        let np = m * nn;
        let mut y = vec![0.0; x.len()];
        for j in 0..m {
            let src = (j + m - shift % m) % m;
            y[j * nn..(j + 1) * nn].copy_from_slice(&x[src * nn..(src + 1) * nn]);
            y[np + j * nn..np + (j + 1) * nn].copy_from_slice(&x[np + src * nn..np + (src + 1) * nn]);
            y[2 * np + j] = x[2 * np + src];
        }
        Self::from_vector(&self.problem()?, &y, self.residual_norm)
    }
}

/// Steady residual of the given curve and fields.
pub fn residual(
    curve: &BoundaryCurve,
    m_field: &SteadyField,
    p_field: &SteadyField,
    params: &ModelParams,
    scheme: AngularScheme,
) -> Result<Vec<f64>> {
    let disc = Discretization {
        scheme,
        ..Discretization::new(m_field.m, m_field.n_r)
    };
    if curve.len() != disc.m || p_field.m != disc.m || p_field.n_r != disc.n_r {
        return Err(Error::InvalidGeometry("curve and fields have inconsistent sizes".into()));
    }
    let problem = FbProblem::new(*params, disc)?;
    let mut x = m_field.values().to_vec();
    x.extend_from_slice(p_field.values());
    x.extend_from_slice(curve.values());
    problem.residual(&x)
}

pub(crate) fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::RadialSteadyState;
    use crate::polar_disc::PolarGrid;

    fn closed_form_state(params: &ModelParams, m: usize, n_r: usize) -> (PolarGrid, Vec<f64>) {
        let exact = RadialSteadyState::new(*params).unwrap();
        let curve = BoundaryCurve::circle(params.rho, m).unwrap();
        let grid = build_grid(&curve, params.outer_radius, m, n_r).unwrap();
        let np = grid.n_nodes();
        let mut x = vec![0.0; 2 * np + m];
        for j in 0..m {
            for i in 0..=n_r {
                let v = exact.eval(grid.r(i, j)).unwrap();
                x[grid.index(i, j)] = v.m;
                x[np + grid.index(i, j)] = v.p;
            }
            x[2 * np + j] = params.rho;
        }
        (grid, x)
    }

    #[test]
    fn closed_form_residual_is_second_order_away_from_outer_rows() {
        let p = ModelParams::reference();
        let norms: Vec<(f64, f64)> = [8usize, 16, 32]
            .iter()
            .map(|&n_r| {
                let problem = FbProblem::new(p, Discretization::new(16, n_r)).unwrap();
                let (grid, x) = closed_form_state(&p, 16, n_r);
                let r = problem.residual(&x).unwrap();
                let np = grid.n_nodes();
                let (mut inner, mut outer) = (0.0f64, 0.0f64);
                for (k, v) in r.iter().enumerate() {
                    let on_outer = k < 2 * np && k % (n_r + 1) == n_r;
                    if on_outer {
                        outer = outer.max(v.abs());
                    } else {
                        inner = inner.max(v.abs());
                    }
                }
                (inner, outer)
            })
            .collect();
        for w in norms.windows(2) {
            assert!(w[0].0 / w[1].0 > 3.5, "{norms:?}");
            assert!(w[0].1 / w[1].1 > 1.8, "{norms:?}");
        }
    }

    #[test]
    fn zero_ldl_constant_pressure_solves_pressure_block() {
        let p = ModelParams::reference().with_ldl(0.0);
        let problem = FbProblem::new(p, Discretization::new(16, 6)).unwrap();
        let (_, mut x) = closed_form_state(&p, 16, 6);
        let np = problem.n_nodes();
        for v in &mut x[np..2 * np] {
            *v = 1.25;
        }
        let r = problem.residual(&x).unwrap();
        assert!(max_norm(&r[np..]) < 1e-12);
    }

    #[test]
    fn even_subspace_roundtrip() {
        let disc = Discretization::new(8, 3);
        let map = SubspaceMap::new(&disc, Subspace::Even);
        assert_eq!(map.rays(), 5);
        let y: Vec<f64> = (0..map.len()).map(|k| k as f64).collect();
        let x = map.expand(&y);
        assert_eq!(map.restrict(&x), y);
        for (k, _) in y.iter().enumerate() {
            for f in map.preimage(k) {
                assert_eq!(x[f], y[k]);
                assert_eq!(map.reduce_index(f).unwrap_or(k), k);
            }
        }
    }

    #[test]
    fn residual_rejects_geometry_violation() {
        let p = ModelParams::reference();
        let problem = FbProblem::new(p, Discretization::new(8, 2)).unwrap();
        let (_, mut x) = closed_form_state(&p, 8, 2);
        let np = problem.n_nodes();
        x[2 * np + 3] = 2.5;
        assert!(matches!(problem.residual(&x), Err(Error::InvalidGeometry(_))));
    }
}
