use super::curvature::curvature_of;
use super::{build_grid, laplacian_row, AngularScheme, BoundaryCurve, FieldKind, PolarGrid, SteadyField};
use crate::closed_form::{clearance_t, ModelParams, RadialSteadyState};
use crate::error::{Error, Result};
use crate::linalg::{SparseLu, TripletMatrix};

/// Sparse system `A x = b` for one field.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: TripletMatrix,
    pub rhs: Vec<f64>,
}

impl LinearSystem {
    pub fn solve(&self) -> Result<Vec<f64>> {
        SparseLu::factor(&self.matrix)?.solve(&self.rhs)
    }
}

/// Assembles the linear system for `M` (`D Lap M - H M = 0`, `M = 1` on the
/// free boundary, `M_r + M = 0` at `R`) or for `P` (`Lap P = T - L M`,
/// `P = gamma kappa` on the free boundary, `P_r = 0` at `R`), using the
/// default angular scheme. `m_field` is required for `P`.
pub fn assemble_operator(
    grid: &PolarGrid,
    params: &ModelParams,
    kind: FieldKind,
    m_field: Option<&SteadyField>,
    t: f64,
) -> Result<LinearSystem> {
    assemble_with(grid, params, kind, m_field, t, AngularScheme::default())
}

pub fn assemble_with(
    grid: &PolarGrid,
    params: &ModelParams,
    kind: FieldKind,
    m_field: Option<&SteadyField>,
    t: f64,
    scheme: AngularScheme,
) -> Result<LinearSystem> {
    let n = grid.n_nodes();
    let mut a = TripletMatrix::new(n, n);
    let mut b = vec![0.0; n];
    let kappa = curvature_of(grid.rho(), grid.dtheta());
    let m_values = match (kind, m_field) {
        (FieldKind::P, Some(f)) => {
            if f.m != grid.m || f.n_r != grid.n_r {
                return Err(Error::InvalidGeometry("M field does not match the grid".into()));
            }
            Some(f.values())
        }
        (FieldKind::P, None) => {
            return Err(Error::InvalidParams("assembling P requires the M field".into()));
        }
        (FieldKind::M, _) => None,
    };
    for j in 0..grid.m {
        let row0 = grid.index(0, j);
        a.push(row0, row0, 1.0);
        b[row0] = match kind {
            FieldKind::M => 1.0,
            FieldKind::P => params.gamma * kappa[j],
        };
        for i in 1..=grid.n_r {
            let row = grid.index(i, j);
            match kind {
                FieldKind::M => {
                    let lap = laplacian_row(grid, i, j, scheme, 1.0);
                    for k in 0..9 {
                        a.push(row, lap.nodes[k], params.diffusion * lap.coef[k]);
                    }
                    a.push(row, row, -params.hdl);
                }
                FieldKind::P => {
                    let lap = laplacian_row(grid, i, j, scheme, 0.0);
                    for k in 0..9 {
                        a.push(row, lap.nodes[k], lap.coef[k]);
                    }
                    b[row] = t - params.ldl * m_values.map_or(0.0, |v| v[row]);
                }
            }
        }
    }
    Ok(LinearSystem { matrix: a, rhs: b })
}

/// Solves the two linear field problems on a fixed grid.
pub fn solve_fields(
    grid: &PolarGrid,
    params: &ModelParams,
    t: f64,
    scheme: AngularScheme,
) -> Result<(SteadyField, SteadyField)> {
    let m_sys = assemble_with(grid, params, FieldKind::M, None, t, scheme)?;
    let m = SteadyField::new(FieldKind::M, grid, m_sys.solve()?)?;
    let p_sys = assemble_with(grid, params, FieldKind::P, Some(&m), t, scheme)?;
    let p = SteadyField::new(FieldKind::P, grid, p_sys.solve()?)?;
    Ok((m, p))
}

/// Errors of the discrete radial fields against the closed form at one grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceLevel {
    pub m: usize,
    pub n_r: usize,
    pub h: f64,
    pub dtheta: f64,
    /// Joint max-norm error over both fields.
    pub err: f64,
    pub err_m: f64,
    pub err_p: f64,
    /// `ln(err_coarse / err) / ln(h_coarse / h)` against the previous level.
    pub order: Option<f64>,
}

/// Solves the fixed-geometry radial problem (circle of radius `params.rho`,
/// exact clearance rate) on each grid of the ladder and compares with the
/// closed form.
pub fn radial_convergence(
    params: &ModelParams,
    ladder: &[(usize, usize)],
    scheme: AngularScheme,
) -> Result<Vec<ConvergenceLevel>> {
    let exact = RadialSteadyState::new(*params)?;
    let t = clearance_t(params)?;
    let mut out: Vec<ConvergenceLevel> = Vec::with_capacity(ladder.len());
    for &(m, n_r) in ladder {
        let curve = BoundaryCurve::circle(params.rho, m)?;
        let grid = build_grid(&curve, params.outer_radius, m, n_r)?;
        let (mf, pf) = solve_fields(&grid, params, t, scheme)?;
        let (mut err_m, mut err_p) = (0.0f64, 0.0f64);
        for j in 0..m {
            for i in 0..=n_r {
                let v = exact.eval(grid.r(i, j))?;
                err_m = err_m.max((mf.get(i, j) - v.m).abs());
                err_p = err_p.max((pf.get(i, j) - v.p).abs());
            }
        }
        let err = err_m.max(err_p);
        let h = grid.h(0);
        let order = out.last().map(|prev| (prev.err / err).ln() / (prev.h / h).ln());
        out.push(ConvergenceLevel {
            m,
            n_r,
            h,
            dtheta: grid.dtheta(),
            err,
            err_m,
            err_p,
            order,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_rows_vanish_without_reaction() {
        let mut p = ModelParams::reference();
        p.hdl = 1e-300;
        let grid = build_grid(&BoundaryCurve::with_mode(1.6, 0.05, 3, 24).unwrap(), 2.0, 24, 4).unwrap();
        let sys = assemble_with(&grid, &p, FieldKind::P, Some(&SteadyField::from_fn(FieldKind::M, &grid, |_, _| 0.0).unwrap()), 0.0, AngularScheme::default()).unwrap();
        let ones = vec![1.0; grid.n_nodes()];
        let r = sys.matrix.mul_vec(&ones);
        for j in 0..24 {
            for i in 1..=4 {
                assert!(r[grid.index(i, j)].abs() < 1e-9);
            }
        }
    }

    #[test]
    fn table_ladder_converges_at_second_order() {
        let ladder = [(20, 2), (40, 4), (80, 8), (160, 16)];
        let levels = radial_convergence(&ModelParams::reference(), &ladder, AngularScheme::default()).unwrap();
        for w in levels.windows(2) {
            assert!(w[1].err < w[0].err);
        }
        for l in &levels[1..] {
            let o = l.order.unwrap();
            assert!((1.8..=2.2).contains(&o), "{levels:?}");
        }
        assert!(levels[3].err <= 5e-4);
        // Coarse level against the published (0.1, pi/20) magnitude.
        assert!((levels[1].err - 0.0044).abs() < 0.003);
    }

    #[test]
    fn zero_ldl_gives_constant_pressure() {
        let p = ModelParams::reference().with_ldl(0.0);
        let grid = build_grid(&BoundaryCurve::circle(1.6, 16).unwrap(), 2.0, 16, 6).unwrap();
        let (_, pf) = solve_fields(&grid, &p, 0.0, AngularScheme::default()).unwrap();
        for v in pf.values() {
            assert!((v - 1.25).abs() < 1e-12);
        }
    }

    #[test]
    fn discrete_m_is_nonnegative() {
        for curve in [
            BoundaryCurve::circle(1.6, 32).unwrap(),
            BoundaryCurve::with_mode(1.6, 0.1, 2, 32).unwrap(),
            BoundaryCurve::with_mode(1.2, 0.3, 3, 32).unwrap(),
        ] {
            let grid = build_grid(&curve, 2.0, 32, 8).unwrap();
            let (mf, _) = solve_fields(&grid, &ModelParams::reference(), 2.0, AngularScheme::default()).unwrap();
            assert!(mf.values().iter().all(|&v| v >= -1e-10));
        }
    }

    #[test]
    fn p_requires_m_field() {
        let grid = build_grid(&BoundaryCurve::circle(1.6, 8).unwrap(), 2.0, 8, 2).unwrap();
        assert!(assemble_operator(&grid, &ModelParams::reference(), FieldKind::P, None, 1.0).is_err());
    }
}
