//! Finite differences on the perturbed annulus `rho(theta) <= r <= R`.
//!
//! Each ray `theta_j = j dtheta` carries a uniform radial grid
//! `r_{i,j} = rho_j + i h_j`, `h_j = (R - rho_j) / n_r`. Nodes are stored ray
//! by ray (`j` outer, `i` inner).

mod assemble;
mod curvature;
mod stencil;

pub use assemble::{
    assemble_operator, assemble_with, radial_convergence, solve_fields, ConvergenceLevel, LinearSystem,
};
pub use curvature::{curvature, periodic_first_derivative, periodic_second_derivative};
pub use stencil::{
    laplacian_row, laplacian_row_fourth, radial_stencils, theta_stencil, theta_stencil_with, AngularScheme, LaplacianRow,
    RadialStencil, ThetaStencil,
};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::output::{fmt_f64, CsvTable};

/// Free boundary sampled at `theta_j = 2 pi j / m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    values: Vec<f64>,
}

impl BoundaryCurve {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidGeometry("boundary curve has no samples".into()));
        }
        if let Some((j, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidGeometry(format!("rho_{j} = {v} is not positive")));
        }
        Ok(Self { values })
    }

    pub fn circle(rho: f64, m: usize) -> Result<Self> {
        Self::new(vec![rho; m])
    }

    /// `rho0 + amplitude cos(n theta_j)`.
    pub fn with_mode(rho0: f64, amplitude: f64, n: u32, m: usize) -> Result<Self> {
        let dtheta = 2.0 * PI / m as f64;
        Self::new((0..m).map(|j| rho0 + amplitude * (n as f64 * j as f64 * dtheta).cos()).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.values.len() as f64
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.dtheta()
    }

    /// The curve rotated by `shift` grid steps in increasing theta.
    pub fn rotated(&self, shift: usize) -> Self {
        let m = self.values.len();
        Self {
            values: (0..m).map(|j| self.values[(j + m - shift % m) % m]).collect(),
        }
    }

    /// Boundary snapshot with header `j,theta,rho`.
    pub fn to_csv(&self, comment: &str) -> CsvTable {
        let mut t = CsvTable::new(comment, &["j", "theta", "rho"]);
        for (j, v) in self.values.iter().enumerate() {
            t.push(vec![j.to_string(), fmt_f64(self.theta(j)), fmt_f64(*v)]);
        }
        t
    }
}

/// Polar grid fitted to a boundary curve.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    pub m: usize,
    pub n_r: usize,
    pub outer_radius: f64,
    rho: Vec<f64>,
}

/// Builds the per-ray grid. `m` is either 1 (a single ray, used for
/// radially symmetric problems) or even and at least 8; `n_r >= 2`.
pub fn build_grid(curve: &BoundaryCurve, outer_radius: f64, m: usize, n_r: usize) -> Result<PolarGrid> {
    if curve.len() != m {
        return Err(Error::InvalidGeometry(format!(
            "curve has {} samples but the grid has {m} rays",
            curve.len()
        )));
    }
    if !(m == 1 || (m >= 8 && m.is_multiple_of(2))) {
        return Err(Error::InvalidGeometry(format!("m = {m} must be 1 or an even number >= 8")));
    }
    if n_r < 2 {
        return Err(Error::InvalidGeometry(format!("n_r = {n_r} must be at least 2")));
    }
    if let Some((j, v)) = curve.values().iter().enumerate().find(|(_, v)| **v >= outer_radius) {
        return Err(Error::InvalidGeometry(format!(
            "rho_{j} = {v} is not inside the outer radius {outer_radius}"
        )));
    }
    Ok(PolarGrid {
        m,
        n_r,
        outer_radius,
        rho: curve.values().to_vec(),
    })
}

impl PolarGrid {
    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.m as f64
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.dtheta()
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// Ray index taken modulo `m`.
    pub fn ray(&self, j: isize) -> usize {
        j.rem_euclid(self.m as isize) as usize
    }

    pub fn h(&self, j: usize) -> f64 {
        (self.outer_radius - self.rho[j]) / self.n_r as f64
    }

    pub fn r(&self, i: usize, j: usize) -> f64 {
        if i == self.n_r {
            self.outer_radius
        } else {
            self.rho[j] + i as f64 * self.h(j)
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * (self.n_r + 1) + i
    }

    pub fn n_nodes(&self) -> usize {
        self.m * (self.n_r + 1)
    }
}

/// Which unknown a field holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldKind {
    M,
    P,
}

/// Nodal values of `M` or `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyField {
    pub kind: FieldKind,
    pub m: usize,
    pub n_r: usize,
    values: Vec<f64>,
}

impl SteadyField {
    pub fn new(kind: FieldKind, grid: &PolarGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::InvalidGeometry(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.n_nodes()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGeometry("field contains non-finite values".into()));
        }
        Ok(Self {
            kind,
            m: grid.m,
            n_r: grid.n_r,
            values,
        })
    }

    pub fn from_fn(kind: FieldKind, grid: &PolarGrid, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut values = vec![0.0; grid.n_nodes()];
        for j in 0..grid.m {
            for i in 0..=grid.n_r {
                values[grid.index(i, j)] = f(i, j);
            }
        }
        Self::new(kind, grid, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * (self.n_r + 1) + i]
    }

    /// Snapshot with header `i,j,r,theta,value`.
    pub fn to_csv(&self, grid: &PolarGrid, comment: &str) -> CsvTable {
        let mut t = CsvTable::new(comment, &["i", "j", "r", "theta", "value"]);
        for j in 0..grid.m {
            for i in 0..=grid.n_r {
                t.push(vec![
                    i.to_string(),
                    j.to_string(),
                    fmt_f64(grid.r(i, j)),
                    fmt_f64(grid.theta(j)),
                    fmt_f64(self.get(i, j)),
                ]);
            }
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_grid_arithmetic() {
        let g = build_grid(&BoundaryCurve::circle(1.6, 8).unwrap(), 2.0, 8, 4).unwrap();
        for j in 0..8 {
            assert!((g.h(j) - 0.1).abs() < 1e-15);
        }
        assert_eq!(g.n_nodes(), 8 * 5);
        let g20 = build_grid(&BoundaryCurve::circle(1.6, 20).unwrap(), 2.0, 20, 2).unwrap();
        assert!((g20.dtheta() - PI / 10.0).abs() < 1e-15);
        assert_eq!(g20.index(2, 3), 3 * 3 + 2);
        assert_eq!(g20.ray(-1), 19);
        assert_eq!(g20.r(2, 0), 2.0);
    }

    #[test]
    fn invalid_geometry() {
        let c = BoundaryCurve::new(vec![1.6, 2.1, 1.6, 1.6, 1.6, 1.6, 1.6, 1.6]).unwrap();
        assert!(matches!(build_grid(&c, 2.0, 8, 4), Err(Error::InvalidGeometry(_))));
        let c = BoundaryCurve::circle(1.6, 6).unwrap();
        assert!(build_grid(&c, 2.0, 6, 4).is_err());
        assert!(BoundaryCurve::new(vec![1.0, -1.0]).is_err());
        let c = BoundaryCurve::circle(1.6, 8).unwrap();
        assert!(build_grid(&c, 2.0, 8, 1).is_err());
        assert!(build_grid(&c, 2.0, 10, 4).is_err());
    }

    #[test]
    fn rotation_shifts_samples() {
        let c = BoundaryCurve::new((1..=8).map(|k| k as f64).collect()).unwrap();
        let r = c.rotated(1);
        assert_eq!(r.values()[1], 1.0);
        assert_eq!(r.values()[0], 8.0);
    }

    #[test]
    fn snapshots_have_documented_headers() {
        let c = BoundaryCurve::circle(1.6, 8).unwrap();
        let g = build_grid(&c, 2.0, 8, 2).unwrap();
        let f = SteadyField::from_fn(FieldKind::M, &g, |i, _| i as f64).unwrap();
        let text = f.to_csv(&g, "test").render();
        assert_eq!(text.lines().nth(1), Some("i,j,r,theta,value"));
        assert_eq!(text.lines().count(), 2 + 8 * 3);
        let b = c.to_csv("test").render();
        assert_eq!(b.lines().nth(1), Some("j,theta,rho"));
    }
}
