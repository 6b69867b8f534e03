//! Finite-difference Jacobians with column colouring.

use std::collections::BTreeSet;

use rayon::prelude::*;

use super::{Discretization, SubspaceMap};
use crate::error::Result;
use crate::linalg::TripletMatrix;

/// Relative central-difference step.
const FD_STEP: f64 = 1e-7;

/// Structural sparsity (rows touched by each column) and a column colouring in
/// which no two columns of one colour share a row.
#[derive(Debug, Clone)]
pub(crate) struct ColoredJacobian {
    pattern: Vec<Vec<usize>>,
    groups: Vec<Vec<usize>>,
    n_rows: usize,
}

impl ColoredJacobian {
    /// Pattern of the steady residual and of the evolution right-hand side on
    /// the given subspace.
    pub fn for_problem(disc: &Discretization, map: &SubspaceMap) -> Self {
        let full = full_pattern(disc);
        let pattern = (0..map.len())
            .map(|k| {
                let mut rows = BTreeSet::new();
                for c in map.preimage(k) {
                    rows.extend(full[c].iter().filter_map(|&r| map.reduce_index(r)));
                }
                rows.into_iter().collect()
            })
            .collect();
        Self::from_pattern(pattern, map.len())
    }

    pub fn from_pattern(pattern: Vec<Vec<usize>>, n_rows: usize) -> Self {
        let mut row_cols: Vec<Vec<usize>> = vec![Vec::new(); n_rows];
        for (c, rows) in pattern.iter().enumerate() {
            for &r in rows {
                row_cols[r].push(c);
            }
        }
        let mut color = vec![usize::MAX; pattern.len()];
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut mark: Vec<usize> = Vec::new();
        for c in 0..pattern.len() {
            for &r in &pattern[c] {
                for &other in &row_cols[r] {
                    if color[other] != usize::MAX {
                        let k = color[other];
                        if mark.len() <= k {
                            mark.resize(k + 1, usize::MAX);
                        }
                        mark[k] = c;
                    }
                }
            }
            let k = (0..groups.len()).find(|&k| mark.get(k) != Some(&c)).unwrap_or(groups.len());
            if k == groups.len() {
                groups.push(Vec::new());
            }
            groups[k].push(c);
            color[c] = k;
        }
        Self {
            pattern,
            groups,
            n_rows,
        }
    }

    #[cfg(test)]
    pub fn n_colors(&self) -> usize {
        self.groups.len()
    }

    /// Central-difference Jacobian of `f` at `x`.
    pub fn jacobian<F>(&self, f: F, x: &[f64]) -> Result<TripletMatrix>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
    {
        let blocks: Vec<Result<Vec<(usize, usize, f64)>>> = self
            .groups
            .par_iter()
            .map(|group| {
                let steps: Vec<f64> = group.iter().map(|&c| FD_STEP * x[c].abs().max(1.0)).collect();
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                for (&c, &s) in group.iter().zip(&steps) {
                    xp[c] += s;
                    xm[c] -= s;
                }
                let fp = f(&xp)?;
                let fm = f(&xm)?;
                let mut out = Vec::new();
                for (&c, &s) in group.iter().zip(&steps) {
                    let dx = (x[c] + s) - (x[c] - s);
                    for &r in &self.pattern[c] {
                        out.push((r, c, (fp[r] - fm[r]) / dx));
                    }
                }
                Ok(out)
            })
            .collect();
        let mut j = TripletMatrix::new(self.n_rows, self.pattern.len());
        for block in blocks {
            for (r, c, v) in block? {
                j.push(r, c, v);
            }
        }
        Ok(j)
    }
}

/// Rows of the full stacked residual that each full unknown can influence.
fn full_pattern(disc: &Discretization) -> Vec<Vec<usize>> {
    let (m, n_r) = (disc.m as isize, disc.n_r);
    let nn = n_r + 1;
    let np = disc.n_nodes();
    let ray = |j: isize| j.rem_euclid(m) as usize;
    let m_row = |i: usize, j: usize| j * nn + i;
    let p_row = |i: usize, j: usize| np + j * nn + i;
    let g_row = |j: usize| 2 * np + j;
    let mut pattern = vec![Vec::new(); disc.n_unknowns()];
    for j in 0..m {
        for i in 0..nn {
            let mut mc = BTreeSet::new();
            let mut pc = BTreeSet::new();
            for dj in -2..=2 {
                let jj = ray(j + dj);
                for ii in i.saturating_sub(1)..=(i + 1).min(n_r) {
                    if ii >= 1 {
                        mc.insert(m_row(ii, jj));
                        pc.insert(p_row(ii, jj));
                    }
                }
            }
            if i == 0 {
                mc.insert(m_row(0, j as usize));
                pc.insert(p_row(0, j as usize));
            }
            mc.insert(p_row(i, j as usize));
            if i <= 4 {
                pc.insert(g_row(j as usize));
                for ii in 1..nn {
                    pc.insert(m_row(ii, j as usize));
                }
            }
            pattern[m_row(i, j as usize)] = mc.into_iter().collect();
            pattern[p_row(i, j as usize)] = pc.into_iter().collect();
        }
        let mut rc = BTreeSet::new();
        for dj in -4..=4 {
            let jj = ray(j + dj);
            rc.insert(g_row(jj));
            for ii in 0..nn {
                rc.insert(m_row(ii, jj));
                if dj.abs() <= 2 {
                    rc.insert(p_row(ii, jj));
                }
            }
        }
        pattern[g_row(j as usize)] = rc.into_iter().collect();
    }
    pattern
}

#[cfg(test)]
mod tests {
    use super::super::{FbProblem, Subspace};
    use super::*;
    use crate::closed_form::ModelParams;
    use crate::polar_disc::BoundaryCurve;

    fn perturbed_state(problem: &FbProblem) -> Vec<f64> {
        let (m, nn) = (problem.disc.m, problem.disc.n_r + 1);
        let np = m * nn;
        let curve = BoundaryCurve::new(
            (0..m)
                .map(|j| {
                    let t = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
                    1.6 + 0.05 * (2.0 * t).cos() + 0.02 * (3.0 * t).sin()
                })
                .collect(),
        )
        .unwrap();
        let mut x = vec![0.0; 2 * np + m];
        for j in 0..m {
            for i in 0..nn {
                let s = i as f64 / (nn - 1) as f64;
                x[j * nn + i] = 1.0 - 0.3 * s + 0.01 * (j as f64).sin();
                x[np + j * nn + i] = 0.6 + 0.2 * s * s + 0.01 * (j as f64).cos();
            }
        }
        x[2 * np..].copy_from_slice(curve.values());
        x
    }

    fn dense_fd(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> Vec<Vec<f64>> {
        let n = x.len();
        let f0 = f(x);
        let mut cols = Vec::with_capacity(n);
        for c in 0..n {
            let s = 1e-7 * x[c].abs().max(1.0);
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[c] += s;
            xm[c] -= s;
            let (fp, fm) = (f(&xp), f(&xm));
            cols.push((0..f0.len()).map(|r| (fp[r] - fm[r]) / (2.0 * s)).collect());
        }
        cols
    }

    #[test]
    fn colored_matches_dense_difference() {
        let params = ModelParams::reference().with_ldl(3.0);
        let disc = Discretization::new(10, 4);
        let problem = FbProblem::new(params, disc).unwrap();
        let x = perturbed_state(&problem);
        for moving in [false, true] {
            let eval = |y: &[f64]| if moving { problem.time_rhs(y) } else { problem.residual(y) };
            let map = SubspaceMap::new(&disc, Subspace::Full);
            let cj = ColoredJacobian::for_problem(&disc, &map);
            assert!(cj.n_colors() < disc.n_unknowns() / 2);
            let j = cj.jacobian(eval, &x).unwrap().to_dense();
            let reference = dense_fd(|y| eval(y).unwrap(), &x);
            for (c, col) in reference.iter().enumerate() {
                for (r, &v) in col.iter().enumerate() {
                    assert!((j[(r, c)] - v).abs() < 1e-6 * (1.0 + v.abs()), "moving={moving} r={r} c={c}");
                }
            }
        }
    }

    #[test]
    fn even_pattern_covers_reduced_jacobian() {
        let params = ModelParams::reference().with_ldl(3.0);
        let disc = Discretization::new(12, 3);
        let problem = FbProblem::new(params, disc).unwrap();
        let map = SubspaceMap::new(&disc, Subspace::Even);
        let mut x = perturbed_state(&problem);
        x = map.expand(&map.restrict(&x));
        let y = map.restrict(&x);
        let reduced = |v: &[f64]| problem.residual(&map.expand(v)).map(|r| map.restrict(&r));
        let cj = ColoredJacobian::for_problem(&disc, &map);
        let j = cj.jacobian(reduced, &y).unwrap().to_dense();
        let reference = dense_fd(|v| reduced(v).unwrap(), &y);
        for (c, col) in reference.iter().enumerate() {
            for (r, &v) in col.iter().enumerate() {
                assert!((j[(r, c)] - v).abs() < 1e-6 * (1.0 + v.abs()), "r={r} c={c}");
            }
        }
    }
}
