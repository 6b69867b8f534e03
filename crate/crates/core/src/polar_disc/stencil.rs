use serde::{Deserialize, Serialize};

use super::PolarGrid;
use crate::error::{Error, Result};

/// Treatment of the cross term `c` of the nine-point angular stencil.
///
/// The raw formula `c = N / (3 S)` divides by the second difference `S`
/// of the radial positions across neighbouring rays. `S` vanishes on
/// symmetric grids and can vanish at isolated rays of perturbed ones, where
/// `c` becomes unbounded or jumps. `Regularized` replaces `1/S` by
/// `S / (S^2 + tau^2)` with `tau = tau_rel * dtheta^2 * R`, which keeps `c`
/// of size `O(h^2)` and smooth in the grid. `Interpolated` drops the term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AngularScheme {
    Raw,
    Regularized { tau_rel: f64 },
    Interpolated,
}

impl Default for AngularScheme {
    fn default() -> Self {
        AngularScheme::Regularized { tau_rel: 0.05 }
    }
}

/// Coefficients `a_1..a_9` applied to the nodes
/// `(i,j), (i+1,j), (i-1,j), (i,j+1), (i+1,j+1), (i-1,j+1), (i,j-1), (i+1,j-1), (i-1,j-1)`;
/// the angular second derivative is `sum a_k G_k / dtheta^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaStencil {
    pub a: [f64; 9],
}

/// Second-derivative and `(1/r) d/dr` weights on `(i-1, i, i+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialStencil {
    pub d2: [f64; 3],
    pub d1_over_r: [f64; 3],
}

/// Central radial differences at an interior node.
pub fn radial_stencils(grid: &PolarGrid, i: usize, j: usize) -> Result<RadialStencil> {
    if i == 0 || i >= grid.n_r || j >= grid.m {
        return Err(Error::InvalidGeometry(format!(
            "radial stencil requested at boundary node ({i}, {j})"
        )));
    }
    let h = grid.h(j);
    let r = grid.r(i, j);
    Ok(RadialStencil {
        d2: [1.0 / (h * h), -2.0 / (h * h), 1.0 / (h * h)],
        d1_over_r: [-1.0 / (2.0 * h * r), 0.0, 1.0 / (2.0 * h * r)],
    })
}

/// Nine-point angular stencil with the raw cross term. Where the second
/// difference of the radial positions vanishes the cross term is zero, which
/// on a symmetric grid leaves the classical `(1, -2, 1)` difference.
pub fn theta_stencil(grid: &PolarGrid, i: usize, j: usize) -> ThetaStencil {
    theta_stencil_with(grid, i, j, AngularScheme::Raw)
}

pub fn theta_stencil_with(grid: &PolarGrid, i: usize, j: usize, scheme: AngularScheme) -> ThetaStencil {
    theta_stencil_span(grid, i, j, scheme, 1)
}

/// The nine-point stencil built on rays `j - span`, `j`, `j + span`; its sum
/// is divided by `(span dtheta)^2`.
fn theta_stencil_span(grid: &PolarGrid, i: usize, j: usize, scheme: AngularScheme, span: isize) -> ThetaStencil {
    let jp = grid.ray(j as isize + span);
    let jm = grid.ray(j as isize - span);
    let (h, hp, hm) = (grid.h(j), grid.h(jp), grid.h(jm));
    let r0 = grid.r(i, j);
    let dp = grid.r(i, jp) - r0;
    let dm = grid.r(i, jm) - r0;
    let s = dp + dm;
    let n = dp * hp * hp + dm * hm * hm - dp * dp * dp - dm * dm * dm;
    let c = match scheme {
        AngularScheme::Raw => {
            if s == 0.0 {
                0.0
            } else {
                n / (3.0 * s)
            }
        }
        AngularScheme::Regularized { tau_rel } => {
            let dt = span as f64 * grid.dtheta();
            let tau = tau_rel * dt * dt * grid.outer_radius;
            let denom = s * s + tau * tau;
            if denom == 0.0 {
                0.0
            } else {
                n * s / (3.0 * denom)
            }
        }
        AngularScheme::Interpolated => 0.0,
    };
    let a2 = -c / (h * h);
    let a3 = a2;
    let a1 = -2.0 - 2.0 * a2;
    let (a5, a6) = split(c, dp, hp);
    let a4 = 1.0 - a5 - a6;
    let (a8, a9) = split(c, dm, hm);
    let a7 = 1.0 - a8 - a9;
    ThetaStencil {
        a: [a1, a2, a3, a4, a5, a6, a7, a8, a9],
    }
}

/// Solves `x + y = (c + d^2)/h^2`, `x - y = -d/h`.
fn split(c: f64, d: f64, h: f64) -> (f64, f64) {
    let sum = (c + d * d) / (h * h);
    let diff = -d / h;
    (0.5 * (sum + diff), 0.5 * (sum - diff))
}

impl ThetaStencil {
    /// `(i, j)` pairs matching `a`, with radial indices clamped into the grid
    /// (clamped slots always carry zero weight).
    pub fn nodes(grid: &PolarGrid, i: usize, j: usize) -> [(usize, usize); 9] {
        let jp = grid.ray(j as isize + 1);
        let jm = grid.ray(j as isize - 1);
        let up = (i + 1).min(grid.n_r);
        let down = i.saturating_sub(1);
        [
            (i, j),
            (up, j),
            (down, j),
            (i, jp),
            (up, jp),
            (down, jp),
            (i, jm),
            (up, jm),
            (down, jm),
        ]
    }

    /// Approximation of `d^2 G / d theta^2` at fixed `r = r_{i,j}`.
    pub fn apply(&self, grid: &PolarGrid, i: usize, j: usize, g: impl Fn(usize, usize) -> f64) -> f64 {
        let nodes = Self::nodes(grid, i, j);
        let dt = grid.dtheta();
        nodes.iter().zip(self.a.iter()).map(|(&(ii, jj), a)| a * g(ii, jj)).sum::<f64>() / (dt * dt)
    }
}

/// Discrete Laplacian at node `(i, j)`, `1 <= i <= n_r`, as weights on
/// `N` field indices. At `i = n_r` the radial derivative condition
/// `G_r + robin G = 0` is imposed through a ghost node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplacianRow<const N: usize = 9> {
    pub nodes: [usize; N],
    pub coef: [f64; N],
}

pub fn laplacian_row(grid: &PolarGrid, i: usize, j: usize, scheme: AngularScheme, robin: f64) -> LaplacianRow {
    debug_assert!(i >= 1 && i <= grid.n_r);
    let pairs = ThetaStencil::nodes(grid, i, j);
    let mut nodes = [0usize; 9];
    for (k, &(ii, jj)) in pairs.iter().enumerate() {
        nodes[k] = grid.index(ii, jj);
    }
    let dt2 = grid.dtheta() * grid.dtheta();
    let r = grid.r(i, j);
    let h = grid.h(j);
    let mut coef = [0.0; 9];
    if i < grid.n_r {
        let st = theta_stencil_with(grid, i, j, scheme);
        for k in 0..9 {
            coef[k] = st.a[k] / (dt2 * r * r);
        }
        // slots 0, 1, 2 are (i,j), (i+1,j), (i-1,j)
        coef[0] += -2.0 / (h * h);
        coef[1] += 1.0 / (h * h) + 1.0 / (2.0 * h * r);
        coef[2] += 1.0 / (h * h) - 1.0 / (2.0 * h * r);
    } else {
        // All rays end at r = R, so the angular part is the classical
        // difference; ghost value G_{n+1} = G_{n-1} - 2 h robin G_n.
        if grid.m > 1 {
            coef[0] += -2.0 / (dt2 * r * r);
            coef[3] += 1.0 / (dt2 * r * r);
            coef[6] += 1.0 / (dt2 * r * r);
        }
        coef[0] += -2.0 / (h * h) - 2.0 * h * robin * (1.0 / (h * h) + 1.0 / (2.0 * h * r));
        coef[2] += 2.0 / (h * h);
    }
    LaplacianRow { nodes, coef }
}

/// Laplacian row whose angular part is the Richardson combination
/// `(4 D(dtheta) - D(2 dtheta)) / 3` of nine-point stencils on neighbouring
/// and next-neighbouring rays. Slots `0..9` are those of [`laplacian_row`];
/// slots `9..15` are `(i, j+2), (i+1, j+2), (i-1, j+2), (i, j-2), (i+1, j-2), (i-1, j-2)`.
/// On rays of equal length the angular difference is fourth order. Requires
/// `m >= 5` (or `m = 1`, where there is no angular term).
pub fn laplacian_row_fourth(grid: &PolarGrid, i: usize, j: usize, scheme: AngularScheme, robin: f64) -> LaplacianRow<15> {
    let near = laplacian_row(grid, i, j, scheme, robin);
    let mut nodes = [near.nodes[0]; 15];
    let mut coef = [0.0; 15];
    nodes[..9].copy_from_slice(&near.nodes);
    coef[..9].copy_from_slice(&near.coef);
    if grid.m == 1 {
        return LaplacianRow { nodes, coef };
    }
    let up = (i + 1).min(grid.n_r);
    let down = i - 1;
    let (jp, jm) = (grid.ray(j as isize + 2), grid.ray(j as isize - 2));
    for (k, &(ii, jj)) in [(i, jp), (up, jp), (down, jp), (i, jm), (up, jm), (down, jm)].iter().enumerate() {
        nodes[9 + k] = grid.index(ii, jj);
    }
    let dt = grid.dtheta();
    let r = grid.r(i, j);
    // Angular weights of the near stencil, to be rescaled by 4/3.
    let mut near_ang = [0.0; 9];
    let mut far_ang = [0.0; 9];
    if i < grid.n_r {
        let a = theta_stencil_span(grid, i, j, scheme, 1).a;
        let b = theta_stencil_span(grid, i, j, scheme, 2).a;
        for k in 0..9 {
            near_ang[k] = a[k] / (dt * dt * r * r);
            far_ang[k] = b[k] / (4.0 * dt * dt * r * r);
        }
    } else {
        for (w, scale) in [(&mut near_ang, 1.0), (&mut far_ang, 0.25)] {
            w[0] = -2.0 * scale / (dt * dt * r * r);
            w[3] = scale / (dt * dt * r * r);
            w[6] = scale / (dt * dt * r * r);
        }
    }
    // Far slots map (i, j), (i+1, j), (i-1, j) onto the near ones and the
    // remaining six onto the new ray pairs.
    let far_slot = [0, 1, 2, 9, 10, 11, 12, 13, 14];
    for k in 0..9 {
        coef[k] += near_ang[k] / 3.0;
        coef[far_slot[k]] -= far_ang[k] / 3.0;
    }
    LaplacianRow { nodes, coef }
}

impl<const N: usize> LaplacianRow<N> {
    pub fn apply(&self, values: &[f64]) -> f64 {
        self.nodes.iter().zip(self.coef.iter()).map(|(&k, c)| c * values[k]).sum()
    }
}
