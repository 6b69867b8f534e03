//! Boundary Schur complement, Fréchet kernel diagnostics and the spectrum of
//! the linearised evolution.

use faer::Mat;
use serde::{Deserialize, Serialize};

use super::{radial_solution, ColoredJacobian, Discretization, FbProblem, FreeBoundarySolution, Subspace, SubspaceMap};
use crate::closed_form::ModelParams;
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues_sorted, smallest_singular, Complex64, SparseLu, TripletMatrix};
use crate::output::{fmt_f64, CsvTable};

/// Steady Jacobian condensed onto the boundary unknowns:
/// `S = D - C A^-1 B` with `A` the field block and `D` the boundary block.
#[derive(Debug, Clone)]
pub struct BoundaryOperator {
    pub schur: Mat<f64>,
    /// `A^-1 B`: field response to a unit boundary displacement.
    pub field_response: Mat<f64>,
    pub(crate) map: SubspaceMap,
}

impl BoundaryOperator {
    pub fn subspace(&self) -> Subspace {
        self.map.kind
    }

    /// Boundary vector on every ray from one on the independent rays.
    pub fn expand_boundary(&self, v: &[f64]) -> Vec<f64> {
        (0..self.map.m).map(|j| v[self.map.source_ray(j)]).collect()
    }

    /// Full state direction (fields and boundary) from a reduced boundary vector.
    pub fn expand_direction(&self, v: &[f64]) -> Vec<f64> {
        let n_f = self.map.n_field();
        let mut y = vec![0.0; self.map.len()];
        for r in 0..n_f {
            y[r] = -(0..v.len()).map(|c| self.field_response[(r, c)] * v[c]).sum::<f64>();
        }
        y[n_f..].copy_from_slice(v);
        self.map.expand(&y)
    }
}

/// Condenses the steady Jacobian of `solution` onto its boundary unknowns.
pub fn boundary_operator(solution: &FreeBoundarySolution, subspace: Subspace) -> Result<BoundaryOperator> {
    let problem = solution.problem()?;
    let map = SubspaceMap::new(&problem.disc, subspace);
    let cj = ColoredJacobian::for_problem(&problem.disc, &map);
    let f = |y: &[f64]| problem.residual(&map.expand(y)).map(|r| map.restrict(&r));
    let jac = cj.jacobian(f, &map.restrict(&solution.to_vector()))?;
    let n_f = map.n_field();
    let n_b = map.rays();
    let mut a = TripletMatrix::new(n_f, n_f);
    let mut b = Mat::<f64>::zeros(n_f, n_b);
    let mut c = TripletMatrix::new(n_b, n_f);
    let mut d = Mat::<f64>::zeros(n_b, n_b);
    for (r, col, v) in jac.iter() {
        match (r < n_f, col < n_f) {
            (true, true) => a.push(r, col, v),
            (true, false) => b[(r, col - n_f)] += v,
            (false, true) => c.push(r - n_f, col, v),
            (false, false) => d[(r - n_f, col - n_f)] += v,
        }
    }
    let x = SparseLu::factor(&a)?.solve_mat(&b)?;
    let mut s = d;
    for (r, col, v) in c.iter() {
        for k in 0..n_b {
            s[(r, k)] -= v * x[(col, k)];
        }
    }
    Ok(BoundaryOperator {
        schur: s,
        field_response: x,
        map,
    })
}

/// Discrete Crandall-Rabinowitz diagnostics at the radial solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelCheck {
    pub n: u32,
    pub ldl: f64,
    pub smallest_singular_value: f64,
    /// Boundary part of the near-kernel vector on all rays (unit 2-norm).
    pub boundary_kernel: Vec<f64>,
    /// Correlation of the near-kernel vector with `cos(n theta)`.
    pub correlation: f64,
}

impl KernelCheck {
    /// Correlation of the near-kernel vector with `cos(k theta)`.
    pub fn correlation_with(&self, k: u32) -> f64 {
        mode_correlation(&self.boundary_kernel, k)
    }
}

pub(crate) fn mode_correlation(v: &[f64], k: u32) -> f64 {
    let m = v.len();
    let c: Vec<f64> = (0..m)
        .map(|j| (k as f64 * 2.0 * std::f64::consts::PI * j as f64 / m as f64).cos())
        .collect();
    let dot: f64 = v.iter().zip(&c).map(|(a, b)| a * b).sum();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nc = c.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nv == 0.0 {
        0.0
    } else {
        dot.abs() / (nv * nc)
    }
}

/// Smallest singular value of the boundary operator of the radial solution at
/// `params.ldl`, restricted to even perturbations, and the alignment of its
/// singular vector with `cos(n theta)`.
pub fn frechet_kernel_check(params: &ModelParams, disc: &Discretization, n: u32) -> Result<KernelCheck> {
    let radial = radial_solution(params, disc)?;
    let op = boundary_operator(&radial, Subspace::Even)?;
    let (sigma, v) = smallest_singular(&op.schur)?;
    let mut full = op.expand_boundary(&v);
    let norm = full.iter().map(|a| a * a).sum::<f64>().sqrt();
    full.iter_mut().for_each(|a| *a /= norm);
    Ok(KernelCheck {
        n,
        ldl: params.ldl,
        smallest_singular_value: sigma,
        correlation: mode_correlation(&full, n),
        boundary_kernel: full,
    })
}

/// Perturbation class for the linearised evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Restriction {
    Full,
    /// Reflection-even perturbations only.
    Even,
    /// Angle-independent perturbations of a radial state, on a single ray.
    RadiallySymmetric,
}

impl std::fmt::Display for Restriction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Restriction::Full => "full",
            Restriction::Even => "even",
            Restriction::RadiallySymmetric => "radially-symmetric",
        })
    }
}

impl std::str::FromStr for Restriction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Restriction::Full),
            "even" => Ok(Restriction::Even),
            "radially-symmetric" | "symmetric" => Ok(Restriction::RadiallySymmetric),
            other => Err(Error::Config(format!("unknown restriction '{other}'"))),
        }
    }
}

/// Eigenvalues of the linearised evolution, by decreasing real part.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub m: usize,
    pub n_r: usize,
    pub restriction: Restriction,
}

impl Spectrum {
    pub fn re_max(&self) -> f64 {
        self.eigenvalues[0].re
    }

    pub fn to_csv(&self, comment: &str) -> CsvTable {
        let mut t = CsvTable::new(comment, &["index", "re", "im"]);
        for (k, z) in self.eigenvalues.iter().enumerate() {
            t.push(vec![k.to_string(), fmt_f64(z.re), fmt_f64(z.im)]);
        }
        t
    }
}

/// Spectrum of the linearisation of the evolution about a steady state. The
/// algebraic unknowns (Dirichlet values of `M` and all of `P`) are eliminated,
/// leaving `M` at the interior and outer nodes and the boundary radii.
pub fn linearized_spectrum(solution: &FreeBoundarySolution, restriction: Restriction) -> Result<Spectrum> {
    let (problem, x, kind) = match restriction {
        Restriction::Full => (solution.problem()?, solution.to_vector(), Subspace::Full),
        Restriction::Even => (solution.problem()?, solution.to_vector(), Subspace::Even),
        Restriction::RadiallySymmetric => {
            let rho = solution.curve.values();
            if rho.iter().any(|r| (r - rho[0]).abs() > 1e-12 * rho[0]) {
                return Err(Error::InvalidGeometry(
                    "radially symmetric restriction needs a radial state".into(),
                ));
            }
            let single = FbProblem::new(solution.params, solution.disc.single_ray())?;
            let nn = solution.disc.n_r + 1;
            let mut y = solution.m_field.values()[..nn].to_vec();
            y.extend_from_slice(&solution.p_field.values()[..nn]);
            y.push(rho[0]);
            (single, y, Subspace::Full)
        }
    };
    let eigenvalues = eigenvalues_sorted(&evolution_operator(&problem, &x, kind)?.0)?;
    if eigenvalues.is_empty() {
        return Err(Error::Eigen("empty spectrum".into()));
    }
    Ok(Spectrum {
        eigenvalues,
        m: problem.disc.m,
        n_r: problem.disc.n_r,
        restriction,
    })
}

/// Eigenvalues of the linearised evolution about a radial state restricted to
/// perturbations proportional to `cos(n theta)`, by decreasing real part. The
/// first entry is the discrete growth rate of mode `n`.
pub fn fourier_sector_spectrum(solution: &FreeBoundarySolution, n: u32) -> Result<Vec<Complex64>> {
    let rho = solution.curve.values();
    if rho.iter().any(|r| (r - rho[0]).abs() > 1e-12 * rho[0]) {
        return Err(Error::InvalidGeometry("Fourier sectors need a radial state".into()));
    }
    let (m, n_r) = (solution.disc.m, solution.disc.n_r);
    if 2 * n as usize > m {
        return Err(Error::InvalidGeometry(format!("mode {n} is not resolved by {m} rays")));
    }
    let problem = solution.problem()?;
    let (a, map) = evolution_operator(&problem, &solution.to_vector(), Subspace::Even)?;
    let rays = map.rays();
    let slot = |c: usize, k: usize| if c < n_r { k * n_r + c } else { rays * n_r + k };
    let basis = |c: usize| -> Vec<f64> {
        let mut q = vec![0.0; a.ncols()];
        for k in 0..rays {
            q[slot(c, k)] = (n as f64 * solution.curve.theta(k)).cos();
        }
        q
    };
    let mut block = Mat::<f64>::zeros(n_r + 1, n_r + 1);
    for c in 0..=n_r {
        let q = basis(c);
        for c2 in 0..=n_r {
            let row = slot(c2, 0);
            block[(c2, c)] = (0..a.ncols()).map(|k| a[(row, k)] * q[k]).sum();
        }
    }
    eigenvalues_sorted(&block)
}

/// Linearised evolution on the given subspace with the algebraic unknowns
/// eliminated. Dynamic unknowns are ordered as `M` (ray-major, `i >= 1`)
/// followed by the radii.
fn evolution_operator(problem: &FbProblem, x: &[f64], kind: Subspace) -> Result<(Mat<f64>, SubspaceMap)> {
    let map = SubspaceMap::new(&problem.disc, kind);
    let cj = ColoredJacobian::for_problem(&problem.disc, &map);
    let f = |y: &[f64]| problem.time_rhs(&map.expand(y)).map(|r| map.restrict(&r));
    let jac = cj.jacobian(f, &map.restrict(x))?;
    Ok((reduce_algebraic(&jac, &map)?, map))
}

/// `J_dd - J_da J_aa^-1 J_ad` for the dynamic/algebraic split.
fn reduce_algebraic(jac: &TripletMatrix, map: &SubspaceMap) -> Result<Mat<f64>> {
    let nn = map.n_r + 1;
    let pf = map.per_field();
    let n = map.len();
    let mut slot = vec![(false, 0usize); n];
    let (mut nd, mut na) = (0, 0);
    for (k, s) in slot.iter_mut().enumerate() {
        let dynamic = (k < pf && k % nn != 0) || k >= 2 * pf;
        *s = if dynamic {
            nd += 1;
            (true, nd - 1)
        } else {
            na += 1;
            (false, na - 1)
        };
    }
    let mut jdd = Mat::<f64>::zeros(nd, nd);
    let mut jad = Mat::<f64>::zeros(na, nd);
    let mut jaa = TripletMatrix::new(na, na);
    let mut jda = TripletMatrix::new(nd, na);
    for (r, c, v) in jac.iter() {
        match (slot[r], slot[c]) {
            ((true, i), (true, j)) => jdd[(i, j)] += v,
            ((true, i), (false, j)) => jda.push(i, j, v),
            ((false, i), (true, j)) => jad[(i, j)] += v,
            ((false, i), (false, j)) => jaa.push(i, j, v),
        }
    }
    let x = SparseLu::factor(&jaa)?.solve_mat(&jad)?;
    for (r, c, v) in jda.iter() {
        for k in 0..nd {
            jdd[(r, k)] -= v * x[(c, k)];
        }
    }
    Ok(jdd)
}
