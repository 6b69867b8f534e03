//! Thin wrappers over `faer` for the sparse and dense operations used by the
//! solvers.

use faer::prelude::*;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::error::{Error, Result};

pub type Complex64 = faer::complex::Complex<f64>;

/// Forces `faer` onto a single thread so that results are bitwise
/// reproducible; outer loops parallelise with rayon instead.
pub fn use_sequential_kernels() {
    faer::set_global_parallelism(faer::Par::Seq);
}

/// Coordinate-format sparse matrix under construction; duplicates are summed.
#[derive(Debug, Clone, Default)]
pub struct TripletMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    entries: Vec<Triplet<usize, usize, f64>>,
}

impl TripletMatrix {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n_rows && col < self.n_cols);
        if value != 0.0 {
            self.entries.push(Triplet::new(row, col, value));
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries.iter().map(|t| (t.row, t.col, t.val))
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        for t in &self.entries {
            y[t.row] += t.val * x[t.col];
        }
        y
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::<f64>::zeros(self.n_rows, self.n_cols);
        for t in &self.entries {
            m[(t.row, t.col)] += t.val;
        }
        m
    }

    fn to_sparse(&self) -> Result<SparseColMat<usize, f64>> {
        SparseColMat::try_new_from_triplets(self.n_rows, self.n_cols, &self.entries).map_err(|e| {
            Error::SingularSystem {
                unknowns: self.n_cols,
                detail: format!("could not build sparse matrix: {e:?}"),
            }
        })
    }
}

/// Sparse LU factorisation of a square matrix.
pub struct SparseLu {
    lu: Lu<usize, f64>,
    n: usize,
}

impl SparseLu {
    pub fn factor(a: &TripletMatrix) -> Result<Self> {
        if a.n_rows != a.n_cols {
            return Err(Error::SingularSystem {
                unknowns: a.n_cols,
                detail: format!("matrix is {}x{}", a.n_rows, a.n_cols),
            });
        }
        let lu = a.to_sparse()?.sp_lu().map_err(|e| Error::SingularSystem {
            unknowns: a.n_cols,
            detail: format!("sparse LU failed: {e:?}"),
        })?;
        Ok(Self { lu, n: a.n_cols })
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut b = Mat::<f64>::from_fn(self.n, 1, |i, _| rhs[i]);
        self.lu.solve_in_place(b.as_mut());
        let x: Vec<f64> = (0..self.n).map(|i| b[(i, 0)]).collect();
        if x.iter().all(|v| v.is_finite()) {
            Ok(x)
        } else {
            Err(Error::SingularSystem {
                unknowns: self.n,
                detail: "non-finite solution (numerically singular matrix)".into(),
            })
        }
    }

    /// Solves for every column of `rhs` at once.
    pub fn solve_mat(&self, rhs: &Mat<f64>) -> Result<Mat<f64>> {
        let mut b = rhs.clone();
        self.lu.solve_in_place(b.as_mut());
        for j in 0..b.ncols() {
            for i in 0..b.nrows() {
                if !b[(i, j)].is_finite() {
                    return Err(Error::SingularSystem {
                        unknowns: self.n,
                        detail: "non-finite solution (numerically singular matrix)".into(),
                    });
                }
            }
        }
        Ok(b)
    }
}

/// Eigenvalues of a dense real matrix, sorted by decreasing real part.
pub fn eigenvalues_sorted(a: &Mat<f64>) -> Result<Vec<Complex64>> {
    let mut ev = a
        .eigenvalues()
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    if ev.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalue".into()));
    }
    ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    Ok(ev)
}

/// Eigenvalues with right eigenvectors (columns), unsorted.
pub fn eigen_decomposition(a: &Mat<f64>) -> Result<(Vec<Complex64>, Mat<Complex64>)> {
    let evd = a.eigen().map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = evd.S();
    let values = (0..a.nrows()).map(|i| s[i]).collect();
    Ok((values, evd.U().to_owned()))
}

/// Smallest singular value and the corresponding right singular vector.
pub fn smallest_singular(a: &Mat<f64>) -> Result<(f64, Vec<f64>)> {
    let svd = a.svd().map_err(|e| Error::Eigen(format!("svd: {e:?}")))?;
    let s = svd.S();
    let k = a.ncols().min(a.nrows()) - 1;
    let v = svd.V();
    Ok((s[k], (0..a.ncols()).map(|i| v[(i, k)]).collect()))
}

/// Dense LU solve `A X = B`.
pub fn dense_solve(a: &Mat<f64>, b: &Mat<f64>) -> Result<Mat<f64>> {
    let x = a.partial_piv_lu().solve(b);
    for j in 0..x.ncols() {
        for i in 0..x.nrows() {
            if !x[(i, j)].is_finite() {
                return Err(Error::SingularSystem {
                    unknowns: a.ncols(),
                    detail: "dense solve produced non-finite entries".into(),
                });
            }
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_solve_sums_duplicates() {
        let mut a = TripletMatrix::new(2, 2);
        a.push(0, 0, 2.0);
        a.push(0, 1, 0.5);
        a.push(0, 1, 0.5);
        a.push(1, 1, 3.0);
        let lu = SparseLu::factor(&a).unwrap();
        let x = lu.solve(&[3.0, 6.0]).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-14 && (x[1] - 2.0).abs() < 1e-14);
        assert_eq!(a.mul_vec(&x), vec![3.0, 6.0]);
    }

    #[test]
    fn eigenvalues_are_sorted() {
        let a = Mat::<f64>::from_fn(3, 3, |i, j| if i == j { [1.0, 5.0, -2.0][i] } else { 0.0 });
        let ev = eigenvalues_sorted(&a).unwrap();
        let re: Vec<f64> = ev.iter().map(|z| z.re).collect();
        assert_eq!(re, vec![5.0, 1.0, -2.0]);
    }

    #[test]
    fn smallest_singular_of_diagonal() {
        let a = Mat::<f64>::from_fn(3, 3, |i, j| if i == j { [1.0, 1e-3, 4.0][i] } else { 0.0 });
        let (s, v) = smallest_singular(&a).unwrap();
        assert!((s - 1e-3).abs() < 1e-15);
        assert!((v[1].abs() - 1.0).abs() < 1e-12);
    }
}
