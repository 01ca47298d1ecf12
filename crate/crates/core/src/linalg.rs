//! Factorizations backing the metric and Hodge solvers.
//!
//! Sparse LU and Cholesky come from `faer`; small dense symmetric eigenproblems
//! (Rayleigh–Ritz projections) use `nalgebra`.

use crate::error::{HodgeError, Result};
use crate::sparse::CsrMatrix;
use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use nalgebra::{DMatrix, SymmetricEigen};

fn to_faer(m: &CsrMatrix<f64>) -> Result<SparseColMat<usize, f64>> {
    let triplets: Vec<Triplet<usize, usize, f64>> = m
        .triplets()
        .map(|(i, j, v)| Triplet::new(i, j, v))
        .collect();
    SparseColMat::try_new_from_triplets(m.nrows(), m.ncols(), &triplets).map_err(|e| {
        HodgeError::Numerical {
            what: format!("sparse assembly: {e:?}"),
            residual: f64::NAN,
        }
    })
}

fn column_matrix(columns: &[Vec<f64>], n: usize) -> Mat<f64> {
    Mat::from_fn(n, columns.len(), |i, j| columns[j][i])
}

fn matrix_columns(m: &Mat<f64>) -> Vec<Vec<f64>> {
    (0..m.ncols()).map(|j| m.col_as_slice(j).to_vec()).collect()
}

/// Sparse LU factorization with partial pivoting of a square matrix.
pub struct SparseLu {
    lu: Lu<usize, f64>,
    n: usize,
}

impl SparseLu {
    pub fn factor(m: &CsrMatrix<f64>, what: &str) -> Result<Self> {
        assert_eq!(m.nrows(), m.ncols(), "LU of a non-square matrix");
        let lu = to_faer(m)?.sp_lu().map_err(|e| HodgeError::Numerical {
            what: format!("{what}: LU factorization failed ({e:?})"),
            residual: f64::NAN,
        })?;
        Ok(Self { lu, n: m.nrows() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        self.solve_columns(std::slice::from_ref(&rhs.to_vec()))
            .pop()
            .expect("one column in, one column out")
    }

    pub fn solve_columns(&self, rhs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut b = column_matrix(rhs, self.n);
        self.lu.solve_in_place(&mut b);
        matrix_columns(&b)
    }
}

/// Solver for symmetric positive-definite systems; diagonal matrices are
/// inverted entrywise.
pub enum SpdSolver {
    Diagonal(Vec<f64>),
    Cholesky { llt: Llt<usize, f64>, n: usize },
}

impl SpdSolver {
    pub fn factor(m: &CsrMatrix<f64>) -> std::result::Result<Self, String> {
        let n = m.nrows();
        let is_diagonal = m.triplets().all(|(i, j, _)| i == j);
        if is_diagonal {
            let diag: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
            if let Some(i) = diag.iter().position(|d| !(*d > 0.0)) {
                return Err(format!("diagonal entry {i} is {}", diag[i]));
            }
            return Ok(SpdSolver::Diagonal(diag));
        }
        let llt = to_faer(m)
            .map_err(|e| e.to_string())?
            .sp_cholesky(Side::Lower)
            .map_err(|e| format!("Cholesky factorization failed ({e:?})"))?;
        Ok(SpdSolver::Cholesky { llt, n })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        match self {
            SpdSolver::Diagonal(d) => rhs.iter().zip(d).map(|(b, d)| b / d).collect(),
            SpdSolver::Cholesky { llt, n } => {
                let mut b = column_matrix(std::slice::from_ref(&rhs.to_vec()), *n);
                llt.solve_in_place(&mut b);
                b.col_as_slice(0).to_vec()
            }
        }
    }
}

/// Eigenpairs of the symmetric-definite pencil `(a, b)` in ascending order.
///
/// Returns `None` when `b` is not numerically positive definite.
pub fn generalized_symmetric_eigen(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Option<(Vec<f64>, DMatrix<f64>)> {
    let sym = |m: &DMatrix<f64>| (m + m.transpose()) * 0.5;
    let chol = sym(b).cholesky()?;
    let l = chol.l();
    let l_inv = l.clone().try_inverse()?;
    let c = sym(&(&l_inv * sym(a) * l_inv.transpose()));
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let y = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    Some((values, l_inv.transpose() * y))
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Least-squares slope of `log(y)` against `log(x)` and the root-mean-square
/// residual of the fit. Requires at least two positive points.
pub fn fit_log_slope(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 || pts.len() != x.len() {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let rms = (pts
        .iter()
        .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Some((slope, rms))
}
