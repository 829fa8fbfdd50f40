//! Conjugate gradient squared solver and dense condition numbers.

use nalgebra::DMatrix;
use nalgebra_sparse::CsrMatrix;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverSettings {
    /// Relative residual `|M x - b| / |b|` to reach.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 500,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final relative residual, recomputed from `x`.
    pub residual: f64,
    /// Relative residual after each iteration.
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn matvec(m: &CsrMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; m.nrows()];
    for (i, row) in m.row_iter().enumerate() {
        y[i] = row.col_indices().iter().zip(row.values()).map(|(&j, v)| v * x[j]).sum();
    }
    y
}

fn true_residual(m: &CsrMatrix<f64>, x: &[f64], b: &[f64]) -> Vec<f64> {
    matvec(m, x).iter().zip(b).map(|(ax, bi)| bi - ax).collect()
}

/// Solves `m x = b` by conjugate gradient squared from `x = 0`.
///
/// When the recursively updated residual reaches the tolerance the true
/// residual is recomputed; if it is still too large the iteration restarts
/// from it.
pub fn solve_cgs(m: &CsrMatrix<f64>, b: &[f64], settings: &SolverSettings) -> Result<SolveReport> {
    let n = m.nrows();
    if m.ncols() != n || b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} system with right-hand side of length {}",
            m.nrows(),
            m.ncols(),
            b.len()
        )));
    }
    let b_norm = norm(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(SolveReport {
            x,
            iterations: 0,
            residual: 0.0,
            history: Vec::new(),
        });
    }
    let mut history = Vec::new();
    let mut r = b.to_vec();
    let mut iterations = 0;
    'restart: loop {
        let shadow = r.clone();
        let mut rho_prev = 1.0;
        let mut p = vec![0.0; n];
        let mut q = vec![0.0; n];
        let mut u = vec![0.0; n];
        let mut first = true;
        while iterations < settings.max_iter {
            iterations += 1;
            let rho = dot(&shadow, &r);
            if rho.abs() <= 1e-300 || rho.abs() < 1e-30 * norm(&shadow) * norm(&r) {
                return Err(Error::SolverBreakdown {
                    iterations,
                    residual: norm(&r) / b_norm,
                });
            }
            if first {
                u.copy_from_slice(&r);
                p.copy_from_slice(&r);
                first = false;
            } else {
                let beta = rho / rho_prev;
                for i in 0..n {
                    u[i] = r[i] + beta * q[i];
                    p[i] = u[i] + beta * (q[i] + beta * p[i]);
                }
            }
            let v = matvec(m, &p);
            let sigma = dot(&shadow, &v);
            if sigma == 0.0 {
                return Err(Error::SolverBreakdown {
                    iterations,
                    residual: norm(&r) / b_norm,
                });
            }
            let alpha = rho / sigma;
            let mut uq = vec![0.0; n];
            for i in 0..n {
                q[i] = u[i] - alpha * v[i];
                uq[i] = u[i] + q[i];
                x[i] += alpha * uq[i];
            }
            let auq = matvec(m, &uq);
            for i in 0..n {
                r[i] -= alpha * auq[i];
            }
            let rel = norm(&r) / b_norm;
            history.push(rel);
            if rel <= settings.tol {
                r = true_residual(m, &x, b);
                let actual = norm(&r) / b_norm;
                if actual <= settings.tol {
                    return Ok(SolveReport {
                        x,
                        iterations,
                        residual: actual,
                        history,
                    });
                }
                continue 'restart;
            }
            rho_prev = rho;
        }
        let residual = norm(&true_residual(m, &x, b)) / b_norm;
        return Err(Error::SolverMaxIterations { iterations, residual });
    }
}

/// Dense LU solve, used as an oracle for the iterative solver.
pub fn solve_dense(m: &CsrMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let dense = DMatrix::from(m);
    let rhs = nalgebra::DVector::from_column_slice(b);
    dense
        .lu()
        .solve(&rhs)
        .map(|x| x.as_slice().to_vec())
        .ok_or_else(|| Error::DimensionMismatch("singular matrix".into()))
}

/// Two-norm condition number `sigma_max / sigma_min` from a dense singular
/// value decomposition; `+inf` when `sigma_min < 1e-14 sigma_max`.
pub fn condition_number(m: &CsrMatrix<f64>) -> f64 {
    condition_number_dense(DMatrix::from(m))
}

pub fn condition_number_dense(m: DMatrix<f64>) -> f64 {
    let s = m.singular_values();
    let max = s.iter().copied().fold(0.0, f64::max);
    let min = s.iter().copied().fold(f64::INFINITY, f64::min);
    if max == 0.0 || min < 1e-14 * max {
        f64::INFINITY
    } else {
        max / min
    }
}
