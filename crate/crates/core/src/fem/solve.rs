use std::sync::Arc;

use faer::prelude::*;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, SymbolicSparseColMat};

use super::sparse::{Pattern, SparseMatrix};
use crate::{Error, Result};

/// Systems up to this many unknowns use sparse LU; larger ones BiCGSTAB.
pub const DIRECT_SOLVE_LIMIT: usize = 50_000;

const MAX_ITERATIONS: usize = 20_000;
const REFINEMENT_STEPS: usize = 3;

/// Sparse solver that caches the symbolic LU analysis for the last seen
/// sparsity pattern. Every step of a run reuses one pattern, so only the
/// numeric factorization is repeated.
pub struct LinearSolver {
    rel_tol: f64,
    cached: Option<(Arc<Pattern>, SymbolicSparseColMat<usize>, SymbolicLu<usize>)>,
}

impl LinearSolver {
    pub fn new(rel_tol: f64) -> Self {
        faer::set_global_parallelism(faer::Par::Seq);
        Self { rel_tol, cached: None }
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    /// Solves `A x = b` and checks `‖Ax − b‖ ≤ rel_tol ‖b‖` a posteriori.
    pub fn solve(&mut self, a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != a.n() {
            return Err(Error::LengthMismatch {
                expected: a.n(),
                got: b.len(),
            });
        }
        let b_norm = norm(b);
        if b_norm == 0.0 {
            return Ok(vec![0.0; a.n()]);
        }
        if a.n() > DIRECT_SOLVE_LIMIT {
            return bicgstab(a, b, self.rel_tol);
        }
        let lu = self.factor(a)?;
        let solve = |rhs: &[f64]| {
            let mut m = Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
            // The CSR arrays of A read as CSC describe Aᵀ.
            lu.solve_transpose_in_place(m.as_mut());
            (0..rhs.len()).map(|i| m[(i, 0)]).collect::<Vec<f64>>()
        };
        let mut x = solve(b);
        let mut res = residual(a, &x, b);
        for _ in 0..REFINEMENT_STEPS {
            if norm(&res) <= self.rel_tol * b_norm {
                break;
            }
            let dx = solve(&res);
            x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
            res = residual(a, &x, b);
        }
        let rel = norm(&res) / b_norm;
        if !(rel <= self.rel_tol) {
            return Err(Error::NotConverged {
                iterations: REFINEMENT_STEPS,
                residual: rel,
            });
        }
        Ok(x)
    }

    fn factor(&mut self, a: &SparseMatrix) -> Result<Lu<usize, f64>> {
        let fresh = !matches!(&self.cached, Some((p, _, _)) if Arc::ptr_eq(p, a.pattern()) || **p == **a.pattern());
        if fresh {
            let n = a.n();
            let symbolic = SymbolicSparseColMat::new_checked(n, n, a.row_ptr().to_vec(), None, a.col_idx().to_vec());
            let lu = SymbolicLu::try_new(symbolic.as_ref()).map_err(|e| Error::Solver(format!("{e:?}")))?;
            self.cached = Some((a.pattern().clone(), symbolic, lu));
        }
        let (_, symbolic, sym_lu) = self.cached.as_ref().expect("cached above");
        let mat = SparseColMat::new(symbolic.clone(), a.values().to_vec());
        Lu::try_new_with_symbolic(sym_lu.clone(), mat.as_ref()).map_err(|e| Error::Solver(format!("{e:?}")))
    }
}

/// One-shot solve with a fresh [`LinearSolver`].
pub fn solve_sparse(a: &SparseMatrix, b: &[f64], rel_tol: f64) -> Result<Vec<f64>> {
    LinearSolver::new(rel_tol).solve(a, b)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    a.mul_vec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect()
}

/// Jacobi-preconditioned BiCGSTAB for nonsymmetric systems.
pub(crate) fn bicgstab(a: &SparseMatrix, b: &[f64], rel_tol: f64) -> Result<Vec<f64>> {
    let n = a.n();
    let inv_diag: Vec<f64> = (0..n)
        .map(|i| {
            let d = a.get(i, i);
            if d != 0.0 {
                1.0 / d
            } else {
                1.0
            }
        })
        .collect();
    let precond = |v: &[f64]| -> Vec<f64> { v.iter().zip(&inv_diag).map(|(x, d)| x * d).collect() };
    let b_norm = norm(b);
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for it in 0..MAX_ITERATIONS {
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 {
            return Err(Error::NotConverged {
                iterations: it,
                residual: norm(&r) / b_norm,
            });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let p_hat = precond(&p);
        v = a.mul_vec(&p_hat);
        alpha = rho / dot(&r_hat, &v);
        let s: Vec<f64> = r.iter().zip(&v).map(|(ri, vi)| ri - alpha * vi).collect();
        if norm(&s) <= rel_tol * b_norm {
            x.iter_mut().zip(&p_hat).for_each(|(xi, pi)| *xi += alpha * pi);
            return Ok(x);
        }
        let s_hat = precond(&s);
        let t = a.mul_vec(&s_hat);
        omega = dot(&t, &s) / dot(&t, &t);
        for i in 0..n {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
            r[i] = s[i] - omega * t[i];
        }
        if norm(&r) <= rel_tol * b_norm {
            let true_res = norm(&residual(a, &x, b)) / b_norm;
            if true_res <= rel_tol {
                return Ok(x);
            }
            r = residual(a, &x, b);
        }
    }
    Err(Error::NotConverged {
        iterations: MAX_ITERATIONS,
        residual: norm(&residual(a, &x, b)) / b_norm,
    })
}
