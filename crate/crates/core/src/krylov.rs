//! Lanczos approximation of `exp(-i H dt) v` for sparse Hermitian `H`.

use nalgebra::DMatrix;

use crate::error::{LabError, Result};
use crate::linalg::{eigh_real, vec_norm, CVec, C64, ZERO};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOptions {
    /// A posteriori error allowed per exponential action.
    pub tolerance: f64,
    pub max_dim: usize,
    /// Times a non-converged step may be halved before giving up.
    pub max_splits: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions {
            tolerance: 1e-12,
            max_dim: 40,
            max_splits: 12,
        }
    }
}

/// `exp(-i T dt) e₁` for the real symmetric tridiagonal `T`.
fn tridiagonal_exp(alpha: &[f64], beta: &[f64], dt: f64) -> Vec<C64> {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let (values, vectors) = eigh_real(&t);
    (0..m)
        .map(|r| {
            (0..m)
                .map(|k| {
                    let q = vectors[(r, k)] * vectors[(0, k)];
                    C64::from_polar(q, -values[k] * dt)
                })
                .sum()
        })
        .collect()
}

/// One Lanczos pass; `Ok(None)` when `max_dim` vectors do not reach the
/// tolerance.
fn lanczos_pass(h: &SparseMatrix, v: &CVec, dt: f64, opts: &KrylovOptions) -> Result<Option<CVec>> {
    let n = h.dim();
    let norm = vec_norm(v);
    if norm == 0.0 {
        return Ok(Some(v.clone()));
    }
    let max_dim = opts.max_dim.min(n).max(1);
    let mut basis: Vec<CVec> = vec![v / C64::new(norm, 0.0)];
    let mut alpha = Vec::with_capacity(max_dim);
    let mut beta: Vec<f64> = Vec::with_capacity(max_dim);
    let mut w = CVec::zeros(n);
    loop {
        let j = basis.len() - 1;
        h.hermitian_matvec_sparse_input(basis[j].as_slice(), w.as_mut_slice());
        let a = basis[j].dotc(&w).re;
        alpha.push(a);
        // Full reorthogonalization: the subspace is small and this keeps the
        // Lanczos vectors orthonormal to rounding.
        for _ in 0..2 {
            for q in &basis {
                let c = q.dotc(&w);
                w.axpy(-c, q, C64::new(1.0, 0.0));
            }
        }
        let b = vec_norm(&w);
        let coeffs = tridiagonal_exp(&alpha, &beta, dt);
        let exhausted = b <= 1e-13 * (1.0 + a.abs());
        let estimate = b * coeffs[j].norm() * norm;
        if exhausted || estimate <= opts.tolerance {
            let mut out = CVec::zeros(n);
            for (q, c) in basis.iter().zip(&coeffs) {
                out.axpy(*c * norm, q, C64::new(1.0, 0.0));
            }
            return Ok(Some(out));
        }
        if basis.len() >= max_dim {
            return Ok(None);
        }
        beta.push(b);
        basis.push(&w / C64::new(b, 0.0));
        w.fill(ZERO);
    }
}

fn expm_action_split(h: &SparseMatrix, v: &CVec, dt: f64, opts: &KrylovOptions, depth: usize) -> Result<CVec> {
    if let Some(out) = lanczos_pass(h, v, dt, opts)? {
        return Ok(out);
    }
    if depth >= opts.max_splits {
        return Err(LabError::NonConvergence {
            achieved: f64::NAN,
            wanted: opts.tolerance,
        });
    }
    let half = expm_action_split(h, v, 0.5 * dt, opts, depth + 1)?;
    expm_action_split(h, &half, 0.5 * dt, opts, depth + 1)
}

/// `exp(-i H dt) v`. `H` must be Hermitian; non-convergence of the subspace
/// is handled by halving `dt`.
pub fn expm_action(h: &SparseMatrix, v: &CVec, dt: f64, opts: &KrylovOptions) -> Result<CVec> {
    if h.dim() != v.len() {
        return Err(LabError::Shape(format!("operator dim {} vs state dim {}", h.dim(), v.len())));
    }
    if dt == 0.0 {
        return Ok(v.clone());
    }
    expm_action_split(h, v, dt, opts, 0)
}
