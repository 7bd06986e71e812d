//! Direct sparse solves through faer's sparse LU.

use faer::sparse::{SparseColMat, Triplet};
use faer::linalg::solvers::Solve;
use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::sparse::CsrMatrix;

/// Relative residual accepted after the solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

/// Solves `A x = b` by sparse LU with two steps of iterative refinement and
/// checks `‖Ax − b‖ ≤ 1e-9 ‖b‖`. `label` identifies the caller in errors.
pub fn linear_solve(a: &CsrMatrix, b: &[f64], label: &str) -> Result<Vec<f64>> {
    let n = a.nrows();
    let fail = |reason: String| Error::LinearSolve {
        scheme: label.to_string(),
        reason,
    };
    if a.ncols() != n || b.len() != n {
        return Err(fail(format!("shape mismatch: {}x{} matrix, rhs of length {}", n, a.ncols(), b.len())));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if let Some(i) = b.iter().position(|x| !x.is_finite()) {
        return Err(fail(format!("non-finite right-hand side at row {i}")));
    }
    let mut row_seen = vec![false; n];
    let mut trip = Vec::with_capacity(a.nnz());
    for (i, j, v) in a.iter() {
        if !v.is_finite() {
            return Err(fail(format!("non-finite matrix entry at ({i}, {j})")));
        }
        if v != 0.0 {
            row_seen[i] = true;
        }
        trip.push(Triplet::new(i, j, v));
    }
    if let Some(i) = row_seen.iter().position(|&s| !s) {
        return Err(fail(format!("structurally singular: row {i} is empty")));
    }
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip).map_err(|e| fail(format!("{e:?}")))?;
    let lu = mat.sp_lu().map_err(|e| fail(format!("factorization failed: {e:?}")))?;

    let bnorm = norm2(b);
    let rhs = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
    let sol = lu.solve(&rhs);
    let mut x: Vec<f64> = (0..n).map(|i| sol[(i, 0)]).collect();
    let mut res = residual(a, &x, b);
    for _ in 0..2 {
        if norm2(&res) <= 1e-14 * bnorm {
            break;
        }
        let r = Mat::<f64>::from_fn(n, 1, |i, _| res[i]);
        let dx = lu.solve(&r);
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += dx[(i, 0)];
        }
        res = residual(a, &x, b);
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(fail(format!("numerically singular: non-finite solution at index {i}")));
    }
    let rel = if bnorm > 0.0 { norm2(&res) / bnorm } else { norm2(&res) };
    if rel > RESIDUAL_TOLERANCE {
        let worst = res
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        return Err(fail(format!("relative residual {rel:.3e} exceeds {RESIDUAL_TOLERANCE:e} (largest at row {worst})")));
    }
    Ok(x)
}

fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    a.mul_vec(x).iter().zip(b).map(|(ax, bi)| ax - bi).collect()
}
