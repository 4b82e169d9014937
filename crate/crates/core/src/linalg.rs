//! Minimal dense linear algebra: Cholesky solve for small SPD systems.
//!
//! Kernel Gram matrices are symmetric positive semi-definite; a tiny diagonal
//! ridge makes them definite enough to factor. Matrices here are at most a few
//! hundred rows (one per control point), so a plain O(n³) factorization is
//! both fast enough and bit-deterministic.

use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};

/// Solves `A x = b` for each of the `D` columns packed in `rhs`, where `a` is
/// a symmetric positive (semi-)definite `n × n` matrix in row-major order.
///
/// A ridge of `1e-10 × max diagonal` is added before factoring; kernel Gram
/// matrices have unit diagonal so this perturbs solutions negligibly while
/// keeping the factorization stable.
pub(crate) fn solve_spd<const D: usize>(
    a: &[f64],
    rhs: &[[f64; D]],
) -> Result<Vec<[f64; D]>> {
    let n = rhs.len();
    assert_eq!(a.len(), n * n, "matrix shape must match right-hand side");

    let mut max_diag = 0.0f64;
    for i in 0..n {
        max_diag = max_diag.max(a[i * n + i].abs());
    }
    let ridge = 1e-10 * max_diag.max(1.0);

    // lower-triangular factor L with A + ridge·I = L Lᵀ
    let mut l = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            if i == j {
                sum += ridge;
            }
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return Err(Error::NonFiniteInput { what: "kernel matrix factorization" });
                }
                l[i * n + j] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }

    // forward then backward substitution, one dimension at a time
    let mut out = vec![[0.0; D]; n];
    let mut y = vec![0.0f64; n];
    for d in 0..D {
        for i in 0..n {
            let mut sum = rhs[i][d];
            for k in 0..i {
                sum -= l[i * n + k] * y[k];
            }
            y[i] = sum / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut sum = y[i];
            for k in i + 1..n {
                sum -= l[k * n + i] * out[k][d];
            }
            out[i][d] = sum / l[i * n + i];
        }
    }
    Ok(out)
}
