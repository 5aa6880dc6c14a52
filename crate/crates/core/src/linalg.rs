//! Symmetric eigendecomposition by cyclic Jacobi rotations.
//!
//! Row-cyclic sweeps annihilate each off-diagonal entry in turn; once the
//! off-diagonal mass is small the process converges quadratically, so the
//! sweep cap is generous rather than tight. Output order and eigenvector
//! signs are fixed deterministically: eigenvalues descending, and in each
//! eigenvector the first component of largest magnitude is made positive.

use crate::error::{Error, Result};
use ndarray::Array2;

/// Frobenius norm of the off-diagonal part at which iteration stops.
const OFF_DIAGONAL_TOLERANCE: f64 = 1e-12;
const MAX_SWEEPS: usize = 60;

#[derive(Debug, Clone)]
pub(crate) struct SymmetricEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, ordered like `values`.
    pub vectors: Array2<f64>,
}

/// Decomposes a symmetric matrix. Only the stored values are used; the
/// caller must pass a matrix that is symmetric to working precision.
pub(crate) fn eigh(matrix: &Array2<f64>) -> Result<SymmetricEigen> {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "eigh needs a square matrix");
    if n == 0 {
        return Ok(SymmetricEigen { values: Vec::new(), vectors: Array2::zeros((0, 0)) });
    }

    let mut a = matrix.clone();
    let mut v = Array2::<f64>::eye(n);
    let mut off = off_norm(&a);

    for _ in 0..MAX_SWEEPS {
        if off <= OFF_DIAGONAL_TOLERANCE {
            return Ok(collect(&a, v));
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                // Smaller-angle root of t² + 2θt − 1 = 0; hypot keeps the
                // discriminant finite for extreme θ.
                let t = if theta >= 0.0 {
                    1.0 / (theta + theta.hypot(1.0))
                } else {
                    -1.0 / (-theta + theta.hypot(1.0))
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a[[p, p]] -= t * apq;
                a[[q, q]] += t * apq;
                a[[p, q]] = 0.0;
                a[[q, p]] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[[r, p]];
                    let arq = a[[r, q]];
                    a[[r, p]] = arp - s * (arq + tau * arp);
                    a[[p, r]] = a[[r, p]];
                    a[[r, q]] = arq + s * (arp - tau * arq);
                    a[[q, r]] = a[[r, q]];
                }
                for r in 0..n {
                    let vrp = v[[r, p]];
                    let vrq = v[[r, q]];
                    v[[r, p]] = vrp - s * (vrq + tau * vrp);
                    v[[r, q]] = vrq + s * (vrp - tau * vrq);
                }
            }
        }
        off = off_norm(&a);
    }

    Err(Error::NoConvergence {
        what: "jacobi eigensolver".into(),
        residual: off,
        iterations: MAX_SWEEPS,
    })
}

fn off_norm(a: &Array2<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            sum += a[[i, j]] * a[[i, j]];
        }
    }
    (2.0 * sum).sqrt()
}

fn collect(a: &Array2<f64>, v: Array2<f64>) -> SymmetricEigen {
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    // Descending by eigenvalue; stable on ties so degenerate spectra come
    // out in a reproducible order.
    order.sort_by(|&i, &j| a[[j, j]].partial_cmp(&a[[i, i]]).unwrap());

    let mut values = Vec::with_capacity(n);
    let mut vectors = Array2::<f64>::zeros((n, n));
    for (k, &src) in order.iter().enumerate() {
        values.push(a[[src, src]]);
        let mut max_abs = 0.0;
        let mut max_row = 0;
        for r in 0..n {
            let x = v[[r, src]].abs();
            if x > max_abs {
                max_abs = x;
                max_row = r;
            }
        }
        let flip = if v[[max_row, src]] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..n {
            vectors[[r, k]] = flip * v[[r, src]];
        }
    }
    SymmetricEigen { values, vectors }
}
