//! QR orthonormalization, cyclic Jacobi eigen for small symmetric matrices,
//! and singular values through the Gram matrix. The spectra this crate works
//! with are k x k for k << n, so the simple algorithms are the right ones.

use crate::matrix::{norm, Matrix};
use crate::{Error, Result};

/// Relative pivot threshold below which a column is declared dependent.
const RANK_TOL: f64 = 1e-12;

/// Householder reflectors of M (rows >= cols), with the R diagonal kept
/// signed; used to build both the thin Q and the orthogonal complement.
struct HouseholderQr {
    /// reflector vectors, v[j] has length rows-j
    vs: Vec<Vec<f64>>,
    /// signed diagonal of R
    rdiag: Vec<f64>,
    rows: usize,
}

fn householder_factor(m: &Matrix) -> HouseholderQr {
    let (rows, cols) = (m.rows(), m.cols());
    assert!(rows >= cols, "householder needs rows >= cols");
    let mut a = m.clone();
    let mut vs = Vec::with_capacity(cols);
    let mut rdiag = Vec::with_capacity(cols);
    for j in 0..cols {
        // column tail a[j.., j]
        let mut v: Vec<f64> = (j..rows).map(|i| a[(i, j)]).collect();
        let alpha = norm(&v);
        let pivot = if v[0] >= 0.0 { -alpha } else { alpha };
        rdiag.push(pivot);
        if alpha == 0.0 {
            vs.push(vec![0.0; rows - j]);
            continue;
        }
        v[0] -= pivot;
        let vnorm = norm(&v);
        if vnorm > 0.0 {
            for x in v.iter_mut() {
                *x /= vnorm;
            }
        }
        // apply reflector to remaining columns
        for c in j..cols {
            let mut s = 0.0;
            for (offset, vi) in v.iter().enumerate() {
                s += vi * a[(j + offset, c)];
            }
            s *= 2.0;
            for (offset, vi) in v.iter().enumerate() {
                a[(j + offset, c)] -= s * vi;
            }
        }
        vs.push(v);
    }
    HouseholderQr { vs, rdiag, rows }
}

impl HouseholderQr {
    /// Apply Q (the product of reflectors) to the standard basis column e_j,
    /// producing the j-th column of the full Q factor.
    fn q_column(&self, j: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.rows];
        x[j] = 1.0;
        for (p, v) in self.vs.iter().enumerate().rev() {
            let mut s = 0.0;
            for (offset, vi) in v.iter().enumerate() {
                s += vi * x[p + offset];
            }
            s *= 2.0;
            for (offset, vi) in v.iter().enumerate() {
                x[p + offset] -= s * vi;
            }
        }
        x
    }
}

/// Orthonormal basis of the column span of `m` via Householder QR.
///
/// The triangular diagonal is made nonnegative by flipping column signs, so a
/// Gaussian input yields a Haar-distributed frame. Errors if a pivot falls
/// below `1e-12` times the largest column norm.
pub fn orthonormalize(m: &Matrix) -> Result<Matrix> {
    let (rows, cols) = (m.rows(), m.cols());
    if rows < cols {
        return Err(Error::DimensionMismatch(format!(
            "orthonormalize needs rows >= cols, got {rows}x{cols}"
        )));
    }
    let scale = (0..cols)
        .map(|j| norm(&m.col(j)))
        .fold(0.0f64, f64::max);
    let qr = householder_factor(m);
    for d in &qr.rdiag {
        if d.abs() < RANK_TOL * scale {
            return Err(Error::DegenerateInput(format!(
                "rank-deficient input: |R[{}]| = {:.3e} below {:.3e}",
                qr.rdiag.iter().position(|x| x == d).unwrap_or(0),
                d.abs(),
                RANK_TOL * scale
            )));
        }
    }
    let mut q = Matrix::zeros(rows, cols);
    for j in 0..cols {
        let col = qr.q_column(j);
        // flip so the corresponding R diagonal entry is positive
        let sign = if qr.rdiag[j] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..rows {
            q[(i, j)] = sign * col[i];
        }
    }
    Ok(q)
}

/// Orthonormal basis of the orthogonal complement of the column span of an
/// n x d orthonormal `basis`: the trailing n-d columns of the full Q factor.
pub fn complement_basis(basis: &Matrix) -> Matrix {
    let (rows, cols) = (basis.rows(), basis.cols());
    let qr = householder_factor(basis);
    let mut out = Matrix::zeros(rows, rows - cols);
    for j in cols..rows {
        let col = qr.q_column(j);
        for i in 0..rows {
            out[(i, j - cols)] = col[i];
        }
    }
    out
}

/// Eigen decomposition of a small symmetric matrix by cyclic Jacobi
/// rotations. Returns ascending eigenvalues and the matching eigenvector
/// columns. Errors if the input is not symmetric to `1e-12` relative.
pub fn symmetric_eigen(s: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let n = s.rows();
    if s.cols() != n {
        return Err(Error::DimensionMismatch("symmetric_eigen needs a square matrix".into()));
    }
    let scale = s.max_abs().max(f64::MIN_POSITIVE);
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            asym = asym.max((s[(i, j)] - s[(j, i)]).abs());
        }
    }
    if asym > 1e-12 * scale {
        return Err(Error::NotSymmetric(asym / scale));
    }

    let mut a = s.clone();
    let mut v = Matrix::identity(n);
    let max_sweeps = 60;
    for _ in 0..max_sweeps {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(a[(i, j)].abs());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-18 * scale {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sgn = t * c;
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = c * aip - sgn * aiq;
                    a[(i, q)] = sgn * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = c * apj - sgn * aqj;
                    a[(q, j)] = sgn * apj + c * aqj;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip - sgn * viq;
                    v[(i, q)] = sgn * vip + c * viq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok((values, vectors))
}

/// Singular values of `m` (cols <= rows), ascending, via the eigenvalues of
/// the Gram matrix m^T m. Adequate here because every spectrum this crate
/// consumes lives in [0, 1] and cols is small.
pub fn singular_values_small(m: &Matrix) -> Result<Vec<f64>> {
    if m.cols() > m.rows() {
        return Err(Error::DimensionMismatch("singular_values_small needs cols <= rows".into()));
    }
    let (values, _) = symmetric_eigen(&m.gram())?;
    Ok(values.into_iter().map(|v| v.max(0.0).sqrt()).collect())
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(s: &Matrix) -> Result<Matrix> {
    let n = s.rows();
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = s[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(Error::DegenerateInput(format!(
                        "cholesky pivot {sum:.3e} at {i}"
                    )));
                }
                l[(i, i)] = sum.sqrt();
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    Ok(l)
}

/// Cholesky that tolerates a positive *semi*definite input: a pivot within
/// roundoff of zero zeroes out its row instead of failing. Needed when a
/// subspace is exactly orthogonal to some coordinate directions.
pub fn cholesky_semidefinite(s: &Matrix) -> Matrix {
    let n = s.rows();
    let scale = s.max_abs().max(f64::MIN_POSITIVE);
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = s[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                l[(i, i)] = if sum > 1e-14 * scale { sum.sqrt() } else { 0.0 };
            } else {
                l[(i, j)] = if l[(j, j)] > 0.0 { sum / l[(j, j)] } else { 0.0 };
            }
        }
    }
    l
}

/// Solve L x = b for lower-triangular L (zero diagonal entries propagate 0).
pub fn solve_lower(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut x = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for j in 0..i {
            s -= l[(i, j)] * x[j];
        }
        x[i] = if l[(i, i)] != 0.0 { s / l[(i, i)] } else { 0.0 };
    }
    x
}

/// Symmetric whitening C = L^-1 A L^-T for the generalized eigenproblem
/// A v = mu (A + B) v with L = chol(A + B).
pub fn whiten_symmetric(a: &Matrix, l: &Matrix) -> Matrix {
    let n = a.rows();
    // first W = L^-1 A  (solve L W = A column-wise on rows)
    let mut w = Matrix::zeros(n, n);
    for j in 0..n {
        let col: Vec<f64> = (0..n).map(|i| a[(i, j)]).collect();
        let x = solve_lower(l, &col);
        for i in 0..n {
            w[(i, j)] = x[i];
        }
    }
    // then C = W L^-T, i.e. solve L C^T = W^T
    let mut c = Matrix::zeros(n, n);
    for i in 0..n {
        let row: Vec<f64> = (0..n).map(|j| w[(i, j)]).collect();
        let x = solve_lower(l, &row);
        for j in 0..n {
            c[(i, j)] = x[j];
        }
    }
    // symmetrize roundoff
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = m;
            c[(j, i)] = m;
        }
    }
    c
}
