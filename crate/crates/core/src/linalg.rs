//! Dense and tridiagonal symmetric eigensolvers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Result, WeylError};

/// Eigenvalues (ascending) of the symmetric tridiagonal matrix with diagonal
/// `diag` and off-diagonal `off` (`off.len() == diag.len() - 1`), together with
/// the rows `tracked` of the orthogonal eigenvector matrix.
///
/// `tracked` lists row indices of the eigenvector matrix to return; the
/// spectral measure of `δ₁` only needs row 0, which keeps the cost at
/// `O(n²)` instead of `O(n³)`.
pub struct TridiagEigen {
    pub values: Vec<f64>,
    /// `rows[r][k]` is component `tracked[r]` of the `k`-th eigenvector.
    pub rows: Vec<Vec<f64>>,
}

/// Implicit QL with Wilkinson-type shifts.
pub fn tridiag_eigen(diag: &[f64], off: &[f64], tracked: &[usize]) -> Result<TridiagEigen> {
    let n = diag.len();
    if n == 0 {
        return Ok(TridiagEigen {
            values: vec![],
            rows: vec![],
        });
    }
    if off.len() + 1 != n {
        return Err(WeylError::domain("off-diagonal length must be n - 1"));
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    let mut z: Vec<Vec<f64>> = tracked
        .iter()
        .map(|&r| {
            let mut row = vec![0.0; n];
            row[r] = 1.0;
            row
        })
        .collect();

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(WeylError::Conditioning(
                    "tridiagonal QL failed to converge".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in z.iter_mut() {
                    let f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&k| d[k]).collect();
    let rows = z
        .iter()
        .map(|row| order.iter().map(|&k| row[k]).collect())
        .collect();
    Ok(TridiagEigen { values, rows })
}

/// Eigenvalues only of a symmetric tridiagonal matrix.
pub fn tridiag_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    Ok(tridiag_eigen(diag, off, &[])?.values)
}

/// Number of eigenvalues strictly below `x` (Sturm sequence count).
pub fn tridiag_count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let b2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { b2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (diag[i].abs() + x.abs()).max(1e-300);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Dense symmetric eigendecomposition with ascending eigenvalues; columns of
/// the returned matrix are the matching unit eigenvectors.
pub fn sym_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(a.clone());
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (c, &k) in order.iter().enumerate() {
        vecs.set_column(c, &eig.eigenvectors.column(k));
    }
    (values, vecs)
}

/// Solve `(T - z) x = rhs` for symmetric tridiagonal `T` (Thomas algorithm
/// in complex arithmetic; stable for `Im z ≠ 0`).
pub fn tridiag_shifted_solve(
    diag: &[f64],
    off: &[f64],
    z: Complex64,
    rhs: &[Complex64],
) -> Vec<Complex64> {
    let n = diag.len();
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    let mut beta = Complex64::new(diag[0], 0.0) - z;
    d[0] = rhs[0] / beta;
    for i in 1..n {
        c[i - 1] = off[i - 1] / beta;
        beta = Complex64::new(diag[i], 0.0) - z - off[i - 1] * c[i - 1];
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / beta;
    }
    let mut x = d;
    for i in (0..n.saturating_sub(1)).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    x
}

/// Complex inverse of `A - z I` for real symmetric `A`.
pub fn shifted_inverse(a: &DMatrix<f64>, z: Complex64) -> Result<DMatrix<Complex64>> {
    let n = a.nrows();
    let m = DMatrix::from_fn(n, n, |i, j| {
        Complex64::new(a[(i, j)], 0.0) - if i == j { z } else { Complex64::new(0.0, 0.0) }
    });
    m.try_inverse()
        .ok_or_else(|| WeylError::domain("A - z is singular"))
}

/// Solve `(A - z) x = b` for real symmetric `A`.
pub fn shifted_solve(a: &DMatrix<f64>, z: Complex64, b: &DVector<f64>) -> Result<DVector<Complex64>> {
    let n = a.nrows();
    let m = DMatrix::from_fn(n, n, |i, j| {
        Complex64::new(a[(i, j)], 0.0) - if i == j { z } else { Complex64::new(0.0, 0.0) }
    });
    let rhs = b.map(|x| Complex64::new(x, 0.0));
    m.lu()
        .solve(&rhs)
        .ok_or_else(|| WeylError::domain("A - z is singular"))
}

/// Spectral norm of a complex matrix.
pub fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(diag: &[f64], off: &[f64]) -> DMatrix<f64> {
        let n = diag.len();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else if i + 1 == j {
                off[i]
            } else if j + 1 == i {
                off[j]
            } else {
                0.0
            }
        })
    }

    #[test]
    fn ql_matches_dense_solver() {
        let diag = [0.3, -1.2, 2.0, 0.7, 0.0, 1.1];
        let off = [0.9, 0.4, 1.3, 0.2, 0.8];
        let ql = tridiag_eigen(&diag, &off, &[0]).unwrap();
        let (vals, vecs) = sym_eigen(&dense(&diag, &off));
        for k in 0..diag.len() {
            assert!((ql.values[k] - vals[k]).abs() < 1e-13);
            assert!((ql.rows[0][k].abs() - vecs[(0, k)].abs()).abs() < 1e-12);
        }
        let w: f64 = ql.rows[0].iter().map(|x| x * x).sum();
        assert!((w - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sturm_count_agrees_with_eigenvalues() {
        let diag = [1.0, 2.0, 3.0, 4.0];
        let off = [0.5, 0.5, 0.5];
        let vals = tridiag_eigenvalues(&diag, &off).unwrap();
        for (k, &v) in vals.iter().enumerate() {
            assert_eq!(tridiag_count_below(&diag, &off, v - 1e-9), k);
            assert_eq!(tridiag_count_below(&diag, &off, v + 1e-9), k + 1);
        }
    }

    #[test]
    fn thomas_solve_matches_dense() {
        let diag = [0.3, -1.2, 2.0, 0.7];
        let off = [0.9, 0.4, 1.3];
        let z = Complex64::new(0.2, 0.5);
        let rhs = vec![Complex64::new(1.0, 0.0), 0.0.into(), 0.0.into(), 0.0.into()];
        let x = tridiag_shifted_solve(&diag, &off, z, &rhs);
        let inv = shifted_inverse(&dense(&diag, &off), z).unwrap();
        for i in 0..4 {
            assert!((x[i] - inv[(i, 0)]).norm() < 1e-13);
        }
    }
}
