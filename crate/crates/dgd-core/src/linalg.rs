//! Small dense linear algebra: vector arithmetic, Gram matrices, symmetric
//! eigenvalues by cyclic Jacobi rotations and a Cholesky solve. Matrices are
//! row-major `&[f64]` slices; the spectral work here is on matrices of
//! dimension at most a few dozen, so no factorization library is warranted.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use libm::{fabs, sqrt};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinalgError {
    /// Cholesky hit a nonpositive or non-finite pivot.
    NotPositiveDefinite,
    /// Jacobi sweeps did not reduce the off-diagonal mass.
    NoConvergence,
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::NotPositiveDefinite => write!(f, "matrix is not positive definite"),
            LinalgError::NoConvergence => write!(f, "eigenvalue iteration failed to converge"),
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    sqrt(norm_sq(a))
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        acc += d * d;
    }
    acc
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    sqrt(dist_sq(a, b))
}

/// y += alpha * x
pub fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    for i in 0..y.len() {
        y[i] += alpha * x[i];
    }
}

/// A x for a row-major m x d matrix.
pub fn mat_vec(a: &[f64], m: usize, d: usize, x: &[f64]) -> Vec<f64> {
    assert_eq!(a.len(), m * d);
    assert_eq!(x.len(), d);
    let mut out = vec![0.0; m];
    for i in 0..m {
        out[i] = dot(&a[i * d..(i + 1) * d], x);
    }
    out
}

/// A^T r for a row-major m x d matrix.
pub fn mat_t_vec(a: &[f64], m: usize, d: usize, r: &[f64]) -> Vec<f64> {
    assert_eq!(a.len(), m * d);
    assert_eq!(r.len(), m);
    let mut out = vec![0.0; d];
    for i in 0..m {
        let row = &a[i * d..(i + 1) * d];
        axpy(&mut out, r[i], row);
    }
    out
}

/// A^T A, a d x d symmetric matrix.
pub fn gram_t(a: &[f64], m: usize, d: usize) -> Vec<f64> {
    assert_eq!(a.len(), m * d);
    let mut g = vec![0.0; d * d];
    for k in 0..m {
        let row = &a[k * d..(k + 1) * d];
        for i in 0..d {
            for j in i..d {
                g[i * d + j] += row[i] * row[j];
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            g[i * d + j] = g[j * d + i];
        }
    }
    g
}

/// A A^T, an m x m symmetric matrix.
pub fn gram(a: &[f64], m: usize, d: usize) -> Vec<f64> {
    assert_eq!(a.len(), m * d);
    let mut g = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let v = dot(&a[i * d..(i + 1) * d], &a[j * d..(j + 1) * d]);
            g[i * m + j] = v;
            g[j * m + i] = v;
        }
    }
    g
}

fn off_diagonal_sq(a: &[f64], n: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[i * n + j] * a[i * n + j];
            }
        }
    }
    acc
}

/// Eigenvalues of a symmetric matrix, ascending. Cyclic Jacobi; quadratic
/// convergence makes 30 sweeps far more than the tiny sizes here ever need.
pub fn sym_eigenvalues(mat: &[f64], n: usize) -> Result<Vec<f64>, LinalgError> {
    assert_eq!(mat.len(), n * n);
    let mut a = mat.to_vec();
    if n > 1 {
        let frob_sq: f64 = a.iter().map(|v| v * v).sum();
        let stop = f64::EPSILON * f64::EPSILON * (frob_sq + 1.0);
        let mut converged = false;
        for _ in 0..30 {
            if off_diagonal_sq(&a, n) <= stop {
                converged = true;
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let apq = a[p * n + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let app = a[p * n + p];
                    let aqq = a[q * n + q];
                    let theta = (aqq - app) / (2.0 * apq);
                    // Smaller-angle rotation root, stable for large theta.
                    let t = if theta >= 0.0 {
                        1.0 / (theta + sqrt(theta * theta + 1.0))
                    } else {
                        -1.0 / (-theta + sqrt(theta * theta + 1.0))
                    };
                    let c = 1.0 / sqrt(t * t + 1.0);
                    let s = t * c;
                    for r in 0..n {
                        if r == p || r == q {
                            continue;
                        }
                        let arp = a[r * n + p];
                        let arq = a[r * n + q];
                        let new_rp = c * arp - s * arq;
                        let new_rq = s * arp + c * arq;
                        a[r * n + p] = new_rp;
                        a[p * n + r] = new_rp;
                        a[r * n + q] = new_rq;
                        a[q * n + r] = new_rq;
                    }
                    a[p * n + p] = app - t * apq;
                    a[q * n + q] = aqq + t * apq;
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                }
            }
        }
        if !converged && off_diagonal_sq(&a, n) > stop {
            return Err(LinalgError::NoConvergence);
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_unstable_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
    Ok(eig)
}

/// Lower Cholesky factor L with M = L L^T. Failure doubles as the positive
/// definiteness test: a nonpositive pivot means M is not PD.
pub fn cholesky_factor(mat: &[f64], n: usize) -> Result<Vec<f64>, LinalgError> {
    assert_eq!(mat.len(), n * n);
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = mat[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !sum.is_finite() || sum <= 0.0 {
                    return Err(LinalgError::NotPositiveDefinite);
                }
                l[i * n + i] = sqrt(sum);
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// Solves M x = b for symmetric positive definite M via Cholesky.
pub fn cholesky_solve(mat: &[f64], n: usize, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    assert_eq!(b.len(), n);
    let l = cholesky_factor(mat, n)?;
    // Forward then backward substitution.
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * n + k] * y[k];
        }
        y[i] = sum / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l[k * n + i] * x[k];
        }
        x[i] = sum / l[i * n + i];
    }
    Ok(x)
}

/// Largest |entry| of the difference, for closeness checks in tests.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut worst = 0.0;
    for i in 0..a.len() {
        let d = fabs(a[i] - b[i]);
        if d > worst {
            worst = d;
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_ops() {
        assert_eq!(dot(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]), 32.0);
        assert_eq!(norm_sq(&[3.0, 4.0]), 25.0);
        assert_eq!(norm(&[3.0, 4.0]), 5.0);
        assert_eq!(dist(&[1.0, 1.0], &[4.0, 5.0]), 5.0);
        let mut y = vec![1.0, 2.0];
        axpy(&mut y, 2.0, &[10.0, 20.0]);
        assert_eq!(y, vec![21.0, 42.0]);
    }

    #[test]
    fn mat_vec_products() {
        // A = [[1,2],[3,4],[5,6]]
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        assert_eq!(mat_vec(&a, 3, 2, &[1.0, 1.0]), vec![3.0, 7.0, 11.0]);
        assert_eq!(mat_t_vec(&a, 3, 2, &[1.0, 1.0, 1.0]), vec![9.0, 12.0]);
    }

    #[test]
    fn gram_matrices() {
        // A = [[1,2],[3,4]]: A^T A = [[10,14],[14,20]], A A^T = [[5,11],[11,25]]
        let a = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(gram_t(&a, 2, 2), vec![10.0, 14.0, 14.0, 20.0]);
        assert_eq!(gram(&a, 2, 2), vec![5.0, 11.0, 11.0, 25.0]);
    }

    #[test]
    fn eigenvalues_diagonal_and_2x2() {
        let eig = sym_eigenvalues(&[3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0], 3).unwrap();
        assert_eq!(eig, vec![1.0, 2.0, 3.0]);
        // [[2,1],[1,2]] has eigenvalues 1 and 3
        let eig = sym_eigenvalues(&[2.0, 1.0, 1.0, 2.0], 2).unwrap();
        assert!((eig[0] - 1.0).abs() < 1e-14);
        assert!((eig[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn eigenvalues_tridiagonal() {
        // Second-difference matrix: eigenvalues 2 - sqrt(2), 2, 2 + sqrt(2)
        let m = [2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0];
        let eig = sym_eigenvalues(&m, 3).unwrap();
        let s = libm::sqrt(2.0);
        assert!((eig[0] - (2.0 - s)).abs() < 1e-13);
        assert!((eig[1] - 2.0).abs() < 1e-13);
        assert!((eig[2] - (2.0 + s)).abs() < 1e-13);
    }

    #[test]
    fn eigenvalue_invariants_against_trace() {
        // Arbitrary symmetric matrix: sum of eigenvalues equals the trace,
        // sum of squares equals the Frobenius norm squared.
        let m = [
            4.0, 1.0, -2.0, 0.5, //
            1.0, 3.0, 0.0, -1.0, //
            -2.0, 0.0, 5.0, 2.0, //
            0.5, -1.0, 2.0, 1.0,
        ];
        let eig = sym_eigenvalues(&m, 4).unwrap();
        let trace: f64 = (0..4).map(|i| m[i * 4 + i]).sum();
        let frob_sq: f64 = m.iter().map(|v| v * v).sum();
        let eig_sum: f64 = eig.iter().sum();
        let eig_sq: f64 = eig.iter().map(|v| v * v).sum();
        assert!((eig_sum - trace).abs() < 1e-12, "{eig_sum} vs {trace}");
        assert!((eig_sq - frob_sq).abs() < 1e-11, "{eig_sq} vs {frob_sq}");
        let mut sorted = eig.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(eig, sorted);
    }

    #[test]
    fn eigenvalues_1x1() {
        assert_eq!(sym_eigenvalues(&[7.0], 1).unwrap(), vec![7.0]);
    }

    #[test]
    fn cholesky_known_system() {
        // [[4,2],[2,3]] x = [8,7] has solution (1.25, 1.5)
        let m = [4.0, 2.0, 2.0, 3.0];
        let x = cholesky_solve(&m, 2, &[8.0, 7.0]).unwrap();
        assert!((x[0] - 1.25).abs() < 1e-14);
        assert!((x[1] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        // [[1,2],[2,1]] has a negative eigenvalue
        let m = [1.0, 2.0, 2.0, 1.0];
        assert_eq!(
            cholesky_solve(&m, 2, &[1.0, 1.0]),
            Err(LinalgError::NotPositiveDefinite)
        );
    }

    #[test]
    fn cholesky_identity() {
        let m = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let b = [3.0, -1.0, 0.5];
        assert_eq!(cholesky_solve(&m, 3, &b).unwrap(), b.to_vec());
    }
}
