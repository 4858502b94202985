//! Dense complex linear algebra shared by the spectral modules.
//!
//! Everything here is a thin layer over nalgebra's Schur, SVD and LU
//! decompositions, with the conventions the rest of the crate relies on:
//! eigenvalues come back canonically sorted, and failures surface as
//! [`LinalgError`] instead of panics.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative tolerance below which a Hermitian check passes.
const HERMITIAN_TOL: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("Schur iteration did not converge for a {0}x{0} matrix")]
    NoConvergence(usize),
    #[error("matrix is numerically singular (reciprocal condition {rcond:e})")]
    Singular { rcond: f64 },
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Total order on complex numbers by (re, im); used for every canonical sort.
pub fn cmp_complex(a: &C64, b: &C64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

pub fn is_hermitian(m: &CMatrix) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let n = m.nrows();
    for i in 0..n {
        for j in i..n {
            if (m[(i, j)] - m[(j, i)].conj()).norm() > HERMITIAN_TOL * scale {
                return false;
            }
        }
    }
    true
}

fn check_square(m: &CMatrix) -> Result<usize, LinalgError> {
    if m.is_square() {
        Ok(m.nrows())
    } else {
        Err(LinalgError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

/// All eigenvalues of a square complex matrix, sorted by (re, im).
///
/// Hermitian inputs go through the symmetric solver so that their
/// eigenvalues come back exactly real.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>, LinalgError> {
    let n = check_square(m)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut vals: Vec<C64> = if is_hermitian(m) {
        let herm = hermitian_part(m);
        herm.symmetric_eigenvalues()
            .iter()
            .map(|&x| c(x, 0.0))
            .collect()
    } else {
        let schur = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, 100 * n.max(10))
            .ok_or(LinalgError::NoConvergence(n))?;
        let (_, t) = schur.unpack();
        (0..n).map(|i| t[(i, i)]).collect()
    };
    vals.sort_by(cmp_complex);
    Ok(vals)
}

/// Eigenpairs of a square matrix: eigenvalues (unsorted, paired) and unit
/// right eigenvectors as columns.
pub fn eigenpairs(m: &CMatrix) -> Result<(Vec<C64>, CMatrix), LinalgError> {
    let n = check_square(m)?;
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    if is_hermitian(m) {
        let eig = hermitian_part(m).symmetric_eigen();
        let vals = eig.eigenvalues.iter().map(|&x| c(x, 0.0)).collect();
        return Ok((vals, eig.eigenvectors));
    }
    let schur = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, 100 * n.max(10))
        .ok_or(LinalgError::NoConvergence(n))?;
    let (q, t) = schur.unpack();
    let vals: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    // Back-substitution on the triangular factor, one eigenvector per column.
    let tiny = f64::EPSILON * t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let mut y = CMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = c(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = C64::new(0.0, 0.0);
            for j in (i + 1)..=k {
                s += t[(i, j)] * y[(j, k)];
            }
            let mut d = t[(i, i)] - lambda;
            if d.norm() < tiny {
                d = c(tiny, 0.0);
            }
            y[(i, k)] = -s / d;
        }
    }
    let mut vecs = q * y;
    for k in 0..n {
        let norm = vecs.column(k).norm();
        if norm > 0.0 {
            vecs.column_mut(k).unscale_mut(norm);
        }
    }
    Ok((vals, vecs))
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Operator 2-norm (largest singular value).
pub fn norm2(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Smallest and largest singular values.
pub fn singular_extremes(m: &CMatrix) -> (f64, f64) {
    if m.is_empty() {
        return (0.0, 0.0);
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    (smin, smax)
}

/// Minimal singular triple of a square matrix: `(s_min, left, right)` with
/// `m * right = s_min * left`.
pub fn min_singular_triple(m: &CMatrix) -> Result<(f64, CVector, CVector), LinalgError> {
    let n = check_square(m)?;
    let svd = m.clone().svd(true, true);
    let sv = &svd.singular_values;
    let k = (0..n)
        .min_by(|&a, &b| sv[a].total_cmp(&sv[b]))
        .expect("non-empty matrix");
    let u = svd.u.as_ref().expect("left vectors requested");
    let v_t = svd.v_t.as_ref().expect("right vectors requested");
    let left = u.column(k).into_owned();
    let right = v_t.row(k).adjoint();
    Ok((sv[k], left, right))
}

/// Inverse with a reciprocal-condition guard.
pub fn inverse(m: &CMatrix, min_rcond: f64) -> Result<CMatrix, LinalgError> {
    check_square(m)?;
    let (smin, smax) = singular_extremes(m);
    let rcond = if smax > 0.0 { smin / smax } else { 0.0 };
    if rcond < min_rcond {
        return Err(LinalgError::Singular { rcond });
    }
    m.clone()
        .lu()
        .try_inverse()
        .ok_or(LinalgError::Singular { rcond })
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Largest nearest-neighbour distance between two multisets of eigenvalues
/// (symmetric, i.e. the Hausdorff distance of the finite sets).
pub fn set_distance(a: &[C64], b: &[C64]) -> f64 {
    let directed = |x: &[C64], y: &[C64]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    directed(a, b).max(directed(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangular_eigenvalues() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(5.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]);
        let ev = eigenvalues(&m).unwrap();
        assert!((ev[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((ev[1] - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn eigenpairs_satisfy_equation() {
        let m = CMatrix::from_fn(6, 6, |i, j| c((i * 7 + j * 3) as f64 % 5.0 - 2.0, (i + 2 * j) as f64 % 3.0 - 1.0));
        let (vals, vecs) = eigenpairs(&m).unwrap();
        for (k, lambda) in vals.iter().enumerate() {
            let v = vecs.column(k);
            let r = &m * v - v * *lambda;
            assert!(r.norm() < 1e-9, "residual {}", r.norm());
        }
    }

    #[test]
    fn min_singular_triple_consistent() {
        let m = CMatrix::from_fn(5, 5, |i, j| c(1.0 / (1.0 + i as f64 + j as f64), (i as f64 - j as f64) * 0.1));
        let (s, left, right) = min_singular_triple(&m).unwrap();
        assert!(((&m * &right) - left * c(s, 0.0)).norm() < 1e-12);
        assert!(((&m * &right).norm() - s).abs() < 1e-12);
    }

    #[test]
    fn singular_inverse_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]);
        assert!(matches!(inverse(&m, 1e-14), Err(LinalgError::Singular { .. })));
    }
}
