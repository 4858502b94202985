//! Finite-range lattice operators on `Z` and `Z^2`, their Dirichlet
//! truncations, band widths and ideal-membership defects.

mod field;
mod ideal;
mod operator;
mod schema;
mod sites;

pub use field::{CoefficientField, FieldKind, FieldTerm, MaskClause, Side};
pub use ideal::{IdealSpec, Shape};
pub use operator::{Hop, LatticeOperator};
pub use schema::{ComplexJson, HopJson, MaskJson, OneOrMany, OperatorJson, SpecJson, SupportJson, TermJson};
pub use sites::{linf_distance, Interval, LatticeBox, Site};

use std::fmt::Write as _;

use thiserror::Error;

use crate::linalg::{self, c, CMatrix, CVector, LinalgError, C64};

/// Entries with modulus at or below this count as zero in [`band_width`].
pub const ENTRY_ZERO: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("only dimensions 1 and 2 are supported, got {0}")]
    UnsupportedDimension(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid coefficient field: {0}")]
    InvalidField(String),
    #[error("invalid reference set: {0}")]
    InvalidSpec(String),
    #[error("vector length {found} does not match box size {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("Neumann series diverges: ||V R0|| = {norm} >= 1")]
    SeriesDivergent { norm: f64 },
    #[error("z - h0 is numerically singular (reciprocal condition {rcond:e})")]
    SingularBase { rcond: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn check_box(op: &LatticeOperator, b: &LatticeBox) -> Result<(), LatticeError> {
    if op.dim() != b.dim() {
        return Err(LatticeError::DimensionMismatch {
            expected: op.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// `(Aφ)(x) = Σ_r a_r(x) φ(x + b_r)` on the box, reading zero outside it.
pub fn apply(op: &LatticeOperator, phi: &CVector, b: &LatticeBox) -> Result<CVector, LatticeError> {
    check_box(op, b)?;
    if phi.len() != b.len() {
        return Err(LatticeError::LengthMismatch {
            expected: b.len(),
            found: phi.len(),
        });
    }
    let mut out = CVector::zeros(b.len());
    for (i, x) in b.sites().enumerate() {
        let mut acc = c(0.0, 0.0);
        for h in op.hops() {
            let y = [x[0] + h.offset[0], x[1] + h.offset[1]];
            if let Some(j) = b.index_of(&y) {
                acc += h.field.value(&x) * phi[j];
            }
        }
        out[i] = acc;
    }
    Ok(out)
}

/// Nonzero entries `(row, col, value)` of the Dirichlet truncation.
pub fn truncate_sparse(
    op: &LatticeOperator,
    b: &LatticeBox,
) -> Result<Vec<(usize, usize, C64)>, LatticeError> {
    check_box(op, b)?;
    let mut out = Vec::new();
    for (i, x) in b.sites().enumerate() {
        for h in op.hops() {
            let y = [x[0] + h.offset[0], x[1] + h.offset[1]];
            if let Some(j) = b.index_of(&y) {
                let v = h.field.value(&x);
                if v != c(0.0, 0.0) {
                    out.push((i, j, v));
                }
            }
        }
    }
    Ok(out)
}

/// Dense `P_Λ A P_Λ` with rows and columns in box site order.
pub fn truncate(op: &LatticeOperator, b: &LatticeBox) -> Result<CMatrix, LatticeError> {
    let mut m = CMatrix::zeros(b.len(), b.len());
    for (i, j, v) in truncate_sparse(op, b)? {
        m[(i, j)] += v;
    }
    Ok(m)
}

/// Smallest `m` with `mat(x, y) = 0` whenever `d∞(x, y) > m`.
pub fn band_width(mat: &CMatrix, b: &LatticeBox) -> u64 {
    assert_eq!(mat.nrows(), b.len(), "matrix rows must match the box");
    assert_eq!(mat.ncols(), b.len(), "matrix columns must match the box");
    let sites: Vec<Site> = b.sites().collect();
    let mut m = 0;
    for (j, col) in mat.column_iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            if v.norm() > ENTRY_ZERO {
                m = m.max(linf_distance(&sites[i], &sites[j]));
            }
        }
    }
    m
}

/// `‖mat − p_n mat p_n‖₂` with `p_n` the indicator of `S(n)` on the box.
pub fn ideal_defect(mat: &CMatrix, b: &LatticeBox, spec: &IdealSpec, n: u64) -> f64 {
    let p = spec.projection(b, n);
    let mut d = mat.clone();
    for (j, &pj) in p.iter().enumerate() {
        for (i, &pi) in p.iter().enumerate() {
            if pi && pj {
                d[(i, j)] = c(0.0, 0.0);
            }
        }
    }
    linalg::norm2(&d)
}

#[derive(Debug, Clone)]
pub struct SeriesResult {
    /// `R0 Σ_{n=0}^N (−V R0)^n`.
    pub sum: CMatrix,
    /// `‖V R0‖^{N+1} / (1 − ‖V R0‖) · ‖R0‖`.
    pub truncation_bound: f64,
    pub contraction: f64,
    pub base_norm: f64,
}

/// Reciprocal condition below which `z − h0` is treated as singular.
const BASE_RCOND: f64 = 1e-13;

/// Partial Neumann sum for the perturbed resolvent. The full series
/// converges to `(z − h0 + V)^{-1}`.
pub fn resolvent_series(
    h0: &CMatrix,
    v_diag: &[C64],
    z: C64,
    terms: usize,
) -> Result<SeriesResult, LatticeError> {
    let n = h0.nrows();
    if !h0.is_square() {
        return Err(LinalgError::NotSquare {
            rows: h0.nrows(),
            cols: h0.ncols(),
        }
        .into());
    }
    if v_diag.len() != n {
        return Err(LatticeError::LengthMismatch {
            expected: n,
            found: v_diag.len(),
        });
    }
    let base = CMatrix::identity(n, n) * z - h0;
    let r0 = linalg::inverse(&base, BASE_RCOND).map_err(|e| match e {
        LinalgError::Singular { rcond } => LatticeError::SingularBase { rcond },
        other => other.into(),
    })?;
    let mut vr0 = r0.clone();
    for (i, v) in v_diag.iter().enumerate() {
        vr0.row_mut(i).scale_mut_complex(*v);
    }
    let q = linalg::norm2(&vr0);
    if q >= 1.0 {
        return Err(LatticeError::SeriesDivergent { norm: q });
    }
    let step = -vr0;
    let mut power = CMatrix::identity(n, n);
    let mut acc = CMatrix::identity(n, n);
    for _ in 0..terms {
        power = &power * &step;
        acc += &power;
    }
    let base_norm = linalg::norm2(&r0);
    Ok(SeriesResult {
        sum: &r0 * acc,
        truncation_bound: q.powi(terms as i32 + 1) / (1.0 - q) * base_norm,
        contraction: q,
        base_norm,
    })
}

trait ScaleComplex {
    fn scale_mut_complex(&mut self, s: C64);
}

impl<R, C, S> ScaleComplex for nalgebra::Matrix<C64, R, C, S>
where
    R: nalgebra::Dim,
    C: nalgebra::Dim,
    S: nalgebra::StorageMut<C64, R, C>,
{
    fn scale_mut_complex(&mut self, s: C64) {
        for x in self.iter_mut() {
            *x *= s;
        }
    }
}

/// Row-major CSV with one `re,im` pair per cell.
pub fn matrix_to_csv(mat: &CMatrix) -> String {
    let mut out = String::new();
    for i in 0..mat.nrows() {
        let row: Vec<String> = (0..mat.ncols())
            .map(|j| format!("{:?},{:?}", mat[(i, j)].re, mat[(i, j)].im))
            .collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}
