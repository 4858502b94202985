//! Pseudo-resolvents on matrix families: maximal extension, spectrum,
//! spectral mapping and quotient inclusion for block-triangular algebras.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, c, CMatrix, LinalgError, C64};
use crate::spectrum::{SpectrumPoint, SpectrumSet, Tag, DEDUP_TOL};

/// Eigenvalues of `r_α` at or below this modulus are spectrum at infinity.
pub const INFINITY_EPS: f64 = 1e-12;
/// Reciprocal condition below which `1 + (z − α) r_α` counts as singular.
pub const SINGULAR_RCOND: f64 = 1e-14;
pub const INCLUSION_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PseudoresError {
    #[error("z = {z} is outside the maximal domain (reciprocal condition {rcond:e})")]
    OutsideMaximalDomain { z: C64, rcond: f64 },
    #[error("z = {z} lies on the spectrum (distance {distance:e})")]
    PoleOnSpectrum { z: C64, distance: f64 },
    #[error("matrix is not block upper-triangular: entry ({row}, {col}) = {value}")]
    NotBlockTriangular { row: usize, col: usize, value: C64 },
    #[error("partition sizes sum to {sum}, matrix has {n} rows")]
    BadPartition { sum: usize, n: usize },
    #[error("generator shift alpha = {alpha} is an eigenvalue of the generator")]
    SingularGenerator { alpha: C64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A base point `α` and `r_α`, optionally with the generator `a` such that
/// `r_α = (α − a)^{-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventFamily {
    pub alpha: C64,
    pub r_alpha: CMatrix,
    pub generator: Option<CMatrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extension {
    pub matrix: CMatrix,
    /// 2-norm condition number of `1 + (z − α) r_α`.
    pub cond: f64,
}

impl ResolventFamily {
    pub fn new(alpha: C64, r_alpha: CMatrix) -> Result<Self, PseudoresError> {
        if !r_alpha.is_square() {
            return Err(LinalgError::NotSquare {
                rows: r_alpha.nrows(),
                cols: r_alpha.ncols(),
            }
            .into());
        }
        Ok(Self {
            alpha,
            r_alpha,
            generator: None,
        })
    }

    pub fn from_generator(a: &CMatrix, alpha: C64) -> Result<Self, PseudoresError> {
        let n = a.nrows();
        let base = CMatrix::identity(n, n) * alpha - a;
        let r = linalg::inverse(&base, SINGULAR_RCOND).map_err(|e| match e {
            LinalgError::Singular { .. } => PseudoresError::SingularGenerator { alpha },
            other => other.into(),
        })?;
        Ok(Self {
            alpha,
            r_alpha: r,
            generator: Some(a.clone()),
        })
    }

    pub fn dim(&self) -> usize {
        self.r_alpha.nrows()
    }

    /// `‖(α − a) r_α − I‖`, when a generator is attached.
    pub fn generator_residual(&self) -> Option<f64> {
        self.generator.as_ref().map(|a| {
            let n = self.dim();
            let prod = (CMatrix::identity(n, n) * self.alpha - a) * &self.r_alpha;
            linalg::norm2(&(prod - CMatrix::identity(n, n)))
        })
    }
}

/// `r̃_z = r_α (1 + (z − α) r_α)^{-1}`.
pub fn extend(fam: &ResolventFamily, z: C64) -> Result<Extension, PseudoresError> {
    let n = fam.dim();
    if z == fam.alpha {
        return Ok(Extension {
            matrix: fam.r_alpha.clone(),
            cond: 1.0,
        });
    }
    let b = CMatrix::identity(n, n) + &fam.r_alpha * (z - fam.alpha);
    let (smin, smax) = linalg::singular_extremes(&b);
    let rcond = if smax > 0.0 { smin / smax } else { 0.0 };
    if rcond < SINGULAR_RCOND {
        return Err(PseudoresError::OutsideMaximalDomain { z, rcond });
    }
    let inv = b
        .lu()
        .try_inverse()
        .ok_or(PseudoresError::OutsideMaximalDomain { z, rcond })?;
    Ok(Extension {
        matrix: &fam.r_alpha * inv,
        cond: 1.0 / rcond,
    })
}

/// `σ(r) = {α − 1/μ : μ ∈ σ(r_α), μ ≠ 0}`; zero eigenvalues are counted in
/// `at_infinity` and contribute no finite point.
pub fn pseudo_spectrum(fam: &ResolventFamily) -> Result<SpectrumSet, PseudoresError> {
    let mus = linalg::eigenvalues(&fam.r_alpha)?;
    let mut infinite = 0;
    let mut finite = Vec::new();
    for mu in mus {
        if mu.norm() <= INFINITY_EPS {
            infinite += 1;
        } else {
            finite.push(fam.alpha - c(1.0, 0.0) / mu);
        }
    }
    let mut set = SpectrumSet::from_values(finite, Tag::Discrete);
    set.at_infinity = infinite;
    Ok(set)
}

/// `{(z − s)^{-1} : s ∈ spec}`, plus 0 when `include_zero` is set.
/// Tags and provenance carry over.
pub fn spectrum_map(z: C64, spec: &SpectrumSet, include_zero: bool) -> Result<SpectrumSet, PseudoresError> {
    let distance = spec.distance_to(z, None);
    if distance <= spec.tol.max(DEDUP_TOL) {
        return Err(PseudoresError::PoleOnSpectrum { z, distance });
    }
    let mut points: Vec<SpectrumPoint> = spec
        .points()
        .iter()
        .cloned()
        .map(|mut p| {
            p.value = c(1.0, 0.0) / (z - p.value);
            p
        })
        .collect();
    if include_zero {
        points.push(SpectrumPoint::new(c(0.0, 0.0), Tag::Discrete));
    }
    Ok(SpectrumSet::with_tolerance(points, spec.tol))
}

/// Inverse of [`spectrum_map`] on finite points: `w ↦ z − 1/w`. Points with
/// `|w| ≤` [`INFINITY_EPS`] have no finite preimage and are counted in
/// `at_infinity`.
pub fn spectrum_unmap(z: C64, mapped: &SpectrumSet) -> SpectrumSet {
    let mut infinite = mapped.at_infinity;
    let mut points = Vec::new();
    for p in mapped.points() {
        if p.value.norm() <= INFINITY_EPS {
            infinite += 1;
            continue;
        }
        let mut q = p.clone();
        q.value = z - c(1.0, 0.0) / p.value;
        points.push(q);
    }
    let mut out = SpectrumSet::with_tolerance(points, mapped.tol);
    out.at_infinity = infinite;
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientInclusion {
    /// Largest distance from a quotient eigenvalue to the full spectrum.
    pub defect: f64,
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct BlockSpectra {
    pub full: SpectrumSet,
    pub quotient: SpectrumSet,
    pub inclusion: QuotientInclusion,
}

/// Full spectrum versus the spectrum in the quotient by the strictly upper
/// block ideal (the union of diagonal-block spectra).
pub fn quotient_block_spectrum(mat: &CMatrix, partition: &[usize]) -> Result<BlockSpectra, PseudoresError> {
    let n = mat.nrows();
    if !mat.is_square() {
        return Err(LinalgError::NotSquare {
            rows: n,
            cols: mat.ncols(),
        }
        .into());
    }
    let sum: usize = partition.iter().sum();
    if sum != n {
        return Err(PseudoresError::BadPartition { sum, n });
    }
    let mut starts = Vec::with_capacity(partition.len());
    let mut acc = 0;
    for &k in partition {
        starts.push(acc);
        acc += k;
    }
    let block_of = |i: usize| starts.partition_point(|&s| s <= i) - 1;
    for j in 0..n {
        for i in 0..n {
            if block_of(i) > block_of(j) && mat[(i, j)] != c(0.0, 0.0) {
                return Err(PseudoresError::NotBlockTriangular {
                    row: i,
                    col: j,
                    value: mat[(i, j)],
                });
            }
        }
    }
    let full_vals = linalg::eigenvalues(mat)?;
    let mut quotient_vals = Vec::new();
    for (&s, &k) in starts.iter().zip(partition) {
        if k > 0 {
            quotient_vals.extend(linalg::eigenvalues(&mat.view((s, s), (k, k)).into_owned())?);
        }
    }
    let defect = quotient_vals
        .iter()
        .map(|q| full_vals.iter().map(|f| (f - q).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    Ok(BlockSpectra {
        full: SpectrumSet::from_values(full_vals, Tag::Discrete),
        quotient: SpectrumSet::from_values(quotient_vals, Tag::Discrete),
        inclusion: QuotientInclusion {
            defect,
            holds: defect <= INCLUSION_TOL,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(v.len(), v.iter().map(|&x| c(x, 0.0))))
    }

    #[test]
    fn extension_at_base_point_is_exact() {
        let fam = ResolventFamily::from_generator(&diag(&[1.0, 2.0]), c(0.0, 0.0)).unwrap();
        assert_eq!(extend(&fam, c(0.0, 0.0)).unwrap().matrix, fam.r_alpha);
    }

    #[test]
    fn diagonal_extension() {
        let fam = ResolventFamily::new(c(0.0, 0.0), diag(&[-1.0, -0.5])).unwrap();
        let e = extend(&fam, c(3.0, 0.0)).unwrap();
        assert!((e.matrix - diag(&[0.5, 1.0])).norm() < 1e-15);
        let s = pseudo_spectrum(&fam).unwrap();
        assert_eq!(s.values(), vec![c(1.0, 0.0), c(2.0, 0.0)]);
        assert!(matches!(
            extend(&fam, c(1.0, 0.0)),
            Err(PseudoresError::OutsideMaximalDomain { .. })
        ));
    }

    #[test]
    fn nilpotent_has_only_infinity() {
        let r = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let s = pseudo_spectrum(&ResolventFamily::new(c(0.0, 0.0), r).unwrap()).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.at_infinity, 2);
    }

    #[test]
    fn map_with_zero() {
        let s = SpectrumSet::from_values([c(0.0, 0.0)], Tag::Discrete);
        let m = spectrum_map(c(1.0, 0.0), &s, true).unwrap();
        assert_eq!(m.values(), vec![c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(
            spectrum_map(c(0.0, 0.0), &s, false),
            Err(PseudoresError::PoleOnSpectrum { .. })
        ));
    }

    #[test]
    fn triangular_blocks() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(5.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]);
        let b = quotient_block_spectrum(&m, &[1, 1]).unwrap();
        assert_eq!(b.full.values(), vec![c(1.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(b.quotient.values(), vec![c(1.0, 0.0), c(2.0, 0.0)]);
        assert!(b.inclusion.holds);
        let lower = m.transpose();
        assert!(matches!(
            quotient_block_spectrum(&lower, &[1, 1]),
            Err(PseudoresError::NotBlockTriangular { row: 1, col: 0, .. })
        ));
    }
}
