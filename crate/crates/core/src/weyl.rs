//! Approximate eigenvectors of finite sections and their localization
//! relative to a reference set.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::essential::DislocationModel;
use crate::lattice_ops::{self, IdealSpec, LatticeBox, LatticeError};
use crate::linalg::{self, CMatrix, CVector, LinalgError, C64};

/// Residual below which `λ` counts as an eigenvalue of the section.
pub const EIGEN_RESIDUAL: f64 = 1e-6;
/// Residual above which `λ` counts as outside the spectrum.
pub const OUTSIDE_RESIDUAL: f64 = 0.05;
/// Profile weights must shrink by this factor per box step to count as
/// decaying.
pub const DECAY_FACTOR: f64 = 0.9;
pub const DEFAULT_C: f64 = 0.5;
pub const DEFAULT_LEVEL: u64 = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeylError {
    #[error("need at least two box sizes, got {0}")]
    TooFewBoxes(usize),
    #[error("no reference set: the model has no perturbation and none was given")]
    NoReferenceSet,
    #[error("inconclusive: residuals {residuals:?}, weights {weights:?}")]
    Inconclusive { residuals: Vec<f64>, weights: Vec<f64> },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `(s_min, φ)` with `φ` the right singular vector of `mat − λ` for the
/// smallest singular value, so `‖(mat − λ)φ‖ = s_min`.
pub fn approx_eigenpair(mat: &CMatrix, lambda: C64) -> Result<(f64, CVector), LinalgError> {
    let shifted = shift(mat, lambda);
    let (s, _, right) = linalg::min_singular_triple(&shifted)?;
    Ok((s, right))
}

fn shift(mat: &CMatrix, lambda: C64) -> CMatrix {
    let mut m = mat.clone();
    for i in 0..m.nrows().min(m.ncols()) {
        m[(i, i)] -= lambda;
    }
    m
}

/// `‖p_n φ‖` for `n = 0..=levels`.
pub fn localization_profile(phi: &CVector, b: &LatticeBox, spec: &IdealSpec, levels: u64) -> Vec<f64> {
    let dist: Vec<u64> = b.sites().map(|s| spec.distance(&s)).collect();
    let mut mass_at = vec![0.0; levels as usize + 1];
    for (d, v) in dist.iter().zip(phi.iter()) {
        if *d <= levels {
            mass_at[*d as usize] += v.norm_sqr();
        }
    }
    let mut acc = 0.0;
    mass_at
        .into_iter()
        .map(|m| {
            acc += m;
            acc.sqrt().min(1.0)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Operator,
    Adjoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub lambda: [f64; 2],
    pub residual: f64,
    /// `‖p_n φ‖` for `n = 0..` up to the level covering the box.
    pub profile: Vec<f64>,
    pub box_half_width: usize,
    /// Which of `H − λ` and `(H − λ)^*` supplied the vector.
    pub side: Side,
    /// `‖p_n φ‖` at the verdict level.
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Localized,
    Bulk,
    NotInSpectrum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub verdict: Verdict,
    pub c: f64,
    pub level: u64,
    pub reports: Vec<LocalizationReport>,
}

/// Localization report for one box: one SVD of `H_L − λ` gives the right
/// vector (operator side) and the left vector (adjoint side) with the same
/// residual; the side with more weight at `level` is reported.
pub fn localization_report(
    model: &DislocationModel,
    spec: &IdealSpec,
    lambda: C64,
    l: usize,
    level: u64,
) -> Result<LocalizationReport, WeylError> {
    let b = LatticeBox::new(vec![l; model.dim()]);
    let mat = shift(&lattice_ops::truncate(&model.operator(), &b)?, lambda);
    let (s, left, right) = linalg::min_singular_triple(&mat)?;
    let top = spec.covering_level(&b).max(level);
    let p_right = localization_profile(&right, &b, spec, top);
    let p_left = localization_profile(&left, &b, spec, top);
    let at = level as usize;
    let (side, profile) = if p_left[at] > p_right[at] {
        (Side::Adjoint, p_left)
    } else {
        (Side::Operator, p_right)
    };
    Ok(LocalizationReport {
        lambda: [lambda.re, lambda.im],
        residual: s,
        weight: profile[at],
        profile,
        box_half_width: l,
        side,
    })
}

/// Localized / bulk / not-in-spectrum decision across growing boxes.
///
/// * localized: every residual ≤ [`EIGEN_RESIDUAL`] and every weight ≥ `c`;
/// * bulk: residuals small (≤ [`EIGEN_RESIDUAL`], or nonincreasing and at
///   most [`OUTSIDE_RESIDUAL`]) while weights shrink by [`DECAY_FACTOR`]
///   per step;
/// * not-in-spectrum: every residual > [`OUTSIDE_RESIDUAL`].
///
/// Anything else is reported as [`WeylError::Inconclusive`].
pub fn surface_verdict(
    model: &DislocationModel,
    lambda: C64,
    boxes: &[usize],
    c: f64,
    level: u64,
    reference: Option<&IdealSpec>,
) -> Result<VerdictReport, WeylError> {
    if boxes.len() < 2 {
        return Err(WeylError::TooFewBoxes(boxes.len()));
    }
    let spec = match reference {
        Some(s) => s.clone(),
        None => model
            .perturbations()
            .first()
            .map(|p| p.spec.clone())
            .ok_or(WeylError::NoReferenceSet)?,
    };
    let reports: Result<Vec<LocalizationReport>, WeylError> = boxes
        .par_iter()
        .map(|&l| localization_report(model, &spec, lambda, l, level))
        .collect();
    let reports = reports?;
    let residuals: Vec<f64> = reports.iter().map(|r| r.residual).collect();
    let weights: Vec<f64> = reports.iter().map(|r| r.weight).collect();
    let tiny = residuals.iter().all(|&r| r <= EIGEN_RESIDUAL);
    let shrinking = residuals.windows(2).all(|w| w[1] <= w[0])
        && residuals.last().is_some_and(|&r| r <= OUTSIDE_RESIDUAL);
    let decaying = weights.windows(2).all(|w| w[1] < DECAY_FACTOR * w[0]);
    let verdict = if tiny && weights.iter().all(|&w| w >= c) {
        Verdict::Localized
    } else if (tiny || shrinking) && decaying {
        Verdict::Bulk
    } else if residuals.iter().all(|&r| r > OUTSIDE_RESIDUAL) {
        Verdict::NotInSpectrum
    } else {
        return Err(WeylError::Inconclusive { residuals, weights });
    };
    Ok(VerdictReport {
        verdict,
        c,
        level,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn diagonal_eigenpair() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]));
        let (r, phi) = approx_eigenpair(&m, c(2.0, 0.0)).unwrap();
        assert!(r < 1e-15);
        assert!((phi[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_vector_profile_counts_sites() {
        let l = 10;
        let b = LatticeBox::line(l);
        let n = b.len();
        let phi = CVector::from_element(n, c(1.0 / (n as f64).sqrt(), 0.0));
        let spec = IdealSpec::strip(1, 0, 0).unwrap();
        let p = localization_profile(&phi, &b, &spec, l as u64);
        for (k, v) in p.iter().enumerate() {
            let want = ((2 * k + 1) as f64 / n as f64).sqrt();
            assert!((v - want).abs() < 1e-14);
        }
        assert!((p[l] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn delta_profile_is_one() {
        let b = LatticeBox::square(3);
        let mut phi = CVector::zeros(b.len());
        phi[b.index_of(&[0, 0]).unwrap()] = c(1.0, 0.0);
        let spec = IdealSpec::line(2, vec![0, 1]).unwrap();
        assert!(localization_profile(&phi, &b, &spec, 3).iter().all(|&v| v == 1.0));
    }
}
