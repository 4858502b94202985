//! Essential-spectrum decompositions for periodic operators with
//! dislocations: half-space models, two-strip (cross) models, unions over
//! ideals and point classification.
//!
//! The spectra returned here come from Bloch and fiber analysis. Finite
//! sections enter only through one-sided containment certificates: the
//! smallest singular value of `H_L − λ`, which must be small at every
//! reported point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::banded::{self, BandMatrix};
use crate::bloch::{self, BandCurves, BlochError, FiberTolerances};
use crate::lattice_ops::{
    self, IdealSpec, Interval, LatticeBox, LatticeError, LatticeOperator, Shape,
};
use crate::linalg::{self, LinalgError, C64};
use crate::spectrum::{SpectrumPoint, SpectrumSet, Tag};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EssentialError {
    #[error("background is not periodic along axis {axis}")]
    BackgroundNotPeriodic { axis: usize },
    #[error("perturbation {index} leaks outside its reference set: {detail}")]
    SupportViolation { index: usize, detail: String },
    #[error("model needs exactly one half-space perturbation")]
    NotHalfSpace,
    #[error("cross model needs strip perturbations (one per axis), got: {0}")]
    NotStripPair(String),
    #[error(transparent)]
    Bloch(#[from] BlochError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub op: LatticeOperator,
    pub spec: IdealSpec,
    /// Smallest `n` with `p_n P p_n = P`.
    pub confinement: u64,
}

/// Periodic background plus perturbations confined near reference sets.
#[derive(Debug, Clone, PartialEq)]
pub struct DislocationModel {
    background: LatticeOperator,
    perturbations: Vec<Perturbation>,
}

/// Smallest `w` with every coefficient row and column inside `S(w)`.
fn confinement_width(op: &LatticeOperator, spec: &IdealSpec) -> Result<u64, String> {
    let s = spec.intervals();
    let mut w = 0u64;
    for h in op.hops() {
        for (axis, si) in s.iter().enumerate() {
            if *si == Interval::ALL {
                continue;
            }
            let support = h.field.support(axis);
            if support.is_empty() {
                continue;
            }
            let need = |bound_s: Option<i64>, bound_f: Option<i64>, sign: i64| -> Result<u64, String> {
                match (bound_s, bound_f) {
                    (None, _) => Ok(0),
                    (Some(_), None) => Err(format!(
                        "coefficient of hop {:?} is unbounded along axis {axis} beyond {si:?}",
                        h.offset
                    )),
                    (Some(b), Some(f)) => Ok((sign * (f - b)).max(0) as u64),
                }
            };
            let below = need(si.lo, support.lo, -1)?;
            let above = need(si.hi, support.hi, 1)?;
            let reach = h.offset[axis].unsigned_abs();
            w = w.max(below.max(above) + reach);
        }
    }
    Ok(w)
}

impl DislocationModel {
    pub fn new(
        background: LatticeOperator,
        perturbations: Vec<(LatticeOperator, IdealSpec)>,
    ) -> Result<Self, EssentialError> {
        for axis in 0..background.dim() {
            if background.period(axis).is_none() {
                return Err(EssentialError::BackgroundNotPeriodic { axis });
            }
        }
        let mut out = Vec::with_capacity(perturbations.len());
        for (index, (op, spec)) in perturbations.into_iter().enumerate() {
            for found in [op.dim(), spec.dim()] {
                if found != background.dim() {
                    return Err(LatticeError::DimensionMismatch {
                        expected: background.dim(),
                        found,
                    }
                    .into());
                }
            }
            let confinement = confinement_width(&op, &spec)
                .map_err(|detail| EssentialError::SupportViolation { index, detail })?;
            out.push(Perturbation { op, spec, confinement });
        }
        Ok(Self {
            background,
            perturbations: out,
        })
    }

    pub fn background(&self) -> &LatticeOperator {
        &self.background
    }

    pub fn perturbations(&self) -> &[Perturbation] {
        &self.perturbations
    }

    pub fn dim(&self) -> usize {
        self.background.dim()
    }

    /// `H = A + Σ P_i`.
    pub fn operator(&self) -> LatticeOperator {
        self.perturbations
            .iter()
            .fold(self.background.clone(), |acc, p| acc.add(&p.op).expect("dimensions checked"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CertificateOptions {
    /// Box half-widths, increasing.
    pub boxes: Vec<usize>,
    pub samples: usize,
    /// Largest acceptable residual at the biggest box.
    pub threshold: f64,
    pub max_iterations: usize,
}

impl CertificateOptions {
    pub fn for_dim(dim: usize) -> Self {
        Self {
            boxes: if dim == 1 { vec![100, 200, 400] } else { vec![30, 60] },
            samples: 25,
            threshold: 0.05,
            max_iterations: 200,
        }
    }
}

impl Default for CertificateOptions {
    fn default() -> Self {
        Self::for_dim(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificatePoint {
    pub lambda: [f64; 2],
    /// Upper bounds on `σ_min(H_L − λ)`, one per box.
    pub residuals: Vec<f64>,
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub boxes: Vec<usize>,
    pub threshold: f64,
    pub points: Vec<CertificatePoint>,
    pub warnings: Vec<String>,
}

impl Certificate {
    /// Every sampled point is below the threshold at the largest box.
    pub fn within_threshold(&self) -> bool {
        self.points
            .iter()
            .all(|p| p.residuals.last().is_some_and(|r| *r <= self.threshold))
    }

    pub fn all_monotone(&self) -> bool {
        self.points.iter().all(|p| p.monotone)
    }
}

/// Upper bound on `σ_min(H_L − λ)` on the centered box, via banded LU and
/// inverse iteration.
pub fn truncation_residual(
    op: &LatticeOperator,
    b: &LatticeBox,
    lambda: C64,
    max_iterations: usize,
) -> Result<f64, EssentialError> {
    let trip = lattice_ops::truncate_sparse(op, b)?;
    let mut band = BandMatrix::from_triplets(b.len(), &trip);
    band.shift_diagonal(-lambda);
    Ok(banded::min_singular(&band, max_iterations, 1e-10)?.upper)
}

/// Residuals of `H` over the options' boxes at farthest-point samples of
/// `spectrum`. Failures are recorded as warnings, never dropped.
pub fn containment_certificate(
    op: &LatticeOperator,
    spectrum: &SpectrumSet,
    opts: &CertificateOptions,
) -> Result<Certificate, EssentialError> {
    let dim = op.dim();
    let boxes: Vec<LatticeBox> = opts
        .boxes
        .iter()
        .map(|&l| LatticeBox::new(vec![l; dim]))
        .collect();
    let samples = spectrum.farthest_point_sample(opts.samples);
    let points: Result<Vec<CertificatePoint>, EssentialError> = samples
        .par_iter()
        .map(|&lambda| {
            let residuals = boxes
                .iter()
                .map(|b| truncation_residual(op, b, lambda, opts.max_iterations))
                .collect::<Result<Vec<f64>, _>>()?;
            let monotone = residuals.windows(2).all(|w| w[1] <= w[0]);
            Ok(CertificatePoint {
                lambda: [lambda.re, lambda.im],
                residuals,
                monotone,
            })
        })
        .collect();
    let points = points?;
    let mut warnings = Vec::new();
    for p in &points {
        let last = *p.residuals.last().unwrap_or(&f64::INFINITY);
        if last > opts.threshold {
            warnings.push(format!(
                "residual {last:.3e} at lambda = {}{:+}i exceeds {} on the largest box",
                p.lambda[0], p.lambda[1], opts.threshold
            ));
        }
        if !p.monotone {
            warnings.push(format!(
                "residuals at lambda = {}{:+}i are not decreasing in the box size: {:?}",
                p.lambda[0], p.lambda[1], p.residuals
            ));
        }
    }
    Ok(Certificate {
        boxes: opts.boxes.clone(),
        threshold: opts.threshold,
        points,
        warnings,
    })
}

#[derive(Debug, Clone)]
pub struct DecompositionResult {
    pub spectrum: SpectrumSet,
    pub certificate: Certificate,
}

/// Quotient spectrum `σ(π_J(H)) = σ(A)` of a half-space dislocation model,
/// with a containment certificate for `H`.
pub fn dislocation_spectrum(
    model: &DislocationModel,
    grid: usize,
    opts: &CertificateOptions,
) -> Result<DecompositionResult, EssentialError> {
    match model.perturbations() {
        [p] if matches!(p.spec.shape(), Shape::HalfSpace { .. }) => {}
        _ => return Err(EssentialError::NotHalfSpace),
    }
    let spectrum = bloch::periodic_spectrum(model.background(), grid)?;
    let certificate = containment_certificate(&model.operator(), &spectrum, opts)?;
    Ok(DecompositionResult {
        spectrum,
        certificate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrossOptions {
    pub grid: usize,
    /// Half-width of the fiber truncations.
    pub fiber_box: usize,
    pub fiber: FiberTolerances,
}

impl Default for CrossOptions {
    fn default() -> Self {
        Self {
            grid: bloch::DEFAULT_GRID,
            fiber_box: 60,
            fiber: FiberTolerances::default(),
        }
    }
}

/// The axis a strip-type reference set confines.
fn strip_axis(spec: &IdealSpec) -> Option<usize> {
    match spec.shape() {
        Shape::Strip { axis, .. } => Some(*axis),
        Shape::CoordinateLine { axes } if axes.len() == 1 => Some(axes[0]),
        _ => None,
    }
}

/// `σ(op)` for a 2D operator periodic along `axis` whose transverse part
/// is a periodic background plus compact defect: the band cloud of the
/// fully periodic part united with the fiber eigencurves (tagged curve,
/// provenance `[θ]`).
pub fn fibered_spectrum(
    background: &LatticeOperator,
    strip: &LatticeOperator,
    axis: usize,
    opts: &CrossOptions,
) -> Result<SpectrumSet, EssentialError> {
    let bands = bloch::periodic_spectrum(background, opts.grid)?;
    let full = background.add(strip)?;
    let curves: Result<Vec<Vec<SpectrumPoint>>, EssentialError> = (0..opts.grid)
        .into_par_iter()
        .map(|j| {
            let theta = bloch::grid_theta(j, opts.grid);
            let fiber = bloch::fiber_operator(&full, axis, theta)?;
            if fiber.defect.is_zero() {
                return Ok(Vec::new());
            }
            let band_curves = BandCurves::sweep(&fiber.background, opts.fiber.grid)?;
            let vals = bloch::fiber_discrete(&fiber, opts.fiber_box, &opts.fiber, &band_curves)?;
            Ok(vals
                .into_iter()
                .map(|v| SpectrumPoint::new(v, Tag::Curve).with_theta(vec![theta]))
                .collect())
        })
        .collect();
    let curve_set = SpectrumSet::from_points(curves?.into_iter().flatten().collect());
    Ok(union_spectra(&bands, &curve_set))
}

/// `σ_ess(H) = σ(A + V_1) ∪ σ(A + V_2)` for strip perturbations along the
/// two axes, with a containment certificate.
pub fn cross_spectrum(
    model: &DislocationModel,
    opts: &CrossOptions,
    cert: &CertificateOptions,
) -> Result<DecompositionResult, EssentialError> {
    if model.dim() != 2 {
        return Err(LatticeError::DimensionMismatch {
            expected: 2,
            found: model.dim(),
        }
        .into());
    }
    let mut by_axis: [Option<&Perturbation>; 2] = [None, None];
    for p in model.perturbations() {
        let axis = strip_axis(&p.spec).ok_or_else(|| {
            EssentialError::NotStripPair(format!("reference set {:?} is not a strip", p.spec.shape()))
        })?;
        if by_axis[axis].replace(p).is_some() {
            return Err(EssentialError::NotStripPair(format!(
                "two perturbations confined along axis {axis}"
            )));
        }
    }
    let mut spectrum = bloch::periodic_spectrum(model.background(), opts.grid)?;
    for (confined, p) in by_axis.iter().enumerate() {
        if let Some(p) = p {
            let part = fibered_spectrum(model.background(), &p.op, 1 - confined, opts)?;
            spectrum = union_spectra(&spectrum, &part);
        }
    }
    let certificate = containment_certificate(&model.operator(), &spectrum, cert)?;
    Ok(DecompositionResult {
        spectrum,
        certificate,
    })
}

/// Deduplicated union; commutative after canonical sorting.
pub fn union_spectra(a: &SpectrumSet, b: &SpectrumSet) -> SpectrumSet {
    a.union(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum Independence {
    /// `S(n) ∩ T(n) ⊆ (S ∩ T)(n + offset)` for every `n`.
    Independent { offset: u64 },
    Dependent,
    EmptyIntersection,
}

/// Closed-form asymptotic-independence decision for axis-aligned sets.
///
/// Both sets are products of intervals, and for intervals `I, J` with
/// non-empty intersection `(I + n) ∩ (J + n) = (I ∩ J) + n` exactly, so the
/// witness is always `m = n`.
pub fn independence_check(s: &IdealSpec, t: &IdealSpec) -> Result<Independence, EssentialError> {
    if s.dim() != t.dim() {
        return Err(LatticeError::DimensionMismatch {
            expected: s.dim(),
            found: t.dim(),
        }
        .into());
    }
    let mut offset = 0u64;
    for (i, j) in s.intervals().iter().zip(t.intervals()) {
        let meet = i.intersect(&j);
        if meet.is_empty() {
            return Ok(Independence::EmptyIntersection);
        }
        // endpoints of both sides move linearly in n, so n = 1 fixes the gap
        let grown = i.expand(1).intersect(&j.expand(1));
        let target = meet.expand(1);
        let lo = match (grown.lo, target.lo) {
            (Some(g), Some(m)) => (m - g).max(0) as u64,
            (None, Some(_)) => return Ok(Independence::Dependent),
            _ => 0,
        };
        let hi = match (grown.hi, target.hi) {
            (Some(g), Some(m)) => (g - m).max(0) as u64,
            (None, Some(_)) => return Ok(Independence::Dependent),
            _ => 0,
        };
        offset = offset.max(lo.max(hi));
    }
    Ok(Independence::Independent { offset })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointClass {
    Bulk,
    Surface,
    Discrete,
    Outside,
}

pub const CLASSIFY_TOL: f64 = 1e-2;

pub fn classify_point(lambda: C64, full: &SpectrumSet, tol: f64) -> PointClass {
    if full.distance_to(lambda, Some(Tag::Band)) <= tol {
        PointClass::Bulk
    } else if full.distance_to(lambda, Some(Tag::Curve)) <= tol {
        PointClass::Surface
    } else if full.distance_to(lambda, Some(Tag::Discrete)) <= tol {
        PointClass::Discrete
    } else {
        PointClass::Outside
    }
}

/// Eigenvalues of the Dirichlet truncation on the centered box of
/// half-width `l`; a test oracle, not a spectrum estimate.
pub fn truncation_eigenvalues(op: &LatticeOperator, l: usize) -> Result<Vec<C64>, EssentialError> {
    let b = LatticeBox::new(vec![l; op.dim()]);
    Ok(linalg::eigenvalues(&lattice_ops::truncate(op, &b)?)?)
}
