//! Floquet–Bloch reduction of periodic lattice operators and of 2D
//! operators periodic along one axis (fiber operators).

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice_ops::{
    self, CoefficientField, FieldKind, FieldTerm, Hop, Interval, LatticeBox, LatticeError,
    LatticeOperator, Site,
};
use crate::linalg::{self, c, CMatrix, LinalgError, C64};
use crate::spectrum::{SpectrumPoint, SpectrumSet, Tag};

/// Default number of θ samples per periodic axis.
pub const DEFAULT_GRID: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlochError {
    #[error("operator is not periodic along axis {axis}")]
    NotFullyPeriodic { axis: usize },
    #[error("operator is not periodic along axis {axis}")]
    NotPeriodicAlongAxis { axis: usize },
    #[error("transverse coefficients do not split into periodic background plus compact defect: {0}")]
    TransverseNotDecomposable(String),
    #[error("candidate eigenvalue {value} moved by {movement:e} under doubling the box (tolerance {tolerance:e})")]
    UnstableEigenvalue {
        value: C64,
        movement: f64,
        tolerance: f64,
    },
    #[error("grid must be positive")]
    EmptyGrid,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// θ sample `j` of a uniform grid on `[0, 2π)` that includes 0.
pub fn grid_theta(j: usize, grid: usize) -> f64 {
    2.0 * PI * j as f64 / grid as f64
}

fn cell_sites(periods: &[usize]) -> Vec<Site> {
    match periods {
        [k] => (0..*k as i64).map(|x| [x, 0]).collect(),
        [k0, k1] => (0..*k0 as i64)
            .flat_map(|x| (0..*k1 as i64).map(move |y| [x, y]))
            .collect(),
        _ => unreachable!("dimension is 1 or 2"),
    }
}

fn full_periods(op: &LatticeOperator) -> Result<Vec<usize>, BlochError> {
    (0..op.dim())
        .map(|axis| op.period(axis).ok_or(BlochError::NotFullyPeriodic { axis }))
        .collect()
}

/// Bloch symbol `M(θ)[u, v] = Σ a_r(u) e^{iθ·n}` over hops `u + b_r = v + k∘n`,
/// with cell sites ordered lexicographically (axis 0 slowest).
pub fn symbol(op: &LatticeOperator, theta: &[f64]) -> Result<CMatrix, BlochError> {
    let periods = full_periods(op)?;
    if theta.len() != op.dim() {
        return Err(LatticeError::DimensionMismatch {
            expected: op.dim(),
            found: theta.len(),
        }
        .into());
    }
    Ok(symbol_with_periods(op, &periods, theta))
}

fn symbol_with_periods(op: &LatticeOperator, periods: &[usize], theta: &[f64]) -> CMatrix {
    let cells = cell_sites(periods);
    let index = |s: &Site| {
        periods
            .iter()
            .enumerate()
            .fold(0usize, |acc, (a, &k)| acc * k + s[a] as usize)
    };
    let k = cells.len();
    let mut m = CMatrix::zeros(k, k);
    for (u_idx, u) in cells.iter().enumerate() {
        for h in op.hops() {
            let a = h.field.value(u);
            if a == c(0.0, 0.0) {
                continue;
            }
            let mut v = [0i64; 2];
            let mut phase = 0.0;
            for (axis, &p) in periods.iter().enumerate() {
                let y = u[axis] + h.offset[axis];
                let p = p as i64;
                v[axis] = y.rem_euclid(p);
                phase += theta[axis] * y.div_euclid(p) as f64;
            }
            m[(u_idx, index(&v))] += a * C64::from_polar(1.0, phase);
        }
    }
    m
}

/// Eigenvalues of the symbol over the uniform θ grid (`grid` points per
/// axis), tagged band with θ and in-fiber band index as provenance.
pub fn periodic_spectrum(op: &LatticeOperator, grid: usize) -> Result<SpectrumSet, BlochError> {
    if grid == 0 {
        return Err(BlochError::EmptyGrid);
    }
    let periods = full_periods(op)?;
    let dim = op.dim();
    let count = grid.pow(dim as u32);
    let chunks: Result<Vec<Vec<SpectrumPoint>>, BlochError> = (0..count)
        .into_par_iter()
        .map(|j| {
            let theta: Vec<f64> = match dim {
                1 => vec![grid_theta(j, grid)],
                _ => vec![grid_theta(j / grid, grid), grid_theta(j % grid, grid)],
            };
            let vals = linalg::eigenvalues(&symbol_with_periods(op, &periods, &theta))?;
            Ok(vals
                .into_iter()
                .enumerate()
                .map(|(b, v)| SpectrumPoint::new(v, Tag::Band).with_theta(theta.clone()).with_index(b))
                .collect())
        })
        .collect();
    Ok(SpectrumSet::from_points(chunks?.into_iter().flatten().collect()))
}

/// Periodic-boundary truncation on `cells[a] · k_a` sites per axis, site
/// order as in [`LatticeBox`] but starting at the origin.
pub fn periodic_truncation(op: &LatticeOperator, cells: &[usize]) -> Result<CMatrix, BlochError> {
    let periods = full_periods(op)?;
    if cells.len() != op.dim() {
        return Err(LatticeError::DimensionMismatch {
            expected: op.dim(),
            found: cells.len(),
        }
        .into());
    }
    let sizes: Vec<usize> = periods.iter().zip(cells).map(|(k, n)| k * n).collect();
    let sites = cell_sites(&sizes);
    let index = |s: &Site| {
        sizes
            .iter()
            .enumerate()
            .fold(0usize, |acc, (a, &k)| acc * k + s[a].rem_euclid(k as i64) as usize)
    };
    let n = sites.len();
    let mut m = CMatrix::zeros(n, n);
    for (i, x) in sites.iter().enumerate() {
        for h in op.hops() {
            let y = [x[0] + h.offset[0], x[1] + h.offset[1]];
            m[(i, index(&y))] += h.field.value(x);
        }
    }
    Ok(m)
}

/// A 2D operator Bloch-reduced along one periodic axis at quasimomentum θ.
///
/// With longitudinal period `p`, the 2D site with longitudinal residue
/// `c ∈ [0, p)` and transverse coordinate `y` becomes fiber site `p·y + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberOperator {
    pub theta: f64,
    /// Periodic axis of the parent operator (`None` when built directly).
    pub axis: Option<usize>,
    pub period: usize,
    /// Periodic part, as a 1D operator.
    pub background: LatticeOperator,
    /// Compactly supported part, as a 1D operator.
    pub defect: LatticeOperator,
}

impl FiberOperator {
    /// Wraps a 1D periodic background and compact defect directly.
    pub fn from_parts(
        background: LatticeOperator,
        defect: LatticeOperator,
        theta: f64,
    ) -> Result<Self, BlochError> {
        for op in [&background, &defect] {
            if op.dim() != 1 {
                return Err(LatticeError::DimensionMismatch {
                    expected: 1,
                    found: op.dim(),
                }
                .into());
            }
        }
        if background.period(0).is_none() {
            return Err(BlochError::TransverseNotDecomposable(
                "background is not periodic".into(),
            ));
        }
        if !defect.hops().iter().all(|h| h.field.support(0).is_bounded()) {
            return Err(BlochError::TransverseNotDecomposable(
                "defect is not compactly supported".into(),
            ));
        }
        Ok(Self {
            theta,
            axis: None,
            period: 1,
            background,
            defect,
        })
    }

    pub fn operator(&self) -> LatticeOperator {
        self.background
            .add(&self.defect)
            .expect("fiber parts share dimension 1")
    }
}

fn site2(axis: usize, longitudinal: i64, transverse: i64) -> Site {
    if axis == 0 {
        [longitudinal, transverse]
    } else {
        [transverse, longitudinal]
    }
}

/// Partial Bloch transform of `op2d` along `axis` at `theta`.
pub fn fiber_operator(op2d: &LatticeOperator, axis: usize, theta: f64) -> Result<FiberOperator, BlochError> {
    if op2d.dim() != 2 {
        return Err(LatticeError::DimensionMismatch {
            expected: 2,
            found: op2d.dim(),
        }
        .into());
    }
    if axis > 1 {
        return Err(LatticeError::InvalidSpec(format!("axis {axis} out of range")).into());
    }
    let p = op2d
        .period(axis)
        .ok_or(BlochError::NotPeriodicAlongAxis { axis })?;
    let t = 1 - axis;
    let pi = p as i64;
    let mut bg_hops = Vec::new();
    let mut defect_hops = Vec::new();
    for h in op2d.hops() {
        let (bg_terms, defect_terms): (Vec<FieldTerm>, Vec<FieldTerm>) = h
            .field
            .terms()
            .iter()
            .cloned()
            .partition(|term| term.interval(t) == Interval::ALL);
        if let Some(bad) = defect_terms.iter().find(|term| !term.interval(t).is_bounded()) {
            return Err(BlochError::TransverseNotDecomposable(format!(
                "a coefficient of hop {:?} is half-bounded along axis {t}: {:?}",
                h.offset,
                bad.interval(t)
            )));
        }
        let bg = CoefficientField::new(2, bg_terms)?;
        let defect = CoefficientField::new(2, defect_terms)?;
        for residue in 0..pi {
            let target = residue + h.offset[axis];
            let winding = target.div_euclid(pi);
            let offset = pi * h.offset[t] + target.rem_euclid(pi) - residue;
            let phase = C64::from_polar(1.0, theta * winding as f64);
            if !bg.is_zero() {
                let kt = bg.period(t).expect("unmasked terms are periodic transversally");
                let len = p * kt;
                let table: Vec<C64> = (0..len as i64)
                    .map(|s| {
                        if s.rem_euclid(pi) == residue {
                            bg.value(&site2(axis, residue, s.div_euclid(pi))) * phase
                        } else {
                            c(0.0, 0.0)
                        }
                    })
                    .collect();
                bg_hops.push(Hop {
                    offset: [offset, 0],
                    field: CoefficientField::masked(
                        1,
                        FieldKind::Periodic {
                            periods: vec![len],
                            table,
                        },
                        Vec::new(),
                    ),
                });
            }
            if !defect.is_zero() {
                let support = defect.support(t);
                let (lo, hi) = (
                    support.lo.expect("bounded") * pi,
                    support.hi.expect("bounded") * pi + pi - 1,
                );
                let table: Vec<C64> = (lo..=hi)
                    .map(|s| {
                        if s.rem_euclid(pi) == residue {
                            defect.value(&site2(axis, residue, s.div_euclid(pi))) * phase
                        } else {
                            c(0.0, 0.0)
                        }
                    })
                    .collect();
                defect_hops.push(Hop {
                    offset: [offset, 0],
                    field: CoefficientField::masked(
                        1,
                        FieldKind::Compact {
                            lo: vec![lo],
                            hi: vec![hi],
                            table,
                        },
                        Vec::new(),
                    ),
                });
            }
        }
    }
    Ok(FiberOperator {
        theta,
        axis: Some(axis),
        period: p,
        background: LatticeOperator::new(1, bg_hops)?,
        defect: LatticeOperator::new(1, defect_hops)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiberTolerances {
    /// Maximal eigenvector mass in the outer 10% of the truncation.
    pub boundary: f64,
    /// Minimal distance from the band curves.
    pub gap: f64,
    /// Maximal movement under doubling the box.
    pub stability: f64,
    /// θ samples for the background band sweep.
    pub grid: usize,
}

impl Default for FiberTolerances {
    fn default() -> Self {
        Self {
            boundary: 1e-6,
            gap: 1e-3,
            stability: 1e-6,
            grid: DEFAULT_GRID,
        }
    }
}

/// Band curves of a 1D periodic operator, traced by nearest-neighbour
/// continuation across a closed θ sweep.
#[derive(Debug, Clone)]
pub struct BandCurves {
    curves: Vec<Vec<C64>>,
}

impl BandCurves {
    pub fn sweep(op: &LatticeOperator, grid: usize) -> Result<Self, BlochError> {
        let periods = full_periods(op)?;
        if op.dim() != 1 {
            return Err(LatticeError::DimensionMismatch {
                expected: 1,
                found: op.dim(),
            }
            .into());
        }
        let per_theta: Result<Vec<Vec<C64>>, BlochError> = (0..grid)
            .into_par_iter()
            .map(|j| Ok(linalg::eigenvalues(&symbol_with_periods(op, &periods, &[grid_theta(j, grid)]))?))
            .collect();
        Ok(Self::trace(&per_theta?))
    }

    /// Greedy nearest-neighbour matching of consecutive eigenvalue lists.
    pub fn trace(per_theta: &[Vec<C64>]) -> Self {
        let Some(first) = per_theta.first() else {
            return Self { curves: Vec::new() };
        };
        let mut curves: Vec<Vec<C64>> = first.iter().map(|&v| vec![v]).collect();
        for vals in &per_theta[1..] {
            let mut used = vec![false; vals.len()];
            for curve in curves.iter_mut() {
                let last = *curve.last().expect("non-empty curve");
                let best = (0..vals.len())
                    .filter(|&i| !used[i])
                    .min_by(|&a, &b| (vals[a] - last).norm().total_cmp(&(vals[b] - last).norm()));
                if let Some(i) = best {
                    used[i] = true;
                    curve.push(vals[i]);
                }
            }
        }
        // close each curve through θ = 2π ≡ 0
        let starts: Vec<C64> = curves.iter().map(|c| c[0]).collect();
        for curve in curves.iter_mut() {
            let last = *curve.last().expect("non-empty curve");
            let closest = starts
                .iter()
                .copied()
                .min_by(|a, b| (a - last).norm().total_cmp(&(b - last).norm()))
                .expect("non-empty");
            curve.push(closest);
        }
        Self { curves }
    }

    pub fn points(&self) -> impl Iterator<Item = C64> + '_ {
        self.curves.iter().flatten().copied()
    }

    /// Distance from `z` to the union of the polylines.
    pub fn distance(&self, z: C64) -> f64 {
        let mut best = f64::INFINITY;
        for curve in &self.curves {
            if curve.len() == 1 {
                best = best.min((curve[0] - z).norm());
            }
            for w in curve.windows(2) {
                best = best.min(segment_distance(z, w[0], w[1]));
            }
        }
        best
    }
}

fn segment_distance(z: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (z - (a + d * t)).norm()
}

/// Eigenvalues of the Dirichlet truncation on `[-l, l]` that pass the gap,
/// boundary-mass and stability filters.
pub fn fiber_discrete(
    fiber: &FiberOperator,
    l: usize,
    tol: &FiberTolerances,
    bands: &BandCurves,
) -> Result<Vec<C64>, BlochError> {
    if fiber.defect.is_zero() {
        return Ok(Vec::new());
    }
    let op = fiber.operator();
    let mat = lattice_ops::truncate(&op, &LatticeBox::line(l))?;
    let vals = linalg::eigenvalues(&mat)?;
    if !vals.iter().any(|&v| bands.distance(v) > tol.gap) {
        return Ok(Vec::new());
    }
    let (vals, vecs) = linalg::eigenpairs(&mat)?;
    let n = vals.len();
    let outer = (n / 10).max(1);
    let mut candidates = Vec::new();
    for (k, &v) in vals.iter().enumerate() {
        if bands.distance(v) <= tol.gap {
            continue;
        }
        let col = vecs.column(k);
        let mass: f64 = (0..outer)
            .map(|i| col[i].norm_sqr() + col[n - 1 - i].norm_sqr())
            .sum();
        if mass < tol.boundary {
            candidates.push(v);
        }
    }
    if candidates.is_empty() {
        return Ok(Vec::new());
    }
    let doubled = linalg::eigenvalues(&lattice_ops::truncate(&op, &LatticeBox::line(2 * l))?)?;
    let mut accepted = Vec::new();
    for v in candidates {
        let movement = doubled
            .iter()
            .map(|w| (w - v).norm())
            .fold(f64::INFINITY, f64::min);
        if movement >= tol.stability {
            return Err(BlochError::UnstableEigenvalue {
                value: v,
                movement,
                tolerance: tol.stability,
            });
        }
        accepted.push(v);
    }
    accepted.sort_by(linalg::cmp_complex);
    Ok(accepted)
}

/// Background bands (tagged band, θ provenance `[θ_fiber, θ']`) plus
/// certified discrete eigenvalues (tagged discrete, θ provenance `[θ_fiber]`).
pub fn fiber_spectrum(fiber: &FiberOperator, l: usize, tol: &FiberTolerances) -> Result<SpectrumSet, BlochError> {
    let band_set = periodic_spectrum(&fiber.background, tol.grid)?;
    let bands = BandCurves::sweep(&fiber.background, tol.grid)?;
    let discrete = fiber_discrete(fiber, l, tol, &bands)?;
    let mut points: Vec<SpectrumPoint> = band_set
        .points()
        .iter()
        .cloned()
        .map(|mut p| {
            let mut theta = vec![fiber.theta];
            theta.extend(p.theta.take().unwrap_or_default());
            p.theta = Some(theta);
            p
        })
        .collect();
    points.extend(
        discrete
            .into_iter()
            .map(|v| SpectrumPoint::new(v, Tag::Discrete).with_theta(vec![fiber.theta])),
    );
    Ok(SpectrumSet::from_points(points))
}
