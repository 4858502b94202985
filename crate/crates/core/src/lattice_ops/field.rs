//! Structured coefficient fields on `Z^d`.
//!
//! A field is a finite sum of terms; each term is a constant, a periodic
//! table, or a compactly supported table, optionally restricted by a
//! conjunction of half-space and strip masks. All shape questions that the
//! spectral code needs (periodicity per axis, confinement per axis, support
//! hulls) are answered from this structure, never by sampling.

use serde::{Deserialize, Serialize};

use super::sites::{Interval, Site};
use super::LatticeError;
use crate::linalg::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `x_axis >= cut`
    Upper,
    /// `x_axis <= cut`
    Lower,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MaskClause {
    HalfSpace { axis: usize, side: Side, cut: i64 },
    Strip { axis: usize, center: i64, half_width: u64 },
}

impl MaskClause {
    pub fn axis(&self) -> usize {
        match self {
            MaskClause::HalfSpace { axis, .. } | MaskClause::Strip { axis, .. } => *axis,
        }
    }

    pub fn interval(&self) -> Interval {
        match *self {
            MaskClause::HalfSpace { side: Side::Upper, cut, .. } => Interval::new(Some(cut), None),
            MaskClause::HalfSpace { side: Side::Lower, cut, .. } => Interval::new(None, Some(cut)),
            MaskClause::Strip {
                center, half_width, ..
            } => Interval::bounded(center - half_width as i64, center + half_width as i64),
        }
    }

    fn shifted(&self, s: &Site) -> MaskClause {
        match *self {
            MaskClause::HalfSpace { axis, side, cut } => MaskClause::HalfSpace {
                axis,
                side,
                cut: cut - s[axis],
            },
            MaskClause::Strip {
                axis,
                center,
                half_width,
            } => MaskClause::Strip {
                axis,
                center: center - s[axis],
                half_width,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldKind {
    Constant(C64),
    /// Row-major table over the unit cell, axis 0 slowest.
    Periodic { periods: Vec<usize>, table: Vec<C64> },
    /// Row-major table over the support box `[lo, hi]`, zero outside.
    Compact { lo: Vec<i64>, hi: Vec<i64>, table: Vec<C64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldTerm {
    pub kind: FieldKind,
    pub mask: Vec<MaskClause>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    dim: usize,
    terms: Vec<FieldTerm>,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

fn cell_index(periods: &[usize], site: &Site) -> usize {
    periods.iter().enumerate().fold(0, |acc, (a, &k)| {
        acc * k + site[a].rem_euclid(k as i64) as usize
    })
}

fn box_size(lo: &[i64], hi: &[i64]) -> usize {
    lo.iter().zip(hi).map(|(l, h)| (h - l + 1).max(0) as usize).product()
}

fn box_index(lo: &[i64], hi: &[i64], site: &Site) -> Option<usize> {
    let mut idx = 0usize;
    for a in 0..lo.len() {
        if site[a] < lo[a] || site[a] > hi[a] {
            return None;
        }
        idx = idx * (hi[a] - lo[a] + 1) as usize + (site[a] - lo[a]) as usize;
    }
    Some(idx)
}

fn box_sites(lo: &[i64], hi: &[i64]) -> Vec<Site> {
    let mut out = Vec::with_capacity(box_size(lo, hi));
    match lo.len() {
        1 => {
            for x in lo[0]..=hi[0] {
                out.push([x, 0]);
            }
        }
        _ => {
            for x in lo[0]..=hi[0] {
                for y in lo[1]..=hi[1] {
                    out.push([x, y]);
                }
            }
        }
    }
    out
}

fn cell_sites(periods: &[usize]) -> Vec<Site> {
    let hi: Vec<i64> = periods.iter().map(|&k| k as i64 - 1).collect();
    box_sites(&vec![0; periods.len()], &hi)
}

impl FieldKind {
    fn value(&self, site: &Site) -> C64 {
        match self {
            FieldKind::Constant(v) => *v,
            FieldKind::Periodic { periods, table } => table[cell_index(periods, site)],
            FieldKind::Compact { lo, hi, table } => {
                box_index(lo, hi, site).map_or(C64::new(0.0, 0.0), |i| table[i])
            }
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            FieldKind::Constant(v) => *v == C64::new(0.0, 0.0),
            FieldKind::Periodic { table, .. } | FieldKind::Compact { table, .. } => {
                table.iter().all(|v| *v == C64::new(0.0, 0.0))
            }
        }
    }

    fn map_values(&self, f: impl Fn(C64) -> C64) -> FieldKind {
        match self {
            FieldKind::Constant(v) => FieldKind::Constant(f(*v)),
            FieldKind::Periodic { periods, table } => FieldKind::Periodic {
                periods: periods.clone(),
                table: table.iter().map(|&v| f(v)).collect(),
            },
            FieldKind::Compact { lo, hi, table } => FieldKind::Compact {
                lo: lo.clone(),
                hi: hi.clone(),
                table: table.iter().map(|&v| f(v)).collect(),
            },
        }
    }

    fn shifted(&self, s: &Site) -> FieldKind {
        match self {
            FieldKind::Constant(v) => FieldKind::Constant(*v),
            FieldKind::Periodic { periods, table } => {
                let cells = cell_sites(periods);
                let table = cells
                    .iter()
                    .map(|u| {
                        let moved = [u[0] + s[0], u[1] + s[1]];
                        table[cell_index(periods, &moved)]
                    })
                    .collect();
                FieldKind::Periodic {
                    periods: periods.clone(),
                    table,
                }
            }
            FieldKind::Compact { lo, hi, table } => FieldKind::Compact {
                lo: lo.iter().enumerate().map(|(a, l)| l - s[a]).collect(),
                hi: hi.iter().enumerate().map(|(a, h)| h - s[a]).collect(),
                table: table.clone(),
            },
        }
    }

    /// Pointwise product of two kinds, ignoring masks.
    fn product(&self, other: &FieldKind) -> Option<FieldKind> {
        use FieldKind::*;
        match (self, other) {
            (Constant(a), Constant(b)) => Some(Constant(a * b)),
            (Constant(a), k @ Periodic { .. }) | (k @ Periodic { .. }, Constant(a)) => {
                Some(k.map_values(|v| v * a))
            }
            (Periodic { periods: p, .. }, Periodic { periods: q, .. }) => {
                let periods: Vec<usize> = p.iter().zip(q).map(|(&x, &y)| lcm(x, y)).collect();
                let table = cell_sites(&periods)
                    .iter()
                    .map(|u| self.value(u) * other.value(u))
                    .collect();
                Some(Periodic { periods, table })
            }
            _ => {
                let (lo, hi) = match (self, other) {
                    (Compact { lo: l1, hi: h1, .. }, Compact { lo: l2, hi: h2, .. }) => (
                        l1.iter().zip(l2).map(|(a, b)| *a.max(b)).collect::<Vec<_>>(),
                        h1.iter().zip(h2).map(|(a, b)| *a.min(b)).collect::<Vec<_>>(),
                    ),
                    (Compact { lo, hi, .. }, _) | (_, Compact { lo, hi, .. }) => (lo.clone(), hi.clone()),
                    _ => unreachable!("non-compact pairs handled above"),
                };
                if lo.iter().zip(&hi).any(|(l, h)| l > h) {
                    return None;
                }
                let table = box_sites(&lo, &hi)
                    .iter()
                    .map(|x| self.value(x) * other.value(x))
                    .collect();
                Some(Compact { lo, hi, table })
            }
        }
    }

    fn interval(&self, axis: usize) -> Interval {
        match self {
            FieldKind::Compact { lo, hi, .. } => Interval::bounded(lo[axis], hi[axis]),
            _ => Interval::ALL,
        }
    }
}

impl FieldTerm {
    pub fn value(&self, site: &Site) -> C64 {
        if self.mask.iter().all(|m| m.interval().contains(site[m.axis()])) {
            self.kind.value(site)
        } else {
            C64::new(0.0, 0.0)
        }
    }

    /// Support hull along one axis: kind support intersected with masks.
    pub fn interval(&self, axis: usize) -> Interval {
        self.mask
            .iter()
            .filter(|m| m.axis() == axis)
            .fold(self.kind.interval(axis), |acc, m| acc.intersect(&m.interval()))
    }

    /// Period along `axis`, or `None` when the term is not translation
    /// invariant along it.
    pub fn period(&self, axis: usize) -> Option<usize> {
        if self.mask.iter().any(|m| m.axis() == axis) {
            return None;
        }
        match &self.kind {
            FieldKind::Constant(_) => Some(1),
            FieldKind::Periodic { periods, .. } => Some(periods[axis]),
            FieldKind::Compact { .. } => None,
        }
    }

    fn is_vacuous(&self, dim: usize) -> bool {
        self.kind.is_zero() || (0..dim).any(|a| self.interval(a).is_empty())
    }
}

impl CoefficientField {
    pub fn new(dim: usize, terms: Vec<FieldTerm>) -> Result<Self, LatticeError> {
        if !(1..=2).contains(&dim) {
            return Err(LatticeError::UnsupportedDimension(dim));
        }
        for t in &terms {
            validate_term(dim, t)?;
        }
        let terms = terms.into_iter().filter(|t| !t.is_vacuous(dim)).collect();
        Ok(Self { dim, terms })
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    pub fn constant(dim: usize, value: C64) -> Self {
        Self::masked(dim, FieldKind::Constant(value), Vec::new())
    }

    pub fn masked(dim: usize, kind: FieldKind, mask: Vec<MaskClause>) -> Self {
        Self::new(dim, vec![FieldTerm { kind, mask }]).expect("well-formed field")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[FieldTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn value(&self, site: &Site) -> C64 {
        self.terms.iter().map(|t| t.value(site)).sum()
    }

    pub fn sum(&self, other: &CoefficientField) -> CoefficientField {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        CoefficientField { dim: self.dim, terms }
    }

    pub fn conj(&self) -> CoefficientField {
        self.map(|v| v.conj())
    }

    pub fn scale(&self, s: C64) -> CoefficientField {
        let mut out = self.map(|v| v * s);
        out.terms.retain(|t| !t.is_vacuous(out.dim));
        out
    }

    fn map(&self, f: impl Fn(C64) -> C64 + Copy) -> CoefficientField {
        CoefficientField {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| FieldTerm {
                    kind: t.kind.map_values(f),
                    mask: t.mask.clone(),
                })
                .collect(),
        }
    }

    /// The field `x ↦ f(x + s)`.
    pub fn shifted(&self, s: &Site) -> CoefficientField {
        CoefficientField {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| FieldTerm {
                    kind: t.kind.shifted(s),
                    mask: t.mask.iter().map(|m| m.shifted(s)).collect(),
                })
                .collect(),
        }
    }

    /// Pointwise product, distributed over terms.
    pub fn product(&self, other: &CoefficientField) -> CoefficientField {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                if let Some(kind) = a.kind.product(&b.kind) {
                    let mut mask = a.mask.clone();
                    mask.extend(b.mask.iter().cloned());
                    let t = FieldTerm { kind, mask };
                    if !t.is_vacuous(self.dim) {
                        terms.push(t);
                    }
                }
            }
        }
        CoefficientField { dim: self.dim, terms }
    }

    /// Period along `axis` (lcm over terms), `None` if some term is not
    /// periodic along it. The zero field has period 1.
    pub fn period(&self, axis: usize) -> Option<usize> {
        self.terms
            .iter()
            .try_fold(1usize, |acc, t| t.period(axis).map(|p| lcm(acc, p)))
    }

    /// Axes along which the field is periodic.
    pub fn periodic_axes(&self) -> Vec<usize> {
        (0..self.dim).filter(|&a| self.period(a).is_some()).collect()
    }

    /// Support hull along `axis`; unbounded if any term is.
    pub fn support(&self, axis: usize) -> Interval {
        let mut it = self.terms.iter().map(|t| t.interval(axis));
        match it.next() {
            None => Interval::bounded(0, -1),
            Some(first) => it.fold(first, |acc, i| acc.hull(&i)),
        }
    }

    /// Axes along which the field is confined to a bounded band.
    pub fn confined_axes(&self) -> Vec<usize> {
        (0..self.dim)
            .filter(|&a| self.terms.iter().all(|t| t.interval(a).is_bounded()))
            .collect()
    }
}

fn validate_term(dim: usize, t: &FieldTerm) -> Result<(), LatticeError> {
    let bad = |msg: String| Err(LatticeError::InvalidField(msg));
    match &t.kind {
        FieldKind::Constant(_) => {}
        FieldKind::Periodic { periods, table } => {
            if periods.len() != dim {
                return bad(format!("periodic field needs {dim} periods, got {}", periods.len()));
            }
            if periods.contains(&0) {
                return bad("periods must be positive".into());
            }
            let need: usize = periods.iter().product();
            if table.len() != need {
                return bad(format!("periodic table has {} entries, expected {need}", table.len()));
            }
        }
        FieldKind::Compact { lo, hi, table } => {
            if lo.len() != dim || hi.len() != dim {
                return bad(format!("compact support must have {dim} bounds per side"));
            }
            if lo.iter().zip(hi).any(|(l, h)| l > h) {
                return bad("compact support has lo > hi".into());
            }
            let need = box_size(lo, hi);
            if table.len() != need {
                return bad(format!("compact table has {} entries, expected {need}", table.len()));
            }
        }
    }
    for m in &t.mask {
        if m.axis() >= dim {
            return bad(format!("mask axis {} out of range for dimension {dim}", m.axis()));
        }
    }
    Ok(())
}
