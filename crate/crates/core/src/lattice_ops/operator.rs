use std::collections::BTreeMap;

use super::field::CoefficientField;
use super::sites::Site;
use super::LatticeError;
use crate::linalg::{c, C64};

/// One hopping term `φ ↦ a(x) φ(x + offset)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hop {
    pub offset: Site,
    pub field: CoefficientField,
}

/// Finite-range operator `(Aφ)(x) = Σ_r a_r(x) φ(x + b_r)` on `Z` or `Z^2`.
///
/// Hops are kept merged by offset and sorted, with zero fields dropped, so
/// structural equality is meaningful.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeOperator {
    dim: usize,
    hops: Vec<Hop>,
}

impl LatticeOperator {
    pub fn new(dim: usize, hops: Vec<Hop>) -> Result<Self, LatticeError> {
        if !(1..=2).contains(&dim) {
            return Err(LatticeError::UnsupportedDimension(dim));
        }
        for h in &hops {
            if h.field.dim() != dim {
                return Err(LatticeError::DimensionMismatch {
                    expected: dim,
                    found: h.field.dim(),
                });
            }
            if dim == 1 && h.offset[1] != 0 {
                return Err(LatticeError::InvalidField(
                    "one-dimensional offsets must have a zero second component".into(),
                ));
            }
        }
        Ok(Self::merged(dim, hops))
    }

    fn merged(dim: usize, hops: Vec<Hop>) -> Self {
        let mut by_offset: BTreeMap<Site, CoefficientField> = BTreeMap::new();
        for h in hops {
            by_offset
                .entry(h.offset)
                .and_modify(|f| *f = f.sum(&h.field))
                .or_insert(h.field);
        }
        let hops = by_offset
            .into_iter()
            .filter(|(_, f)| !f.is_zero())
            .map(|(offset, field)| Hop { offset, field })
            .collect();
        Self { dim, hops }
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, hops: Vec::new() }
    }

    /// Nearest-neighbour Laplacian `Σ_{|b|=1} φ(x + b)` (no diagonal).
    pub fn laplacian(dim: usize) -> Self {
        let offsets: Vec<Site> = match dim {
            1 => vec![[1, 0], [-1, 0]],
            _ => vec![[1, 0], [-1, 0], [0, 1], [0, -1]],
        };
        let hops = offsets
            .into_iter()
            .map(|offset| Hop {
                offset,
                field: CoefficientField::constant(dim, c(1.0, 0.0)),
            })
            .collect();
        Self::merged(dim, hops)
    }

    /// Multiplication by a field.
    pub fn multiplication(field: CoefficientField) -> Self {
        let dim = field.dim();
        Self::merged(dim, vec![Hop { offset: [0, 0], field }])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hops(&self) -> &[Hop] {
        &self.hops
    }

    pub fn is_zero(&self) -> bool {
        self.hops.is_empty()
    }

    /// Hop range `max_r |b_r|∞`.
    pub fn range(&self) -> u64 {
        self.hops
            .iter()
            .map(|h| h.offset[0].unsigned_abs().max(h.offset[1].unsigned_abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn add(&self, other: &LatticeOperator) -> Result<LatticeOperator, LatticeError> {
        self.check_dim(other)?;
        let mut hops = self.hops.clone();
        hops.extend(other.hops.iter().cloned());
        Ok(Self::merged(self.dim, hops))
    }

    pub fn scale(&self, s: C64) -> LatticeOperator {
        let hops = self
            .hops
            .iter()
            .map(|h| Hop {
                offset: h.offset,
                field: h.field.scale(s),
            })
            .collect();
        Self::merged(self.dim, hops)
    }

    /// `(A*φ)(x) = Σ_r conj(a_r(x − b_r)) φ(x − b_r)`.
    pub fn adjoint(&self) -> LatticeOperator {
        let hops = self
            .hops
            .iter()
            .map(|h| {
                let back = [-h.offset[0], -h.offset[1]];
                Hop {
                    offset: back,
                    field: h.field.shifted(&back).conj(),
                }
            })
            .collect();
        Self::merged(self.dim, hops)
    }

    /// `A ∘ B` as a hopping operator: offsets add, coefficients multiply
    /// pointwise after shifting B's field by A's offset.
    pub fn compose(&self, other: &LatticeOperator) -> Result<LatticeOperator, LatticeError> {
        self.check_dim(other)?;
        let mut hops = Vec::with_capacity(self.hops.len() * other.hops.len());
        for a in &self.hops {
            for b in &other.hops {
                hops.push(Hop {
                    offset: [a.offset[0] + b.offset[0], a.offset[1] + b.offset[1]],
                    field: a.field.product(&b.field.shifted(&a.offset)),
                });
            }
        }
        Ok(Self::merged(self.dim, hops))
    }

    fn check_dim(&self, other: &LatticeOperator) -> Result<(), LatticeError> {
        if self.dim != other.dim {
            return Err(LatticeError::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    /// Period along `axis` over all coefficients.
    pub fn period(&self, axis: usize) -> Option<usize> {
        self.hops
            .iter()
            .try_fold(1usize, |acc, h| h.field.period(axis).map(|p| super::field::lcm(acc, p)))
    }

    /// Periods along every axis, or `None` if some axis is not periodic.
    pub fn periods(&self) -> Option<Vec<usize>> {
        (0..self.dim).map(|a| self.period(a)).collect()
    }

    pub fn is_periodic_along(&self, axis: usize) -> bool {
        self.period(axis).is_some()
    }
}
