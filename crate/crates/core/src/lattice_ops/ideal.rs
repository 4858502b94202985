//! Axis-aligned reference sets `S ⊆ Z^d` and their l∞ neighbourhoods.
//!
//! Every supported shape is a product of per-axis integer intervals, so
//! `S(n) = {x : d∞(x, S) <= n}` is again such a product, obtained by
//! widening each bounded side by `n`.

use super::field::Side;
use super::sites::{Interval, LatticeBox, Site};
use super::LatticeError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Shape {
    HalfSpace { axis: usize, side: Side, cut: i64 },
    Strip { axis: usize, center: i64, half_width: u64 },
    /// `{x : x_i = 0 for all i in axes}`.
    CoordinateLine { axes: Vec<usize> },
    BoundedBox { lo: Vec<i64>, hi: Vec<i64> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealSpec {
    dim: usize,
    shape: Shape,
}

impl IdealSpec {
    /// Validates the shape and rejects sets whose neighbourhoods eventually
    /// cover all of `Z^d`.
    pub fn new(dim: usize, shape: Shape) -> Result<Self, LatticeError> {
        if !(1..=2).contains(&dim) {
            return Err(LatticeError::UnsupportedDimension(dim));
        }
        let bad = |m: &str| Err(LatticeError::InvalidSpec(m.to_string()));
        match &shape {
            Shape::HalfSpace { axis, .. } | Shape::Strip { axis, .. } if *axis >= dim => {
                return bad("axis out of range");
            }
            Shape::CoordinateLine { axes } => {
                if axes.is_empty() {
                    return bad("coordinate line with no constrained axes is all of Z^d");
                }
                if axes.iter().any(|&a| a >= dim) {
                    return bad("axis out of range");
                }
            }
            Shape::BoundedBox { lo, hi } => {
                if lo.len() != dim || hi.len() != dim {
                    return bad("box bounds must match the dimension");
                }
                if lo.iter().zip(hi).any(|(l, h)| l > h) {
                    return bad("box has lo > hi");
                }
            }
            _ => {}
        }
        let spec = Self { dim, shape };
        if spec.intervals().iter().all(|i| *i == Interval::ALL) {
            return bad("set is all of Z^d");
        }
        Ok(spec)
    }

    pub fn half_space(dim: usize, axis: usize, side: Side, cut: i64) -> Result<Self, LatticeError> {
        Self::new(dim, Shape::HalfSpace { axis, side, cut })
    }

    pub fn strip(dim: usize, axis: usize, half_width: u64) -> Result<Self, LatticeError> {
        Self::new(
            dim,
            Shape::Strip {
                axis,
                center: 0,
                half_width,
            },
        )
    }

    pub fn line(dim: usize, axes: Vec<usize>) -> Result<Self, LatticeError> {
        Self::new(dim, Shape::CoordinateLine { axes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// The set as a product of per-axis intervals.
    pub fn intervals(&self) -> Vec<Interval> {
        let mut out = vec![Interval::ALL; self.dim];
        match &self.shape {
            Shape::HalfSpace { axis, side, cut } => {
                out[*axis] = match side {
                    Side::Upper => Interval::new(Some(*cut), None),
                    Side::Lower => Interval::new(None, Some(*cut)),
                };
            }
            Shape::Strip {
                axis,
                center,
                half_width,
            } => {
                let w = *half_width as i64;
                out[*axis] = Interval::bounded(center - w, center + w);
            }
            Shape::CoordinateLine { axes } => {
                for &a in axes {
                    out[a] = Interval::bounded(0, 0);
                }
            }
            Shape::BoundedBox { lo, hi } => {
                for a in 0..self.dim {
                    out[a] = Interval::bounded(lo[a], hi[a]);
                }
            }
        }
        out
    }

    pub fn neighbourhood(&self, n: u64) -> Vec<Interval> {
        self.intervals().iter().map(|i| i.expand(n)).collect()
    }

    pub fn distance(&self, site: &Site) -> u64 {
        self.intervals()
            .iter()
            .enumerate()
            .map(|(a, i)| i.distance(site[a]))
            .max()
            .unwrap_or(0)
    }

    pub fn contains_in_neighbourhood(&self, site: &Site, n: u64) -> bool {
        self.distance(site) <= n
    }

    /// Indicator of `S(n)` on the sites of a box (the diagonal of `p_n`).
    pub fn projection(&self, lattice_box: &LatticeBox, n: u64) -> Vec<bool> {
        lattice_box
            .sites()
            .map(|s| self.contains_in_neighbourhood(&s, n))
            .collect()
    }

    /// Smallest `n` with `S(n)` covering the box.
    pub fn covering_level(&self, lattice_box: &LatticeBox) -> u64 {
        lattice_box.sites().map(|s| self.distance(&s)).max().unwrap_or(0)
    }
}
