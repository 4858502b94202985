use serde::{Deserialize, Serialize};

/// A lattice site. One-dimensional lattices use the first coordinate and
/// keep the second at zero.
pub type Site = [i64; 2];

/// Closed integer interval; `None` bounds are infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Option<i64>,
    pub hi: Option<i64>,
}

impl Interval {
    pub const ALL: Interval = Interval { lo: None, hi: None };

    pub fn new(lo: Option<i64>, hi: Option<i64>) -> Self {
        Self { lo, hi }
    }

    pub fn bounded(lo: i64, hi: i64) -> Self {
        Self {
            lo: Some(lo),
            hi: Some(hi),
        }
    }

    pub fn contains(&self, x: i64) -> bool {
        self.lo.is_none_or(|l| x >= l) && self.hi.is_none_or(|h| x <= h)
    }

    pub fn is_empty(&self) -> bool {
        matches!((self.lo, self.hi), (Some(l), Some(h)) if l > h)
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_some() && self.hi.is_some()
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        let lo = match (self.lo, other.lo) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        let hi = match (self.hi, other.hi) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        Interval { lo, hi }
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Interval) -> Interval {
        let lo = match (self.lo, other.lo) {
            (Some(a), Some(b)) => Some(a.min(b)),
            _ => None,
        };
        let hi = match (self.hi, other.hi) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        Interval { lo, hi }
    }

    /// `{x : dist(x, self) <= n}`.
    pub fn expand(&self, n: u64) -> Interval {
        let n = n as i64;
        Interval {
            lo: self.lo.map(|l| l - n),
            hi: self.hi.map(|h| h + n),
        }
    }

    pub fn shift(&self, s: i64) -> Interval {
        Interval {
            lo: self.lo.map(|l| l + s),
            hi: self.hi.map(|h| h + s),
        }
    }

    /// Distance from `x` to the interval (assumed non-empty).
    pub fn distance(&self, x: i64) -> u64 {
        if let Some(l) = self.lo {
            if x < l {
                return (l - x) as u64;
            }
        }
        if let Some(h) = self.hi {
            if x > h {
                return (x - h) as u64;
            }
        }
        0
    }
}

/// The finite section `∏ [-n_i, n_i]` of `Z^d`.
///
/// Sites are enumerated lexicographically with axis 0 varying slowest, so
/// in two dimensions row index `(x0 + n0) * (2 n1 + 1) + (x1 + n1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeBox {
    half_widths: Vec<usize>,
}

impl LatticeBox {
    pub fn new(half_widths: Vec<usize>) -> Self {
        assert!(
            (1..=2).contains(&half_widths.len()),
            "boxes live on Z or Z^2"
        );
        Self { half_widths }
    }

    pub fn line(n: usize) -> Self {
        Self::new(vec![n])
    }

    pub fn square(n: usize) -> Self {
        Self::new(vec![n, n])
    }

    pub fn dim(&self) -> usize {
        self.half_widths.len()
    }

    pub fn half_widths(&self) -> &[usize] {
        &self.half_widths
    }

    fn side(&self, axis: usize) -> usize {
        self.half_widths.get(axis).map_or(1, |n| 2 * n + 1)
    }

    pub fn len(&self) -> usize {
        self.side(0) * self.side(1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, site: &Site) -> bool {
        (0..2).all(|a| match self.half_widths.get(a) {
            Some(&n) => site[a].unsigned_abs() <= n as u64,
            None => site[a] == 0,
        })
    }

    pub fn index_of(&self, site: &Site) -> Option<usize> {
        if !self.contains(site) {
            return None;
        }
        let n0 = self.half_widths[0] as i64;
        let i0 = (site[0] + n0) as usize;
        match self.half_widths.get(1) {
            Some(&n1) => Some(i0 * self.side(1) + (site[1] + n1 as i64) as usize),
            None => Some(i0),
        }
    }

    pub fn site(&self, index: usize) -> Site {
        let n0 = self.half_widths[0] as i64;
        match self.half_widths.get(1) {
            Some(&n1) => {
                let w = self.side(1);
                [(index / w) as i64 - n0, (index % w) as i64 - n1 as i64]
            }
            None => [index as i64 - n0, 0],
        }
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.len()).map(move |i| self.site(i))
    }

    /// l∞ distance from a site to the complement of the box.
    pub fn depth(&self, site: &Site) -> u64 {
        self.half_widths
            .iter()
            .enumerate()
            .map(|(a, &n)| (n as u64 + 1).saturating_sub(site[a].unsigned_abs()))
            .min()
            .unwrap_or(0)
    }
}

pub fn linf_distance(a: &Site, b: &Site) -> u64 {
    (a[0] - b[0]).unsigned_abs().max((a[1] - b[1]).unsigned_abs())
}
