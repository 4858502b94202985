//! Tagged point clouds in the complex plane, their set algebra, distances
//! and exports (JSON, CSV, SVG).

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::linalg::{cmp_complex, C64};

/// Default dedup tolerance (absolute).
pub const DEDUP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Band,
    Curve,
    Discrete,
}

impl Tag {
    pub fn as_str(&self) -> &'static str {
        match self {
            Tag::Band => "band",
            Tag::Curve => "curve",
            Tag::Discrete => "discrete",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPoint {
    pub value: C64,
    pub tag: Tag,
    /// Bloch parameters the point was computed at, if any.
    pub theta: Option<Vec<f64>>,
    /// Band or fiber index, if any.
    pub index: Option<usize>,
}

impl SpectrumPoint {
    pub fn new(value: C64, tag: Tag) -> Self {
        Self {
            value,
            tag,
            theta: None,
            index: None,
        }
    }

    pub fn with_theta(mut self, theta: Vec<f64>) -> Self {
        self.theta = Some(theta);
        self
    }

    pub fn with_index(mut self, index: usize) -> Self {
        self.index = Some(index);
        self
    }

    fn same_provenance(&self, other: &Self) -> bool {
        self.tag == other.tag && self.theta == other.theta && self.index == other.index
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        cmp_complex(&self.value, &other.value)
            .then(self.tag.cmp(&other.tag))
            .then_with(|| cmp_theta(&self.theta, &other.theta))
            .then(self.index.cmp(&other.index))
    }
}

fn cmp_theta(a: &Option<Vec<f64>>, b: &Option<Vec<f64>>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(x), Some(y)) => {
            for (p, q) in x.iter().zip(y) {
                let o = p.total_cmp(q);
                if o != Ordering::Equal {
                    return o;
                }
            }
            x.len().cmp(&y.len())
        }
    }
}

/// A canonically sorted, deduplicated set of spectral points.
///
/// Two points are merged only when they carry the same tag and provenance
/// and lie within the dedup tolerance of each other. `at_infinity` counts
/// spectral weight that has no finite location (zero eigenvalues of a
/// resolvent).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSet {
    points: Vec<SpectrumPoint>,
    pub tol: f64,
    pub at_infinity: usize,
}

impl Default for SpectrumSet {
    fn default() -> Self {
        Self::empty()
    }
}

impl SpectrumSet {
    pub fn empty() -> Self {
        Self {
            points: Vec::new(),
            tol: DEDUP_TOL,
            at_infinity: 0,
        }
    }

    pub fn from_points(points: Vec<SpectrumPoint>) -> Self {
        Self::with_tolerance(points, DEDUP_TOL)
    }

    pub fn with_tolerance(mut points: Vec<SpectrumPoint>, tol: f64) -> Self {
        points.sort_by(|a, b| a.canonical_cmp(b));
        let mut kept: Vec<SpectrumPoint> = Vec::with_capacity(points.len());
        for p in points {
            // kept is sorted by re, so only a trailing window can collide
            let duplicate = kept
                .iter()
                .rev()
                .take_while(|q| p.value.re - q.value.re <= tol)
                .any(|q| q.same_provenance(&p) && (q.value - p.value).norm() <= tol);
            if !duplicate {
                kept.push(p);
            }
        }
        Self {
            points: kept,
            tol,
            at_infinity: 0,
        }
    }

    pub fn from_values(values: impl IntoIterator<Item = C64>, tag: Tag) -> Self {
        Self::from_points(values.into_iter().map(|v| SpectrumPoint::new(v, tag)).collect())
    }

    pub fn points(&self) -> &[SpectrumPoint] {
        &self.points
    }

    pub fn values(&self) -> Vec<C64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn values_tagged(&self, tag: Tag) -> Vec<C64> {
        self.points
            .iter()
            .filter(|p| p.tag == tag)
            .map(|p| p.value)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Multiset union with dedup; provenance is kept per point.
    pub fn union(&self, other: &SpectrumSet) -> SpectrumSet {
        let tol = self.tol.max(other.tol);
        let mut pts = self.points.clone();
        pts.extend(other.points.iter().cloned());
        let mut out = SpectrumSet::with_tolerance(pts, tol);
        out.at_infinity = self.at_infinity + other.at_infinity;
        out
    }

    pub fn retag(&self, tag: Tag) -> SpectrumSet {
        let pts = self
            .points
            .iter()
            .cloned()
            .map(|mut p| {
                p.tag = tag;
                p
            })
            .collect();
        let mut out = SpectrumSet::with_tolerance(pts, self.tol);
        out.at_infinity = self.at_infinity;
        out
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.points.iter().map(|p| p.value.im.abs()).fold(0.0, f64::max)
    }

    /// Distance from `z` to the nearest point, optionally restricted to a tag.
    pub fn distance_to(&self, z: C64, tag: Option<Tag>) -> f64 {
        self.points
            .iter()
            .filter(|p| tag.is_none_or(|t| p.tag == t))
            .map(|p| (p.value - z).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Farthest-point sample of `k` points; starts from the canonically
    /// first point so the result is deterministic.
    pub fn farthest_point_sample(&self, k: usize) -> Vec<C64> {
        let vals = self.values();
        farthest_point_sample(&vals, k)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let pts: Vec<serde_json::Value> = self
            .points
            .iter()
            .map(|p| {
                let mut obj = serde_json::Map::new();
                obj.insert("re".into(), p.value.re.into());
                obj.insert("im".into(), p.value.im.into());
                obj.insert("tag".into(), p.tag.as_str().into());
                if let Some(t) = &p.theta {
                    obj.insert("theta".into(), t.clone().into());
                }
                if let Some(i) = p.index {
                    obj.insert("index".into(), i.into());
                }
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::json!({
            "dedup_tol": self.tol,
            "at_infinity": self.at_infinity,
            "points": pts,
        })
    }

    /// CSV with header `re,im,tag,theta,index`; theta components are joined
    /// with `;`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,tag,theta,index\n");
        for p in &self.points {
            let theta = p
                .theta
                .as_ref()
                .map(|t| t.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(";"))
                .unwrap_or_default();
            let index = p.index.map(|i| i.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{:?},{:?},{},{},{}", p.value.re, p.value.im, p.tag.as_str(), theta, index);
        }
        out
    }

    /// Self-contained SVG scatter plot with axis labels and a tag legend.
    pub fn to_svg(&self, title: &str) -> String {
        let series: Vec<(Tag, Vec<C64>)> = [Tag::Band, Tag::Curve, Tag::Discrete]
            .into_iter()
            .map(|t| (t, self.values_tagged(t)))
            .collect();
        crate::svg::scatter(title, &series)
    }
}

pub fn farthest_point_sample(vals: &[C64], k: usize) -> Vec<C64> {
    if vals.is_empty() || k == 0 {
        return Vec::new();
    }
    let mut chosen = vec![vals[0]];
    let mut dist: Vec<f64> = vals.iter().map(|v| (v - vals[0]).norm()).collect();
    while chosen.len() < k.min(vals.len()) {
        let (idx, &d) = dist
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("non-empty");
        if d == 0.0 {
            break;
        }
        let p = vals[idx];
        chosen.push(p);
        for (di, v) in dist.iter_mut().zip(vals) {
            *di = di.min((v - p).norm());
        }
    }
    chosen
}

/// Nearest-neighbour queries on a fixed cloud, pruned by sorting on the
/// real part.
#[derive(Debug, Clone)]
pub struct PointIndex {
    pts: Vec<C64>,
}

impl PointIndex {
    pub fn new(values: &[C64]) -> Self {
        let mut pts = values.to_vec();
        pts.sort_by(cmp_complex);
        Self { pts }
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    pub fn nearest(&self, z: C64) -> f64 {
        if self.pts.is_empty() {
            return f64::INFINITY;
        }
        let start = self.pts.partition_point(|p| p.re < z.re);
        let mut best = f64::INFINITY;
        for p in self.pts[start..].iter() {
            if p.re - z.re > best {
                break;
            }
            best = best.min((p - z).norm());
        }
        for p in self.pts[..start].iter().rev() {
            if z.re - p.re > best {
                break;
            }
            best = best.min((p - z).norm());
        }
        best
    }
}

/// Hausdorff distance between two finite clouds.
pub fn hausdorff(a: &[C64], b: &[C64]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let ia = PointIndex::new(a);
    let ib = PointIndex::new(b);
    let ab = a.iter().map(|&z| ib.nearest(z)).fold(0.0, f64::max);
    let ba = b.iter().map(|&z| ia.nearest(z)).fold(0.0, f64::max);
    ab.max(ba)
}

/// Hausdorff distance between a cloud and a finite union of closed real
/// intervals. The interval-to-cloud direction is exact: the distance
/// function restricted to the real line is maximised at interval endpoints
/// or at the real-axis crossings of perpendicular bisectors between
/// neighbouring points.
pub fn hausdorff_to_intervals(cloud: &[C64], intervals: &[(f64, f64)]) -> f64 {
    if cloud.is_empty() {
        return if intervals.is_empty() { 0.0 } else { f64::INFINITY };
    }
    if intervals.is_empty() {
        return f64::INFINITY;
    }
    let dist_to_intervals = |z: C64| {
        intervals
            .iter()
            .map(|&(lo, hi)| {
                let x = z.re.clamp(lo, hi);
                ((z.re - x).powi(2) + z.im.powi(2)).sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let forward = cloud.iter().map(|&z| dist_to_intervals(z)).fold(0.0, f64::max);

    let index = PointIndex::new(cloud);
    let mut sorted = cloud.to_vec();
    sorted.sort_by(|a, b| a.re.total_cmp(&b.re));
    let mut backward: f64 = 0.0;
    for &(lo, hi) in intervals {
        let mut candidates = vec![lo, hi];
        for w in sorted.windows(2) {
            let (p, q) = (w[0], w[1]);
            if q.re - p.re > 0.0 {
                let x = (q.norm_sqr() - p.norm_sqr()) / (2.0 * (q.re - p.re));
                if x > lo && x < hi {
                    candidates.push(x);
                }
            }
        }
        for x in candidates {
            backward = backward.max(index.nearest(C64::new(x, 0.0)));
        }
    }
    forward.max(backward)
}
