//! Hyperbolic space `H³` in the upper half-space model: distance, heat and
//! resolvent kernels, their mass identities, Schur norm bounds and the
//! near/far split of the resolvent kernel.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::CMatrix;
use crate::quad::{self, Envelope, QuadError, REL_TOL};

pub const MASS_TOL: f64 = 1e-8;
pub const LAPLACE_TOL: f64 = 1e-7;
pub const SPLIT_TOL: f64 = 1e-9;
/// Upper time limit of the Laplace-transform quadrature.
pub const LAPLACE_HORIZON: f64 = 40.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HyperbolicError {
    #[error("x3 must be positive, got {0}")]
    InvalidPoint(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HPoint([f64; 3]);

impl HPoint {
    pub fn new(x1: f64, x2: f64, x3: f64) -> Result<Self, HyperbolicError> {
        if !(x3 > 0.0 && x3.is_finite()) || !x1.is_finite() || !x2.is_finite() {
            return Err(HyperbolicError::InvalidPoint(x3));
        }
        Ok(Self([x1, x2, x3]))
    }

    pub fn coords(&self) -> [f64; 3] {
        self.0
    }
}

/// `cosh d = 1 + |x − y|² / (2 x₃ y₃)`, evaluated as
/// `d = 2 asinh(|x − y| / (2 √(x₃ y₃)))` to keep small distances accurate.
pub fn hyp_distance(x: &HPoint, y: &HPoint) -> f64 {
    let (a, b) = (x.0, y.0);
    let e = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
    2.0 * (e / (2.0 * (a[2] * b[2]).sqrt())).asinh()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum HypKernel {
    Heat { t: f64 },
    Green { lambda: f64 },
    Area,
}

fn r_over_sinh(r: f64) -> f64 {
    if r.abs() < 1e-8 {
        1.0 - r * r / 6.0
    } else {
        r / r.sinh()
    }
}

/// Heat kernel `k_t`, resolvent kernel `g_λ` of `λ + H` with
/// `H = −Δ − 1`, or the sphere area `ρ(r) = 4π sinh² r`.
pub fn hyp_kernel_eval(kind: HypKernel, r: f64) -> Result<f64, HyperbolicError> {
    if !(r >= 0.0) {
        return Err(HyperbolicError::InvalidParameter(format!("radius must be nonnegative, got {r}")));
    }
    match kind {
        HypKernel::Heat { t } => {
            positive("t", t)?;
            Ok((4.0 * PI * t).powf(-1.5) * r_over_sinh(r) * (-t - r * r / (4.0 * t)).exp())
        }
        HypKernel::Green { lambda } => {
            if !(lambda >= 0.0 && lambda.is_finite()) {
                return Err(HyperbolicError::InvalidParameter(format!(
                    "lambda must be nonnegative, got {lambda}"
                )));
            }
            if r == 0.0 {
                return Ok(f64::INFINITY);
            }
            Ok((-r * (lambda + 1.0).sqrt()).exp() / (4.0 * PI * r.sinh()))
        }
        HypKernel::Area => Ok(4.0 * PI * r.sinh().powi(2)),
    }
}

fn positive(name: &str, v: f64) -> Result<(), HyperbolicError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(HyperbolicError::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

/// Radial integrand `kernel(r) ρ(r)` with its envelopes on `(0, 1]` and
/// `[1, ∞)`.
fn radial_integrand(kind: HypKernel) -> Result<(Box<dyn Fn(f64) -> f64>, Envelope, Envelope), HyperbolicError> {
    match kind {
        HypKernel::Green { lambda } => {
            positive("lambda", lambda)?;
            let s = (lambda + 1.0).sqrt();
            // g ρ = e^{-s r} sinh r
            let f = move |r: f64| (-s * r).exp() * r.sinh();
            Ok((
                Box::new(f),
                Envelope::new(1.0_f64.sinh(), 1.0, 0.0),
                Envelope::new(0.5, 0.0, s - 1.0),
            ))
        }
        HypKernel::Heat { t } => {
            positive("t", t)?;
            let pref = 4.0 * PI * (4.0 * PI * t).powf(-1.5) * (-t).exp();
            let f = move |r: f64| pref * r * r.sinh() * (-r * r / (4.0 * t)).exp();
            // r²/4t ≥ 2r − 4t and sinh r ≤ e^r / 2
            Ok((
                Box::new(f),
                Envelope::new(pref * 1.0_f64.sinh(), 2.0, 0.0),
                Envelope::new(0.5 * pref * (4.0 * t).exp(), 1.0, 1.0),
            ))
        }
        HypKernel::Area => Err(HyperbolicError::InvalidParameter("the area density has no finite mass".into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassIdentity {
    pub computed: f64,
    pub expected: f64,
    pub relative_error: f64,
}

/// `∫_0^∞ kernel(r) ρ(r) dr` against 1 (heat) or `1/λ` (resolvent).
pub fn mass_identity(kind: HypKernel) -> Result<MassIdentity, HyperbolicError> {
    let expected = match kind {
        HypKernel::Heat { .. } => 1.0,
        HypKernel::Green { lambda } => 1.0 / lambda,
        HypKernel::Area => 0.0,
    };
    let (f, near, far) = radial_integrand(kind)?;
    let computed = quad::half_line(&f, near, far, REL_TOL)?.value;
    Ok(MassIdentity {
        computed,
        expected,
        relative_error: (computed - expected).abs() / expected,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchurInput<'a> {
    Matrix(&'a CMatrix),
    Radial(HypKernel),
}

/// `√(sup row l¹ · sup column l¹)`; for a radial kernel on `H³` both
/// suprema equal its mass.
pub fn schur_norm_bound(input: SchurInput<'_>) -> Result<f64, HyperbolicError> {
    match input {
        SchurInput::Matrix(m) => {
            let row = m
                .row_iter()
                .map(|r| r.iter().map(|v| v.norm()).sum::<f64>())
                .fold(0.0, f64::max);
            let col = m
                .column_iter()
                .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
                .fold(0.0, f64::max);
            Ok((row * col).sqrt())
        }
        SchurInput::Radial(kind) => Ok(mass_identity(kind)?.computed),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandSplit {
    /// `∫_0^n g_λ ρ`: mass of the band part.
    pub near_mass: f64,
    /// `∫_n^∞ g_λ ρ`: Schur bound for the off-band remainder.
    pub tail_bound: f64,
}

/// Split of `(λ + H)^{-1}` into the part with kernel supported in
/// `d(x, y) ≤ n` and the remainder.
pub fn band_split(lambda: f64, n: f64) -> Result<BandSplit, HyperbolicError> {
    positive("lambda", lambda)?;
    if !(n >= 0.0) {
        return Err(HyperbolicError::InvalidParameter(format!("n must be nonnegative, got {n}")));
    }
    let kind = HypKernel::Green { lambda };
    let (f, near, far) = radial_integrand(kind)?;
    let s = (lambda + 1.0).sqrt();
    let near_mass = if n == 0.0 {
        0.0
    } else {
        quad::from_zero(&f, n, Envelope::new(n.sinh() / n, 1.0, 0.0), REL_TOL)?.value
    };
    let tail_bound = if n == 0.0 {
        quad::half_line(&f, near, far, REL_TOL)?.value
    } else {
        quad::to_infinity(&f, n, Envelope::new(0.5, 0.0, s - 1.0), REL_TOL)?.value
    };
    Ok(BandSplit { near_mass, tail_bound })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceCheck {
    pub r: f64,
    pub lambda: f64,
    pub green: f64,
    /// `∫_0^T e^{-λt} k_t(r) dt`.
    pub truncated: f64,
    /// Bound for `∫_T^∞ e^{-λt} k_t(r) dt`.
    pub tail_bound: f64,
    pub relative_error: f64,
}

/// `g_λ(r) = ∫_0^∞ e^{-λt} k_t(r) dt`, truncated at [`LAPLACE_HORIZON`].
pub fn laplace_consistency(lambda: f64, r: f64) -> Result<LaplaceCheck, HyperbolicError> {
    positive("lambda", lambda)?;
    positive("r", r)?;
    let horizon = LAPLACE_HORIZON;
    let f = |t: f64| {
        if t <= 0.0 {
            0.0
        } else {
            (4.0 * PI * t).powf(-1.5) * r_over_sinh(r) * (-(lambda + 1.0) * t - r * r / (4.0 * t)).exp()
        }
    };
    let truncated = quad::adaptive(&f, 0.0, horizon, 0.0, REL_TOL)?.value;
    let tail_bound =
        (4.0 * PI * horizon).powf(-1.5) * r_over_sinh(r) * (-(lambda + 1.0) * horizon).exp() / (lambda + 1.0);
    let green = hyp_kernel_eval(HypKernel::Green { lambda }, r)?;
    Ok(LaplaceCheck {
        r,
        lambda,
        green,
        truncated,
        tail_bound,
        relative_error: (green - truncated).abs() / green,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityRow {
    pub name: String,
    pub computed: f64,
    pub expected: f64,
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityRow {
    fn new(name: String, computed: f64, expected: f64, error: f64, tolerance: f64) -> Self {
        Self {
            name,
            computed,
            expected,
            error,
            tolerance,
            pass: error <= tolerance,
        }
    }
}

pub const MASS_TIMES: [f64; 3] = [0.1, 1.0, 10.0];
pub const MASS_LAMBDAS: [f64; 3] = [0.5, 1.0, 2.0];
pub const LAPLACE_RADII: [f64; 3] = [0.5, 1.0, 2.0];
pub const SPLIT_RADII: [f64; 5] = [0.0, 1.0, 2.0, 4.0, 8.0];

/// Every identity of the module as a pass/fail table.
pub fn identity_table() -> Result<Vec<IdentityRow>, HyperbolicError> {
    let mut rows = Vec::new();
    for t in MASS_TIMES {
        let m = mass_identity(HypKernel::Heat { t })?;
        rows.push(IdentityRow::new(format!("heat-mass t={t}"), m.computed, m.expected, m.relative_error, MASS_TOL));
    }
    for lambda in MASS_LAMBDAS {
        let m = mass_identity(HypKernel::Green { lambda })?;
        rows.push(IdentityRow::new(
            format!("green-mass lambda={lambda}"),
            m.computed,
            m.expected,
            m.relative_error,
            MASS_TOL,
        ));
    }
    for r in LAPLACE_RADII {
        let l = laplace_consistency(1.0, r)?;
        rows.push(IdentityRow::new(
            format!("laplace lambda=1 r={r}"),
            l.truncated,
            l.green,
            l.relative_error + l.tail_bound / l.green,
            LAPLACE_TOL,
        ));
    }
    for lambda in MASS_LAMBDAS {
        for n in SPLIT_RADII {
            let s = band_split(lambda, n)?;
            let total = s.near_mass + s.tail_bound;
            let expected = 1.0 / lambda;
            rows.push(IdentityRow::new(
                format!("band-split lambda={lambda} n={n}"),
                total,
                expected,
                (total - expected).abs(),
                SPLIT_TOL,
            ));
        }
    }
    Ok(rows)
}
