//! JSON wire format for lattice operators.
//!
//! ```json
//! {"dimension": 2,
//!  "terms": [{"offset": [1, 0],
//!             "field": {"kind": "constant", "value": [1.0, 0.0]}},
//!            {"offset": [0, 0],
//!             "field": {"kind": "constant", "value": -1.5,
//!                       "mask": {"type": "strip", "axis": 1, "half_width": 0}}}]}
//! ```
//!
//! `field` is one term object or an array of them (summed). Complex values
//! are `[re, im]` pairs or bare reals. Term kinds:
//! `constant {value}`, `periodic {periods, table}`,
//! `compact {support: {lo, hi}, table}`; tables are row-major with axis 0
//! slowest. `mask` is one clause or an array of clauses (intersected):
//! `half-space {axis, side: "upper"|"lower", cut}` or
//! `strip {axis, half_width, center = 0}`.

use serde::{Deserialize, Serialize};

use super::field::{CoefficientField, FieldKind, FieldTerm, MaskClause, Side};
use super::ideal::{IdealSpec, Shape};
use super::operator::{Hop, LatticeOperator};
use super::LatticeError;
use crate::linalg::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexJson {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexJson> for C64 {
    fn from(v: ComplexJson) -> C64 {
        match v {
            ComplexJson::Real(x) => C64::new(x, 0.0),
            ComplexJson::Pair([re, im]) => C64::new(re, im),
        }
    }
}

impl From<C64> for ComplexJson {
    fn from(v: C64) -> Self {
        ComplexJson::Pair([v.re, v.im])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MaskJson {
    HalfSpace {
        axis: usize,
        side: Side,
        cut: i64,
    },
    Strip {
        axis: usize,
        half_width: u64,
        #[serde(default)]
        center: i64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportJson {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TermJson {
    Constant {
        value: ComplexJson,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mask: Option<OneOrMany<MaskJson>>,
    },
    Periodic {
        periods: Vec<usize>,
        table: Vec<ComplexJson>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mask: Option<OneOrMany<MaskJson>>,
    },
    Compact {
        support: SupportJson,
        table: Vec<ComplexJson>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mask: Option<OneOrMany<MaskJson>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HopJson {
    pub offset: Vec<i64>,
    pub field: OneOrMany<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorJson {
    pub dimension: usize,
    pub terms: Vec<HopJson>,
}

/// Reference set description used in configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpecJson {
    HalfSpace {
        axis: usize,
        side: Side,
        cut: i64,
    },
    Strip {
        axis: usize,
        half_width: u64,
        #[serde(default)]
        center: i64,
    },
    CoordinateLine {
        axes: Vec<usize>,
    },
    Box {
        lo: Vec<i64>,
        hi: Vec<i64>,
    },
}

fn mask_from(m: MaskJson) -> MaskClause {
    match m {
        MaskJson::HalfSpace { axis, side, cut } => MaskClause::HalfSpace { axis, side, cut },
        MaskJson::Strip {
            axis,
            half_width,
            center,
        } => MaskClause::Strip {
            axis,
            center,
            half_width,
        },
    }
}

fn mask_to(m: &MaskClause) -> MaskJson {
    match *m {
        MaskClause::HalfSpace { axis, side, cut } => MaskJson::HalfSpace { axis, side, cut },
        MaskClause::Strip {
            axis,
            center,
            half_width,
        } => MaskJson::Strip {
            axis,
            half_width,
            center,
        },
    }
}

fn masks_from(m: Option<OneOrMany<MaskJson>>) -> Vec<MaskClause> {
    m.map(|m| m.into_vec().into_iter().map(mask_from).collect())
        .unwrap_or_default()
}

fn masks_to(m: &[MaskClause]) -> Option<OneOrMany<MaskJson>> {
    match m.len() {
        0 => None,
        1 => Some(OneOrMany::One(mask_to(&m[0]))),
        _ => Some(OneOrMany::Many(m.iter().map(mask_to).collect())),
    }
}

fn table_from(t: Vec<ComplexJson>) -> Vec<C64> {
    t.into_iter().map(C64::from).collect()
}

fn table_to(t: &[C64]) -> Vec<ComplexJson> {
    t.iter().map(|&v| v.into()).collect()
}

impl TryFrom<OperatorJson> for LatticeOperator {
    type Error = LatticeError;

    fn try_from(op: OperatorJson) -> Result<Self, LatticeError> {
        let dim = op.dimension;
        if !(1..=2).contains(&dim) {
            return Err(LatticeError::UnsupportedDimension(dim));
        }
        let mut hops = Vec::with_capacity(op.terms.len());
        for h in op.terms {
            if h.offset.len() != dim {
                return Err(LatticeError::InvalidField(format!(
                    "offset {:?} must have {dim} components",
                    h.offset
                )));
            }
            let offset = [h.offset[0], h.offset.get(1).copied().unwrap_or(0)];
            let terms = h
                .field
                .into_vec()
                .into_iter()
                .map(|t| match t {
                    TermJson::Constant { value, mask } => FieldTerm {
                        kind: FieldKind::Constant(value.into()),
                        mask: masks_from(mask),
                    },
                    TermJson::Periodic { periods, table, mask } => FieldTerm {
                        kind: FieldKind::Periodic {
                            periods,
                            table: table_from(table),
                        },
                        mask: masks_from(mask),
                    },
                    TermJson::Compact { support, table, mask } => FieldTerm {
                        kind: FieldKind::Compact {
                            lo: support.lo,
                            hi: support.hi,
                            table: table_from(table),
                        },
                        mask: masks_from(mask),
                    },
                })
                .collect();
            hops.push(Hop {
                offset,
                field: CoefficientField::new(dim, terms)?,
            });
        }
        LatticeOperator::new(dim, hops)
    }
}

impl From<&LatticeOperator> for OperatorJson {
    fn from(op: &LatticeOperator) -> Self {
        let dim = op.dim();
        let terms = op
            .hops()
            .iter()
            .map(|h| {
                let fields: Vec<TermJson> = h
                    .field
                    .terms()
                    .iter()
                    .map(|t| match &t.kind {
                        FieldKind::Constant(v) => TermJson::Constant {
                            value: (*v).into(),
                            mask: masks_to(&t.mask),
                        },
                        FieldKind::Periodic { periods, table } => TermJson::Periodic {
                            periods: periods.clone(),
                            table: table_to(table),
                            mask: masks_to(&t.mask),
                        },
                        FieldKind::Compact { lo, hi, table } => TermJson::Compact {
                            support: SupportJson {
                                lo: lo.clone(),
                                hi: hi.clone(),
                            },
                            table: table_to(table),
                            mask: masks_to(&t.mask),
                        },
                    })
                    .collect();
                HopJson {
                    offset: h.offset[..dim].to_vec(),
                    field: if fields.len() == 1 {
                        OneOrMany::One(fields.into_iter().next().expect("one term"))
                    } else {
                        OneOrMany::Many(fields)
                    },
                }
            })
            .collect();
        OperatorJson {
            dimension: dim,
            terms,
        }
    }
}

impl SpecJson {
    pub fn to_spec(&self, dim: usize) -> Result<IdealSpec, LatticeError> {
        let shape = match self.clone() {
            SpecJson::HalfSpace { axis, side, cut } => Shape::HalfSpace { axis, side, cut },
            SpecJson::Strip {
                axis,
                half_width,
                center,
            } => Shape::Strip {
                axis,
                center,
                half_width,
            },
            SpecJson::CoordinateLine { axes } => Shape::CoordinateLine { axes },
            SpecJson::Box { lo, hi } => Shape::BoundedBox { lo, hi },
        };
        IdealSpec::new(dim, shape)
    }
}

impl LatticeOperator {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(OperatorJson::from(self)).expect("operator schema serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, LatticeError> {
        let wire: OperatorJson = serde_json::from_value(value.clone())
            .map_err(|e| LatticeError::InvalidField(e.to_string()))?;
        wire.try_into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn parses_documented_example() {
        let v = json!({"dimension": 2, "terms": [
            {"offset": [1, 0], "field": {"kind": "constant", "value": [1.0, 0.0]}},
            {"offset": [0, 0], "field": {"kind": "constant", "value": -1.5,
                "mask": {"type": "strip", "axis": 1, "half_width": 0}}}
        ]});
        let op = LatticeOperator::from_json(&v).unwrap();
        assert_eq!(op.hops().len(), 2);
        assert_eq!(op.hops()[0].field.value(&[3, 0]), C64::new(-1.5, 0.0));
        assert_eq!(op.hops()[0].field.value(&[3, 1]), C64::new(0.0, 0.0));
    }

    #[test]
    fn unknown_keys_rejected() {
        let v = json!({"dimension": 1, "terms": [], "extra": 1});
        assert!(LatticeOperator::from_json(&v).is_err());
        let v = json!({"dimension": 1, "terms": [{"offset": [0], "field": {"kind": "constant", "value": 1, "colour": 2}}]});
        assert!(LatticeOperator::from_json(&v).is_err());
    }

    #[test]
    fn json_round_trip() {
        let v = json!({"dimension": 1, "terms": [
            {"offset": [-1], "field": [
                {"kind": "periodic", "periods": [2], "table": [1, [0, 1]]},
                {"kind": "compact", "support": {"lo": [-1], "hi": [0]}, "table": [2, 3],
                 "mask": [{"type": "half-space", "axis": 0, "side": "lower", "cut": 0}]}
            ]}
        ]});
        let op = LatticeOperator::from_json(&v).unwrap();
        let back = LatticeOperator::from_json(&op.to_json()).unwrap();
        assert_eq!(op, back);
    }
}
