//! Reference operators used by the examples, sample configurations and
//! tests.

use crate::essential::{DislocationModel, EssentialError};
use crate::lattice_ops::{CoefficientField, FieldKind, IdealSpec, LatticeOperator, MaskClause, Side};
use crate::linalg::c;

/// Laplacian on `Z` plus the period-2 potential `(0, 2)`.
pub fn period_two_chain() -> LatticeOperator {
    let v = CoefficientField::masked(
        1,
        FieldKind::Periodic {
            periods: vec![2],
            table: vec![c(0.0, 0.0), c(2.0, 0.0)],
        },
        vec![],
    );
    LatticeOperator::laplacian(1)
        .add(&LatticeOperator::multiplication(v))
        .expect("both operators are one-dimensional")
}

/// `v δ_0` on `Z`.
pub fn point_defect(v: f64) -> LatticeOperator {
    LatticeOperator::multiplication(CoefficientField::masked(
        1,
        FieldKind::Compact {
            lo: vec![0],
            hi: vec![0],
            table: vec![c(v, 0.0)],
        },
        vec![],
    ))
}

/// `v · 1_{x ≥ 0}` on `Z`.
pub fn step_potential(v: f64) -> LatticeOperator {
    LatticeOperator::multiplication(CoefficientField::masked(
        1,
        FieldKind::Constant(c(v, 0.0)),
        vec![MaskClause::HalfSpace {
            axis: 0,
            side: Side::Upper,
            cut: 0,
        }],
    ))
}

/// `v δ_{x_axis = 0}` on `Z²`, constant along the other axis.
pub fn line_potential(axis: usize, v: f64) -> LatticeOperator {
    LatticeOperator::multiplication(CoefficientField::masked(
        2,
        FieldKind::Constant(c(v, 0.0)),
        vec![MaskClause::Strip {
            axis,
            center: 0,
            half_width: 0,
        }],
    ))
}

/// 1D Laplacian plus `v δ_0`, with the point as reference set.
pub fn surface_chain(v: f64) -> Result<DislocationModel, EssentialError> {
    let spec = IdealSpec::new(1, crate::lattice_ops::Shape::BoundedBox { lo: vec![0], hi: vec![0] })?;
    DislocationModel::new(LatticeOperator::laplacian(1), vec![(point_defect(v), spec)])
}

/// 1D Laplacian plus `v · 1_{x ≥ 0}`.
pub fn step_chain(v: f64) -> Result<DislocationModel, EssentialError> {
    let spec = IdealSpec::half_space(1, 0, Side::Upper, 0)?;
    DislocationModel::new(LatticeOperator::laplacian(1), vec![(step_potential(v), spec)])
}

/// 2D Laplacian plus `v δ_{x_2 = 0}` (and optionally `w δ_{x_1 = 0}`).
pub fn cross_model(v: f64, w: Option<f64>) -> Result<DislocationModel, EssentialError> {
    let mut perturbations = vec![(line_potential(1, v), IdealSpec::line(2, vec![1])?)];
    if let Some(w) = w {
        perturbations.push((line_potential(0, w), IdealSpec::line(2, vec![0])?));
    }
    DislocationModel::new(LatticeOperator::laplacian(2), perturbations)
}
