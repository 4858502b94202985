mod common;

use std::f64::consts::PI;

use common::{cplx, random_periodic, rng};
use rand::Rng;
use specdecomp_core::bloch::{self, BlochError, FiberOperator, FiberTolerances};
use specdecomp_core::lattice_ops::{
    self, CoefficientField, FieldKind, Hop, LatticeBox, LatticeOperator, MaskClause, Side,
};
use specdecomp_core::linalg::{self, c, CMatrix, C64};
use specdecomp_core::models;
use specdecomp_core::spectrum::{hausdorff, hausdorff_to_intervals, Tag};

fn self_adjoint(op: &LatticeOperator) -> LatticeOperator {
    op.add(&op.adjoint()).unwrap()
}

fn sorted_real(mut v: Vec<C64>) -> Vec<f64> {
    let mut out: Vec<f64> = v.drain(..).map(|z| z.re).collect();
    out.sort_by(f64::total_cmp);
    out
}

#[test]
fn laplacian_symbol_is_two_cos() {
    let mut r = rng(20);
    for _ in 0..20 {
        let th = r.random_range(0.0..2.0 * PI);
        let m = bloch::symbol(&LatticeOperator::laplacian(1), &[th]).unwrap();
        assert_eq!(m.shape(), (1, 1));
        assert!((m[(0, 0)] - c(2.0 * th.cos(), 0.0)).norm() < 1e-15);
    }
}

#[test]
fn symbol_is_two_pi_periodic() {
    let mut r = rng(21);
    for dim in [1, 2] {
        let op = random_periodic(&mut r, dim, 2);
        let th: Vec<f64> = (0..dim).map(|_| r.random_range(0.0..2.0 * PI)).collect();
        let m0 = bloch::symbol(&op, &th).unwrap();
        for axis in 0..dim {
            let mut shifted = th.clone();
            shifted[axis] += 2.0 * PI;
            let m1 = bloch::symbol(&op, &shifted).unwrap();
            assert!(common::max_abs(&(m1 - &m0)) < 1e-13);
        }
    }
}

#[test]
fn period_two_symbol_by_hand() {
    let th = 2.1;
    let m = bloch::symbol(&models::period_two_chain(), &[th]).unwrap();
    let e = C64::from_polar(1.0, th);
    let want = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0) + e.conj(), c(1.0, 0.0) + e, c(2.0, 0.0)]);
    assert!(common::max_abs(&(m - want)) < 1e-15);
}

#[test]
fn non_periodic_operator_rejected() {
    let step = models::step_potential(1.0);
    assert!(matches!(
        bloch::symbol(&step, &[0.0]),
        Err(BlochError::NotFullyPeriodic { axis: 0 })
    ));
    assert!(matches!(
        bloch::periodic_spectrum(&step, 8),
        Err(BlochError::NotFullyPeriodic { axis: 0 })
    ));
}

#[test]
fn self_adjoint_symbols_are_hermitian() {
    let mut r = rng(22);
    for dim in [1, 2] {
        let op = self_adjoint(&random_periodic(&mut r, dim, 3));
        for _ in 0..10 {
            let th: Vec<f64> = (0..dim).map(|_| r.random_range(0.0..2.0 * PI)).collect();
            let m = bloch::symbol(&op, &th).unwrap();
            assert!(common::max_abs(&(&m - m.adjoint())) < 1e-13);
        }
        let s = bloch::periodic_spectrum(&op, 16).unwrap();
        assert!(s.max_abs_imag() <= 1e-10);
    }
}

#[test]
fn zero_operator_spectrum_is_origin() {
    let s = bloch::periodic_spectrum(&LatticeOperator::zero(1), 64).unwrap();
    assert_eq!(s.len(), 64);
    assert!(s.values().iter().all(|v| *v == c(0.0, 0.0)));
    assert_eq!(hausdorff(&s.values(), &[c(0.0, 0.0)]), 0.0);
}

#[test]
fn laplacian_cloud_fills_the_interval() {
    for grid in [64, 256] {
        let s = bloch::periodic_spectrum(&LatticeOperator::laplacian(1), grid).unwrap();
        assert!(s.points().iter().all(|p| p.tag == Tag::Band && p.theta.is_some()));
        let d = hausdorff_to_intervals(&s.values(), &[(-2.0, 2.0)]);
        assert!(d <= 2.0 * PI / grid as f64, "{grid}: {d}");
    }
}

#[test]
fn period_two_band_edges() {
    let s = bloch::periodic_spectrum(&models::period_two_chain(), 256).unwrap();
    let (mut lower, mut upper) = (Vec::new(), Vec::new());
    for p in s.points() {
        // closed form: 1 ± √(3 + 2 cos θ)
        let th = p.theta.as_ref().unwrap()[0];
        let root = (3.0 + 2.0 * th.cos()).sqrt();
        let want = if p.index == Some(0) { 1.0 - root } else { 1.0 + root };
        assert!((p.value - c(want, 0.0)).norm() < 1e-12);
        if p.index == Some(0) {
            lower.push(p.value.re);
        } else {
            upper.push(p.value.re);
        }
    }
    let lo = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s5 = 5f64.sqrt();
    assert!((lo(&lower) - (1.0 - s5)).abs() < 1e-6);
    assert!(hi(&lower).abs() < 1e-6);
    assert!((lo(&upper) - 2.0).abs() < 1e-6);
    assert!((hi(&upper) - (1.0 + s5)).abs() < 1e-6);
}

#[test]
fn periodic_truncation_matches_symbol_pointwise() {
    let mut r = rng(23);
    for period in [1, 2, 3] {
        let op = self_adjoint(&random_periodic(&mut r, 1, period));
        let cells = 24;
        let trunc = sorted_real(linalg::eigenvalues(&bloch::periodic_truncation(&op, &[cells]).unwrap()).unwrap());
        let mut bloch_vals = Vec::new();
        for j in 0..cells {
            let th = 2.0 * PI * j as f64 / cells as f64;
            bloch_vals.extend(linalg::eigenvalues(&bloch::symbol(&op, &[th]).unwrap()).unwrap());
        }
        let bloch_vals = sorted_real(bloch_vals);
        assert_eq!(trunc.len(), bloch_vals.len());
        for (a, b) in trunc.iter().zip(&bloch_vals) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

/// The same operator with the unit cell origin moved by one site.
fn relabeled(op: &LatticeOperator) -> LatticeOperator {
    let hops = op
        .hops()
        .iter()
        .map(|h| Hop {
            offset: h.offset,
            field: h.field.shifted(&[1, 1]),
        })
        .collect();
    LatticeOperator::new(op.dim(), hops).unwrap()
}

#[test]
fn symbol_spectrum_is_invariant_under_cell_relabeling() {
    let mut r = rng(24);
    for dim in [1, 2] {
        let op = random_periodic(&mut r, dim, 3);
        let moved = relabeled(&op);
        for _ in 0..5 {
            let th: Vec<f64> = (0..dim).map(|_| r.random_range(0.0..2.0 * PI)).collect();
            let a = linalg::eigenvalues(&bloch::symbol(&op, &th).unwrap()).unwrap();
            let b = linalg::eigenvalues(&bloch::symbol(&moved, &th).unwrap()).unwrap();
            assert!(hausdorff(&a, &b) < 1e-10);
        }
    }
}

fn fiber_matrix(f: &FiberOperator, l: usize) -> CMatrix {
    lattice_ops::truncate(&f.operator(), &LatticeBox::line(l)).unwrap()
}

fn laplacian_plus(shift: f64, defect: Option<f64>, l: usize) -> CMatrix {
    let mut m = lattice_ops::truncate(&LatticeOperator::laplacian(1), &LatticeBox::line(l)).unwrap();
    for i in 0..m.nrows() {
        m[(i, i)] += c(shift, 0.0);
    }
    if let Some(v) = defect {
        m[(l, l)] += c(v, 0.0);
    }
    m
}

#[test]
fn laplacian_fibers() {
    let lap = LatticeOperator::laplacian(2);
    for axis in [0, 1] {
        let f0 = bloch::fiber_operator(&lap, axis, 0.0).unwrap();
        assert!(f0.defect.is_zero());
        assert!(common::max_abs(&(fiber_matrix(&f0, 6) - laplacian_plus(2.0, None, 6))) < 1e-15);
        let fpi = bloch::fiber_operator(&lap, axis, PI).unwrap();
        assert!(common::max_abs(&(fiber_matrix(&fpi, 6) - laplacian_plus(-2.0, None, 6))) < 1e-15);
    }
    let zero = bloch::fiber_operator(&LatticeOperator::zero(2), 0, 0.4).unwrap();
    assert!(zero.operator().is_zero());
}

#[test]
fn strip_model_fiber() {
    let op = LatticeOperator::laplacian(2).add(&models::line_potential(1, -1.5)).unwrap();
    let mut r = rng(25);
    for _ in 0..5 {
        let th = r.random_range(0.0..2.0 * PI);
        let f = bloch::fiber_operator(&op, 0, th).unwrap();
        let want = laplacian_plus(2.0 * th.cos(), Some(-1.5), 8);
        assert!(common::max_abs(&(fiber_matrix(&f, 8) - want)) < 1e-14);
        assert!(!f.defect.is_zero());
    }
}

#[test]
fn fiber_is_continuous_in_theta() {
    let mut r = rng(26);
    let op = random_periodic(&mut r, 2, 2);
    let a = fiber_matrix(&bloch::fiber_operator(&op, 0, 1.0).unwrap(), 5);
    let b = fiber_matrix(&bloch::fiber_operator(&op, 0, 1.0 + 1e-7).unwrap(), 5);
    assert!(common::max_abs(&(a - b)) < 1e-5);
}

#[test]
fn fiber_operator_errors() {
    let half = LatticeOperator::multiplication(CoefficientField::masked(
        2,
        FieldKind::Constant(c(1.0, 0.0)),
        vec![MaskClause::HalfSpace {
            axis: 0,
            side: Side::Upper,
            cut: 0,
        }],
    ));
    let op = LatticeOperator::laplacian(2).add(&half).unwrap();
    assert!(matches!(
        bloch::fiber_operator(&op, 0, 0.0),
        Err(BlochError::NotPeriodicAlongAxis { axis: 0 })
    ));
    assert!(matches!(
        bloch::fiber_operator(&op, 1, 0.0),
        Err(BlochError::TransverseNotDecomposable(_))
    ));
}

#[test]
fn shifted_laplacian_fiber_has_no_discrete_points() {
    let f = bloch::fiber_operator(&LatticeOperator::laplacian(2), 0, 0.0).unwrap();
    let s = bloch::fiber_spectrum(&f, 60, &FiberTolerances::default()).unwrap();
    assert!(s.values_tagged(Tag::Discrete).is_empty());
    let d = hausdorff_to_intervals(&s.values(), &[(0.0, 4.0)]);
    assert!(d <= 2.0 * PI / 256.0);
}

fn surface_fiber(v: f64) -> FiberOperator {
    FiberOperator::from_parts(LatticeOperator::laplacian(1), models::point_defect(v), 0.0).unwrap()
}

#[test]
fn point_defect_has_one_bound_state() {
    for v in [-1.5, -0.7, 2.0] {
        let f = surface_fiber(v);
        let s = bloch::fiber_spectrum(&f, 200, &FiberTolerances::default()).unwrap();
        let disc = s.values_tagged(Tag::Discrete);
        assert_eq!(disc.len(), 1, "{v}: {disc:?}");
        // ansatz ρ^{|n|}: E = sign(v) √(v² + 4)
        let want = v.signum() * (v * v + 4.0).sqrt();
        assert!((disc[0] - c(want, 0.0)).norm() < 1e-8);
        let p = s.points().iter().find(|p| p.tag == Tag::Discrete).unwrap();
        assert_eq!(p.theta.as_deref(), Some(&[0.0][..]));
    }
}

#[test]
fn bound_state_is_stable_under_doubling() {
    let f = surface_fiber(-1.5);
    let a = bloch::fiber_spectrum(&f, 200, &FiberTolerances::default()).unwrap();
    let b = bloch::fiber_spectrum(&f, 400, &FiberTolerances::default()).unwrap();
    let (ea, eb) = (a.values_tagged(Tag::Discrete)[0], b.values_tagged(Tag::Discrete)[0]);
    assert!((ea - eb).norm() <= 1e-10);
    assert!((ea - c(-2.5, 0.0)).norm() <= 1e-8);
}

#[test]
fn zero_defect_table_matches_background() {
    let zero_defect = LatticeOperator::multiplication(CoefficientField::masked(
        1,
        FieldKind::Compact {
            lo: vec![-1],
            hi: vec![1],
            table: vec![c(0.0, 0.0); 3],
        },
        vec![],
    ));
    let f = FiberOperator::from_parts(LatticeOperator::laplacian(1), zero_defect, 0.3).unwrap();
    let g = FiberOperator::from_parts(LatticeOperator::laplacian(1), LatticeOperator::zero(1), 0.3).unwrap();
    let tol = FiberTolerances::default();
    assert_eq!(
        bloch::fiber_spectrum(&f, 40, &tol).unwrap(),
        bloch::fiber_spectrum(&g, 40, &tol).unwrap()
    );
}

#[test]
fn stability_failures_are_reported() {
    let tol = FiberTolerances {
        stability: 0.0,
        ..FiberTolerances::default()
    };
    assert!(matches!(
        bloch::fiber_spectrum(&surface_fiber(-1.5), 60, &tol),
        Err(BlochError::UnstableEigenvalue { .. })
    ));
}

#[test]
fn fiber_bands_reassemble_the_2d_cloud() {
    let mut r = rng(27);
    let op = self_adjoint(&random_periodic(&mut r, 2, 1));
    let grid = 32;
    let tol = FiberTolerances {
        grid,
        ..FiberTolerances::default()
    };
    let mut union = Vec::new();
    for j in 0..grid {
        let f = bloch::fiber_operator(&op, 0, bloch::grid_theta(j, grid)).unwrap();
        union.extend(bloch::fiber_spectrum(&f, 10, &tol).unwrap().values_tagged(Tag::Band));
    }
    let direct = bloch::periodic_spectrum(&op, grid).unwrap().values();
    assert!(hausdorff(&union, &direct) < 1e-10);
}

#[test]
fn spectrum_exports() {
    let s = bloch::periodic_spectrum(&models::period_two_chain(), 4).unwrap();
    let json = s.to_json();
    let first = &json["points"][0];
    for key in ["re", "im", "tag", "theta"] {
        assert!(first.get(key).is_some(), "{key}");
    }
    let csv = s.to_csv();
    assert!(csv.starts_with("re,im,tag,theta,index\n"));
    assert_eq!(csv.lines().count(), s.len() + 1);
    let svg = s.to_svg("period two");
    assert!(svg.starts_with("<svg") && svg.contains("band") && !svg.contains("href"));
}

#[test]
fn random_values_are_canonically_sorted() {
    let mut r = rng(28);
    let vals: Vec<C64> = (0..50).map(|_| cplx(&mut r)).collect();
    let mut rev = vals.clone();
    rev.reverse();
    let a = specdecomp_core::spectrum::SpectrumSet::from_values(vals, Tag::Discrete);
    let b = specdecomp_core::spectrum::SpectrumSet::from_values(rev, Tag::Discrete);
    assert_eq!(a, b);
}
