mod common;

use common::{random_hermitian, random_matrix, rng};
use specdecomp_core::essential::DislocationModel;
use specdecomp_core::lattice_ops::{self, IdealSpec, LatticeBox, LatticeOperator, Shape};
use specdecomp_core::linalg::{self, c, CVector};
use specdecomp_core::models;
use specdecomp_core::weyl::{
    self, Verdict, WeylError, DEFAULT_C, DEFAULT_LEVEL, EIGEN_RESIDUAL, OUTSIDE_RESIDUAL,
};

fn origin(dim: usize) -> IdealSpec {
    IdealSpec::new(
        dim,
        Shape::BoundedBox {
            lo: vec![0; dim],
            hi: vec![0; dim],
        },
    )
    .unwrap()
}

#[test]
fn surface_state_is_localized() {
    let model = models::surface_chain(-1.5).unwrap();
    for c_weight in [DEFAULT_C, 0.9] {
        let rep = weyl::surface_verdict(&model, c(-2.5, 0.0), &[100, 200], c_weight, DEFAULT_LEVEL, None).unwrap();
        assert_eq!(rep.verdict, Verdict::Localized);
        assert_eq!(rep.c, c_weight);
        for r in &rep.reports {
            assert!(r.residual <= EIGEN_RESIDUAL);
            assert!(r.weight >= 0.99, "{}", r.weight);
            // bound state ρ^{|n|} with ρ = (√(v²+4) − |v|)/2
            let rho: f64 = 0.5;
            let want = (1.0 - rho.powi(2 * DEFAULT_LEVEL as i32 + 2)).sqrt();
            assert!((r.weight - want).abs() < 1e-8);
        }
    }
}

#[test]
fn laplacian_zero_is_bulk() {
    let model = DislocationModel::new(LatticeOperator::laplacian(1), vec![]).unwrap();
    let rep = weyl::surface_verdict(&model, c(0.0, 0.0), &[100, 200], DEFAULT_C, DEFAULT_LEVEL, Some(&origin(1)))
        .unwrap();
    assert_eq!(rep.verdict, Verdict::Bulk);
    assert!(rep.reports[1].weight < rep.reports[0].weight);
}

#[test]
fn outside_point_is_not_in_spectrum() {
    let model = models::surface_chain(-1.5).unwrap();
    let rep = weyl::surface_verdict(&model, c(5.0, 0.0), &[100, 200], DEFAULT_C, DEFAULT_LEVEL, None).unwrap();
    assert_eq!(rep.verdict, Verdict::NotInSpectrum);
    for r in &rep.reports {
        assert!(r.residual >= 3.0 - 1e-10);
        assert!(r.residual > OUTSIDE_RESIDUAL);
    }
}

#[test]
fn verdict_errors() {
    let model = models::surface_chain(-1.5).unwrap();
    assert!(matches!(
        weyl::surface_verdict(&model, c(0.0, 0.0), &[100], DEFAULT_C, DEFAULT_LEVEL, None),
        Err(WeylError::TooFewBoxes(1))
    ));
    let bare = DislocationModel::new(LatticeOperator::laplacian(1), vec![]).unwrap();
    assert!(matches!(
        weyl::surface_verdict(&bare, c(0.0, 0.0), &[10, 20], DEFAULT_C, DEFAULT_LEVEL, None),
        Err(WeylError::NoReferenceSet)
    ));
}

#[test]
fn residual_matches_independent_norm() {
    let mut r = rng(40);
    for n in [5, 12, 30] {
        let m = random_matrix(&mut r, n);
        let lambda = common::cplx(&mut r);
        let (s, phi) = weyl::approx_eigenpair(&m, lambda).unwrap();
        let direct = (&m * &phi - &phi * lambda).norm();
        assert!((s - direct).abs() < 1e-12);
        assert!((phi.norm() - 1.0).abs() < 1e-12);
        // σ_min bounded above by the residual of any unit vector
        let e0 = CVector::from_fn(n, |i, _| if i == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        assert!(s <= (&m * &e0 - &e0 * lambda).norm() + 1e-12);
    }
}

#[test]
fn hermitian_residual_is_distance_to_eigenvalues() {
    let mut r = rng(41);
    for _ in 0..10 {
        let m = random_hermitian(&mut r, 10);
        let lambda = common::cplx(&mut r) * 3.0;
        let (s, _) = weyl::approx_eigenpair(&m, lambda).unwrap();
        let dist = linalg::eigenvalues(&m)
            .unwrap()
            .iter()
            .map(|e| (e - lambda).norm())
            .fold(f64::INFINITY, f64::min);
        assert!((s - dist).abs() < 1e-10);
    }
}

#[test]
fn profile_is_monotone_and_ends_at_one() {
    let mut r = rng(42);
    for dim in [1, 2] {
        let b = LatticeBox::new(vec![6; dim]);
        let v = random_matrix(&mut r, b.len()).column(0).into_owned();
        let phi = &v / c(v.norm(), 0.0);
        let spec = origin(dim);
        let top = spec.covering_level(&b);
        let p = weyl::localization_profile(&phi, &b, &spec, top);
        assert_eq!(p.len(), top as usize + 1);
        assert!(p.windows(2).all(|w| w[1] >= w[0]));
        assert!((p[top as usize] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn reports_follow_the_dominant_side() {
    let model = models::surface_chain(-1.5).unwrap();
    let spec = model.perturbations()[0].spec.clone();
    let rep = weyl::localization_report(&model, &spec, c(-2.5, 0.0), 50, 5).unwrap();
    assert_eq!(rep.box_half_width, 50);
    assert_eq!(rep.weight, rep.profile[5]);
    let h = lattice_ops::truncate(&model.operator(), &LatticeBox::line(50)).unwrap();
    let (s, _) = weyl::approx_eigenpair(&h, c(-2.5, 0.0)).unwrap();
    assert!((rep.residual - s).abs() < 1e-12);
}

#[test]
fn verdict_report_serializes() {
    let model = models::surface_chain(-1.5).unwrap();
    let rep = weyl::surface_verdict(&model, c(5.0, 0.0), &[10, 20], DEFAULT_C, 3, None).unwrap();
    let json = serde_json::to_value(&rep).unwrap();
    assert_eq!(json["verdict"], "not-in-spectrum");
    assert!(json["reports"][0]["side"].is_string());
}
