mod common;

use common::{random_periodic, rng};
use specdecomp_core::bloch;
use specdecomp_core::essential::{
    self, classify_point, CertificateOptions, CrossOptions, DislocationModel, EssentialError, Independence,
    PointClass, CLASSIFY_TOL,
};
use specdecomp_core::lattice_ops::{IdealSpec, LatticeOperator, Shape, Side};
use specdecomp_core::linalg::{self, c, C64};
use specdecomp_core::models;
use specdecomp_core::spectrum::{hausdorff, hausdorff_to_intervals, SpectrumSet, Tag};

fn quick_cert() -> CertificateOptions {
    CertificateOptions {
        boxes: vec![10, 20],
        samples: 5,
        ..CertificateOptions::for_dim(2)
    }
}

fn quick_cross() -> CrossOptions {
    let mut o = CrossOptions {
        grid: 48,
        fiber_box: 40,
        ..CrossOptions::default()
    };
    o.fiber.grid = 64;
    o
}

#[test]
fn zero_perturbation_gives_background_spectrum() {
    let spec = IdealSpec::half_space(1, 0, Side::Upper, 0).unwrap();
    let model = DislocationModel::new(models::period_two_chain(), vec![(LatticeOperator::zero(1), spec)]).unwrap();
    let out = essential::dislocation_spectrum(&model, 64, &CertificateOptions::default()).unwrap();
    let direct = bloch::periodic_spectrum(&models::period_two_chain(), 64).unwrap();
    assert_eq!(out.spectrum, direct);
    assert!(out.certificate.warnings.iter().all(|w| !w.contains("exceeds")));
}

#[test]
fn step_chain_quotient_excludes_the_upper_band() {
    let model = models::step_chain(10.0).unwrap();
    let out = essential::dislocation_spectrum(&model, 256, &CertificateOptions::default()).unwrap();
    assert!(hausdorff_to_intervals(&out.spectrum.values(), &[(-2.0, 2.0)]) <= 2.0 * std::f64::consts::PI / 256.0);
    assert!(out.spectrum.values().iter().all(|v| v.re <= 2.0 + 1e-12));

    let trunc = essential::truncation_eigenvalues(&model.operator(), 400).unwrap();
    let upper: Vec<C64> = trunc.into_iter().filter(|v| v.re > 5.0).collect();
    assert!(!upper.is_empty());
    assert!(hausdorff_to_intervals(&upper, &[(8.0, 12.0)]) <= 0.05);
    for v in &upper {
        assert!(out.spectrum.distance_to(*v, None) > 5.0);
    }
    assert!(out.certificate.within_threshold(), "{:?}", out.certificate.warnings);
}

#[test]
fn dislocation_requires_a_single_half_space() {
    let model = models::surface_chain(-1.5).unwrap();
    assert!(matches!(
        essential::dislocation_spectrum(&model, 16, &CertificateOptions::default()),
        Err(EssentialError::NotHalfSpace)
    ));
}

#[test]
fn model_validation() {
    let spec = IdealSpec::half_space(1, 0, Side::Upper, 0).unwrap();
    assert!(matches!(
        DislocationModel::new(models::step_potential(1.0), vec![]),
        Err(EssentialError::BackgroundNotPeriodic { axis: 0 })
    ));
    // a lower-half step is not confined near the upper half-line
    let lower = IdealSpec::half_space(1, 0, Side::Lower, 0).unwrap();
    assert!(matches!(
        DislocationModel::new(LatticeOperator::laplacian(1), vec![(models::step_potential(1.0), lower)]),
        Err(EssentialError::SupportViolation { index: 0, .. })
    ));
    let m = DislocationModel::new(LatticeOperator::laplacian(1), vec![(models::step_potential(1.0), spec)]).unwrap();
    assert_eq!(m.perturbations()[0].confinement, 0);
}

#[test]
fn cross_model_curve_and_classification() {
    let model = models::cross_model(-1.5, None).unwrap();
    let opts = CrossOptions {
        grid: 256,
        ..quick_cross()
    };
    let out = essential::cross_spectrum(&model, &opts, &quick_cert()).unwrap();
    let bands = out.spectrum.values_tagged(Tag::Band);
    let curve = out.spectrum.values_tagged(Tag::Curve);
    assert!(hausdorff_to_intervals(&bands, &[(-4.0, 4.0)]) < 0.05);
    assert!(hausdorff_to_intervals(&curve, &[(-4.5, -0.5)]) < 0.05);
    for p in out.spectrum.points().iter().filter(|p| p.tag == Tag::Curve) {
        // fiber bound state: 2 cos θ − √(v² + 4)
        let th = p.theta.as_ref().unwrap()[0];
        assert!((p.value - c(2.0 * th.cos() - 2.5, 0.0)).norm() < 1e-8);
    }
    assert_eq!(classify_point(c(-4.4, 0.0), &out.spectrum, CLASSIFY_TOL), PointClass::Surface);
    assert_eq!(classify_point(c(0.0, 0.0), &out.spectrum, CLASSIFY_TOL), PointClass::Bulk);
    assert_eq!(classify_point(c(9.0, 0.0), &out.spectrum, CLASSIFY_TOL), PointClass::Outside);
    assert!(out.spectrum.max_abs_imag() <= 1e-10);
}

#[test]
fn cross_model_certificate_shrinks() {
    let model = models::cross_model(-1.5, None).unwrap();
    let out = essential::cross_spectrum(&model, &quick_cross(), &quick_cert()).unwrap();
    assert_eq!(out.certificate.points.len(), 5);
    for p in &out.certificate.points {
        assert_eq!(p.residuals.len(), 2);
        assert!(p.residuals[1] < 0.2, "{p:?}");
    }
}

#[test]
fn both_strips_reduce_to_the_union() {
    let model = models::cross_model(-1.5, Some(-1.5)).unwrap();
    let out = essential::cross_spectrum(&model, &quick_cross(), &quick_cert()).unwrap();
    let one = essential::cross_spectrum(&models::cross_model(-1.5, None).unwrap(), &quick_cross(), &quick_cert())
        .unwrap();
    // the symmetric strip contributes the same curve points, merged on union
    assert!(hausdorff(&out.spectrum.values(), &one.spectrum.values()) < 1e-10);
    assert_eq!(out.spectrum.len(), one.spectrum.len());
}

#[test]
fn cross_with_zero_strips_is_the_periodic_spectrum() {
    let zero = |axis| (LatticeOperator::zero(2), IdealSpec::line(2, vec![axis]).unwrap());
    let model = DislocationModel::new(LatticeOperator::laplacian(2), vec![zero(0), zero(1)]).unwrap();
    let opts = quick_cross();
    let out = essential::cross_spectrum(&model, &opts, &quick_cert()).unwrap();
    assert_eq!(out.spectrum, bloch::periodic_spectrum(&LatticeOperator::laplacian(2), opts.grid).unwrap());
    assert!(out.spectrum.values_tagged(Tag::Curve).is_empty());
}

#[test]
fn cross_rejects_non_strips() {
    let half = IdealSpec::half_space(2, 0, Side::Upper, 0).unwrap();
    let model = DislocationModel::new(LatticeOperator::laplacian(2), vec![(LatticeOperator::zero(2), half)]).unwrap();
    assert!(matches!(
        essential::cross_spectrum(&model, &quick_cross(), &quick_cert()),
        Err(EssentialError::NotStripPair(_))
    ));
    let twice = DislocationModel::new(
        LatticeOperator::laplacian(2),
        vec![
            (models::line_potential(1, 1.0), IdealSpec::line(2, vec![1]).unwrap()),
            (models::line_potential(1, 2.0), IdealSpec::strip(2, 1, 1).unwrap()),
        ],
    )
    .unwrap();
    assert!(matches!(
        essential::cross_spectrum(&twice, &quick_cross(), &quick_cert()),
        Err(EssentialError::NotStripPair(_))
    ));
}

#[test]
fn strip_on_trivial_background_is_diagonal() {
    // A = 0: each fiber is the compact defect alone, so the curve is {v}
    let model = DislocationModel::new(
        LatticeOperator::zero(2),
        vec![(models::line_potential(1, 3.0), IdealSpec::line(2, vec![1]).unwrap())],
    )
    .unwrap();
    let out = essential::cross_spectrum(&model, &quick_cross(), &quick_cert()).unwrap();
    let curve = out.spectrum.values_tagged(Tag::Curve);
    assert!(!curve.is_empty());
    assert!(curve.iter().all(|v| (v - c(3.0, 0.0)).norm() < 1e-10));
    assert!(out.spectrum.values_tagged(Tag::Band).iter().all(|v| v.norm() == 0.0));
}

#[test]
fn union_is_commutative_and_idempotent() {
    let mut r = rng(30);
    for _ in 0..10 {
        let a = bloch::periodic_spectrum(&random_periodic(&mut r, 1, 2), 8).unwrap();
        let b = bloch::periodic_spectrum(&random_periodic(&mut r, 1, 3), 8).unwrap();
        assert_eq!(essential::union_spectra(&a, &b), essential::union_spectra(&b, &a));
        assert_eq!(essential::union_spectra(&a, &a), a);
        assert_eq!(essential::union_spectra(&a, &SpectrumSet::empty()), a);
    }
}

#[test]
fn independence_examples() {
    let line0 = IdealSpec::line(2, vec![0]).unwrap();
    let line1 = IdealSpec::line(2, vec![1]).unwrap();
    assert_eq!(
        essential::independence_check(&line0, &line1).unwrap(),
        Independence::Independent { offset: 0 }
    );
    let up = IdealSpec::half_space(1, 0, Side::Upper, 5).unwrap();
    let down = IdealSpec::half_space(1, 0, Side::Lower, 0).unwrap();
    assert_eq!(
        essential::independence_check(&up, &down).unwrap(),
        Independence::EmptyIntersection
    );
    let a = IdealSpec::new(1, Shape::BoundedBox { lo: vec![0], hi: vec![3] }).unwrap();
    let b = IdealSpec::new(1, Shape::BoundedBox { lo: vec![2], hi: vec![6] }).unwrap();
    assert_eq!(
        essential::independence_check(&a, &b).unwrap(),
        Independence::Independent { offset: 0 }
    );
    assert!(essential::independence_check(&a, &line0).is_err());
}

#[test]
fn independence_witness_holds_on_boxes() {
    // S(n) ∩ T(n) ⊆ (S ∩ T)(n), checked site by site
    let a = IdealSpec::half_space(2, 0, Side::Upper, -1).unwrap();
    let b = IdealSpec::strip(2, 1, 2).unwrap();
    let Independence::Independent { offset } = essential::independence_check(&a, &b).unwrap() else {
        panic!("expected independent sets");
    };
    let meet = IdealSpec::new(
        2,
        Shape::BoundedBox {
            lo: vec![-1, -2],
            hi: vec![1000, 2],
        },
    )
    .unwrap();
    for n in 0..4u64 {
        for x in -8i64..8 {
            for y in -8i64..8 {
                let s = [x, y];
                if a.distance(&s) <= n && b.distance(&s) <= n {
                    assert!(meet.distance(&s) <= n + offset, "{s:?} at n = {n}");
                }
            }
        }
    }
}

#[test]
fn self_adjoint_models_have_real_spectra() {
    let model = models::step_chain(3.0).unwrap();
    let out = essential::dislocation_spectrum(&model, 32, &CertificateOptions::default()).unwrap();
    assert!(out.spectrum.max_abs_imag() <= 1e-12);
    let h = model.operator();
    let m = specdecomp_core::lattice_ops::truncate(&h, &specdecomp_core::lattice_ops::LatticeBox::line(10)).unwrap();
    assert!(common::max_abs(&(&m - m.adjoint())) == 0.0);
    assert!(linalg::eigenvalues(&m).unwrap().iter().all(|v| v.im.abs() < 1e-10));
}

#[test]
fn classify_point_prefers_bulk() {
    let set = essential::union_spectra(
        &SpectrumSet::from_values([c(0.0, 0.0)], Tag::Band),
        &SpectrumSet::from_values([c(0.0, 0.0), c(1.0, 0.0)], Tag::Curve),
    )
    .union(&SpectrumSet::from_values([c(2.0, 0.0)], Tag::Discrete));
    assert_eq!(classify_point(c(0.001, 0.0), &set, CLASSIFY_TOL), PointClass::Bulk);
    assert_eq!(classify_point(c(1.0, 0.005), &set, CLASSIFY_TOL), PointClass::Surface);
    assert_eq!(classify_point(c(2.0, 0.0), &set, CLASSIFY_TOL), PointClass::Discrete);
    assert_eq!(classify_point(c(3.0, 0.0), &set, CLASSIFY_TOL), PointClass::Outside);
}

#[test]
fn certificate_options_round_trip() {
    let o = CertificateOptions::for_dim(2);
    let json = serde_json::to_string(&o).unwrap();
    assert_eq!(serde_json::from_str::<CertificateOptions>(&json).unwrap(), o);
    assert!(serde_json::from_str::<CertificateOptions>(r#"{"bogus": 1}"#).is_err());
    let d: CrossOptions = serde_json::from_str("{}").unwrap();
    assert_eq!(d, CrossOptions::default());
}
