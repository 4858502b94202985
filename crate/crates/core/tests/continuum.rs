use std::f64::consts::PI;

use specdecomp_core::continuum::{
    self, kernel_make, lp_norm, BoundMethod, ContinuumError, FactorData, KernelFamily, NormData, NormSide,
    Polynomial, PotentialSpec, RadialKernel, SymbolGrid,
};
use specdecomp_core::linalg::c;

fn lap(dim: usize, lambda: f64) -> RadialKernel {
    kernel_make(dim, KernelFamily::LaplacianResolvent { lambda }).unwrap()
}

fn frac(dim: usize, lambda: f64, alpha: f64) -> RadialKernel {
    kernel_make(dim, KernelFamily::Fractional { lambda, alpha }).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn norms(values: &[(f64, f64)]) -> PotentialSpec {
    PotentialSpec {
        norms: values.iter().map(|&(p, value)| NormData { p, value }).collect(),
        factor: None,
    }
}

#[test]
fn one_dimensional_norms_in_closed_form() {
    // g = e^{-s|x|} / (2s), s = √λ
    for lambda in [0.5f64, 1.0, 3.0] {
        let s = lambda.sqrt();
        let k = lap(1, lambda);
        for p in [1.0f64, 1.5, 2.0, 4.0] {
            let want = (2.0 / (p * s * (2.0 * s).powf(p))).powf(1.0 / p);
            let got = lp_norm(&k, p, NormSide::Spatial).unwrap();
            assert!(rel(got, want) < 1e-10, "λ={lambda} p={p}: {got} vs {want}");
        }
    }
}

#[test]
fn three_dimensional_norms_in_closed_form() {
    // g = e^{-sr} / (4πr): ∫ g^p = 4π Γ(3 − p) / ((ps)^{3−p} (4π)^p)
    let gamma = |x: f64| libm::tgamma(x);
    for lambda in [0.5f64, 1.0, 2.0] {
        let s = lambda.sqrt();
        let k = lap(3, lambda);
        for p in [1.0f64, 1.5, 2.0, 2.5] {
            let integral = 4.0 * PI * gamma(3.0 - p) / ((p * s).powf(3.0 - p) * (4.0 * PI).powf(p));
            let got = lp_norm(&k, p, NormSide::Spatial).unwrap();
            assert!(rel(got, integral.powf(1.0 / p)) < 1e-9, "λ={lambda} p={p}");
        }
    }
}

#[test]
fn mass_by_quadrature() {
    let kernels = [lap(1, 2.0), lap(3, 0.5), frac(1, 1.0, 0.5), frac(1, 2.0, 0.75), frac(3, 1.0, 0.5), frac(3, 0.5, 0.8)];
    for k in kernels {
        let q = continuum::spatial_integral(&k, 1.0).unwrap();
        assert!(rel(q, 1.0 / k.lambda()) < 1e-8, "{k:?}: {q}");
        assert_eq!(lp_norm(&k, 1.0, NormSide::Spatial).unwrap(), k.mass());
    }
}

#[test]
fn plancherel() {
    for k in [lap(1, 1.0), lap(3, 2.0), frac(1, 1.0, 0.5), frac(3, 1.0, 0.9)] {
        let spatial = lp_norm(&k, 2.0, NormSide::Spatial).unwrap();
        let fourier = lp_norm(&k, 2.0, NormSide::Fourier).unwrap();
        let d = k.dim as f64;
        assert!(rel(spatial, (2.0 * PI).powf(-d / 2.0) * fourier) < 1e-8, "{k:?}");
    }
}

#[test]
fn fractional_fourier_subordination() {
    let k = frac(3, 1.0, 0.5);
    for rho in [0.0, 0.3, 1.0, 4.0, 25.0] {
        let closed = 1.0 / (1.0 + rho);
        assert!(rel(k.fourier(rho), closed) < 1e-15);
        assert!(rel(k.fourier_subordinated(rho).unwrap(), closed) < 1e-10);
    }
}

#[test]
fn profiles_are_positive_and_decreasing() {
    for k in [lap(1, 1.0), lap(3, 1.0), frac(1, 1.0, 0.5), frac(3, 1.0, 0.7)] {
        let vals: Vec<f64> = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|&r| k.profile(r).unwrap())
            .collect();
        assert!(vals.iter().all(|&v| v > 0.0));
        assert!(vals.windows(2).all(|w| w[1] < w[0]), "{k:?}: {vals:?}");
    }
    let k = lap(3, 1.0);
    assert!(rel(k.profile(2.0).unwrap(), (-2.0f64).exp() / (8.0 * PI)) < 1e-14);
}

#[test]
fn holder_and_fourier_coincide() {
    let k = lap(3, 1.0);
    let v = norms(&[(2.0, 1.7)]);
    let h = continuum::relative_bound(&v, &k, BoundMethod::Holder).unwrap();
    let f = continuum::relative_bound(&v, &k, BoundMethod::Fourier).unwrap();
    let want = 1.7 * (8.0 * PI).powf(-0.5);
    assert!(rel(h.bound, want) <= 1e-10);
    assert!(rel(f.bound, want) <= 1e-10);
    assert!(rel(h.bound, f.bound) <= 1e-10);
    assert_eq!(h.constant, 1.0);
    assert!(rel(f.constant, (2.0 * PI).powf(-1.5)) < 1e-15);
    assert!(f.constant_convention.contains("2π"));
    assert!(!h.relative_bound_lt_1 || h.bound < 1.0);
}

#[test]
fn best_term_is_reported_with_all_inputs() {
    let k = lap(3, 1.0);
    let v = norms(&[(2.0, 10.0), (4.0, 0.1), (8.0, 1.0)]);
    let out = continuum::relative_bound(&v, &k, BoundMethod::Holder).unwrap();
    assert_eq!(out.inputs.len(), 3);
    let min = out.inputs.iter().map(|t| t.bound).fold(f64::INFINITY, f64::min);
    assert_eq!(out.bound, min);
    for t in &out.inputs {
        assert!((1.0 / t.p + 1.0 / t.q - 1.0).abs() < 1e-15);
        assert_eq!(t.bound, t.potential_norm * t.kernel_norm);
    }
}

#[test]
fn bounds_scale_with_the_potential() {
    let k = lap(1, 1.0);
    for method in [BoundMethod::Holder, BoundMethod::Fourier] {
        let small = continuum::relative_bound(&norms(&[(2.0, 0.5)]), &k, method).unwrap();
        let big = continuum::relative_bound(&norms(&[(2.0, 2.0)]), &k, method).unwrap();
        assert!(rel(big.bound, 4.0 * small.bound) < 1e-14);
        assert!(small.bound < big.bound);
    }
}

#[test]
fn multibody_uses_the_factor_dimension() {
    let k = lap(3, 1.0);
    let v = PotentialSpec {
        norms: vec![],
        factor: Some(FactorData {
            total_dim: 6,
            w_norms: vec![NormData { p: 2.0, value: 1.0 }],
        }),
    };
    let out = continuum::relative_bound(&v, &k, BoundMethod::Multibody).unwrap();
    assert!(rel(out.bound, (8.0 * PI).powf(-0.5)) < 1e-10);
    assert!(rel(out.constant, (2.0 * PI).powf(-1.5)) < 1e-15);
    let bad = PotentialSpec {
        factor: Some(FactorData {
            total_dim: 2,
            w_norms: vec![NormData { p: 2.0, value: 1.0 }],
        }),
        ..PotentialSpec::default()
    };
    assert!(matches!(
        continuum::relative_bound(&bad, &k, BoundMethod::Multibody),
        Err(ContinuumError::InvalidParameter(_))
    ));
}

#[test]
fn bound_errors() {
    let k = lap(3, 1.0);
    assert!(matches!(
        continuum::relative_bound(&norms(&[(1.5, 1.0)]), &k, BoundMethod::Holder),
        Err(ContinuumError::ExponentOutOfRange { .. })
    ));
    assert!(matches!(
        continuum::relative_bound(&PotentialSpec::default(), &k, BoundMethod::Fourier),
        Err(ContinuumError::MissingNormData("fourier"))
    ));
    assert!(matches!(
        continuum::relative_bound(&PotentialSpec::default(), &k, BoundMethod::Multibody),
        Err(ContinuumError::MissingNormData("multibody"))
    ));
    assert!(matches!(
        continuum::relative_bound(&norms(&[(2.0, -1.0)]), &k, BoundMethod::Fourier),
        Err(ContinuumError::InvalidParameter(_))
    ));
}

#[test]
fn divergent_norms_are_rejected() {
    let cases = [
        (lap(3, 1.0), 3.0, NormSide::Spatial),
        (lap(3, 1.0), 1.0, NormSide::Fourier),
        (lap(1, 1.0), 0.5, NormSide::Fourier),
        (frac(1, 1.0, 0.25), 3.0, NormSide::Spatial),
        (frac(3, 1.0, 0.5), 1.5, NormSide::Spatial),
    ];
    for (k, p, side) in cases {
        let out = lp_norm(&k, p, side);
        assert!(
            matches!(out, Err(ContinuumError::DivergentNorm { .. }) | Err(ContinuumError::ExponentOutOfRange { .. })),
            "{k:?} p={p}: {out:?}"
        );
    }
    assert!(matches!(
        lp_norm(&lap(3, 1.0), 3.0, NormSide::Spatial),
        Err(ContinuumError::DivergentNorm { .. })
    ));
}

#[test]
fn kernel_validation() {
    assert!(matches!(
        kernel_make(2, KernelFamily::LaplacianResolvent { lambda: 1.0 }),
        Err(ContinuumError::UnsupportedDimension(2))
    ));
    for family in [
        KernelFamily::LaplacianResolvent { lambda: 0.0 },
        KernelFamily::Fractional { lambda: 1.0, alpha: 1.0 },
        KernelFamily::Fractional { lambda: -1.0, alpha: 0.5 },
    ] {
        assert!(matches!(kernel_make(1, family), Err(ContinuumError::InvalidParameter(_))));
    }
    let json = serde_json::to_value(KernelFamily::Fractional { lambda: 1.0, alpha: 0.5 }).unwrap();
    assert_eq!(json["family"], "fractional");
}

/// Root of the decreasing map `(1 + c) e^{-c} = ε` by bisection.
fn tail_root(eps: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 100.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (1.0 + mid) * (-mid).exp() > eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn tail_radius_matches_closed_form() {
    let k = lap(3, 1.0);
    for eps in [0.5, 0.1, 0.01, 1e-4] {
        let r = continuum::tail_radius(&k, eps).unwrap();
        assert!((r - tail_root(eps)).abs() <= 1e-5, "{eps}: {r}");
    }
    assert!((tail_root(0.01) - 6.6384).abs() < 1e-4);
    assert!((k.tail_mass(2.0).unwrap() - 3.0 * (-2.0f64).exp()).abs() < 1e-10);
}

#[test]
fn tail_radius_is_monotone() {
    for k in [lap(1, 1.0), lap(3, 2.0), frac(1, 1.0, 0.5)] {
        let mass = k.mass();
        let radii: Vec<f64> = [0.9, 0.5, 0.1, 0.01]
            .iter()
            .map(|f| continuum::tail_radius(&k, f * mass).unwrap())
            .collect();
        assert!(radii.windows(2).all(|w| w[1] > w[0]), "{k:?}: {radii:?}");
        assert!(continuum::tail_radius(&k, mass * (1.0 - 1e-9)).unwrap() < 1e-3);
        assert!(continuum::tail_radius(&k, mass).is_err());
        assert!(continuum::tail_radius(&k, 0.0).is_err());
    }
}

fn poly(terms: &[((f64, f64), [u32; 2])]) -> Polynomial {
    Polynomial::new(2, terms.iter().map(|&((re, im), p)| (c(re, im), p.to_vec())).collect()).unwrap()
}

#[test]
fn symbol_resolvent_examples() {
    // −(ξ² + iη³)
    let p1 = poly(&[((-1.0, 0.0), [2, 0]), ((0.0, -1.0), [0, 3])]);
    // −(ξ² + (η − ξ²)²) = −ξ² − η² + 2ηξ² − ξ⁴
    let p2 = poly(&[((-1.0, 0.0), [2, 0]), ((-1.0, 0.0), [0, 2]), ((2.0, 0.0), [2, 1]), ((-1.0, 0.0), [4, 0])]);
    assert!((p2.eval(&[1.5, 0.3]) - c(-(2.25 + (0.3f64 - 2.25).powi(2)), 0.0)).norm() < 1e-12);
    for p in [p1, p2] {
        let rep = continuum::symbol_resolvent_check(&p, 0.0, c(2.0, 0.0), &SymbolGrid::default()).unwrap();
        assert!(rep.within_bound);
        assert!(rep.sup_resolvent <= 0.5 + 1e-15);
        assert!((rep.sup_resolvent - 0.5).abs() < 1e-15);
        assert!(rep.max_real_symbol <= 0.0);
        assert_eq!(rep.mollifier_deviation.len(), continuum::MOLLIFIER_SCALES.len());
        assert!(rep.mollifier_decreasing);
    }
}

#[test]
fn symbol_bound_violation_and_input_errors() {
    let p = poly(&[((1.0, 0.0), [2, 0])]);
    assert!(matches!(
        continuum::symbol_resolvent_check(&p, 0.0, c(2.0, 0.0), &SymbolGrid::default()),
        Err(ContinuumError::SymbolBoundViolated { .. })
    ));
    let q = poly(&[((-1.0, 0.0), [2, 0])]);
    assert!(continuum::symbol_resolvent_check(&q, 0.0, c(-1.0, 0.0), &SymbolGrid::default()).is_err());
    assert!(Polynomial::new(2, vec![(c(1.0, 0.0), vec![1])]).is_err());
}

#[test]
fn halfline_rays() {
    let rays = continuum::halfline_sum_spectrum(&[c(-1.0, 0.0), c(2.0, 1.0), c(3.0, 1.0)]);
    assert_eq!(rays.rays(), vec![c(-1.0, 0.0), c(2.0, 1.0)]);
    assert!(rays.contains(c(5.0, 0.0)));
    assert!(rays.contains(c(-1.0, 0.0)));
    assert!(!rays.contains(c(-2.0, 0.0)));
    assert!(rays.contains(c(2.5, 1.0)));
    assert!(!rays.contains(c(1.0, 1.0)));
    assert!(!rays.contains(c(5.0, 0.5)));
    let empty = continuum::halfline_sum_spectrum(&[]);
    assert_eq!(empty.rays(), vec![c(0.0, 0.0)]);
}
