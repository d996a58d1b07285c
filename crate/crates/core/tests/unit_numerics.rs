use std::f64::consts::PI;

use lfscat_core::numerics::*;
use lfscat_core::{Complex64, NumericsError};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn heaviside_convention() {
    assert_eq!(heaviside(0.0), 1.0);
    assert_eq!(heaviside(-1.0), 0.0);
    assert_eq!(heaviside(2.5), 1.0);
    assert_eq!(heaviside(-0.0), 1.0);
}

#[test]
fn sinc_values() {
    assert_eq!(sinc(0.0), 1.0);
    assert!(sinc(PI).abs() < 1e-15);
    assert!((sinc(PI / 2.0) - 2.0 / PI).abs() < 1e-15);
}

#[test]
fn sinc_branches_agree() {
    for i in 0..=200 {
        let x = 1e-4 * (100.0_f64).powf(i as f64 / 200.0);
        for x in [x, -x] {
            assert!((sinc_series(x) - x.sin() / x).abs() < 1e-15, "x = {x}");
        }
    }
}

#[test]
fn sj_values() {
    assert_eq!(sj(0, 0.5).unwrap(), 0.5);
    assert!((sj(1, 1.0).unwrap() + 1.0 / 6.0).abs() < 1e-16);
    assert_eq!(sj(2, -1.0).unwrap(), 0.0);
    assert!(matches!(sj(2, 1e200), Err(NumericsError::Range(_))));
}

#[test]
fn integrate_1d_examples() {
    let spec = QuadratureSpec::default();
    let one = integrate_1d(|_| c(1.0, 0.0), 0.0, 1.0, &spec).unwrap();
    assert!((one - c(1.0, 0.0)).norm() < 1e-15);
    let osc = integrate_1d(|x| Complex64::from_polar(1.0, x), 0.0, PI, &spec).unwrap();
    assert!((osc - c(0.0, 2.0)).norm() < 1e-13);
    let cos = integrate_1d(|x| c(x.cos(), 0.0), -PI / 2.0, PI / 2.0, &spec).unwrap();
    assert!((cos - c(2.0, 0.0)).norm() < 1e-13);
}

#[test]
fn integrate_1d_reversed_limits() {
    let spec = QuadratureSpec::default();
    let v = integrate_1d(|x| c(x, 0.0), 1.0, 0.0, &spec).unwrap();
    assert!((v + c(0.5, 0.0)).norm() < 1e-15);
}

#[test]
fn integrate_1d_reports_nonconvergence_with_estimate() {
    let spec = QuadratureSpec::new(1e-14, 0.0, 3).unwrap();
    let err = integrate_1d(|x| c((1.0 / x.abs().max(1e-300)).sqrt(), 0.0), -1.0, 1.0, &spec)
        .unwrap_err();
    match err {
        NumericsError::NoConvergence { estimate, .. } => assert!(estimate.re > 0.0),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn integrate_1d_rejects_nonfinite() {
    let spec = QuadratureSpec::default();
    let err = integrate_1d(|_| c(f64::NAN, 0.0), 0.0, 1.0, &spec).unwrap_err();
    assert!(matches!(err, NumericsError::NonFinite { .. }));
}

#[test]
fn integrate_1d_breakpoints_handle_kinks() {
    let spec = QuadratureSpec::default();
    let v = integrate_1d_points(|x| c((x - 0.3).abs(), 0.0), 0.0, 1.0, &[0.3], &spec).unwrap();
    assert!((v.re - (0.045 + 0.245)).abs() < 1e-14);
}

#[test]
fn quadrature_spec_validation() {
    assert!(QuadratureSpec::new(0.0, 1e-12, 10).is_err());
    assert!(QuadratureSpec::new(1e-8, -1.0, 10).is_err());
    assert!(QuadratureSpec::new(1e-8, 0.0, 0).is_err());
    assert!(QuadratureSpec::new(1e-8, 0.0, 1).is_ok());
}

#[test]
fn integrate_2d_examples() {
    let spec = QuadratureSpec::default();
    let one = integrate_2d(|_, _| c(1.0, 0.0), (0.0, 1.0), (0.0, 1.0), &spec).unwrap();
    assert!((one - c(1.0, 0.0)).norm() < 1e-14);
    let s = integrate_2d(|a, _| c(a.sin(), 0.0), (0.0, PI / 2.0), (0.0, 2.0 * PI), &spec)
        .unwrap();
    assert!((s - c(2.0 * PI, 0.0)).norm() < 1e-12);
    let z = integrate_2d(
        |a, b| Complex64::from_polar(1.0, a) * b.cos(),
        (0.0, PI),
        (0.0, PI),
        &spec,
    )
    .unwrap();
    assert!(z.norm() < 1e-12);
}

#[test]
fn gauss_legendre_integrates_polynomials() {
    for n in [1, 2, 5, 10, 201] {
        let (x, w) = gauss_legendre(n);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-13, "n = {n}");
        let deg = 2 * n - 1;
        let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
        assert!((q - exact).abs() < 1e-13, "n = {n}");
        let q2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        if n >= 2 {
            assert!((q2 - 2.0 / 3.0).abs() < 1e-13);
        }
    }
}

#[test]
fn fourier_1d_gaussian() {
    let spec = TransformSpec::numeric(12.0, 1024);
    let f = |y: f64| c((-y * y / 2.0).exp(), 0.0);
    let v0 = fourier_1d(f, 0.0, &spec).unwrap();
    assert!((v0 - c((2.0 * PI).sqrt(), 0.0)).norm() < 1e-12);
    let v1 = fourier_1d(f, 1.0, &spec).unwrap();
    assert!((v1 - c((2.0 * PI).sqrt() * (-0.5f64).exp(), 0.0)).norm() < 1e-12);
}

#[test]
fn fourier_1d_one_sided_spectrum_vanishes_below_threshold() {
    // 𝔷 e^{iαy}/(y/L+i)² has a transform supported on p > α.
    let (z, alpha, l) = (c(0.1, 0.0), 5.0, 1.0);
    let f = move |y: f64| z * Complex64::from_polar(1.0, alpha * y) / (c(y / l, 1.0)).powi(2);
    let spec = TransformSpec {
        edge_tol: 1e-6,
        ..TransformSpec::numeric(4.0e4, 1 << 19)
    };
    let signal = SampledSignal1d::new(f, 0.0, &spec).unwrap();
    for p in [-4.0, 0.0, 2.0, 4.0] {
        assert!(signal.transform(p).norm() < 1e-9, "p = {p}");
    }
    // Above threshold: 2π𝔷L²(α-p)e^{L(α-p)}
    let p = 6.0;
    let exact = z * (2.0 * PI * l * l * (alpha - p) * (l * (alpha - p)).exp());
    assert!((signal.transform(p) - exact).norm() < 1e-9);
}

#[test]
fn fourier_1d_truncation_error() {
    let spec = TransformSpec::numeric(3.0, 256);
    let err = fourier_1d(|y| c((-y.abs()).exp() * 0.0 + 1.0 / (1.0 + y * y), 0.0), 0.0, &spec)
        .unwrap_err();
    assert!(matches!(err, NumericsError::Truncation { .. }));
}

#[test]
fn transform_spec_validation() {
    assert!(TransformSpec::numeric(1.0, 1000).validate().is_err());
    assert!(TransformSpec::numeric(-1.0, 1024).validate().is_err());
    assert!(TransformSpec::numeric(1.0, 1024).validate().is_ok());
}

#[test]
fn fourier_2d_gaussian() {
    let l = 1.5;
    let spec = TransformSpec::numeric(10.0 * l, 128);
    let f = |x: f64, y: f64| c((-(x * x + y * y) / (2.0 * l * l)).exp(), 0.0);
    let v0 = fourier_2d(f, (0.0, 0.0), &spec).unwrap();
    assert!((v0.re - 2.0 * PI * l * l).abs() < 1e-10);
    let (px, py) = (0.6, -0.8);
    let v = fourier_2d(f, (px, py), &spec).unwrap();
    let exact = 2.0 * PI * l * l * (-0.5 * l * l * (px * px + py * py)).exp();
    assert!((v - c(exact, 0.0)).norm() < 1e-10);
    let zero = fourier_2d(|_, _| c(0.0, 0.0), (px, py), &spec).unwrap();
    assert_eq!(zero, c(0.0, 0.0));
}
