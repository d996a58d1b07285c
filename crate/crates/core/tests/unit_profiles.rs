use std::f64::consts::PI;
use std::sync::Arc;

use lfscat_core::numerics::{heaviside, NumericsConfig, QuadratureSpec, TransformSpec};
use lfscat_core::profiles::*;
use lfscat_core::{Complex64, Error};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn numeric(radius: f64, n: usize) -> NumericsConfig {
    NumericsConfig {
        transform: TransformSpec::numeric(radius, n),
        ..NumericsConfig::default()
    }
}

#[test]
fn linear_x_factor_moments() {
    let g = SeparableProfile::new(
        XFactor::Polynomial {
            coefficients: vec![0.0, 1.0],
        },
        YShape::Gaussian { width: 1.0 },
        c(1.0, 0.0),
    )
    .unwrap();
    let gt = YShape::Gaussian { width: 1.0 }.transform(0.7);
    let p = Arc::new(g) as Arc<dyn Profile2D>;
    let cfg = NumericsConfig::default();
    let m0 = moment_2d(p.clone(), 0, 0.7, 1.0, &cfg).unwrap();
    let m1 = moment_2d(p.clone(), 1, 0.7, 1.0, &cfg).unwrap();
    assert!((m0 - gt / 2.0).norm() < 1e-15);
    assert!((m1 - gt / 3.0).norm() < 1e-15);
    let n0 = moment_2d(p, 0, 0.7, 1.0, &numeric(10.0, 512)).unwrap();
    assert!((n0 - gt / 2.0).norm() < 1e-10);
}

#[test]
fn ex1_moment_closed_form() {
    let (z, alpha, l) = (c(0.1, 0.05), 0.5, 10.0);
    let p = Arc::new(SeparableProfile::ex1(z, alpha, l).unwrap()) as Arc<dyn Profile2D>;
    let cfg = NumericsConfig::default();
    for q in [-1.0, 0.0, 0.5, 0.6, 1.2] {
        let m0 = moment_2d(p.clone(), 0, q, 1.0, &cfg).unwrap();
        let m1 = moment_2d(p.clone(), 1, q, 1.0, &cfg).unwrap();
        let exact = z * 2.0 * PI * l * l * (alpha - q) * (l * (alpha - q)).exp()
            * heaviside(l * (q - alpha));
        assert!((m0 - exact).norm() <= 1e-13 * exact.norm().max(1e-300));
        assert!((m0 - m1 * 2.0).norm() <= 1e-13 * m0.norm());
    }
}

#[test]
fn zero_profile_moments() {
    let p = Arc::new(ZeroProfile) as Arc<dyn Profile2D>;
    for l in 0..=2 {
        assert_eq!(moment_2d(p.clone(), l, 0.3, 1.0, &NumericsConfig::default()).unwrap(), ZERO);
        assert_eq!(moment_2d(p.clone(), l, 0.3, 1.0, &numeric(5.0, 64)).unwrap(), ZERO);
    }
    assert!(matches!(
        moment_2d(p, 3, 0.0, 1.0, &NumericsConfig::default()),
        Err(Error::MomentOrder(3))
    ));
}

#[test]
fn spatial_moment_examples() {
    let q = QuadratureSpec::default();
    let lin = FnProfile::new("x", 1.0, |x, _, _| c(x, 0.0));
    assert!((spatial_moment_y(&lin, 0, 0.3, 1.0, &q).unwrap() - c(0.5, 0.0)).norm() < 1e-15);
    assert!((spatial_moment_y(&lin, 1, 0.3, 1.0, &q).unwrap() - c(1.0 / 3.0, 0.0)).norm() < 1e-15);
    let slab = SeparableProfile::gaussian_slab(0.5, 2.0).unwrap();
    let y = 1.3;
    let g = 0.5 * (-y * y / 8.0f64).exp();
    let w0 = spatial_moment_y(&slab, 0, y, 1.0, &q).unwrap();
    let w1 = spatial_moment_y(&slab, 1, y, 1.0, &q).unwrap();
    assert!((w0.re - g).abs() < 1e-15 && (w0 - w1 * 2.0).norm() < 1e-15);
    assert_eq!(spatial_moment_y(&ZeroProfile, 0, y, 1.0, &q).unwrap(), ZERO);
}

#[test]
fn layered_moments_match_quadrature() {
    let x = XFactor::Layers {
        edges: vec![0.25, 0.7],
        values: vec![1.0, -2.0, 0.5],
    };
    let prof = SeparableProfile::new(x.clone(), YShape::Lorentzian { width: 1.0 }, c(1.0, 0.0)).unwrap();
    let q = QuadratureSpec::default();
    for l in 0..=2u8 {
        let num = spatial_moment_y(&prof, l, 0.0, 1.0, &q).unwrap();
        assert!((num.re - x.moment(l)).abs() < 1e-14, "l = {l}");
    }
    assert!(XFactor::Layers {
        edges: vec![0.5],
        values: vec![1.0]
    }
    .validate()
    .is_err());
}

#[test]
fn gaussian_3d_moments() {
    let g = Arc::new(GaussianSlab3D::new(c(10.0, 0.0), 1.5).unwrap()) as Arc<dyn Profile3D>;
    let cfg = NumericsConfig::default();
    let m0 = moment_3d(g.clone(), 0, (0.3, -0.4), 1.0, &cfg).unwrap();
    let m1 = moment_3d(g.clone(), 1, (0.3, -0.4), 1.0, &cfg).unwrap();
    let exact = 2.0 * PI * 10.0 * 2.25 * (-0.5 * 2.25 * 0.25f64).exp();
    assert!((m0.re - exact).abs() < 1e-12 * exact);
    assert!((m0 - m1 * 2.0).norm() < 1e-12 * exact);
    let zero = Arc::new(ZeroProfile3D) as Arc<dyn Profile3D>;
    assert_eq!(moment_3d(zero, 0, (1.0, 1.0), 1.0, &cfg).unwrap(), ZERO);
}

#[test]
fn numeric_3d_moment_matches_closed_form() {
    let g = GaussianSlab3D::new(c(2.0, 0.0), 1.0).unwrap();
    let generic = Arc::new(FnProfile3D::new("g", 10.0, move |x, y, z, k| g.eval(x, y, z, k)))
        as Arc<dyn Profile3D>;
    let cfg = numeric(10.0, 128);
    let table = MomentTable3D::new(generic, 1, 1.0, cfg).unwrap();
    let v = table.value_at(0.5, 0.2).unwrap();
    let exact = g.moment_transform(1, 0.5, 0.2, 1.0).unwrap();
    assert!((v - exact).norm() < 1e-9 * exact.norm());
}

#[test]
fn profile_spec_round_trip() {
    let spec: ProfileSpec = serde_json::from_str(
        r#"{"type":"ex1","params":{"z":[0.1,0.0],"alpha":0.5,"width":10.0}}"#,
    )
    .unwrap();
    let p = spec.build().unwrap();
    assert!(p.descriptor().contains("ex1"));
    let bad: ProfileSpec = serde_json::from_str(r#"{"type":"nope"}"#).unwrap();
    assert!(matches!(bad.build(), Err(Error::ProfileDefinition(_))));
    let sampled: ProfileSpec = serde_json::from_str(
        r#"{"type":"sampled","params":{"nx":2,"ny":2,"y_min":-1,"y_max":1,"re":[1,1,1,1]}}"#,
    )
    .unwrap();
    let s = sampled.build().unwrap();
    assert_eq!(s.w(0.5, 0.0, 1.0), c(1.0, 0.0));
    assert_eq!(s.w(0.5, 2.0, 1.0), ZERO);
    assert_eq!(s.w(1.5, 0.0, 1.0), ZERO);
}
