use lfscat_core::dyson1d::*;
use lfscat_core::{Complex64, Error};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[test]
fn generator_is_traceless_and_nilpotent() {
    let p = FnProfile1D::new("ramp", |x, _| Complex64::new(0.3 + x, -0.2 * x));
    for x in [0.0, 0.3, 0.9] {
        let m = h_check(&p, x, 1.7, 0.4);
        assert!(m.trace().norm() < 1e-15);
        assert!(m.det().norm() < 1e-15);
    }
    assert_eq!(h_check(&p, 1.5, 1.0, 1.0), TransferMatrix1D::zero());
}

#[test]
fn empty_slab_is_identity() {
    let p = ConstantProfile1D { w: ZERO };
    let m = transfer_matrix_1d(&p, 1.0, 1.0, &DysonSpec::default()).unwrap();
    assert_eq!(m, TransferMatrix1D::identity());
    let s = scattering_1d(&m).unwrap();
    assert_eq!((s.r_left, s.r_right, s.t), (ZERO, ZERO, ONE));
}

#[test]
fn series_matches_stepping_on_a_graded_slab() {
    let p = FnProfile1D::new("cubic", |x, _| Complex64::new(0.4 * x * x * x - x + 0.8, 0.1 * x));
    let series = transfer_matrix_1d(&p, 1.3, 0.7, &DysonSpec::default()).unwrap();
    let stepped = transfer_matrix_rk45(&p, 1.3, 0.7, 1e-13).unwrap();
    assert!((series - stepped).norm() < 1e-11 * stepped.norm());
}

#[test]
fn series_and_stepping_match_analytic_slab() {
    let n = Complex64::new(1.5, 0.0);
    let p = ConstantProfile1D::from_index(n);
    let exact = analytic_slab(n, 1.0, 0.1).unwrap();
    let series = transfer_matrix_1d(&p, 1.0, 0.1, &DysonSpec::default()).unwrap();
    let stepped = transfer_matrix_rk45(&p, 1.0, 0.1, 1e-13).unwrap();
    assert!((series - exact).norm() < 1e-12, "{:?} vs {:?}", series, exact);
    assert!((stepped - exact).norm() < 1e-10);
    assert!((exact.det() - 1.0).norm() < 1e-13);
}

#[test]
fn tiny_m22_is_reported() {
    let m = TransferMatrix1D::new(ONE, ONE, ONE, ZERO);
    assert!(matches!(scattering_1d(&m), Err(Error::Singular(_))));
}

#[test]
fn max_terms_exhausted() {
    let p = ConstantProfile1D { w: Complex64::new(3.0, 0.0) };
    let spec = DysonSpec { max_terms: 2, ..DysonSpec::default() };
    assert!(matches!(
        transfer_matrix_1d(&p, 1.0, 1.0, &spec),
        Err(Error::SeriesNoConvergence { terms: 2, .. })
    ));
}
