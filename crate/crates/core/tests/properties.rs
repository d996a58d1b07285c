use std::f64::consts::PI;
use std::sync::Arc;

use lfscat_core::amp2d::{Amplitude2D, ScatteringConfig2D};
use lfscat_core::amp3d::{gaussian_h, g_vector};
use lfscat_core::dyson1d::{h_check, ConstantProfile1D};
use lfscat_core::kernels::{varpi, KernelOracle};
use lfscat_core::numerics::{sinc, sinc_series, NumericsConfig};
use lfscat_core::profiles::{Profile2D, SeparableProfile};
use lfscat_core::Complex64;
use proptest::prelude::*;

fn angle() -> impl Strategy<Value = f64> {
    prop_oneof![-1.4f64..1.4, 1.75f64..4.5]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn amplitude_scales_linearly_and_bilinearly(
        re in -1.0f64..1.0, im in -1.0f64..1.0, theta0 in angle(), theta in angle(), k in 0.2f64..2.0,
    ) {
        let c = Complex64::new(re, im);
        let base = SeparableProfile::gaussian_slab(0.4, 0.9).unwrap();
        let scaled: Arc<dyn Profile2D> = Arc::new(base.scaled(c));
        let base: Arc<dyn Profile2D> = Arc::new(base);
        let cfg = ScatteringConfig2D::new(k, 0.1, theta0).unwrap();
        let n = NumericsConfig::default();
        let a = Amplitude2D::new(base, cfg, n).unwrap();
        let b = Amplitude2D::new(scaled, cfg, n).unwrap();
        let (fa, fb) = (a.f1(theta).unwrap(), b.f1(theta).unwrap());
        prop_assert!((fb - fa * c).norm() <= 1e-13 * (1.0 + fa.norm()));
        let (la, qa) = a.f2_terms(theta).unwrap();
        let (lb, qb) = b.f2_terms(theta).unwrap();
        prop_assert!((lb - la * c).norm() <= 1e-12 * (1.0 + la.norm()));
        prop_assert!((qb - qa * c * c).norm() <= 1e-7 * (1e-12 + qa.norm()));
    }

    #[test]
    fn kernel_index_symmetries(p in -0.99f64..0.99, pp in -0.99f64..0.99) {
        let o = KernelOracle::new(Arc::new(SeparableProfile::gaussian_slab(0.3, 1.1).unwrap()), 1.0, NumericsConfig::default()).unwrap();
        prop_assert_eq!(o.kernel_n1(1, 1, p, pp).unwrap(), o.kernel_n1(1, 2, p, pp).unwrap());
        prop_assert_eq!(o.kernel_n1(2, 1, p, pp).unwrap(), o.kernel_n1(2, 2, p, pp).unwrap());
        prop_assert_eq!(o.kernel_n2(1, 2, p, pp).unwrap(), o.kernel_n2(2, 1, p, pp).unwrap());
        prop_assert_eq!(o.kernel_n2(1, 1, p, pp).unwrap(), o.kernel_n2(2, 2, p, pp).unwrap());
    }

    #[test]
    fn varpi_squares_to_k2_minus_p2(p in -5.0f64..5.0, k in 0.1f64..3.0) {
        let v = varpi(p, k);
        prop_assert!((v * v - (k * k - p * p)).norm() < 1e-12 * (1.0 + p * p));
    }

    #[test]
    fn h_check_is_nilpotent(re in -3.0f64..3.0, im in -3.0f64..3.0, x in 0.0f64..1.0, kl in 0.01f64..2.0) {
        let m = h_check(&ConstantProfile1D { w: Complex64::new(re, im) }, x, 1.0, kl);
        prop_assert!(m.trace().norm() < 1e-14);
        prop_assert!(m.det().norm() < 1e-13 * (1.0 + re * re + im * im));
    }

    #[test]
    fn h_bounded_below(t in 0.0f64..PI, p in 0.0f64..(2.0 * PI), t0 in 0.0f64..PI) {
        let h = gaussian_h(t, p, t0);
        prop_assert!(h >= -2.0 - 1e-14 && h <= 1e-14);
        let (gx, gy) = g_vector(t, p, t, p);
        prop_assert!(gx == 0.0 && gy == 0.0);
    }

    #[test]
    fn sinc_branches_agree(x in -1e-3f64..1e-3) {
        prop_assert!((sinc(x) - sinc_series(x)).abs() < 1e-15);
    }
}
