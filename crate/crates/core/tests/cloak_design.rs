use std::f64::consts::PI;
use std::sync::Arc;

use lfscat_core::cloak::{
    coated_profile, design_bilayer_at, design_profiled, verify_invisibility, BilayerGeometry, CoatingMaterials,
    SlabMomentPair,
};
use lfscat_core::numerics::{NumericsConfig, QuadratureSpec};
use lfscat_core::profiles::{FnProfile, Profile2D, SeparableProfile};
use lfscat_core::{Complex64, Error};

const Z0: f64 = 0.5;

fn slab() -> Arc<dyn Profile2D> {
    Arc::new(SeparableProfile::gaussian_slab(Z0, 2.0).unwrap())
}

fn materials() -> CoatingMaterials {
    CoatingMaterials::new(-Z0, 0.4 * Z0).unwrap()
}

fn y_grid() -> Vec<f64> {
    (-40..=40).map(|i| f64::from(i) * 0.25).collect()
}

fn geometry() -> (BilayerGeometry, SlabMomentPair) {
    let moments = SlabMomentPair::from_profile(slab(), 0.1, QuadratureSpec::default());
    (BilayerGeometry::design(&moments, materials(), 1.0, 0.1, &y_grid()).unwrap(), moments)
}

#[test]
fn centre_thicknesses() {
    let (geo, _) = geometry();
    let centre = geo.samples.iter().find(|s| s.y == 0.0).unwrap();
    let r = (25.0f64 / 7.0).sqrt();
    assert!((centre.ell2 - r).abs() < 1e-12);
    assert!((centre.ell1 - (1.0 + 0.4 * r)).abs() < 1e-12);
    assert!(geo.feasible);
    assert!((geo.ell_c - (2.0 + 1.4 * r)).abs() < 1e-12);
    // kℓ_c ≈ 0.46 at k = 0.1 trips the low-frequency warning.
    assert!(geo.warning.is_some());
}

#[test]
fn thicknesses_decrease_away_from_centre() {
    let (geo, _) = geometry();
    let right: Vec<_> = geo.samples.iter().filter(|s| s.y >= 0.0).collect();
    for w in right.windows(2) {
        assert!(w[1].ell1 <= w[0].ell1 && w[1].ell2 <= w[0].ell2);
    }
}

#[test]
fn profiled_and_general_designs_agree() {
    let moments = SlabMomentPair::from_profile(slab(), 0.1, QuadratureSpec::default());
    for y in y_grid() {
        let g = (-y * y / 8.0).exp();
        let a = design_profiled(g, Z0, &materials(), 1.0).unwrap();
        let b = design_bilayer_at(&moments, &materials(), 1.0, y).unwrap();
        assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
    }
}

#[test]
fn coated_slab_is_invisible_to_second_order() {
    let (geo, moments) = geometry();
    let coated = coated_profile(slab(), &geo, moments, None).unwrap();
    let thetas: Vec<f64> = (0..12).map(|i| (f64::from(i) + 0.5) * PI / 6.0).collect();
    let report = verify_invisibility(&coated, 0.1, 0.3, &y_grid(), &thetas, &NumericsConfig::default()).unwrap();
    assert!(report.residual_m0 < 1e-12 * geo.ell_c * report.max_abs_w);
    assert!(report.residual_m1 < 1e-12 * geo.ell_c * report.max_abs_w);
    assert!(report.amplitude_ratio() < 1e-8, "{report:?}");
}

#[test]
fn thin_coating_leaves_bare_moments() {
    let (mut geo, moments) = geometry();
    assert!(matches!(coated_profile(slab(), &geo, moments.clone(), Some(1.5)), Err(Error::Extent { .. })));
    // A coating with no layers: the residual is the bare moment.
    let zero = SlabMomentPair::new(|_| Ok((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))));
    for s in &mut geo.samples {
        s.ell1 = 0.0;
        s.ell2 = 0.0;
    }
    geo.ell_c = 1.0;
    let coated = coated_profile(slab(), &geo, zero, None).unwrap();
    let report = verify_invisibility(&coated, 0.1, 0.3, &[0.0, 1.0], &[0.2], &NumericsConfig::default()).unwrap();
    assert!((report.residual_m0 - report.bare_m0).abs() < 1e-14);
    assert!((report.residual_m1 - report.bare_m1).abs() < 1e-14);
}

#[test]
fn design_is_per_wavenumber() {
    // w̄₀ grows with k, so a cloak designed at k = 0.1 leaves residue at k = 0.2.
    let bare: Arc<dyn Profile2D> = Arc::new(FnProfile::new("dispersive", 20.0, |_, y, k| {
        Complex64::new(Z0 * (1.0 + k) * (-y * y / 8.0).exp(), 0.0)
    }));
    let moments = SlabMomentPair::from_profile(bare.clone(), 0.1, QuadratureSpec::default());
    let geo = BilayerGeometry::design(&moments, materials(), 1.0, 0.1, &y_grid()).unwrap();
    let coated = coated_profile(bare, &geo, moments, None).unwrap();
    let n = NumericsConfig::default();
    let at = verify_invisibility(&coated, 0.1, 0.3, &[0.0], &[], &n).unwrap();
    let off = verify_invisibility(&coated, 0.2, 0.3, &[0.0], &[], &n).unwrap();
    assert!(at.residual_m0 < 1e-13);
    assert!(off.residual_m0 > 1e-3);
}

#[test]
fn exports() {
    let (geo, _) = geometry();
    let csv = geo.to_csv();
    assert_eq!(csv.lines().count(), y_grid().len() + 1);
    let header = geo.header_json();
    assert_eq!(header["materials"]["z1"], -Z0);
    assert!(header["ell_c"].as_f64().unwrap() > 1.0);
}
