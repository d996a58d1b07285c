//! End-to-end acceptance checks. Each test prints one PASS/FAIL line with
//! the measured value before asserting.

use std::f64::consts::PI;
use std::sync::Arc;

use lfscat_cli::config::{Grid, Job, KernelsJob, ProfileRef, RandomSamples, RunConfig};
use lfscat_cli::run::{execute, Output, Row};
use lfscat_cli::presets;
use lfscat_core::amp2d::{c_factor, Amplitude2D, Order, ScatteringConfig2D};
use lfscat_core::amp3d::{gaussian_y, Amplitude3D, Direction3D, GaussianClosedForm, ScatteringConfig3D};
use lfscat_core::cloak::{coated_profile, verify_invisibility, BilayerGeometry, CoatingMaterials, SlabMomentPair};
use lfscat_core::dyson1d::{
    analytic_slab, dyson_series, scattering_1d, ConstantProfile1D, DysonSpec, FnProfile1D, Scattering1D,
};
use lfscat_core::exactborn::{exact_amplitude, x_function, BornExactProfile, Ex1Params};
use lfscat_core::numerics::{integrate_1d, NumericsConfig, QuadratureSpec, TransformSpec};
use lfscat_core::profiles::{GaussianSlab3D, Profile2D, Profile3D, SeparableProfile};
use lfscat_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn report(n: u32, ok: bool, detail: String) {
    println!("{} criterion {n}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n}: {detail}");
}

fn ex1() -> Ex1Params {
    Ex1Params::new(Complex64::new(0.1, 0.0), 0.5, 10.0).unwrap()
}

/// 36 angles at 10° spacing, offset by half a step so none is ±π/2.
fn angle_grid() -> Vec<f64> {
    (0..36).map(|i| (f64::from(i) + 0.5) * PI / 18.0).collect()
}

fn max_coefficients(profile: Arc<dyn Profile2D>, k: f64, numerics: NumericsConfig) -> (f64, f64) {
    angle_grid()
        .par_iter()
        .map(|&theta0| {
            let cfg = ScatteringConfig2D::new(k, 1.0, theta0).unwrap();
            let amp = Amplitude2D::new(profile.clone(), cfg, numerics).unwrap();
            angle_grid().iter().fold((0.0f64, 0.0f64), |w, &theta| {
                (w.0.max(amp.f1(theta).unwrap().norm()), w.1.max(amp.f2(theta).unwrap().norm()))
            })
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)))
}

#[test]
fn criterion_1_invisibility() {
    let p = ex1();
    let k = 0.4 * p.alpha;
    let analytic: Arc<dyn Profile2D> = Arc::new(p.profile().unwrap());
    let (a1, a2) = max_coefficients(analytic, k, NumericsConfig::default());
    let numeric: Arc<dyn Profile2D> = Arc::new(p.profile().unwrap().with_decay_radius(4e4 * p.width));
    let numerics = NumericsConfig {
        transform: TransformSpec::numeric(4e4 * p.width, 1 << 19),
        ..NumericsConfig::default()
    };
    let (n1, n2) = max_coefficients(numeric, k, numerics);
    let ok = a1 == 0.0 && a2 == 0.0 && n1 < 1e-10 && n2 < 1e-10;
    report(
        1,
        ok,
        format!("analytic max|f1|={a1:e} max|f2|={a2:e}; numeric max|f1|={n1:.3e} max|f2|={n2:.3e} (limit 1e-10)"),
    );
}

#[test]
fn criterion_2_second_order_identity() {
    let p = ex1();
    let profile: Arc<dyn Profile2D> = Arc::new(p.profile().unwrap());
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for k in [0.3, 0.4, 0.5] {
        for theta0 in angle_grid() {
            let cfg = ScatteringConfig2D::new(k, 1.0, theta0).unwrap();
            let amp = Amplitude2D::new(profile.clone(), cfg, NumericsConfig::default()).unwrap();
            for theta in angle_grid() {
                let f1 = amp.f1(theta).unwrap();
                let f2 = amp.f2(theta).unwrap();
                let r = f2 + Complex64::new(0.0, 0.5) * c_factor(theta, theta0) * f1;
                worst = worst.max(r.norm());
                scale = scale.max(f1.norm());
            }
        }
    }
    let ok = scale > 0.0 && worst < 1e-12 * scale;
    report(2, ok, format!("max residual {worst:.3e} vs 1e-12*max|f1| = {:.3e}", 1e-12 * scale));
}

/// Richardson extrapolation to `h → 0` of values on `h₀ 2^{-j}` whose error
/// expands in integer powers of `h`.
fn richardson(values: &[Complex64]) -> Complex64 {
    let mut table = values.to_vec();
    for m in 1..values.len() {
        let f = 2f64.powi(m as i32);
        for j in (m..values.len()).rev() {
            table[j] = (table[j] * f - table[j - 1]) / (f - 1.0);
        }
    }
    table[values.len() - 1]
}

#[test]
fn criterion_3_convergence_order() {
    let p = ex1();
    let born = BornExactProfile::ex1(&p).unwrap();
    let profile: Arc<dyn Profile2D> = Arc::new(p.profile().unwrap());
    let numerics = NumericsConfig::default().with_rel_tol(1e-13);
    let (k, theta0, theta) = (0.5, 4.0 * PI / 3.0, PI / 3.0);
    let exact = |kl: f64| {
        let cfg = ScatteringConfig2D::new(k, kl / k, theta0).unwrap();
        exact_amplitude(&born, &cfg, theta, &numerics).unwrap()
    };
    let cfg = ScatteringConfig2D::new(k, 1.0, theta0).unwrap();
    let amp = Amplitude2D::new(profile, cfg, numerics).unwrap();
    let (f1, f2) = (amp.f1(theta).unwrap(), amp.f2(theta).unwrap());

    let n = 12;
    let (lo, hi) = (0.02f64, 0.3f64);
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let kl = lo * (hi / lo).powf(f64::from(i) / f64::from(n - 1));
            let err = (exact(kl) - f1 * kl - f2 * kl * kl).norm();
            (kl.ln(), err.ln())
        })
        .collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / f64::from(n);
    let my = pts.iter().map(|p| p.1).sum::<f64>() / f64::from(n);
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();

    let hs: Vec<f64> = (0..6).map(|j| 0.04 / 2f64.powi(j)).collect();
    let g: Vec<Complex64> = hs.iter().map(|&h| exact(h) / h).collect();
    let r1 = richardson(&g);
    let g2: Vec<Complex64> = hs.iter().zip(&g).map(|(&h, &v)| (v - r1) / h).collect();
    let r2 = richardson(&g2[..5]);
    let e1 = (r1 - f1).norm() / f1.norm();
    let e2 = (r2 - f2).norm() / f2.norm();

    let ok = (2.8..=3.2).contains(&slope) && e1 < 1e-5 && e2 < 1e-5;
    report(3, ok, format!("slope {slope:.4}; Richardson rel errors f1 {e1:.2e}, f2 {e2:.2e} (limit 1e-5)"));
}

#[test]
fn criterion_4_kernel_cross_path() {
    let job = KernelsJob {
        profile: ProfileRef::Named("gaussian-y".into()),
        ell: 1.0,
        samples: Vec::new(),
        random: Some(RandomSamples {
            count: 20,
            seed: 4,
            k_range: [0.1, 1.5],
        }),
        nodes: 201,
        refine_nodes: Some(401),
        truncation: 2,
    };
    let config = RunConfig {
        name: None,
        job: Job::KernelsCheck(job),
        numerics: NumericsConfig::default().with_rel_tol(1e-11),
        output: Default::default(),
        threads: None,
        base_dir: None,
    };
    let out = execute(&config).unwrap();
    let value = |r: &Row| Complex64::new(r.re, r.im);
    let (mut cross, mut refine) = (0.0f64, 0.0f64);
    for chunk in out.rows.chunks(3) {
        let (kern, amp, fine) = (value(&chunk[0]), value(&chunk[1]), value(&chunk[2]));
        cross = cross.max((kern - amp).norm() / amp.norm());
        refine = refine.max((fine - kern).norm() / kern.norm());
    }
    let ok = out.rows.len() == 60 && cross < 1e-6 && refine < 1e-7;
    report(4, ok, format!("max rel kernels vs amp2d {cross:.2e} (1e-6); 201->401 change {refine:.2e} (1e-7)"));
}

fn x_oracle(s: f64, s0: f64, xi: f64) -> f64 {
    let (lo, hi) = (s0 + xi, s - xi);
    if lo >= hi || lo >= 1.0 || hi <= -1.0 {
        return 0.0;
    }
    let (a, b) = (lo.max(-1.0).asin(), hi.min(1.0).asin());
    let q = QuadratureSpec::new(1e-13, 1e-15, 2000).unwrap();
    integrate_1d(|phi| Complex64::new((xi - s + phi.sin()) * (xi + s0 - phi.sin()), 0.0), a, b, &q)
        .unwrap()
        .re
}

#[test]
fn criterion_5_x_function() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut nonzero_above_one = 0;
    for _ in 0..500 {
        let (s, s0) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if x_function(s, s0, rng.gen_range(1.0..4.0)) != 0.0 {
            nonzero_above_one += 1;
        }
    }
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < 50 {
        let (s, s0, xi) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.0));
        let oracle = x_oracle(s, s0, xi);
        if oracle == 0.0 {
            continue;
        }
        worst = worst.max((x_function(s, s0, xi) - oracle).abs() / oracle.abs());
        checked += 1;
    }
    let ok = nonzero_above_one == 0 && worst < 1e-6;
    report(5, ok, format!("{nonzero_above_one} nonzero values for xi >= 1; max rel vs phi-integral {worst:.2e}"));
}

#[test]
fn criterion_6_cloak_nulling() {
    let z0 = 0.5;
    let k = 0.1;
    let bare: Arc<dyn Profile2D> = Arc::new(SeparableProfile::gaussian_slab(z0, 2.0).unwrap());
    let materials = CoatingMaterials::new(-z0, 0.4 * z0).unwrap();
    let moments = SlabMomentPair::from_profile(bare.clone(), k, QuadratureSpec::default());
    let y: Vec<f64> = (-40..=40).map(|i| f64::from(i) * 0.2).collect();
    let geometry = BilayerGeometry::design(&moments, materials, 1.0, k, &y).unwrap();
    let centre = geometry.samples.iter().find(|s| s.y == 0.0).unwrap();
    let ratio_err = (centre.ell2 - (25.0f64 / 7.0).sqrt()).abs();
    let coated = coated_profile(bare, &geometry, moments, None).unwrap();
    let thetas: Vec<f64> = (0..12).map(|i| (f64::from(i) + 0.5) * PI / 6.0 - PI).collect();
    let (mut residual, mut amp_ratio) = (0.0f64, 0.0f64);
    for &theta0 in &thetas {
        let r = verify_invisibility(&coated, k, theta0, &y, &thetas, &NumericsConfig::default()).unwrap();
        residual = residual.max(r.residual_m0).max(r.residual_m1);
        amp_ratio = amp_ratio.max(r.amplitude_ratio());
    }
    let ok = ratio_err < 1e-12 && residual < 1e-12 && amp_ratio < 1e-8;
    report(
        6,
        ok,
        format!("|l2(0)/l - sqrt(25/7)| {ratio_err:.1e}; residual moments {residual:.1e}; coated/bare {amp_ratio:.1e}"),
    );
}

fn random_polar(rng: &mut ChaCha8Rng) -> f64 {
    if rng.gen_bool(0.5) {
        rng.gen_range(0.0..1.4)
    } else {
        rng.gen_range(1.75..PI)
    }
}

#[test]
fn criterion_7_gaussian_3d_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let numerics = NumericsConfig::default().with_rel_tol(1e-10);
    let (mut e1, mut e2) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let width = 1.0;
        let kk = rng.gen_range(0.05..2.0);
        let cfg = ScatteringConfig3D::new(kk / width, 0.1, random_polar(&mut rng), rng.gen_range(0.0..2.0 * PI)).unwrap();
        let dir = Direction3D::new(random_polar(&mut rng), rng.gen_range(0.0..2.0 * PI)).unwrap();
        let slab: Arc<dyn Profile3D> = Arc::new(GaussianSlab3D::new(Complex64::new(1.5, 0.0), width).unwrap());
        let generic = Amplitude3D::new(slab, cfg, numerics).unwrap();
        let closed = GaussianClosedForm::new(1.5, width, cfg).unwrap();
        let (a1, b1) = (generic.f1(dir).unwrap(), closed.f1(dir).unwrap());
        let (a2, b2) = (generic.f2(dir).unwrap(), closed.f2(dir, &numerics.quadrature).unwrap());
        e1 = e1.max((a1 - b1).norm() / b1.norm());
        e2 = e2.max((a2 - b2).norm() / b2.norm());
    }
    let y0 = gaussian_y(0.7, 1.1, 0.3, 0.2, 0.0, &QuadratureSpec::default()).unwrap();
    let cfg = ScatteringConfig3D::new(0.2, 1.0, 0.0, 0.0).unwrap();
    let fwd = GaussianClosedForm::new(10.0, 5.0, cfg)
        .unwrap()
        .normalized_cross_section(Direction3D::forward(), Order::Second, &QuadratureSpec::default())
        .unwrap();
    let ok = e1 < 1e-6 && e2 < 1e-6 && (y0 - 1.0).abs() < 1e-10 && fwd == 1.0;
    report(7, ok, format!("max rel f1 {e1:.1e}, f2 {e2:.1e}; Y(K=0)-1 = {:.1e}; forward sigma_hat = {fwd}", y0 - 1.0));
}

fn random_profile_1d(rng: &mut ChaCha8Rng) -> FnProfile1D {
    let modes: Vec<(Complex64, f64, f64)> = (0..4)
        .map(|m| {
            (
                Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)),
                f64::from(m) * PI,
                rng.gen_range(0.0..2.0 * PI),
            )
        })
        .collect();
    FnProfile1D::new("random", move |x, _| modes.iter().map(|&(a, f, ph)| a * (f * x + ph).cos()).sum())
}

#[test]
fn criterion_8_dyson_series() {
    let n = Complex64::new(1.5, 0.0);
    let exact = scattering_1d(&analytic_slab(n, 1.0, 0.1).unwrap()).unwrap();
    let spec = DysonSpec {
        max_terms: 20,
        tol: 0.0,
        ..DysonSpec::default()
    };
    let series = dyson_series(&ConstantProfile1D::from_index(n), 1.0, 0.1, &spec).unwrap();
    let Scattering1D { r_left, r_right, t } = scattering_1d(&series.matrix).unwrap();
    let rel = |a: Complex64, b: Complex64| (a - b).norm() / b.norm();
    let err = rel(r_left, exact.r_left).max(rel(r_right, exact.r_right)).max(rel(t, exact.t));

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut det_err = 0.0f64;
    for _ in 0..50 {
        let p = random_profile_1d(&mut rng);
        let kl = rng.gen_range(0.05..1.0);
        let m = dyson_series(&p, kl, 1.0, &DysonSpec::default()).unwrap().matrix;
        det_err = det_err.max((m.det() - 1.0).norm());
    }
    let ok = err < 1e-8 && det_err < 1e-10;
    report(8, ok, format!("20-term max rel error {err:.1e} (1e-8); max |det M - 1| {det_err:.1e} (1e-10)"));
}

fn preset(name: &str) -> Output {
    execute(&presets::load(name).unwrap()).unwrap()
}

fn complex(r: &Row) -> Complex64 {
    Complex64::new(r.re, r.im)
}

/// Fraction of `∫σ̂ dϑ` within π/6 of the forward or backward direction.
fn concentration(rows: &[&Row]) -> f64 {
    let total: f64 = rows.iter().map(|r| r.abs2).sum();
    let near: f64 = rows
        .iter()
        .filter(|r| r.sweep_var < PI / 6.0 || r.sweep_var > 5.0 * PI / 6.0)
        .map(|r| r.abs2)
        .sum();
    near / total
}

#[test]
fn criterion_9_preset_curve_properties() {
    let mut failures = Vec::new();
    let mut lines = Vec::new();

    // Re 𝔣 and Im 𝔣 are separate curves, each judged on its own scale.
    let fig3 = preset("fig3");
    let exact: Vec<&Row> = fig3.rows.iter().filter(|r| r.method == "exact" && r.sweep_var <= 0.5).collect();
    let mut gaps = Vec::new();
    for part in [|c: Complex64| c.re, |c: Complex64| c.im] {
        let scale = exact.iter().map(|r| part(complex(r)).abs()).fold(0.0, f64::max);
        let gap = exact
            .iter()
            .map(|e| {
                let o2 = fig3
                    .rows
                    .iter()
                    .find(|r| r.sweep_var == e.sweep_var && r.order == Some(2))
                    .unwrap();
                (part(complex(o2)) - part(complex(e))).abs()
            })
            .fold(0.0, f64::max);
        gaps.push(gap / scale);
    }
    lines.push(format!("fig3 gap Re {:.2}% Im {:.2}% of curve scale", 100.0 * gaps[0], 100.0 * gaps[1]));
    if !gaps.iter().all(|g| *g < 0.01) {
        failures.push("fig3");
    }

    let fig6 = preset("fig6");
    let mut worst6 = 0.0f64;
    for theta in [0.0, PI] {
        let series = format!("theta={theta}");
        for r1 in fig6
            .rows
            .iter()
            .filter(|r| r.order == Some(1) && r.sweep_var <= 0.2 && r.series.contains(&series))
        {
            let r2 = fig6
                .rows
                .iter()
                .find(|r| r.order == Some(2) && r.sweep_var == r1.sweep_var && r.series == r1.series)
                .unwrap();
            worst6 = worst6.max((r2.abs2 - r1.abs2).abs() / r2.abs2);
        }
    }
    lines.push(format!("fig6 order1/order2 sigma gap {:.2}%", 100.0 * worst6));
    if !(worst6 <= 0.02) {
        failures.push("fig6");
    }

    let fig7 = preset("fig7");
    let first = fig7.rows.first().unwrap();
    let last = fig7.rows.last().unwrap();
    lines.push(format!("fig7 forward {:.3} backward {:.3}", first.abs2, last.abs2));
    if !(last.abs2 > first.abs2) {
        failures.push("fig7");
    }

    let fig8 = preset("fig8");
    let mut series: Vec<String> = Vec::new();
    for r in &fig8.rows {
        if !series.contains(&r.series) {
            series.push(r.series.clone());
        }
    }
    let conc: Vec<f64> = series
        .iter()
        .map(|s| concentration(&fig8.rows.iter().filter(|r| &r.series == s).collect::<Vec<_>>()))
        .collect();
    let lobes = series.iter().all(|s| {
        let rows: Vec<&Row> = fig8.rows.iter().filter(|r| &r.series == s).collect();
        rows.last().unwrap().abs2 > rows.first().unwrap().abs2
    });
    lines.push(format!("fig8 concentration by kL {conc:.3?}, backward > forward: {lobes}"));
    if !(lobes && conc.windows(2).all(|w| w[1] > w[0])) {
        failures.push("fig8");
    }

    let detail = format!("{}; failing: {failures:?}", lines.join("; "));
    report(9, failures.is_empty(), detail);
}

#[test]
fn fig8_grid_avoids_the_slab_plane() {
    let cfg = presets::load("fig8").unwrap();
    let Job::Amp3d(j) = cfg.job else { panic!("fig8 is an amp3d preset") };
    assert!(matches!(j.theta, Grid::Linspace { .. }));
    assert!(j.theta.points().iter().all(|t| t.cos().abs() > 1e-3));
}
