//! Executes a validated [`RunConfig`].

use std::f64::consts::PI;
use std::sync::Arc;

use lfscat_core::amp2d::{Amplitude2D, Order, ScatteringConfig2D};
use lfscat_core::amp3d::{Amplitude3D, Direction3D, GaussianClosedForm, ScatteringConfig3D};
use lfscat_core::cloak::{
    coated_profile, verify_invisibility, BilayerGeometry, CoatingMaterials, InvisibilityReport, SlabMomentPair,
};
use lfscat_core::dyson1d::{
    analytic_slab, scattering_1d, transfer_matrix_1d, transfer_matrix_rk45, ConstantProfile1D, DysonSpec,
    Scattering1D,
};
use lfscat_core::exactborn::{exact_amplitude, BornExactProfile, SupportCheck};
use lfscat_core::kernels::amplitude_from_kernels;
use lfscat_core::numerics::NumericsConfig;
use lfscat_core::profiles::{GaussianSlab3D, Profile2D, ProfileSpec, Profile3D};
use lfscat_core::{Complex64, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{
    Amp2dJob, Amp3dJob, CloakJob, Dyson1dJob, Exact2dJob, Job, KernelSample, KernelsJob, Method1D, Method3D,
    RunConfig, Slab1D, Sweep3D, SweepJob,
};
use crate::CliError;

/// One output row: a complex value at one grid point for one method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub sweep_var: f64,
    pub series: String,
    pub re: f64,
    pub im: f64,
    pub abs2: f64,
    pub order: Option<u8>,
    pub method: String,
}

impl Row {
    fn new(sweep_var: f64, series: impl Into<String>, value: Complex64, order: Option<u8>, method: &str) -> Self {
        Self {
            sweep_var,
            series: series.into(),
            re: value.re,
            im: value.im,
            abs2: value.norm_sqr(),
            order,
            method: method.into(),
        }
    }
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Output {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub rows: Vec<Row>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cloak: Option<CloakOutput>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CloakOutput {
    pub geometry: BilayerGeometry,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<InvisibilityReport>,
}

fn order_of(o: u8) -> Result<Order, CliError> {
    Order::try_from(o).map_err(CliError::from)
}

fn build_profile(config: &RunConfig, r: &crate::config::ProfileRef) -> Result<(ProfileSpec, Arc<dyn Profile2D>), CliError> {
    let spec = r
        .resolve(config.base_dir.as_deref())
        .map_err(|e| CliError::Validation(vec![e]))?;
    let profile = spec.build()?;
    Ok((spec, profile))
}

/// Runs the configured job on the current rayon pool.
pub fn execute(config: &RunConfig) -> Result<Output, CliError> {
    let errors = config.validate();
    if !errors.is_empty() {
        return Err(CliError::Validation(errors));
    }
    let numerics = config.numerics;
    let mut cloak = None;
    let rows = match &config.job {
        Job::Amp2d(j) => amp2d(config, j, &numerics)?,
        Job::Sweep(j) => sweep(config, j, &numerics)?,
        Job::Exact2d(j) => exact2d(config, j, &numerics)?,
        Job::Amp3d(j) => amp3d(j, &numerics)?,
        Job::KernelsCheck(j) => kernels_check(config, j, &numerics)?,
        Job::Cloak(j) => {
            cloak = Some(run_cloak(config, j, &numerics)?);
            Vec::new()
        }
        Job::Dyson1d(j) => dyson1d(j)?,
    };
    Ok(Output {
        command: config.job.name().into(),
        name: config.name.clone(),
        rows,
        cloak,
    })
}

fn collect<T: Send>(items: Vec<Result<Vec<T>, CliError>>) -> Result<Vec<T>, CliError> {
    let mut out = Vec::new();
    for item in items {
        out.extend(item?);
    }
    Ok(out)
}

fn amp2d(config: &RunConfig, j: &Amp2dJob, numerics: &NumericsConfig) -> Result<Vec<Row>, CliError> {
    let (_, profile) = build_profile(config, &j.profile)?;
    let cfg = ScatteringConfig2D::new(j.k, j.ell, j.theta0)?;
    let amp = Amplitude2D::new(profile, cfg, *numerics)?;
    let orders = j.orders.iter().map(|&o| order_of(o)).collect::<Result<Vec<_>, _>>()?;
    let results: Vec<_> = j
        .theta
        .points()
        .par_iter()
        .map(|&theta| {
            orders
                .iter()
                .map(|&o| {
                    let r = amp.amplitude(theta, o)?;
                    Ok(Row::new(theta, "f", r.truncated, Some(o.as_u8()), "amp2d"))
                })
                .collect::<Result<Vec<_>, CliError>>()
        })
        .collect();
    collect(results)
}

fn alpha_for(spec: &ProfileSpec, alpha: Option<f64>) -> Option<f64> {
    alpha.or_else(|| {
        (spec.kind == "ex1")
            .then(|| spec.params.get("alpha").and_then(serde_json::Value::as_f64))
            .flatten()
    })
}

fn sweep(config: &RunConfig, j: &SweepJob, numerics: &NumericsConfig) -> Result<Vec<Row>, CliError> {
    let (spec, profile) = build_profile(config, &j.profile)?;
    let orders = j.orders.iter().map(|&o| order_of(o)).collect::<Result<Vec<_>, _>>()?;
    let born = if j.exact {
        let alpha = alpha_for(&spec, j.alpha)
            .ok_or_else(|| CliError::Validation(vec!["exact: alpha unknown".into()]))?;
        Some(BornExactProfile::new(profile.clone(), alpha, alpha, &SupportCheck::for_alpha(alpha))?)
    } else {
        None
    };
    let label = format!("f(theta={})", j.theta);
    let results: Vec<_> = j
        .k_ell
        .points()
        .par_iter()
        .map(|&kl| {
            let cfg = ScatteringConfig2D::new(kl / j.ell, j.ell, j.theta0)?;
            let amp = Amplitude2D::new(profile.clone(), cfg, *numerics)?;
            let mut rows = Vec::new();
            for &o in &orders {
                let r = amp.amplitude(j.theta, o)?;
                rows.push(Row::new(kl, label.clone(), r.truncated, Some(o.as_u8()), "amp2d"));
            }
            if let Some(b) = &born {
                if cfg.k <= b.alpha() {
                    let f = exact_amplitude(b, &cfg, j.theta, numerics)?;
                    rows.push(Row::new(kl, label.clone(), f, None, "exact"));
                }
            }
            Ok(rows)
        })
        .collect();
    collect(results)
}

fn exact2d(config: &RunConfig, j: &Exact2dJob, numerics: &NumericsConfig) -> Result<Vec<Row>, CliError> {
    let (spec, profile) = build_profile(config, &j.profile)?;
    let alpha = alpha_for(&spec, j.alpha).ok_or_else(|| CliError::Validation(vec!["alpha unknown".into()]))?;
    let born = BornExactProfile::new(profile, alpha, j.k, &SupportCheck::for_alpha(alpha))?;
    let cfg = ScatteringConfig2D::new(j.k, j.ell, j.theta0)?;
    let results: Vec<_> = j
        .theta
        .points()
        .par_iter()
        .map(|&theta| {
            let f = exact_amplitude(&born, &cfg, theta, numerics)?;
            Ok(vec![Row::new(theta, "f", f, None, "exact")])
        })
        .collect();
    collect(results)
}

fn fmt_label(name: &str, v: f64) -> String {
    format!("{name}={v}")
}

fn amp3d(j: &Amp3dJob, numerics: &NumericsConfig) -> Result<Vec<Row>, CliError> {
    let orders = j.orders.iter().map(|&o| order_of(o)).collect::<Result<Vec<_>, _>>()?;
    let mut points = Vec::new();
    for width in j.width.points() {
        for kl in j.k_ell.points() {
            for theta in j.theta.points() {
                points.push((width, kl, theta));
            }
        }
    }
    let method = match j.method {
        Method3D::ClosedForm => "closed-form",
        Method3D::Generic => "amp3d",
    };
    let results: Vec<_> = points
        .par_iter()
        .map(|&(width, kl, theta)| {
            let k = kl / j.ell;
            let cfg = ScatteringConfig3D::new(k, j.ell, j.theta0, j.phi0)?;
            let dir = Direction3D::new(theta, j.phi)?;
            let (sweep_var, series) = match j.sweep {
                Sweep3D::KEll => (kl, format!("{},{}", fmt_label("kL", k * width), fmt_label("theta", theta))),
                Sweep3D::Theta => (theta, format!("{},{}", fmt_label("kL", k * width), fmt_label("k_ell", kl))),
            };
            let mut rows = Vec::new();
            for &o in &orders {
                let (f, forward) = match j.method {
                    Method3D::ClosedForm => {
                        let c = GaussianClosedForm::new(j.z, width, cfg)?;
                        let f = c.amplitude(dir, o, &numerics.quadrature)?.truncated;
                        let fwd = if j.normalized {
                            Some(c.amplitude(Direction3D::forward(), o, &numerics.quadrature)?.truncated)
                        } else {
                            None
                        };
                        (f, fwd)
                    }
                    Method3D::Generic => {
                        let slab: Arc<dyn Profile3D> = Arc::new(GaussianSlab3D::new(Complex64::new(j.z, 0.0), width)?);
                        let a = Amplitude3D::new(slab, cfg, *numerics)?;
                        let f = a.amplitude(dir, o)?.truncated;
                        let fwd = if j.normalized {
                            Some(a.amplitude(Direction3D::forward(), o)?.truncated)
                        } else {
                            None
                        };
                        (f, fwd)
                    }
                };
                let value = match forward {
                    Some(fwd) => {
                        if fwd.norm() == 0.0 {
                            return Err(CliError::from(Error::DivisionByZero("forward amplitude is zero".into())));
                        }
                        f / fwd.norm()
                    }
                    None => f,
                };
                let name = if j.normalized { "f_hat" } else { "f" };
                rows.push(Row::new(sweep_var, format!("{name}({series})"), value, Some(o.as_u8()), method));
            }
            Ok(rows)
        })
        .collect();
    collect(results)
}

/// The explicit samples followed by the seeded random ones.
pub fn kernel_samples(j: &KernelsJob) -> Vec<KernelSample> {
    let mut samples = j.samples.clone();
    if let Some(r) = &j.random {
        let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
        let angle = |rng: &mut ChaCha8Rng| loop {
            let t: f64 = rng.gen_range(-PI..PI);
            if t.cos().abs() > 0.05 {
                return t;
            }
        };
        for _ in 0..r.count {
            let k = rng.gen_range(r.k_range[0]..r.k_range[1]);
            let theta0 = angle(&mut rng);
            let theta = angle(&mut rng);
            samples.push(KernelSample { k, theta0, theta });
        }
    }
    samples
}

fn kernels_check(config: &RunConfig, j: &KernelsJob, numerics: &NumericsConfig) -> Result<Vec<Row>, CliError> {
    let (_, profile) = build_profile(config, &j.profile)?;
    let order = order_of(j.truncation)?;
    let samples = kernel_samples(j);
    let results: Vec<_> = samples
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let cfg = ScatteringConfig2D::new(s.k, j.ell, s.theta0)?;
            let x = i as f64;
            let series = format!("k={},theta0={},theta={}", s.k, s.theta0, s.theta);
            let t = Some(j.truncation);
            let mut rows = vec![
                Row::new(
                    x,
                    series.clone(),
                    amplitude_from_kernels(profile.clone(), &cfg, s.theta, j.truncation, j.nodes, numerics)?,
                    t,
                    "kernels",
                ),
                Row::new(
                    x,
                    series.clone(),
                    Amplitude2D::new(profile.clone(), cfg, *numerics)?.amplitude(s.theta, order)?.truncated,
                    t,
                    "amp2d",
                ),
            ];
            if let Some(n) = j.refine_nodes {
                let f = amplitude_from_kernels(profile.clone(), &cfg, s.theta, j.truncation, n, numerics)?;
                rows.push(Row::new(x, series, f, t, "kernels-refined"));
            }
            Ok(rows)
        })
        .collect();
    collect(results)
}

fn run_cloak(config: &RunConfig, j: &CloakJob, numerics: &NumericsConfig) -> Result<CloakOutput, CliError> {
    let (_, profile) = build_profile(config, &j.profile)?;
    let materials = CoatingMaterials::new(j.materials.z1, j.materials.z2)?;
    let moments = SlabMomentPair::from_profile(profile.clone(), j.k, numerics.quadrature);
    let y = j.y.points();
    let geometry = BilayerGeometry::design(&moments, materials, j.ell, j.k, &y)?;
    let report = match &j.verify {
        Some(v) => {
            let coated = coated_profile(profile, &geometry, moments, None)?;
            Some(verify_invisibility(&coated, j.k, v.theta0, &y, &v.theta.points(), numerics)?)
        }
        None => None,
    };
    Ok(CloakOutput { geometry, report })
}

fn dyson1d(j: &Dyson1dJob) -> Result<Vec<Row>, CliError> {
    let (n, w) = match j.slab {
        Slab1D::Index([re, im]) => {
            let n = Complex64::new(re, im);
            (n, n * n - 1.0)
        }
        Slab1D::W([re, im]) => {
            let w = Complex64::new(re, im);
            ((w + 1.0).sqrt(), w)
        }
    };
    let profile = ConstantProfile1D { w };
    let spec = DysonSpec {
        max_terms: j.max_terms,
        tol: j.tol,
        ..DysonSpec::default()
    };
    let results: Vec<_> = j
        .k_ell
        .points()
        .par_iter()
        .map(|&kl| {
            let k = kl / j.ell;
            let mut rows = Vec::new();
            for m in &j.methods {
                let (matrix, name) = match m {
                    Method1D::Series => (transfer_matrix_1d(&profile, k, j.ell, &spec)?, "dyson"),
                    Method1D::Rk45 => (transfer_matrix_rk45(&profile, k, j.ell, 1e-12)?, "rk45"),
                    Method1D::Analytic => (analytic_slab(n, k, j.ell)?, "analytic"),
                };
                let Scattering1D { r_left, r_right, t } = scattering_1d(&matrix)?;
                rows.push(Row::new(kl, "R_left", r_left, None, name));
                rows.push(Row::new(kl, "R_right", r_right, None, name));
                rows.push(Row::new(kl, "T", t, None, name));
            }
            Ok(rows)
        })
        .collect();
    collect(results)
}
