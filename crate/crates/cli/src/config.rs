//! JSON run configuration.
//!
//! A config names one `command` and carries that command's parameters,
//! plus optional `numerics`, `output` and `threads` sections. Angles are in
//! radians, lengths in whatever unit the profile uses.

use std::path::{Path, PathBuf};

use lfscat_core::amp2d::COS_GUARD;
use lfscat_core::numerics::NumericsConfig;
use lfscat_core::profiles::ProfileSpec;
use serde::{Deserialize, Serialize};

/// A list of sample points: explicit values or an inclusive linspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Linspace { start: f64, stop: f64, count: usize },
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        match self {
            Grid::Values(v) => v.clone(),
            Grid::Linspace { start, stop, count } => match count {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..*n)
                    .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
                    .collect(),
            },
        }
    }

    fn check(&self, name: &str, errors: &mut Vec<String>) {
        let pts = self.points();
        if pts.is_empty() {
            errors.push(format!("{name}: range is empty"));
        }
        if pts.iter().any(|v| !v.is_finite()) {
            errors.push(format!("{name}: contains non-finite values"));
        }
    }

    fn check_positive(&self, name: &str, errors: &mut Vec<String>) {
        self.check(name, errors);
        if self.points().iter().any(|v| !(*v > 0.0)) {
            errors.push(format!("{name}: values must be positive"));
        }
    }

    fn check_angles(&self, name: &str, errors: &mut Vec<String>) {
        self.check(name, errors);
        for v in self.points() {
            check_angle(v, name, errors);
        }
    }
}

fn check_angle(v: f64, name: &str, errors: &mut Vec<String>) {
    if v.is_finite() && v.cos().abs() < COS_GUARD {
        errors.push(format!("{name}: angle {v} lies on the slab plane (cos = 0)"));
    }
}

fn check_positive(v: f64, name: &str, errors: &mut Vec<String>) {
    if !(v > 0.0 && v.is_finite()) {
        errors.push(format!("{name}: must be positive, got {v}"));
    }
}

/// A 2D profile: inline `{type, params}`, a catalog name, or a path to a
/// JSON file holding an inline definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileRef {
    Inline(ProfileSpec),
    Named(String),
}

/// Catalog entries available by name.
pub const CATALOG: &[&str] = &["ex1", "gaussian-y", "zero"];

impl ProfileRef {
    pub fn resolve(&self, base_dir: Option<&Path>) -> Result<ProfileSpec, String> {
        match self {
            ProfileRef::Inline(spec) => Ok(spec.clone()),
            ProfileRef::Named(name) => {
                let catalog = |json: serde_json::Value| {
                    serde_json::from_value::<ProfileSpec>(json).map_err(|e| e.to_string())
                };
                match name.as_str() {
                    "ex1" => catalog(serde_json::json!({
                        "type": "ex1", "params": {"z": 0.1, "alpha": 0.5, "width": 10.0}
                    })),
                    "gaussian-y" => catalog(serde_json::json!({
                        "type": "gaussian_slab", "params": {"z0": 0.5, "width": 2.0}
                    })),
                    "zero" => catalog(serde_json::json!({"type": "zero"})),
                    path => {
                        let mut p = PathBuf::from(path);
                        if p.is_relative() {
                            if let Some(dir) = base_dir {
                                p = dir.join(p);
                            }
                        }
                        let text = std::fs::read_to_string(&p)
                            .map_err(|e| format!("profile {path:?}: not a catalog name and unreadable: {e}"))?;
                        serde_json::from_str(&text).map_err(|e| format!("profile {path:?}: {e}"))
                    }
                }
            }
        }
    }
}

fn default_orders() -> Vec<u8> {
    vec![1, 2]
}

fn check_orders(orders: &[u8], errors: &mut Vec<String>) {
    if orders.is_empty() {
        errors.push("orders: empty".into());
    }
    for o in orders {
        if !(1..=2).contains(o) {
            errors.push(format!("orders: {o} is not 1 or 2"));
        }
    }
}

/// Amplitude versus detector angle at fixed `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Amp2dJob {
    pub profile: ProfileRef,
    pub k: f64,
    pub ell: f64,
    pub theta0: f64,
    pub theta: Grid,
    #[serde(default = "default_orders")]
    pub orders: Vec<u8>,
}

/// Amplitude versus `kℓ` at fixed angles, optionally with the exact
/// amplitude of a Born-exact profile where `k ≤ α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepJob {
    pub profile: ProfileRef,
    pub ell: f64,
    pub theta0: f64,
    pub theta: f64,
    pub k_ell: Grid,
    #[serde(default = "default_orders")]
    pub orders: Vec<u8>,
    #[serde(default)]
    pub exact: bool,
    /// Support threshold for the exact curve; taken from an ex1 profile when absent.
    #[serde(default)]
    pub alpha: Option<f64>,
}

/// Exact amplitude of a Born-exact profile versus detector angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exact2dJob {
    pub profile: ProfileRef,
    pub k: f64,
    pub ell: f64,
    pub theta0: f64,
    pub theta: Grid,
    #[serde(default)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method3D {
    ClosedForm,
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep3D {
    KEll,
    Theta,
}

/// Gaussian slab `w = z e^{−(x² + y²)/2L²}` in 3D.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Amp3dJob {
    pub z: f64,
    /// One or more transverse widths `L`.
    pub width: Grid,
    pub ell: f64,
    #[serde(default)]
    pub theta0: f64,
    #[serde(default)]
    pub phi0: f64,
    pub k_ell: Grid,
    pub theta: Grid,
    #[serde(default)]
    pub phi: f64,
    pub sweep: Sweep3D,
    #[serde(default = "default_orders")]
    pub orders: Vec<u8>,
    /// Report `σ̂ = |𝔣|²/|𝔣(0,0)|²` through the normalized amplitude.
    #[serde(default)]
    pub normalized: bool,
    #[serde(default = "default_method3d")]
    pub method: Method3D,
}

fn default_method3d() -> Method3D {
    Method3D::ClosedForm
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub k: f64,
    pub theta0: f64,
    pub theta: f64,
}

/// Kernel-oracle amplitudes next to the direct second-order formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelsJob {
    pub profile: ProfileRef,
    pub ell: f64,
    #[serde(default)]
    pub samples: Vec<KernelSample>,
    /// Adds this many seeded random samples with `k` in `k_range`.
    #[serde(default)]
    pub random: Option<RandomSamples>,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default)]
    pub refine_nodes: Option<usize>,
    #[serde(default = "default_truncation")]
    pub truncation: u8,
}

fn default_nodes() -> usize {
    201
}

fn default_truncation() -> u8 {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomSamples {
    pub count: usize,
    pub seed: u64,
    pub k_range: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Materials {
    pub z1: f64,
    pub z2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloakVerify {
    pub theta0: f64,
    pub theta: Grid,
}

/// Bilayer cloak design on a `y` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloakJob {
    pub profile: ProfileRef,
    pub materials: Materials,
    pub ell: f64,
    pub k: f64,
    pub y: Grid,
    #[serde(default)]
    pub verify: Option<CloakVerify>,
}

/// Homogeneous 1D slab given by refractive index or by `w = ε̂ − 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slab1D {
    Index([f64; 2]),
    W([f64; 2]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method1D {
    Series,
    Rk45,
    Analytic,
}

fn default_methods1d() -> Vec<Method1D> {
    vec![Method1D::Series, Method1D::Analytic]
}

fn default_max_terms() -> usize {
    40
}

fn default_series_tol() -> f64 {
    1e-15
}

/// 1D reflection and transmission versus `kℓ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dyson1dJob {
    pub slab: Slab1D,
    pub ell: f64,
    pub k_ell: Grid,
    #[serde(default = "default_methods1d")]
    pub methods: Vec<Method1D>,
    #[serde(default = "default_max_terms")]
    pub max_terms: usize,
    #[serde(default = "default_series_tol")]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Job {
    Amp2d(Amp2dJob),
    Amp3d(Amp3dJob),
    Exact2d(Exact2dJob),
    KernelsCheck(KernelsJob),
    Cloak(CloakJob),
    Dyson1d(Dyson1dJob),
    Sweep(SweepJob),
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::Amp2d(_) => "amp2d",
            Job::Amp3d(_) => "amp3d",
            Job::Exact2d(_) => "exact2d",
            Job::KernelsCheck(_) => "kernels-check",
            Job::Cloak(_) => "cloak",
            Job::Dyson1d(_) => "dyson1d",
            Job::Sweep(_) => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(flatten)]
    pub job: Job,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub threads: Option<usize>,
    /// Directory relative profile paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("config does not parse: {e}"))
    }

    pub fn from_path(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut config = Self::from_json(&text)?;
        config.base_dir = path.parent().map(Path::to_path_buf);
        Ok(config)
    }

    /// Every schema and physics violation, without running anything.
    pub fn validate(&self) -> Vec<String> {
        let mut errors = Vec::new();
        if let Err(e) = self.numerics.validate() {
            errors.push(format!("numerics: {e}"));
        }
        if self.threads == Some(0) {
            errors.push("threads: must be at least 1".into());
        }
        let profile = |r: &ProfileRef, errors: &mut Vec<String>| match r.resolve(self.base_dir.as_deref()) {
            Ok(spec) => {
                if let Err(e) = spec.build() {
                    errors.push(format!("profile: {e}"));
                }
                Some(spec)
            }
            Err(e) => {
                errors.push(format!("profile: {e}"));
                None
            }
        };
        match &self.job {
            Job::Amp2d(j) => {
                profile(&j.profile, &mut errors);
                check_positive(j.k, "k", &mut errors);
                check_positive(j.ell, "ell", &mut errors);
                check_angle(j.theta0, "theta0", &mut errors);
                j.theta.check_angles("theta", &mut errors);
                check_orders(&j.orders, &mut errors);
            }
            Job::Sweep(j) => {
                let spec = profile(&j.profile, &mut errors);
                check_positive(j.ell, "ell", &mut errors);
                check_angle(j.theta0, "theta0", &mut errors);
                check_angle(j.theta, "theta", &mut errors);
                j.k_ell.check_positive("k_ell", &mut errors);
                check_orders(&j.orders, &mut errors);
                if j.exact && j.alpha.is_none() && spec.as_ref().is_some_and(|s| s.kind != "ex1") {
                    errors.push("exact: needs alpha unless the profile is ex1".into());
                }
            }
            Job::Exact2d(j) => {
                let spec = profile(&j.profile, &mut errors);
                check_positive(j.k, "k", &mut errors);
                check_positive(j.ell, "ell", &mut errors);
                check_angle(j.theta0, "theta0", &mut errors);
                j.theta.check_angles("theta", &mut errors);
                if j.alpha.is_none() && spec.as_ref().is_some_and(|s| s.kind != "ex1") {
                    errors.push("alpha: required unless the profile is ex1".into());
                }
            }
            Job::Amp3d(j) => {
                if !j.z.is_finite() {
                    errors.push("z: must be finite".into());
                }
                j.width.check_positive("width", &mut errors);
                check_positive(j.ell, "ell", &mut errors);
                check_angle(j.theta0, "theta0", &mut errors);
                if !(0.0..=std::f64::consts::PI).contains(&j.theta0) {
                    errors.push(format!("theta0: {} outside [0, pi]", j.theta0));
                }
                j.k_ell.check_positive("k_ell", &mut errors);
                j.theta.check_angles("theta", &mut errors);
                if j.theta.points().iter().any(|t| !(0.0..=std::f64::consts::PI).contains(t)) {
                    errors.push("theta: polar angles must lie in [0, pi]".into());
                }
                check_orders(&j.orders, &mut errors);
            }
            Job::KernelsCheck(j) => {
                profile(&j.profile, &mut errors);
                check_positive(j.ell, "ell", &mut errors);
                if j.samples.is_empty() && j.random.as_ref().map_or(true, |r| r.count == 0) {
                    errors.push("samples: none given".into());
                }
                for (i, s) in j.samples.iter().enumerate() {
                    check_positive(s.k, &format!("samples[{i}].k"), &mut errors);
                    check_angle(s.theta0, &format!("samples[{i}].theta0"), &mut errors);
                    check_angle(s.theta, &format!("samples[{i}].theta"), &mut errors);
                }
                if let Some(r) = &j.random {
                    if !(r.k_range[0] > 0.0 && r.k_range[1] > r.k_range[0]) {
                        errors.push("random.k_range: need 0 < lo < hi".into());
                    }
                }
                if j.nodes < 3 || j.refine_nodes.is_some_and(|n| n < 3) {
                    errors.push("nodes: need at least 3".into());
                }
                if !(1..=2).contains(&j.truncation) {
                    errors.push("truncation: must be 1 or 2".into());
                }
            }
            Job::Cloak(j) => {
                profile(&j.profile, &mut errors);
                let m = &j.materials;
                if m.z1 == 0.0 || m.z2 == 0.0 || m.z1 == m.z2 || !(m.z1.is_finite() && m.z2.is_finite()) {
                    errors.push("materials: need finite z1, z2, both nonzero and distinct".into());
                }
                check_positive(j.ell, "ell", &mut errors);
                check_positive(j.k, "k", &mut errors);
                j.y.check("y", &mut errors);
                if let Some(v) = &j.verify {
                    check_angle(v.theta0, "verify.theta0", &mut errors);
                    v.theta.check_angles("verify.theta", &mut errors);
                }
            }
            Job::Dyson1d(j) => {
                check_positive(j.ell, "ell", &mut errors);
                j.k_ell.check_positive("k_ell", &mut errors);
                if j.methods.is_empty() {
                    errors.push("methods: empty".into());
                }
                if j.max_terms == 0 {
                    errors.push("max_terms: must be at least 1".into());
                }
            }
        }
        errors
    }
}
