//! Bilayer coatings that null the first two longitudinal moments of a slab,
//! and with them the first- and second-order amplitudes.
//!
//! The coated slab occupies `0 ≤ x ≤ ℓ_c`: the bare slab on `[0, ℓ]`, a layer
//! with `ε̂ − 1 = 𝔷₁` of thickness `ℓ₁(y)` and then a layer with `𝔷₂` of
//! thickness `ℓ₂(y)`.

use std::fmt::{self, Write as _};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amp2d::{Amplitude2D, ScatteringConfig2D};
use crate::error::{Error, Result};
use crate::numerics::{integrate_1d_points, NumericsConfig, QuadratureSpec};
use crate::profiles::{spatial_moment_y, Profile2D};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Threshold on `kℓ_c` above which the low-frequency premise is flagged.
pub const DEFAULT_WARN_K_ELL_C: f64 = 0.3;

/// Coating materials `𝔷₁ = ε̂₁ − 1`, `𝔷₂ = ε̂₂ − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoatingMaterials {
    pub z1: f64,
    pub z2: f64,
}

impl CoatingMaterials {
    pub fn new(z1: f64, z2: f64) -> Result<Self> {
        let m = Self { z1, z2 };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z1.is_finite() && self.z2.is_finite()) {
            return Err(Error::InvalidConfig("coating materials must be finite".into()));
        }
        if self.z1 == 0.0 {
            return Err(Error::DivisionByZero("z1 = 0".into()));
        }
        if self.z2 == 0.0 {
            return Err(Error::DivisionByZero("z2 = 0".into()));
        }
        if self.z1 == self.z2 {
            return Err(Error::DivisionByZero(format!("z1 = z2 = {}", self.z1)));
        }
        Ok(())
    }
}

type MomentFn = dyn Fn(f64) -> Result<(Complex64, Complex64)> + Send + Sync;

/// The bare-slab moments `y ↦ (w̄₀(y), w̄₁(y))`.
#[derive(Clone)]
pub struct SlabMomentPair {
    f: Arc<MomentFn>,
}

impl fmt::Debug for SlabMomentPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SlabMomentPair")
    }
}

impl SlabMomentPair {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(f64) -> Result<(Complex64, Complex64)> + Send + Sync + 'static,
    {
        Self { f: Arc::new(f) }
    }

    /// Moments by quadrature over `x̌` of a profile at wavenumber `k`.
    pub fn from_profile(profile: Arc<dyn Profile2D>, k: f64, quad: QuadratureSpec) -> Self {
        Self::new(move |y| {
            Ok((
                spatial_moment_y(profile.as_ref(), 0, y, k, &quad)?,
                spatial_moment_y(profile.as_ref(), 1, y, k, &quad)?,
            ))
        })
    }

    pub fn at(&self, y: f64) -> Result<(Complex64, Complex64)> {
        (self.f)(y)
    }
}

fn real_moment(v: Complex64, name: &str) -> Result<f64> {
    if v.im.abs() > 1e-14 * v.re.abs().max(f64::MIN_POSITIVE) && v.im != 0.0 {
        return Err(Error::Infeasible(format!(
            "{name} = {v} is complex; the design needs real moments"
        )));
    }
    Ok(v.re)
}

/// Thicknesses `(ℓ₁, ℓ₂)` nulling both moments of the coated slab, from
/// the bare-slab moments at one `y`. `ℓ₂` is the nonnegative root.
pub fn design_bilayer(
    w0: Complex64,
    w1: Complex64,
    materials: &CoatingMaterials,
    ell: f64,
) -> Result<(f64, f64)> {
    materials.validate()?;
    if !(ell > 0.0 && ell.is_finite()) {
        return Err(Error::InvalidConfig(format!("ell must be positive, got {ell}")));
    }
    let (w0, w1) = (real_moment(w0, "w0")?, real_moment(w1, "w1")?);
    let CoatingMaterials { z1, z2 } = *materials;
    let radicand = (w0 * w0 + 2.0 * z1 * (w1 - w0)) / (z2 * (z2 - z1));
    if !(radicand >= 0.0) {
        return Err(Error::Infeasible(format!(
            "no real layer thickness: radicand {radicand:.6e} is negative"
        )));
    }
    let ell2 = ell * radicand.sqrt();
    let ell1 = -(z2 * ell2 + ell * w0) / z1;
    if ell1 < 0.0 {
        return Err(Error::Infeasible(format!(
            "inner layer thickness would be negative ({ell1:.6e})"
        )));
    }
    Ok((ell1, ell2))
}

/// [`design_bilayer`] with the moments taken from `moments` at `y`.
pub fn design_bilayer_at(
    moments: &SlabMomentPair,
    materials: &CoatingMaterials,
    ell: f64,
    y: f64,
) -> Result<(f64, f64)> {
    let (w0, w1) = moments.at(y)?;
    design_bilayer(w0, w1, materials, ell)
}

/// `𝒳(k, y) = 𝔷₀g(𝔷₀g − 𝔷₁) / (𝔷₂(𝔷₂ − 𝔷₁))`.
pub fn chi(g: f64, z0: f64, materials: &CoatingMaterials) -> f64 {
    let s = z0 * g;
    s * (s - materials.z1) / (materials.z2 * (materials.z2 - materials.z1))
}

/// Thicknesses for the profiled slab `w = 𝔷₀ g(y)`, uniform in `x̌`.
pub fn design_profiled(g: f64, z0: f64, materials: &CoatingMaterials, ell: f64) -> Result<(f64, f64)> {
    materials.validate()?;
    if !(ell > 0.0 && ell.is_finite()) {
        return Err(Error::InvalidConfig(format!("ell must be positive, got {ell}")));
    }
    if !(g >= 0.0 && z0 >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "profiled slabs need g ≥ 0 and z0 ≥ 0, got g = {g}, z0 = {z0}"
        )));
    }
    if !(materials.z1 < 0.0 && 0.0 < materials.z2) {
        return Err(Error::Infeasible(format!(
            "positive thicknesses need z1 < 0 < z2, got z1 = {}, z2 = {}",
            materials.z1, materials.z2
        )));
    }
    let root = chi(g, z0, materials).sqrt();
    Ok((-ell * (materials.z2 * root + z0 * g) / materials.z1, ell * root))
}

/// Design result at one `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilayerSample {
    pub y: f64,
    pub ell1: f64,
    pub ell2: f64,
    pub feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// Per-`y` layer thicknesses and the overall coated thickness `ℓ_c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilayerGeometry {
    pub materials: CoatingMaterials,
    pub ell: f64,
    pub k: f64,
    pub samples: Vec<BilayerSample>,
    pub ell_c: f64,
    pub feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl BilayerGeometry {
    /// Designs the bilayer at every `y` of `y_grid`. Infeasible points are
    /// reported per sample and left uncoated.
    pub fn design(
        moments: &SlabMomentPair,
        materials: CoatingMaterials,
        ell: f64,
        k: f64,
        y_grid: &[f64],
    ) -> Result<Self> {
        materials.validate()?;
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidConfig(format!("k must be positive, got {k}")));
        }
        if y_grid.is_empty() {
            return Err(Error::InvalidConfig("empty y grid".into()));
        }
        let mut samples = Vec::with_capacity(y_grid.len());
        for &y in y_grid {
            samples.push(match design_bilayer_at(moments, &materials, ell, y) {
                Ok((ell1, ell2)) => BilayerSample {
                    y,
                    ell1,
                    ell2,
                    feasible: true,
                    reason: None,
                },
                Err(Error::Infeasible(reason)) => BilayerSample {
                    y,
                    ell1: 0.0,
                    ell2: 0.0,
                    feasible: false,
                    reason: Some(reason),
                },
                Err(e) => return Err(e),
            });
        }
        let ell_c = samples
            .iter()
            .map(|s| ell + s.ell1 + s.ell2)
            .fold(ell, f64::max);
        let warning = (k * ell_c >= DEFAULT_WARN_K_ELL_C).then(|| {
            format!("k·ell_c = {:.4} is not small; the low-frequency premise is doubtful", k * ell_c)
        });
        Ok(Self {
            feasible: samples.iter().all(|s| s.feasible),
            materials,
            ell,
            k,
            samples,
            ell_c,
            warning,
        })
    }

    pub fn k_ell_c(&self) -> f64 {
        self.k * self.ell_c
    }

    /// `y,ell1,ell2,feasible` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("y,ell1,ell2,feasible\n");
        for s in &self.samples {
            let _ = writeln!(out, "{:.16e},{:.16e},{:.16e},{}", s.y, s.ell1, s.ell2, s.feasible);
        }
        out
    }

    /// Header with materials and `ℓ_c`, without the per-`y` samples.
    pub fn header_json(&self) -> serde_json::Value {
        serde_json::json!({
            "materials": self.materials,
            "ell": self.ell,
            "k": self.k,
            "ell_c": self.ell_c,
            "k_ell_c": self.k_ell_c(),
            "feasible": self.feasible,
            "warning": self.warning,
        })
    }
}

/// The coated slab as a profile over `x̌ = x / ℓ_c`. Layer thicknesses are
/// designed at the evaluation `y` with the moments of the bare slab at the
/// design wavenumber.
pub struct CoatedProfile {
    bare: Arc<dyn Profile2D>,
    moments: SlabMomentPair,
    materials: CoatingMaterials,
    ell: f64,
    ell_c: f64,
}

impl fmt::Debug for CoatedProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoatedProfile")
            .field("bare", &self.bare.descriptor())
            .field("materials", &self.materials)
            .field("ell", &self.ell)
            .field("ell_c", &self.ell_c)
            .finish()
    }
}

impl CoatedProfile {
    pub fn ell_c(&self) -> f64 {
        self.ell_c
    }

    pub fn bare(&self) -> &Arc<dyn Profile2D> {
        &self.bare
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    /// `(ℓ₁(y), ℓ₂(y))`, zero where the design is infeasible.
    pub fn thicknesses(&self, y: f64) -> (f64, f64) {
        design_bilayer_at(&self.moments, &self.materials, self.ell, y).unwrap_or((0.0, 0.0))
    }

    /// Layer interfaces in units of `ℓ_c`.
    fn interfaces(&self, y: f64) -> [f64; 3] {
        let (l1, l2) = self.thicknesses(y);
        [
            self.ell / self.ell_c,
            (self.ell + l1) / self.ell_c,
            (self.ell + l1 + l2) / self.ell_c,
        ]
    }
}

impl Profile2D for CoatedProfile {
    fn eval(&self, x: f64, y: f64, k: f64) -> Complex64 {
        let [a, b, c] = self.interfaces(y);
        if x < a {
            self.bare.w(x * self.ell_c / self.ell, y, k)
        } else if x < b {
            Complex64::new(self.materials.z1, 0.0)
        } else if x < c {
            Complex64::new(self.materials.z2, 0.0)
        } else {
            ZERO
        }
    }

    fn decay_radius(&self) -> f64 {
        self.bare.decay_radius()
    }

    fn descriptor(&self) -> String {
        format!(
            "coated({}; z1={}, z2={}, ell_c={})",
            self.bare.descriptor(),
            self.materials.z1,
            self.materials.z2,
            self.ell_c
        )
    }

    fn x_breakpoints(&self, y: f64, k: f64) -> Vec<f64> {
        let scale = self.ell / self.ell_c;
        let mut points: Vec<f64> = self
            .bare
            .x_breakpoints(y, k)
            .into_iter()
            .map(|p| p * scale)
            .chain(self.interfaces(y))
            .filter(|p| *p > 0.0 && *p < 1.0)
            .collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        points
    }
}

/// Builds the coated profile. Fails with [`Error::Extent`] when some grid
/// point needs more room than `ell_c` provides.
pub fn coated_profile(
    bare: Arc<dyn Profile2D>,
    geometry: &BilayerGeometry,
    moments: SlabMomentPair,
    ell_c: Option<f64>,
) -> Result<CoatedProfile> {
    let ell_c = ell_c.unwrap_or(geometry.ell_c);
    if let Some(s) = geometry
        .samples
        .iter()
        .find(|s| geometry.ell + s.ell1 + s.ell2 > ell_c * (1.0 + 1e-15))
    {
        return Err(Error::Extent {
            extent: geometry.ell + s.ell1 + s.ell2,
            ell_c,
        });
    }
    Ok(CoatedProfile {
        bare,
        moments,
        materials: geometry.materials,
        ell: geometry.ell,
        ell_c,
    })
}

/// Residual moments and amplitude coefficients of a coated slab next to
/// those of the bare slab.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvisibilityReport {
    /// `max_y |∫₀^{ℓ_c} (ε̂_c − 1) dx|`.
    pub residual_m0: f64,
    /// `max_y |∫₀^{ℓ_c} x (ε̂_c − 1) dx|`.
    pub residual_m1: f64,
    /// `max_y` of the same integrals for the bare slab.
    pub bare_m0: f64,
    pub bare_m1: f64,
    pub max_abs_w: f64,
    pub max_f1: f64,
    pub max_f2: f64,
    pub bare_max_f1: f64,
    pub bare_max_f2: f64,
}

impl InvisibilityReport {
    pub fn amplitude_ratio(&self) -> f64 {
        let r1 = self.max_f1 / self.bare_max_f1;
        let r2 = self.max_f2 / self.bare_max_f2;
        r1.max(r2)
    }
}

fn physical_moments(profile: &dyn Profile2D, thickness: f64, y: f64, k: f64, quad: &QuadratureSpec) -> Result<(f64, f64)> {
    let points = profile.x_breakpoints(y, k);
    let m0 = integrate_1d_points(|x| profile.w(x, y, k), 0.0, 1.0, &points, quad)?;
    let m1 = integrate_1d_points(|x| profile.w(x, y, k) * x, 0.0, 1.0, &points, quad)?;
    Ok(((m0 * thickness).norm(), (m1 * thickness * thickness).norm()))
}

/// Checks the coated slab: residual moments on `y_grid` and the
/// amplitude coefficients on `thetas` for incidence `theta0`, both at `k`.
pub fn verify_invisibility(
    coated: &CoatedProfile,
    k: f64,
    theta0: f64,
    y_grid: &[f64],
    thetas: &[f64],
    numerics: &NumericsConfig,
) -> Result<InvisibilityReport> {
    let quad = numerics.quadrature;
    let mut report = InvisibilityReport {
        residual_m0: 0.0,
        residual_m1: 0.0,
        bare_m0: 0.0,
        bare_m1: 0.0,
        max_abs_w: 0.0,
        max_f1: 0.0,
        max_f2: 0.0,
        bare_max_f1: 0.0,
        bare_max_f2: 0.0,
    };
    for &y in y_grid {
        let (c0, c1) = physical_moments(coated, coated.ell_c, y, k, &quad)?;
        let (b0, b1) = physical_moments(coated.bare.as_ref(), coated.ell, y, k, &quad)?;
        report.residual_m0 = report.residual_m0.max(c0);
        report.residual_m1 = report.residual_m1.max(c1);
        report.bare_m0 = report.bare_m0.max(b0);
        report.bare_m1 = report.bare_m1.max(b1);
        for i in 0..=16 {
            let x = f64::from(i) / 16.0;
            report.max_abs_w = report.max_abs_w.max(coated.w(x, y, k).norm());
        }
    }
    let coated_arc: Arc<dyn Profile2D> = Arc::new(CoatedProfile {
        bare: coated.bare.clone(),
        moments: coated.moments.clone(),
        materials: coated.materials,
        ell: coated.ell,
        ell_c: coated.ell_c,
    });
    let amp_c = Amplitude2D::new(coated_arc, ScatteringConfig2D::new(k, coated.ell_c, theta0)?, *numerics)?;
    let amp_b = Amplitude2D::new(coated.bare.clone(), ScatteringConfig2D::new(k, coated.ell, theta0)?, *numerics)?;
    for &theta in thetas {
        report.max_f1 = report.max_f1.max(amp_c.f1(theta)?.norm());
        report.max_f2 = report.max_f2.max(amp_c.f2(theta)?.norm());
        report.bare_max_f1 = report.bare_max_f1.max(amp_b.f1(theta)?.norm());
        report.bare_max_f2 = report.bare_max_f2.max(amp_b.f2(theta)?.norm());
    }
    Ok(report)
}
