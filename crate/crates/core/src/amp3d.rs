//! 3D low-frequency amplitudes for slabs `0 ≤ z ≤ ℓ`, with the closed
//! forms for the Gaussian slab.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amp2d::{Order, COS_GUARD};
use crate::error::{Error, Result};
use crate::numerics::{integrate_2d, NumericsConfig, QuadratureSpec};
use crate::profiles::{MomentTable3D, Profile3D};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn check_polar(theta: f64) -> Result<()> {
    if !theta.is_finite() || !(0.0..=PI).contains(&theta) || theta.cos().abs() < COS_GUARD {
        Err(Error::ForbiddenAngle(theta))
    } else {
        Ok(())
    }
}

fn check_azimuth(phi: f64) -> Result<()> {
    if phi.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("azimuth must be finite, got {phi}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringConfig3D {
    pub k: f64,
    pub ell: f64,
    pub theta0: f64,
    pub phi0: f64,
}

impl ScatteringConfig3D {
    pub fn new(k: f64, ell: f64, theta0: f64, phi0: f64) -> Result<Self> {
        let config = Self {
            k,
            ell,
            theta0,
            phi0,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::InvalidConfig(format!("k must be positive, got {}", self.k)));
        }
        if !(self.ell > 0.0 && self.ell.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "ell must be positive, got {}",
                self.ell
            )));
        }
        check_polar(self.theta0)?;
        check_azimuth(self.phi0)
    }

    pub fn k_ell(&self) -> f64 {
        self.k * self.ell
    }
}

/// Detector direction `(ϑ, φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction3D {
    pub theta: f64,
    pub phi: f64,
}

impl Direction3D {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        let dir = Self { theta, phi };
        dir.validate()?;
        Ok(dir)
    }

    pub fn validate(&self) -> Result<()> {
        check_polar(self.theta)?;
        check_azimuth(self.phi)
    }

    pub fn forward() -> Self {
        Self { theta: 0.0, phi: 0.0 }
    }
}

/// `𝔤⃗(ϑ, φ, α, β) = (sin ϑ cos φ − sin α cos β, sin ϑ sin φ − sin α sin β)`.
pub fn g_vector(theta: f64, phi: f64, alpha: f64, beta: f64) -> (f64, f64) {
    (
        theta.sin() * phi.cos() - alpha.sin() * beta.cos(),
        theta.sin() * phi.sin() - alpha.sin() * beta.sin(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeResult3D {
    pub f1: Complex64,
    pub f2: Option<Complex64>,
    pub truncated: Complex64,
    pub order: Order,
}

impl AmplitudeResult3D {
    fn assemble(f1: Complex64, f2: Option<Complex64>, k_ell: f64, order: Order) -> Self {
        let truncated = match f2 {
            Some(f2) => f1 * k_ell + f2 * (k_ell * k_ell),
            None => f1 * k_ell,
        };
        Self {
            f1,
            f2,
            truncated,
            order,
        }
    }

    pub fn cross_section(&self) -> f64 {
        self.truncated.norm_sqr()
    }
}

/// Amplitude coefficients for one 3D profile and configuration.
#[derive(Debug)]
pub struct Amplitude3D {
    config: ScatteringConfig3D,
    numerics: NumericsConfig,
    m0: MomentTable3D,
    m1: MomentTable3D,
}

impl Amplitude3D {
    pub fn new(
        profile: Arc<dyn Profile3D>,
        config: ScatteringConfig3D,
        numerics: NumericsConfig,
    ) -> Result<Self> {
        config.validate()?;
        numerics.validate()?;
        Ok(Self {
            m0: MomentTable3D::new(profile.clone(), 0, config.k, numerics)?,
            m1: MomentTable3D::new(profile, 1, config.k, numerics)?,
            config,
            numerics,
        })
    }

    pub fn config(&self) -> &ScatteringConfig3D {
        &self.config
    }

    fn prefactor(&self) -> f64 {
        self.config.k / (2.0 * (2.0 * PI).sqrt())
    }

    fn moment(&self, table: &MomentTable3D, g: (f64, f64)) -> Result<Complex64> {
        table.value_at(self.config.k * g.0, self.config.k * g.1)
    }

    pub fn f1(&self, dir: Direction3D) -> Result<Complex64> {
        dir.validate()?;
        let g = g_vector(dir.theta, dir.phi, self.config.theta0, self.config.phi0);
        Ok(self.moment(&self.m0, g)? * self.prefactor())
    }

    pub fn f2(&self, dir: Direction3D) -> Result<Complex64> {
        dir.validate()?;
        let ScatteringConfig3D { k, theta0, phi0, .. } = self.config;
        let g = g_vector(dir.theta, dir.phi, theta0, phi0);
        let linear = self.moment(&self.m1, g)? * (theta0.cos() - dir.theta.cos());
        let mut failure = None;
        let integral = integrate_2d(
            |alpha, beta| {
                let value = self
                    .moment(&self.m0, g_vector(dir.theta, dir.phi, alpha, beta))
                    .and_then(|a| Ok(a * self.moment(&self.m0, g_vector(alpha, beta, theta0, phi0))?));
                match value {
                    Ok(v) => v * alpha.sin(),
                    Err(e) => {
                        failure.get_or_insert(e);
                        ZERO
                    }
                }
            },
            (0.0, PI / 2.0),
            (0.0, 2.0 * PI),
            &self.numerics.quadrature,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let bilinear = integral? * (k * k / (8.0 * PI * PI));
        Ok(Complex64::new(0.0, self.prefactor()) * (linear + bilinear))
    }

    pub fn amplitude(&self, dir: Direction3D, order: Order) -> Result<AmplitudeResult3D> {
        let f1 = self.f1(dir)?;
        let f2 = match order {
            Order::First => None,
            Order::Second => Some(self.f2(dir)?),
        };
        Ok(AmplitudeResult3D::assemble(f1, f2, self.config.k_ell(), order))
    }

    pub fn cross_section(&self, dir: Direction3D, order: Order) -> Result<f64> {
        Ok(self.amplitude(dir, order)?.cross_section())
    }

    /// `σ̂(ϑ, φ) = |𝔣(ϑ, φ)|² / |𝔣(0, 0)|²`.
    pub fn normalized_cross_section(&self, dir: Direction3D, order: Order) -> Result<f64> {
        normalize(self.cross_section(dir, order)?, self.cross_section(Direction3D::forward(), order)?)
    }
}

fn normalize(value: f64, forward: f64) -> Result<f64> {
    if forward == 0.0 || !forward.is_finite() {
        return Err(Error::DivisionByZero(format!(
            "forward cross section is {forward}"
        )));
    }
    Ok(value / forward)
}

pub fn f1_3d(
    profile: Arc<dyn Profile3D>,
    config: &ScatteringConfig3D,
    dir: Direction3D,
    numerics: &NumericsConfig,
) -> Result<Complex64> {
    Amplitude3D::new(profile, *config, *numerics)?.f1(dir)
}

pub fn f2_3d(
    profile: Arc<dyn Profile3D>,
    config: &ScatteringConfig3D,
    dir: Direction3D,
    numerics: &NumericsConfig,
) -> Result<Complex64> {
    Amplitude3D::new(profile, *config, *numerics)?.f2(dir)
}

pub fn amplitude_3d(
    profile: Arc<dyn Profile3D>,
    config: &ScatteringConfig3D,
    dir: Direction3D,
    order: Order,
    numerics: &NumericsConfig,
) -> Result<AmplitudeResult3D> {
    Amplitude3D::new(profile, *config, *numerics)?.amplitude(dir, order)
}

pub fn normalized_cross_section(
    profile: Arc<dyn Profile3D>,
    config: &ScatteringConfig3D,
    dir: Direction3D,
    order: Order,
    numerics: &NumericsConfig,
) -> Result<f64> {
    Amplitude3D::new(profile, *config, *numerics)?.normalized_cross_section(dir, order)
}

/// `h(ϑ, φ, ϑ₀) = sin ϑ₀ sin ϑ cos φ + ¼(cos 2ϑ + cos 2ϑ₀) − ½`.
pub fn gaussian_h(theta: f64, phi: f64, theta0: f64) -> f64 {
    theta0.sin() * theta.sin() * phi.cos() + 0.25 * ((2.0 * theta).cos() + (2.0 * theta0).cos()) - 0.5
}

/// `𝒴(ϑ, φ, ϑ₀, φ₀, 𝔎) = (1/2π) ∫₀^{π/2}dα ∫₀^{2π}dβ sin α e^{𝔎²[h(ϑ,φ−β,α) + h(α,β−φ₀,ϑ₀)]}`.
pub fn gaussian_y(
    theta: f64,
    phi: f64,
    theta0: f64,
    phi0: f64,
    kk: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if !(kk >= 0.0 && kk.is_finite()) {
        return Err(Error::InvalidConfig(format!("kL must be nonnegative, got {kk}")));
    }
    let k2 = kk * kk;
    let v = integrate_2d(
        |alpha, beta| {
            let e = k2 * (gaussian_h(theta, phi - beta, alpha) + gaussian_h(alpha, beta - phi0, theta0));
            Complex64::new(alpha.sin() * e.exp(), 0.0)
        },
        (0.0, PI / 2.0),
        (0.0, 2.0 * PI),
        quad,
    )?;
    Ok(v.re / (2.0 * PI))
}

/// Closed-form amplitudes of the Gaussian slab `w = 𝔷 e^{−(x²+y²)/2L²}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianClosedForm {
    pub z: f64,
    pub width: f64,
    pub config: ScatteringConfig3D,
}

impl GaussianClosedForm {
    pub fn new(z: f64, width: f64, config: ScatteringConfig3D) -> Result<Self> {
        if !(width > 0.0 && width.is_finite() && z.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "Gaussian slab needs finite z and positive width, got z = {z}, L = {width}"
            )));
        }
        config.validate()?;
        Ok(Self { z, width, config })
    }

    /// `𝔎 = kL`.
    pub fn kk(&self) -> f64 {
        self.config.k * self.width
    }

    fn exponent(&self, dir: Direction3D) -> f64 {
        let kk = self.kk();
        (kk * kk * gaussian_h(dir.theta, dir.phi - self.config.phi0, self.config.theta0)).exp()
    }

    pub fn f1(&self, dir: Direction3D) -> Result<Complex64> {
        dir.validate()?;
        let kk = self.kk();
        Ok(Complex64::new(
            (PI / 2.0).sqrt() * self.z * kk * kk / self.config.k * self.exponent(dir),
            0.0,
        ))
    }

    pub fn f2(&self, dir: Direction3D, quad: &QuadratureSpec) -> Result<Complex64> {
        dir.validate()?;
        let kk = self.kk();
        let ScatteringConfig3D { k, theta0, phi0, .. } = self.config;
        let y = gaussian_y(dir.theta, dir.phi, theta0, phi0, kk, quad)?;
        let bracket = (theta0.cos() - dir.theta.cos()) * self.exponent(dir) + self.z * kk * kk * y;
        Ok(Complex64::new(0.0, (PI / 2.0).sqrt() * self.z * kk * kk / (2.0 * k) * bracket))
    }

    pub fn amplitude(&self, dir: Direction3D, order: Order, quad: &QuadratureSpec) -> Result<AmplitudeResult3D> {
        let f1 = self.f1(dir)?;
        let f2 = match order {
            Order::First => None,
            Order::Second => Some(self.f2(dir, quad)?),
        };
        Ok(AmplitudeResult3D::assemble(f1, f2, self.config.k_ell(), order))
    }

    pub fn normalized_cross_section(&self, dir: Direction3D, order: Order, quad: &QuadratureSpec) -> Result<f64> {
        normalize(
            self.amplitude(dir, order, quad)?.cross_section(),
            self.amplitude(Direction3D::forward(), order, quad)?.cross_section(),
        )
    }
}
