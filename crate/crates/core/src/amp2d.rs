//! First- and second-order coefficients of the 2D low-frequency amplitude
//! `𝔣(θ) = 𝔣⁽¹⁾(θ) kℓ + 𝔣⁽²⁾(θ) (kℓ)² + O(kℓ)³`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{integrate_1d, NumericsConfig};
use crate::profiles::{MomentTable, Profile2D};

/// Angles with `|cos θ|` below this are treated as lying on the slab plane.
pub const COS_GUARD: f64 = 1e-12;

pub(crate) fn check_angle(theta: f64) -> Result<()> {
    if !theta.is_finite() || theta.cos().abs() < COS_GUARD {
        Err(Error::ForbiddenAngle(theta))
    } else {
        Ok(())
    }
}

/// Wavenumber, slab thickness and incidence angle of a 2D problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringConfig2D {
    pub k: f64,
    pub ell: f64,
    pub theta0: f64,
}

impl ScatteringConfig2D {
    pub fn new(k: f64, ell: f64, theta0: f64) -> Result<Self> {
        let config = Self { k, ell, theta0 };
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
        check_angle(self.theta0)
    }

    /// The expansion parameter `kℓ`.
    pub fn k_ell(&self) -> f64 {
        self.k * self.ell
    }

    /// Transverse incident momentum `p₀ = k sin θ₀`.
    pub fn p0(&self) -> f64 {
        self.k * self.theta0.sin()
    }

    /// `ϖ(p₀) = k |cos θ₀|`.
    pub fn varpi0(&self) -> f64 {
        self.k * self.theta0.cos().abs()
    }

    pub fn left_incident(&self) -> bool {
        self.theta0.cos() > 0.0
    }
}

/// `𝔰(θ, θ₀) = sin θ − sin θ₀`.
pub fn s_factor(theta: f64, theta0: f64) -> f64 {
    theta.sin() - theta0.sin()
}

/// `𝔠(θ, θ₀) = cos θ − cos θ₀`.
pub fn c_factor(theta: f64, theta0: f64) -> f64 {
    theta.cos() - theta0.cos()
}

/// Truncation order of the low-frequency expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Order {
    First,
    Second,
}

impl Order {
    pub fn as_u8(self) -> u8 {
        match self {
            Order::First => 1,
            Order::Second => 2,
        }
    }
}

impl TryFrom<u8> for Order {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Order::First),
            2 => Ok(Order::Second),
            other => Err(Error::InvalidConfig(format!("order must be 1 or 2, got {other}"))),
        }
    }
}

impl From<Order> for u8 {
    fn from(o: Order) -> u8 {
        o.as_u8()
    }
}

/// Coefficients and truncated amplitude at one detector angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeResult2D {
    pub f1: Complex64,
    /// Present when the second order was requested.
    pub f2: Option<Complex64>,
    pub truncated: Complex64,
    pub order: Order,
}

impl AmplitudeResult2D {
    pub(crate) fn assemble(f1: Complex64, f2: Option<Complex64>, k_ell: f64, order: Order) -> Self {
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

/// Evaluates 2D amplitude coefficients for one profile and configuration,
/// sharing moment caches across detector angles.
#[derive(Debug)]
pub struct Amplitude2D {
    config: ScatteringConfig2D,
    numerics: NumericsConfig,
    m0: MomentTable,
    m1: MomentTable,
}

impl Amplitude2D {
    pub fn new(
        profile: Arc<dyn Profile2D>,
        config: ScatteringConfig2D,
        numerics: NumericsConfig,
    ) -> Result<Self> {
        config.validate()?;
        numerics.validate()?;
        Ok(Self {
            m0: MomentTable::new(profile.clone(), 0, config.k, numerics)?,
            m1: MomentTable::new(profile, 1, config.k, numerics)?,
            config,
            numerics,
        })
    }

    pub fn config(&self) -> &ScatteringConfig2D {
        &self.config
    }

    fn prefactor(&self) -> f64 {
        self.config.k / (2.0 * (2.0 * PI).sqrt())
    }

    /// `w̄̃₀` at momentum transfer `k𝔰(θ, θ₀)`.
    pub fn w0(&self, p: f64) -> Result<Complex64> {
        self.m0.value_at(p)
    }

    pub fn w1(&self, p: f64) -> Result<Complex64> {
        self.m1.value_at(p)
    }

    pub fn f1(&self, theta: f64) -> Result<Complex64> {
        check_angle(theta)?;
        let k = self.config.k;
        Ok(self.w0(k * s_factor(theta, self.config.theta0))? * self.prefactor())
    }

    /// Integrand of the bilinear term: `w̄̃₀(k𝔰(θ,φ)) w̄̃₀(k𝔰(φ,θ₀))`.
    pub fn second_order_integrand(&self, theta: f64, phi: f64) -> Result<Complex64> {
        let k = self.config.k;
        Ok(self.w0(k * s_factor(theta, phi))? * self.w0(k * s_factor(phi, self.config.theta0))?)
    }

    /// The two pieces of `𝔣⁽²⁾`: the part linear in `w` and the bilinear part.
    pub fn f2_terms(&self, theta: f64) -> Result<(Complex64, Complex64)> {
        check_angle(theta)?;
        let k = self.config.k;
        let theta0 = self.config.theta0;
        let pre = Complex64::new(0.0, self.prefactor());
        let linear = pre * self.w1(k * s_factor(theta, theta0))? * (-c_factor(theta, theta0));
        let mut failure = None;
        let integral = integrate_1d(
            |phi| match self.second_order_integrand(theta, phi) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                }
            },
            -PI / 2.0,
            PI / 2.0,
            &self.numerics.quadrature,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let bilinear = pre * integral? * (k / (4.0 * PI));
        Ok((linear, bilinear))
    }

    pub fn f2(&self, theta: f64) -> Result<Complex64> {
        let (a, b) = self.f2_terms(theta)?;
        Ok(a + b)
    }

    pub fn amplitude(&self, theta: f64, order: Order) -> Result<AmplitudeResult2D> {
        let f1 = self.f1(theta)?;
        let f2 = match order {
            Order::First => None,
            Order::Second => Some(self.f2(theta)?),
        };
        Ok(AmplitudeResult2D::assemble(f1, f2, self.config.k_ell(), order))
    }

    pub fn cross_section(&self, theta: f64, order: Order) -> Result<f64> {
        Ok(self.amplitude(theta, order)?.cross_section())
    }
}

/// `𝔣⁽¹⁾(θ) = k/(2√(2π)) · w̄̃₀(k𝔰(θ, θ₀))`.
pub fn f1_2d(
    profile: Arc<dyn Profile2D>,
    config: &ScatteringConfig2D,
    theta: f64,
    numerics: &NumericsConfig,
) -> Result<Complex64> {
    Amplitude2D::new(profile, *config, *numerics)?.f1(theta)
}

/// `𝔣⁽²⁾(θ)`, with the φ-integral over the propagating range done adaptively.
pub fn f2_2d(
    profile: Arc<dyn Profile2D>,
    config: &ScatteringConfig2D,
    theta: f64,
    numerics: &NumericsConfig,
) -> Result<Complex64> {
    Amplitude2D::new(profile, *config, *numerics)?.f2(theta)
}

pub fn amplitude_2d(
    profile: Arc<dyn Profile2D>,
    config: &ScatteringConfig2D,
    theta: f64,
    order: Order,
    numerics: &NumericsConfig,
) -> Result<AmplitudeResult2D> {
    Amplitude2D::new(profile, *config, *numerics)?.amplitude(theta, order)
}

/// `|𝔣|²` of the truncated amplitude.
pub fn cross_section_2d(
    profile: Arc<dyn Profile2D>,
    config: &ScatteringConfig2D,
    theta: f64,
    order: Order,
    numerics: &NumericsConfig,
) -> Result<f64> {
    Ok(amplitude_2d(profile, config, theta, order, numerics)?.cross_section())
}
