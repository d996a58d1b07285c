//! Profiles whose transverse spectrum vanishes below a threshold `α`.
//!
//! For `k ≤ α` the first Born approximation is exact for them, so the full
//! amplitude is available in closed form and serves as an oracle for the
//! low-frequency expansion.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amp2d::{c_factor, check_angle, s_factor, ScatteringConfig2D};
use crate::error::{Error, Result};
use crate::numerics::{heaviside, integrate_1d_points, NumericsConfig, SampledSignal1d};
use crate::profiles::{Profile2D, SeparableProfile};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Sampling used to confirm the one-sided spectrum of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportCheck {
    pub x_samples: usize,
    pub p_samples: usize,
    /// The check covers `p ∈ [α − p_span, α]`.
    pub p_span: f64,
    /// Allowed magnitude relative to the largest sampled `|w̃|` above `α`.
    pub rel_tol: f64,
    pub numerics: NumericsConfig,
}

impl SupportCheck {
    pub fn for_alpha(alpha: f64) -> Self {
        Self {
            x_samples: 5,
            p_samples: 33,
            p_span: 4.0 * alpha.abs().max(1e-300),
            rel_tol: 1e-10,
            numerics: NumericsConfig::default(),
        }
    }
}

fn transform_at(
    profile: &dyn Profile2D,
    x: f64,
    ps: &[f64],
    k: f64,
    numerics: &NumericsConfig,
) -> Result<Vec<Complex64>> {
    if profile.transform(x, 0.0, k).is_some() {
        return Ok(ps
            .iter()
            .map(|&p| profile.transform(x, p, k).unwrap_or(ZERO))
            .collect());
    }
    let signal = SampledSignal1d::new(|y| profile.w(x, y, k), profile.decay_radius(), &numerics.transform)?;
    Ok(ps.iter().map(|&p| signal.transform(p)).collect())
}

/// True when `|w̃(x̌, p; k)|` is negligible for all sampled `p ≤ α`.
pub fn is_born_exact(profile: &dyn Profile2D, alpha: f64, k: f64, check: &SupportCheck) -> Result<bool> {
    if check.x_samples < 1 || check.p_samples < 2 {
        return Err(Error::InvalidConfig("support check needs samples".into()));
    }
    let below: Vec<f64> = (0..check.p_samples)
        .map(|j| alpha - check.p_span * j as f64 / (check.p_samples - 1) as f64)
        .collect();
    let above: Vec<f64> = (1..check.p_samples)
        .map(|j| alpha + check.p_span * j as f64 / (check.p_samples - 1) as f64)
        .collect();
    let mut worst_below: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..check.x_samples {
        let x = if check.x_samples == 1 {
            0.5
        } else {
            i as f64 / (check.x_samples - 1) as f64
        };
        for v in transform_at(profile, x, &below, k, &check.numerics)? {
            worst_below = worst_below.max(v.norm());
        }
        for v in transform_at(profile, x, &above, k, &check.numerics)? {
            scale = scale.max(v.norm());
        }
    }
    if worst_below == 0.0 {
        return Ok(true);
    }
    Ok(worst_below <= check.rel_tol * scale)
}

/// A profile certified to satisfy `w̃(x̌, p; k) = 0` for `p ≤ α`.
#[derive(Debug, Clone)]
pub struct BornExactProfile {
    base: Arc<dyn Profile2D>,
    alpha: f64,
}

impl BornExactProfile {
    pub fn new(base: Arc<dyn Profile2D>, alpha: f64, k: f64, check: &SupportCheck) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!("alpha must be positive, got {alpha}")));
        }
        if !is_born_exact(base.as_ref(), alpha, k, check)? {
            return Err(Error::ProfileDefinition(format!(
                "{} has spectral weight at p <= {alpha}",
                base.descriptor()
            )));
        }
        Ok(Self { base, alpha })
    }

    pub fn ex1(params: &Ex1Params) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            base: Arc::new(params.profile()?),
            alpha: params.alpha,
        })
    }

    pub fn base(&self) -> &Arc<dyn Profile2D> {
        &self.base
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// 2D transform of `v = k²(1 − ε̂)`:
/// `−k² ∫₀^ℓ e^{−ixpₓ} w̃(x/ℓ, p_y) dx`.
pub fn ttv(
    profile: &dyn Profile2D,
    px: f64,
    py: f64,
    k: f64,
    ell: f64,
    numerics: &NumericsConfig,
) -> Result<Complex64> {
    let phase = |x: f64| Complex64::from_polar(1.0, -ell * px * x);
    let points = profile.x_breakpoints(0.0, k);
    let integral = if profile.transform(0.5, py, k).is_some() {
        integrate_1d_points(
            |x| phase(x) * profile.transform(x, py, k).unwrap_or(ZERO),
            0.0,
            1.0,
            &points,
            &numerics.quadrature,
        )?
    } else {
        let quad = numerics.quadrature;
        let mut failure = None;
        let signal = SampledSignal1d::new(
            |y| {
                let pts = profile.x_breakpoints(y, k);
                match integrate_1d_points(|x| phase(x) * profile.w(x, y, k), 0.0, 1.0, &pts, &quad) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        ZERO
                    }
                }
            },
            profile.decay_radius(),
            &numerics.transform.with_edge_floor(quad.abs_tol),
        );
        if let Some(e) = failure {
            return Err(e.into());
        }
        signal?.transform(py)
    };
    Ok(integral * (-k * k * ell))
}

/// Exact amplitude `𝔣(θ) = −ṽ̃(k𝔠, k𝔰)/(2√(2π))`, valid only for `k ≤ α`.
pub fn exact_amplitude(
    profile: &BornExactProfile,
    config: &ScatteringConfig2D,
    theta: f64,
    numerics: &NumericsConfig,
) -> Result<Complex64> {
    config.validate()?;
    check_angle(theta)?;
    if config.k > profile.alpha {
        return Err(Error::OutOfValidity {
            k: config.k,
            alpha: profile.alpha,
        });
    }
    let (k, theta0) = (config.k, config.theta0);
    let v = ttv(
        profile.base.as_ref(),
        k * c_factor(theta, theta0),
        k * s_factor(theta, theta0),
        k,
        config.ell,
        numerics,
    )?;
    Ok(-v / (2.0 * (2.0 * PI).sqrt()))
}

/// Parameters of `w = 𝔷 e^{iαy}/(y/L + i)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ex1Params {
    pub z: Complex64,
    pub alpha: f64,
    #[serde(rename = "L")]
    pub width: f64,
}

impl Ex1Params {
    pub fn new(z: Complex64, alpha: f64, width: f64) -> Result<Self> {
        let p = Self { z, alpha, width };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::InvalidConfig(format!("L must be positive, got {}", self.width)));
        }
        Ok(())
    }

    pub fn profile(&self) -> Result<SeparableProfile> {
        SeparableProfile::ex1(self.z, self.alpha, self.width)
    }
}

/// `(1 − e^{−iu})/(iu)`, with a series branch near `u = 0`.
fn phase_bracket(u: f64) -> Complex64 {
    if u.abs() < 1e-4 {
        // Σ (−iu)ⁿ/(n+1)!
        let z = Complex64::new(0.0, -u);
        Complex64::new(1.0, 0.0) + z / 2.0 + z * z / 6.0 + z * z * z / 24.0
    } else {
        (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -u)) / Complex64::new(0.0, u)
    }
}

/// Closed-form exact amplitude of the ex1 profile for `k ≤ α`:
/// `[i(e^{−ikℓ𝔠} − 1)/𝔠] 𝔣⁽¹⁾`.
pub fn ex1_exact(params: &Ex1Params, config: &ScatteringConfig2D, theta: f64) -> Result<Complex64> {
    params.validate()?;
    config.validate()?;
    check_angle(theta)?;
    if config.k > params.alpha {
        return Err(Error::OutOfValidity {
            k: config.k,
            alpha: params.alpha,
        });
    }
    let u = config.k_ell() * c_factor(theta, config.theta0);
    Ok(phase_bracket(u) * config.k_ell() * ex1_f1(params, config, theta))
}

/// Closed-form `𝔣⁽¹⁾` of the ex1 profile.
pub fn ex1_f1(params: &Ex1Params, config: &ScatteringConfig2D, theta: f64) -> Complex64 {
    let kk = config.k * params.width;
    let d = s_factor(theta, config.theta0) - params.alpha / config.k;
    if heaviside(d) == 0.0 {
        return ZERO;
    }
    params.z * (-(PI / 2.0).sqrt() * kk * kk * d * (-kk * d).exp())
}

/// Closed-form `𝔣⁽²⁾` of the ex1 profile, including the `𝒳` term that
/// survives only for `k > α`.
pub fn ex1_f2(params: &Ex1Params, config: &ScatteringConfig2D, theta: f64) -> Complex64 {
    let theta0 = config.theta0;
    let kk = config.k * params.width;
    let xi = params.alpha / config.k;
    let x = x_function(theta.sin(), theta0.sin(), xi);
    let second = if x == 0.0 {
        ZERO
    } else {
        params.z
            * params.z
            * ((PI / 2.0).sqrt() * kk.powi(4) * (kk * (2.0 * xi - s_factor(theta, theta0))).exp() * x)
    };
    Complex64::new(0.0, 0.5) * (-ex1_f1(params, config, theta) * c_factor(theta, theta0) + second)
}

/// `𝒳(ς, ς₀, ξ)`: the φ-integral of `(ξ − ς + sin φ)(ξ + ς₀ − sin φ)` over
/// `sin φ ∈ [ς₀ + ξ, ς − ξ]`, in closed form.
pub fn x_function(s: f64, s0: f64, xi: f64) -> f64 {
    let gate = heaviside(s - s0 - 2.0 * xi) * heaviside(s - xi + 1.0) * heaviside(1.0 - xi - s0);
    if gate == 0.0 {
        return 0.0;
    }
    let a = (s - xi).clamp(-1.0, 1.0);
    let b = (s0 + xi).clamp(-1.0, 1.0);
    let ra = (1.0 - a * a).max(0.0).sqrt();
    let rb = (1.0 - b * b).max(0.0).sqrt();
    0.5 * ((2.0 * (xi - s) * (xi + s0) - 1.0) * (a.asin() - b.asin())
        + 2.0 * (s + s0) * (rb - ra)
        + a * ra
        - b * rb)
}
