//! Slab permittivity deviations `w = ε̂ − 1` in 2D and 3D, their transverse
//! Fourier transforms, and the longitudinal moments every amplitude formula
//! is built from.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, NumericsError, Result};
use crate::numerics::{
    heaviside, integrate_1d_points, NumericsConfig, QuadratureSpec, SampledSignal1d,
    SampledSignal2d, TransformScheme,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn unit_interval(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

/// A 2D slab profile `w(x̌, y; k)` over the unit-scaled thickness `x̌ ∈ [0, 1]`.
pub trait Profile2D: Send + Sync + fmt::Debug {
    /// Raw value for `x̌ ∈ [0, 1]`; callers should go through [`Profile2D::w`].
    fn eval(&self, x: f64, y: f64, k: f64) -> Complex64;

    /// `w` with the zero convention outside the slab.
    fn w(&self, x: f64, y: f64, k: f64) -> Complex64 {
        if unit_interval(x) {
            self.eval(x, y, k)
        } else {
            ZERO
        }
    }

    /// Closed-form `w̃(x̌, p; k) = ∫ e^{-ipy} w dy`, when known.
    fn transform(&self, _x: f64, _p: f64, _k: f64) -> Option<Complex64> {
        None
    }

    /// Closed-form moment `∫₀¹ x̌ˡ w̃(x̌, p; k) dx̌`, when known.
    fn moment_transform(&self, _l: u8, _p: f64, _k: f64) -> Option<Complex64> {
        None
    }

    /// Closed-form `∫ e^{-ipy} w(x̌₁, y) w(x̌₂, y) dy`, when known.
    fn product_transform(&self, _x1: f64, _x2: f64, _p: f64, _k: f64) -> Option<Complex64> {
        None
    }

    /// Transverse distance beyond which `w` is negligible.
    fn decay_radius(&self) -> f64;

    fn descriptor(&self) -> String;

    /// Interior points of `[0, 1]` where `w(·, y)` jumps or kinks.
    fn x_breakpoints(&self, _y: f64, _k: f64) -> Vec<f64> {
        Vec::new()
    }
}

/// A 3D slab profile `w(r⃗, ž; k)` over `ž ∈ [0, 1]`.
pub trait Profile3D: Send + Sync + fmt::Debug {
    fn eval(&self, x: f64, y: f64, z: f64, k: f64) -> Complex64;

    fn w(&self, x: f64, y: f64, z: f64, k: f64) -> Complex64 {
        if unit_interval(z) {
            self.eval(x, y, z, k)
        } else {
            ZERO
        }
    }

    fn transform(&self, _px: f64, _py: f64, _z: f64, _k: f64) -> Option<Complex64> {
        None
    }

    fn moment_transform(&self, _l: u8, _px: f64, _py: f64, _k: f64) -> Option<Complex64> {
        None
    }

    fn decay_radius(&self) -> f64;

    fn descriptor(&self) -> String;
}

/// Longitudinal dependence of a separable profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum XFactor {
    /// `Σ cᵢ x̌ⁱ`.
    Polynomial { coefficients: Vec<f64> },
    /// Piecewise constant: `values[i]` on `(edges[i], edges[i+1]]` with implied
    /// outer edges 0 and 1.
    Layers { edges: Vec<f64>, values: Vec<f64> },
}

impl XFactor {
    pub fn constant() -> Self {
        XFactor::Polynomial {
            coefficients: vec![1.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            XFactor::Polynomial { coefficients } => {
                if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
                    return Err(Error::ProfileDefinition(
                        "polynomial needs finite coefficients".into(),
                    ));
                }
            }
            XFactor::Layers { edges, values } => {
                if values.len() != edges.len() + 1 {
                    return Err(Error::ProfileDefinition(format!(
                        "{} interior edges need {} layer values, got {}",
                        edges.len(),
                        edges.len() + 1,
                        values.len()
                    )));
                }
                let mut last = 0.0;
                for &e in edges {
                    if !(e > last && e < 1.0) {
                        return Err(Error::ProfileDefinition(
                            "layer edges must increase strictly inside (0, 1)".into(),
                        ));
                    }
                    last = e;
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::ProfileDefinition("layer values must be finite".into()));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            XFactor::Polynomial { coefficients } => {
                coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
            }
            XFactor::Layers { edges, values } => {
                let idx = edges.iter().take_while(|&&e| x > e).count();
                values[idx]
            }
        }
    }

    /// `∫₀¹ x̌ˡ X(x̌) dx̌`.
    pub fn moment(&self, l: u8) -> f64 {
        let l = i32::from(l);
        match self {
            XFactor::Polynomial { coefficients } => coefficients
                .iter()
                .enumerate()
                .map(|(i, c)| c / f64::from(i as i32 + l + 1))
                .sum(),
            XFactor::Layers { edges, values } => {
                let mut bounds = vec![0.0];
                bounds.extend(edges.iter().copied());
                bounds.push(1.0);
                let n = f64::from(l + 1);
                bounds
                    .windows(2)
                    .zip(values)
                    .map(|(w, v)| v * (w[1].powi(l + 1) - w[0].powi(l + 1)) / n)
                    .sum()
            }
        }
    }

    /// `∫₀¹ dx̌₂ ∫₀^{x̌₂} dx̌₁ (x̌₂ − x̌₁) X(x̌₁) X(x̌₂)` for polynomial factors.
    fn ordered_pair_moment(&self) -> Option<f64> {
        match self {
            XFactor::Polynomial { coefficients } => {
                // ∫₀¹∫₀^{b} (b − a) aⁱ bʲ da db = 1/((i+1)(i+2)(i+j+3))
                let mut total = 0.0;
                for (i, ci) in coefficients.iter().enumerate() {
                    for (j, cj) in coefficients.iter().enumerate() {
                        let (i, j) = (i as f64, j as f64);
                        total += ci * cj / ((i + 1.0) * (i + 2.0) * (i + j + 3.0));
                    }
                }
                Some(total)
            }
            XFactor::Layers { .. } => None,
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            XFactor::Polynomial { .. } => Vec::new(),
            XFactor::Layers { edges, .. } => edges.clone(),
        }
    }
}

/// Transverse dependence of a separable profile; every shape has a closed-form transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum YShape {
    /// `e^{-y²/2L²}`.
    Gaussian { width: f64 },
    /// `e^{iαy}/(y/L + i)²`, whose spectrum lives on `p > α`.
    Ex1 { alpha: f64, width: f64 },
    /// `1/(1 + y²/L²)`.
    Lorentzian { width: f64 },
}

impl YShape {
    fn width(&self) -> f64 {
        match *self {
            YShape::Gaussian { width }
            | YShape::Ex1 { width, .. }
            | YShape::Lorentzian { width } => width,
        }
    }

    fn validate(&self) -> Result<()> {
        let width = self.width();
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::ProfileDefinition(format!(
                "shape width must be positive, got {width}"
            )));
        }
        if let YShape::Ex1 { alpha, .. } = *self {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::ProfileDefinition(format!(
                    "alpha must be positive, got {alpha}"
                )));
            }
        }
        Ok(())
    }

    pub fn eval(&self, y: f64) -> Complex64 {
        match *self {
            YShape::Gaussian { width } => Complex64::new((-0.5 * (y / width).powi(2)).exp(), 0.0),
            YShape::Ex1 { alpha, width } => {
                Complex64::from_polar(1.0, alpha * y) / Complex64::new(y / width, 1.0).powi(2)
            }
            YShape::Lorentzian { width } => Complex64::new(1.0 / (1.0 + (y / width).powi(2)), 0.0),
        }
    }

    pub fn transform(&self, p: f64) -> Complex64 {
        match *self {
            YShape::Gaussian { width } => {
                Complex64::new((2.0 * PI).sqrt() * width * (-0.5 * (width * p).powi(2)).exp(), 0.0)
            }
            YShape::Ex1 { alpha, width } => {
                let d = alpha - p;
                // Θ(L(p − α)) with Θ(0) = 1; the prefactor (α − p) vanishes there anyway.
                let gate = heaviside(width * (p - alpha));
                if gate == 0.0 {
                    ZERO
                } else {
                    Complex64::new(2.0 * PI * width * width * d * (width * d).exp(), 0.0)
                }
            }
            YShape::Lorentzian { width } => {
                Complex64::new(PI * width * (-width * p.abs()).exp(), 0.0)
            }
        }
    }

    /// Transform of the squared shape, used by the third-order kernel.
    fn square_transform(&self, p: f64) -> Option<Complex64> {
        match *self {
            YShape::Gaussian { width } => YShape::Gaussian {
                width: width / 2f64.sqrt(),
            }
            .transform(p)
            .into(),
            YShape::Ex1 { alpha, width } => {
                // e^{2iαy}/(y/L+i)⁴: residue at y = −iL gives a one-sided spectrum.
                let d = p - 2.0 * alpha;
                if d < 0.0 {
                    Some(ZERO)
                } else {
                    let l4 = width.powi(4);
                    Some(Complex64::new(
                        2.0 * PI * l4 * d.powi(3) * (-width * d).exp() / 6.0,
                        0.0,
                    ))
                }
            }
            YShape::Lorentzian { .. } => None,
        }
    }

    fn decay_radius(&self) -> f64 {
        match *self {
            YShape::Gaussian { width } => 10.0 * width,
            YShape::Ex1 { width, .. } => 4.0e4 * width,
            YShape::Lorentzian { width } => 1.0e5 * width,
        }
    }
}

/// `w(x̌, y) = scale · X(x̌) · Y(y)`, k-independent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableProfile {
    pub x_factor: XFactor,
    pub y_shape: YShape,
    pub scale: Complex64,
    #[serde(default)]
    pub decay_radius: Option<f64>,
}

impl SeparableProfile {
    pub fn new(x_factor: XFactor, y_shape: YShape, scale: Complex64) -> Result<Self> {
        x_factor.validate()?;
        y_shape.validate()?;
        if !(scale.re.is_finite() && scale.im.is_finite()) {
            return Err(Error::ProfileDefinition("scale must be finite".into()));
        }
        Ok(Self {
            x_factor,
            y_shape,
            scale,
            decay_radius: None,
        })
    }

    /// The Born-exact example `𝔷 e^{iαy}/(y/L + i)²`.
    pub fn ex1(z: Complex64, alpha: f64, width: f64) -> Result<Self> {
        Self::new(XFactor::constant(), YShape::Ex1 { alpha, width }, z)
    }

    /// Homogeneous-in-x̌ slab with a Gaussian transverse modulation, `𝔷₀ e^{-y²/2L²}`.
    pub fn gaussian_slab(z0: f64, width: f64) -> Result<Self> {
        Self::new(
            XFactor::constant(),
            YShape::Gaussian { width },
            Complex64::new(z0, 0.0),
        )
    }

    pub fn with_decay_radius(mut self, radius: f64) -> Self {
        self.decay_radius = Some(radius);
        self
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.scale *= c;
        out
    }

    fn is_x_constant(&self) -> bool {
        matches!(&self.x_factor, XFactor::Polynomial { coefficients } if coefficients.len() == 1)
    }
}

impl Profile2D for SeparableProfile {
    fn eval(&self, x: f64, y: f64, _k: f64) -> Complex64 {
        self.scale * self.x_factor.eval(x) * self.y_shape.eval(y)
    }

    fn transform(&self, x: f64, p: f64, _k: f64) -> Option<Complex64> {
        Some(self.scale * self.x_factor.eval(x) * self.y_shape.transform(p))
    }

    fn moment_transform(&self, l: u8, p: f64, _k: f64) -> Option<Complex64> {
        Some(self.scale * self.x_factor.moment(l) * self.y_shape.transform(p))
    }

    fn product_transform(&self, x1: f64, x2: f64, p: f64, _k: f64) -> Option<Complex64> {
        let sq = self.y_shape.square_transform(p)?;
        Some(self.scale * self.scale * self.x_factor.eval(x1) * self.x_factor.eval(x2) * sq)
    }

    fn decay_radius(&self) -> f64 {
        self.decay_radius.unwrap_or_else(|| self.y_shape.decay_radius())
    }

    fn descriptor(&self) -> String {
        let shape = match self.y_shape {
            YShape::Gaussian { width } => format!("gaussian(L={width})"),
            YShape::Ex1 { alpha, width } => format!("ex1(alpha={alpha}, L={width})"),
            YShape::Lorentzian { width } => format!("lorentzian(L={width})"),
        };
        if self.is_x_constant() {
            format!("{} * {shape}", self.scale)
        } else {
            format!("{} * X(x) * {shape}", self.scale)
        }
    }

    fn x_breakpoints(&self, _y: f64, _k: f64) -> Vec<f64> {
        self.x_factor.breakpoints()
    }
}

impl SeparableProfile {
    /// `∫∫_{x̌₁<x̌₂} (x̌₂ − x̌₁) Q̃(x̌₁, x̌₂, p)` in closed form, when available.
    pub fn ordered_pair_transform(&self, p: f64) -> Option<Complex64> {
        let xm = self.x_factor.ordered_pair_moment()?;
        let sq = self.y_shape.square_transform(p)?;
        Some(self.scale * self.scale * xm * sq)
    }
}

/// `w ≡ 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ZeroProfile;

impl Profile2D for ZeroProfile {
    fn eval(&self, _x: f64, _y: f64, _k: f64) -> Complex64 {
        ZERO
    }
    fn transform(&self, _x: f64, _p: f64, _k: f64) -> Option<Complex64> {
        Some(ZERO)
    }
    fn moment_transform(&self, _l: u8, _p: f64, _k: f64) -> Option<Complex64> {
        Some(ZERO)
    }
    fn product_transform(&self, _x1: f64, _x2: f64, _p: f64, _k: f64) -> Option<Complex64> {
        Some(ZERO)
    }
    fn decay_radius(&self) -> f64 {
        1.0
    }
    fn descriptor(&self) -> String {
        "zero".into()
    }
}

type ProfileFn = dyn Fn(f64, f64, f64) -> Complex64 + Send + Sync;

/// A profile given by an arbitrary closure; every transform is numeric.
#[derive(Clone)]
pub struct FnProfile {
    label: String,
    decay_radius: f64,
    breakpoints: Vec<f64>,
    f: Arc<ProfileFn>,
}

impl FnProfile {
    pub fn new<F>(label: impl Into<String>, decay_radius: f64, f: F) -> Self
    where
        F: Fn(f64, f64, f64) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            decay_radius,
            breakpoints: Vec::new(),
            f: Arc::new(f),
        }
    }

    pub fn with_breakpoints(mut self, points: Vec<f64>) -> Self {
        self.breakpoints = points;
        self
    }
}

impl fmt::Debug for FnProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnProfile")
            .field("label", &self.label)
            .field("decay_radius", &self.decay_radius)
            .finish()
    }
}

impl Profile2D for FnProfile {
    fn eval(&self, x: f64, y: f64, k: f64) -> Complex64 {
        (self.f)(x, y, k)
    }
    fn decay_radius(&self) -> f64 {
        self.decay_radius
    }
    fn descriptor(&self) -> String {
        self.label.clone()
    }
    fn x_breakpoints(&self, _y: f64, _k: f64) -> Vec<f64> {
        self.breakpoints.clone()
    }
}

/// A profile tabulated on a uniform `(x̌, y)` grid, bilinearly interpolated
/// and zero outside the tabulated `y` range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledProfile {
    pub nx: usize,
    pub ny: usize,
    pub y_min: f64,
    pub y_max: f64,
    /// Row-major in `x̌`: `values[i * ny + j] = w(x̌ᵢ, yⱼ)`.
    pub values: Vec<Complex64>,
}

impl SampledProfile {
    pub fn new(nx: usize, ny: usize, y_min: f64, y_max: f64, values: Vec<Complex64>) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::ProfileDefinition("sampled grid needs at least 2x2 nodes".into()));
        }
        if values.len() != nx * ny {
            return Err(Error::ProfileDefinition(format!(
                "expected {} samples, got {}",
                nx * ny,
                values.len()
            )));
        }
        if !(y_max > y_min) || !y_min.is_finite() || !y_max.is_finite() {
            return Err(Error::ProfileDefinition("y range must be nonempty and finite".into()));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::ProfileDefinition("samples must be finite".into()));
        }
        Ok(Self {
            nx,
            ny,
            y_min,
            y_max,
            values,
        })
    }

    pub fn from_fn<F: Fn(f64, f64) -> Complex64>(
        nx: usize,
        ny: usize,
        y_min: f64,
        y_max: f64,
        f: F,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            let x = i as f64 / (nx - 1) as f64;
            for j in 0..ny {
                let y = y_min + (y_max - y_min) * j as f64 / (ny - 1) as f64;
                values.push(f(x, y));
            }
        }
        Self::new(nx, ny, y_min, y_max, values)
    }
}

impl Profile2D for SampledProfile {
    fn eval(&self, x: f64, y: f64, _k: f64) -> Complex64 {
        if y < self.y_min || y > self.y_max {
            return ZERO;
        }
        let fx = x * (self.nx - 1) as f64;
        let fy = (y - self.y_min) / (self.y_max - self.y_min) * (self.ny - 1) as f64;
        let i = (fx.floor() as usize).min(self.nx - 2);
        let j = (fy.floor() as usize).min(self.ny - 2);
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        let v = |a: usize, b: usize| self.values[a * self.ny + b];
        v(i, j) * ((1.0 - tx) * (1.0 - ty))
            + v(i + 1, j) * (tx * (1.0 - ty))
            + v(i, j + 1) * ((1.0 - tx) * ty)
            + v(i + 1, j + 1) * (tx * ty)
    }
    fn decay_radius(&self) -> f64 {
        self.y_min.abs().max(self.y_max.abs()) * 1.01
    }
    fn descriptor(&self) -> String {
        format!("sampled({}x{}, y in [{}, {}])", self.nx, self.ny, self.y_min, self.y_max)
    }
    fn x_breakpoints(&self, _y: f64, _k: f64) -> Vec<f64> {
        (1..self.nx - 1).map(|i| i as f64 / (self.nx - 1) as f64).collect()
    }
}

/// On-disk profile definition: `{type, params, decay_radius}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default)]
    pub params: serde_json::Value,
    #[serde(default)]
    pub decay_radius: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct Ex1Json {
    z: ComplexJson,
    alpha: f64,
    width: f64,
}

#[derive(Debug, Deserialize)]
struct GaussianJson {
    z0: ComplexJson,
    width: f64,
}

#[derive(Debug, Deserialize)]
struct SampledJson {
    nx: usize,
    ny: usize,
    y_min: f64,
    y_max: f64,
    re: Vec<f64>,
    #[serde(default)]
    im: Vec<f64>,
}

/// A complex number written either as a plain real or as `[re, im]`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum ComplexJson {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexJson> for Complex64 {
    fn from(c: ComplexJson) -> Self {
        match c {
            ComplexJson::Real(r) => Complex64::new(r, 0.0),
            ComplexJson::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

impl ProfileSpec {
    /// Builds the described profile. Catalog names: `zero`, `ex1`,
    /// `gaussian_slab`, `separable`, `sampled`.
    pub fn build(&self) -> Result<Arc<dyn Profile2D>> {
        let bad = |e: serde_json::Error| Error::ProfileDefinition(format!("{}: {e}", self.kind));
        let radius = |p: SeparableProfile| match self.decay_radius {
            Some(r) => p.with_decay_radius(r),
            None => p,
        };
        let profile: Arc<dyn Profile2D> = match self.kind.as_str() {
            "zero" => Arc::new(ZeroProfile),
            "ex1" => {
                let p: Ex1Json = serde_json::from_value(self.params.clone()).map_err(bad)?;
                Arc::new(radius(SeparableProfile::ex1(p.z.into(), p.alpha, p.width)?))
            }
            "gaussian_slab" => {
                let p: GaussianJson = serde_json::from_value(self.params.clone()).map_err(bad)?;
                let g = SeparableProfile::new(
                    XFactor::constant(),
                    YShape::Gaussian { width: p.width },
                    p.z0.into(),
                )?;
                Arc::new(radius(g))
            }
            "separable" => {
                let p: SeparableProfile =
                    serde_json::from_value(self.params.clone()).map_err(bad)?;
                let checked = SeparableProfile::new(p.x_factor, p.y_shape, p.scale)?;
                Arc::new(radius(checked))
            }
            "sampled" => {
                let p: SampledJson = serde_json::from_value(self.params.clone()).map_err(bad)?;
                let im = if p.im.is_empty() { vec![0.0; p.re.len()] } else { p.im };
                if im.len() != p.re.len() {
                    return Err(Error::ProfileDefinition(
                        "sampled re and im arrays differ in length".into(),
                    ));
                }
                let values = p.re.iter().zip(&im).map(|(&r, &i)| Complex64::new(r, i)).collect();
                Arc::new(SampledProfile::new(p.nx, p.ny, p.y_min, p.y_max, values)?)
            }
            other => {
                return Err(Error::ProfileDefinition(format!("unknown profile type {other:?}")))
            }
        };
        Ok(profile)
    }
}

fn check_order(l: u8, max: u8) -> Result<()> {
    if l > max {
        Err(Error::MomentOrder(l))
    } else {
        Ok(())
    }
}

/// `w̄ₗ(y; k) = ∫₀¹ x̌ˡ w(x̌, y; k) dx̌` at fixed `y`.
pub fn spatial_moment_y(
    profile: &dyn Profile2D,
    l: u8,
    y: f64,
    k: f64,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    check_order(l, 2)?;
    let points = profile.x_breakpoints(y, k);
    let li = i32::from(l);
    Ok(integrate_1d_points(
        |x| profile.w(x, y, k) * x.powi(li),
        0.0,
        1.0,
        &points,
        spec,
    )?)
}

/// `w̄̃ₗ(p; k)` for a given profile and order, with the numeric fallback
/// sampled once and cached.
///
/// The numeric path forms the spatial moment `w̄ₗ(y)` on the sample grid first
/// and transforms it afterwards; by linearity this equals transforming
/// `w(x̌, ·)` and then integrating in `x̌`, at a fraction of the cost.
pub struct MomentTable {
    profile: Arc<dyn Profile2D>,
    l: u8,
    k: f64,
    numerics: NumericsConfig,
    signal: OnceLock<std::result::Result<SampledSignal1d, NumericsError>>,
    memo: Mutex<HashMap<u64, Complex64>>,
}

impl fmt::Debug for MomentTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MomentTable")
            .field("profile", &self.profile.descriptor())
            .field("l", &self.l)
            .field("k", &self.k)
            .finish()
    }
}

impl MomentTable {
    pub fn new(profile: Arc<dyn Profile2D>, l: u8, k: f64, numerics: NumericsConfig) -> Result<Self> {
        check_order(l, 2)?;
        numerics.validate()?;
        Ok(Self {
            profile,
            l,
            k,
            numerics,
            signal: OnceLock::new(),
            memo: Mutex::new(HashMap::new()),
        })
    }

    pub fn order(&self) -> u8 {
        self.l
    }

    fn analytic(&self, p: f64) -> Result<Option<Complex64>> {
        if self.numerics.transform.scheme == TransformScheme::Numeric {
            return Ok(None);
        }
        if let Some(v) = self.profile.moment_transform(self.l, p, self.k) {
            return Ok(Some(v));
        }
        if self.profile.transform(0.5, p, self.k).is_some() {
            let li = i32::from(self.l);
            let profile = &self.profile;
            let k = self.k;
            let points = profile.x_breakpoints(0.0, k);
            let v = integrate_1d_points(
                |x| profile.transform(x, p, k).unwrap_or(ZERO) * x.powi(li),
                0.0,
                1.0,
                &points,
                &self.numerics.quadrature,
            )?;
            return Ok(Some(v));
        }
        Ok(None)
    }

    fn sampled(&self) -> Result<&SampledSignal1d> {
        let signal = self.signal.get_or_init(|| {
            let profile = &self.profile;
            let quad = self.numerics.quadrature;
            let mut failure = None;
            let built = SampledSignal1d::new(
                |y| match spatial_moment_y(profile.as_ref(), self.l, y, self.k, &quad) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        ZERO
                    }
                },
                profile.decay_radius(),
                &self.numerics.transform.with_edge_floor(quad.abs_tol),
            );
            match failure {
                Some(Error::Numerics(e)) => Err(e),
                Some(other) => Err(NumericsError::InvalidSpec(other.to_string())),
                None => built,
            }
        });
        signal.as_ref().map_err(|e| Error::Numerics(e.clone()))
    }

    pub fn value_at(&self, p: f64) -> Result<Complex64> {
        if let Some(v) = self.analytic(p)? {
            return Ok(v);
        }
        let key = p.to_bits();
        if let Some(v) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(*v);
        }
        let v = self.sampled()?.transform(p);
        self.memo.lock().expect("memo lock").insert(key, v);
        Ok(v)
    }
}

/// One-shot `w̄̃ₗ(p; k)`; prefer [`MomentTable`] for repeated evaluation.
pub fn moment_2d(
    profile: Arc<dyn Profile2D>,
    l: u8,
    p: f64,
    k: f64,
    numerics: &NumericsConfig,
) -> Result<Complex64> {
    MomentTable::new(profile, l, k, *numerics)?.value_at(p)
}

/// `w(r⃗, ž) = 𝔷 e^{-r⃗²/2L²}` for `ž ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSlab3D {
    pub z: Complex64,
    pub width: f64,
}

impl GaussianSlab3D {
    pub fn new(z: Complex64, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::ProfileDefinition(format!(
                "width must be positive, got {width}"
            )));
        }
        Ok(Self { z, width })
    }

    fn spectrum(&self, px: f64, py: f64) -> Complex64 {
        let l2 = self.width * self.width;
        self.z * (2.0 * PI * l2 * (-0.5 * l2 * (px * px + py * py)).exp())
    }
}

impl Profile3D for GaussianSlab3D {
    fn eval(&self, x: f64, y: f64, _z: f64, _k: f64) -> Complex64 {
        self.z * (-(x * x + y * y) / (2.0 * self.width * self.width)).exp()
    }
    fn transform(&self, px: f64, py: f64, _z: f64, _k: f64) -> Option<Complex64> {
        Some(self.spectrum(px, py))
    }
    fn moment_transform(&self, l: u8, px: f64, py: f64, _k: f64) -> Option<Complex64> {
        Some(self.spectrum(px, py) / f64::from(l + 1))
    }
    fn decay_radius(&self) -> f64 {
        10.0 * self.width
    }
    fn descriptor(&self) -> String {
        format!("gaussian3d(z={}, L={})", self.z, self.width)
    }
}

/// `w ≡ 0` in 3D.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ZeroProfile3D;

impl Profile3D for ZeroProfile3D {
    fn eval(&self, _x: f64, _y: f64, _z: f64, _k: f64) -> Complex64 {
        ZERO
    }
    fn transform(&self, _px: f64, _py: f64, _z: f64, _k: f64) -> Option<Complex64> {
        Some(ZERO)
    }
    fn moment_transform(&self, _l: u8, _px: f64, _py: f64, _k: f64) -> Option<Complex64> {
        Some(ZERO)
    }
    fn decay_radius(&self) -> f64 {
        1.0
    }
    fn descriptor(&self) -> String {
        "zero3d".into()
    }
}

type Profile3Fn = dyn Fn(f64, f64, f64, f64) -> Complex64 + Send + Sync;

/// A 3D profile from a closure; transforms are numeric.
#[derive(Clone)]
pub struct FnProfile3D {
    label: String,
    decay_radius: f64,
    f: Arc<Profile3Fn>,
}

impl FnProfile3D {
    pub fn new<F>(label: impl Into<String>, decay_radius: f64, f: F) -> Self
    where
        F: Fn(f64, f64, f64, f64) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            decay_radius,
            f: Arc::new(f),
        }
    }
}

impl fmt::Debug for FnProfile3D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnProfile3D").field("label", &self.label).finish()
    }
}

impl Profile3D for FnProfile3D {
    fn eval(&self, x: f64, y: f64, z: f64, k: f64) -> Complex64 {
        (self.f)(x, y, z, k)
    }
    fn decay_radius(&self) -> f64 {
        self.decay_radius
    }
    fn descriptor(&self) -> String {
        self.label.clone()
    }
}

/// `w̄̃̃ₗ(p⃗; k) = ∫₀¹ žˡ w̃̃(p⃗, ž; k) dž`, cached like [`MomentTable`].
pub struct MomentTable3D {
    profile: Arc<dyn Profile3D>,
    l: u8,
    k: f64,
    numerics: NumericsConfig,
    signal: OnceLock<std::result::Result<SampledSignal2d, NumericsError>>,
}

impl fmt::Debug for MomentTable3D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MomentTable3D")
            .field("profile", &self.profile.descriptor())
            .field("l", &self.l)
            .finish()
    }
}

impl MomentTable3D {
    pub fn new(profile: Arc<dyn Profile3D>, l: u8, k: f64, numerics: NumericsConfig) -> Result<Self> {
        check_order(l, 1)?;
        numerics.validate()?;
        Ok(Self {
            profile,
            l,
            k,
            numerics,
            signal: OnceLock::new(),
        })
    }

    pub fn value_at(&self, px: f64, py: f64) -> Result<Complex64> {
        let (l, k) = (self.l, self.k);
        if self.numerics.transform.scheme == TransformScheme::Analytic {
            if let Some(v) = self.profile.moment_transform(l, px, py, k) {
                return Ok(v);
            }
            if self.profile.transform(px, py, 0.5, k).is_some() {
                let li = i32::from(l);
                let v = integrate_1d_points(
                    |z| self.profile.transform(px, py, z, k).unwrap_or(ZERO) * z.powi(li),
                    0.0,
                    1.0,
                    &[],
                    &self.numerics.quadrature,
                )?;
                return Ok(v);
            }
        }
        let signal = self.signal.get_or_init(|| {
            let quad = self.numerics.quadrature;
            let li = i32::from(l);
            let mut failure = None;
            let built = SampledSignal2d::new(
                |x, y| {
                    match integrate_1d_points(
                        |z| self.profile.w(x, y, z, k) * z.powi(li),
                        0.0,
                        1.0,
                        &[],
                        &quad,
                    ) {
                        Ok(v) => v,
                        Err(e) => {
                            failure.get_or_insert(e);
                            ZERO
                        }
                    }
                },
                self.profile.decay_radius(),
                &self.numerics.transform.with_edge_floor(quad.abs_tol),
            );
            match failure {
                Some(e) => Err(e),
                None => built,
            }
        });
        let signal = signal.as_ref().map_err(|e| Error::Numerics(e.clone()))?;
        Ok(signal.transform(px, py))
    }
}

/// One-shot `w̄̃̃ₗ(p⃗; k)`.
pub fn moment_3d(
    profile: Arc<dyn Profile3D>,
    l: u8,
    (px, py): (f64, f64),
    k: f64,
    numerics: &NumericsConfig,
) -> Result<Complex64> {
    MomentTable3D::new(profile, l, k, *numerics)?.value_at(px, py)
}
