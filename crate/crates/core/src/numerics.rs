//! Numerical substrate: step/sinc helpers, adaptive Gauss–Kronrod quadrature
//! over intervals and rectangles, Gauss–Legendre rules, and Fourier
//! transforms of decaying functions evaluated at arbitrary momenta.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::NumericsError;

type Result<T> = std::result::Result<T, NumericsError>;

/// Heaviside step with the convention `Θ(0) = 1`.
pub fn heaviside(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        0.0
    }
}

const SINC_SERIES_CUTOFF: f64 = 1e-2;

/// `sin(x)/x`, exactly 1 at the origin.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < SINC_SERIES_CUTOFF {
        sinc_series(x)
    } else {
        x.sin() / x
    }
}

/// Truncated Taylor series of sinc, accurate to machine precision for |x| < 1e-2.
pub fn sinc_series(x: f64) -> f64 {
    let x2 = x * x;
    // 1 - x²/3! + x⁴/5! - x⁶/7! + x⁸/9!
    1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
}

/// Coefficient functions of the sinc expansion of the propagator kernel:
/// `(-1)^j x^(2j+1) / (2j+1)! · Θ(x)`.
pub fn sj(j: u32, x: f64) -> Result<f64> {
    if x < 0.0 {
        return Ok(0.0);
    }
    let mut term = x;
    let x2 = x * x;
    for i in 1..=j {
        let i = f64::from(i);
        term *= -x2 / ((2.0 * i) * (2.0 * i + 1.0));
    }
    if term.is_finite() {
        Ok(term)
    } else {
        Err(NumericsError::Range(format!("s_{j}({x}) overflows")))
    }
}

/// Tolerances for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_subdivisions: 500,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = Self {
            rel_tol,
            abs_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(NumericsError::InvalidSpec(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if !(self.abs_tol >= 0.0) {
            return Err(NumericsError::InvalidSpec(format!(
                "abs_tol must be nonnegative, got {}",
                self.abs_tol
            )));
        }
        if self.max_subdivisions < 1 {
            return Err(NumericsError::InvalidSpec(
                "max_subdivisions must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn tolerance(&self, result: Complex64) -> f64 {
        self.abs_tol.max(self.rel_tol * result.norm())
    }
}

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_580_632_758_806,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights at the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv = [Complex64::new(0.0, 0.0); 21];
    for (i, &x) in XGK.iter().enumerate() {
        if i == 10 {
            fv[10] = f(center);
        } else {
            fv[i] = f(center - half * x);
            fv[20 - i] = f(center + half * x);
        }
    }
    for (i, v) in fv.iter().enumerate() {
        if !(v.re.is_finite() && v.im.is_finite()) {
            let x = if i <= 10 {
                center - half * XGK[i]
            } else {
                center + half * XGK[20 - i]
            };
            return Err(NumericsError::NonFinite { at: x });
        }
    }
    let mut kronrod = fv[10] * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut abs_sum = fv[10].norm() * WGK[10];
    for i in 0..10 {
        let pair = fv[i] + fv[20 - i];
        kronrod += pair * WGK[i];
        abs_sum += (fv[i].norm() + fv[20 - i].norm()) * WGK[i];
        if i % 2 == 1 {
            gauss += pair * WG[i / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut asc = WGK[10] * (fv[10] - mean).norm();
    for i in 0..10 {
        asc += WGK[i] * ((fv[i] - mean).norm() + (fv[20 - i] - mean).norm());
    }
    let value = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).norm();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Panel { a, b, value, error })
}

/// Adaptive Gauss–Kronrod integration of a complex integrand over `[a, b]`.
///
/// The worst panel is bisected until the summed error estimate falls below
/// `max(abs_tol, rel_tol·|result|)`.
pub fn integrate_1d<F: FnMut(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    integrate_1d_points(f, a, b, &[], spec)
}

/// As [`integrate_1d`], with known interior breakpoints (kinks or jumps)
/// used as initial panel boundaries.
pub fn integrate_1d_points<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(NumericsError::InvalidSpec(format!(
            "integration limits must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut edges = vec![lo];
    let mut interior: Vec<f64> = points
        .iter()
        .copied()
        .filter(|&x| x > lo && x < hi)
        .collect();
    interior.sort_by(f64::total_cmp);
    interior.dedup();
    edges.extend(interior);
    edges.push(hi);

    let mut heap = BinaryHeap::new();
    for w in edges.windows(2) {
        heap.push(gk21(&mut f, w[0], w[1])?);
    }
    let min_width = (hi - lo) * 1e-13;
    let mut subdivisions = heap.len();
    loop {
        let (total, error) = heap
            .iter()
            .fold((Complex64::new(0.0, 0.0), 0.0), |(s, e), p| (s + p.value, e + p.error));
        if error <= spec.tolerance(total) {
            return Ok(total * sign);
        }
        let worst = heap.pop().expect("at least one panel");
        if subdivisions >= spec.max_subdivisions || (worst.b - worst.a) < min_width {
            return Err(NumericsError::NoConvergence {
                estimate: total * sign,
                error,
                subdivisions,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(gk21(&mut f, worst.a, mid)?);
        heap.push(gk21(&mut f, mid, worst.b)?);
        subdivisions += 1;
    }
}

/// Iterated adaptive integration over the rectangle `[a, b] × [c, d]`.
///
/// The inner (second-variable) integrals run at a tenth of the outer
/// tolerances so their errors do not dominate the outer estimate.
pub fn integrate_2d<F: FnMut(f64, f64) -> Complex64>(
    f: F,
    (a, b): (f64, f64),
    (c, d): (f64, f64),
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    spec.validate()?;
    let inner_spec = QuadratureSpec {
        rel_tol: spec.rel_tol * 0.1,
        abs_tol: spec.abs_tol * 0.1 / (b - a).abs().max(f64::MIN_POSITIVE),
        max_subdivisions: spec.max_subdivisions,
    };
    let f = RefCell::new(f);
    let failure: RefCell<Option<NumericsError>> = RefCell::new(None);
    let outer = integrate_1d(
        |x| {
            if failure.borrow().is_some() {
                return Complex64::new(0.0, 0.0);
            }
            let mut g = f.borrow_mut();
            match integrate_1d(|y| g(x, y), c, d, &inner_spec) {
                Ok(v) => v,
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    Complex64::new(0.0, 0.0)
                }
            }
        },
        a,
        b,
        spec,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    outer
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    let nf = n as f64;
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Selects how Fourier transforms of profiles are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformScheme {
    /// Use a registered closed-form transform when the profile has one.
    Analytic,
    /// Always sample and sum numerically.
    Numeric,
}

/// Parameters of a numerically evaluated Fourier transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    /// Half-width of the sampled window; `None` defers to the function's decay hint.
    pub truncation_radius: Option<f64>,
    /// Samples per axis; a power of two.
    pub sample_count: usize,
    pub scheme: TransformScheme,
    /// Largest accepted edge magnitude relative to the peak sample.
    pub edge_tol: f64,
    /// Edge magnitudes at or below this are accepted regardless of the peak.
    #[serde(default)]
    pub edge_floor: f64,
}

impl Default for TransformSpec {
    fn default() -> Self {
        Self {
            truncation_radius: None,
            sample_count: 4096,
            scheme: TransformScheme::Analytic,
            edge_tol: 1e-8,
            edge_floor: 0.0,
        }
    }
}

impl TransformSpec {
    pub fn numeric(truncation_radius: f64, sample_count: usize) -> Self {
        Self {
            truncation_radius: Some(truncation_radius),
            sample_count,
            scheme: TransformScheme::Numeric,
            ..Self::default()
        }
    }

    /// The same spec with the edge floor raised to at least `floor`.
    pub fn with_edge_floor(mut self, floor: f64) -> Self {
        self.edge_floor = self.edge_floor.max(floor);
        self
    }

    pub fn radius_or(&self, hint: f64) -> f64 {
        self.truncation_radius.unwrap_or(hint)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.truncation_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(NumericsError::InvalidSpec(format!(
                    "truncation_radius must be positive, got {r}"
                )));
            }
        }
        if self.scheme == TransformScheme::Numeric && !self.sample_count.is_power_of_two() {
            return Err(NumericsError::InvalidSpec(format!(
                "sample_count must be a power of two, got {}",
                self.sample_count
            )));
        }
        if self.sample_count < 8 {
            return Err(NumericsError::InvalidSpec(
                "sample_count must be at least 8".into(),
            ));
        }
        if !(self.edge_tol > 0.0) {
            return Err(NumericsError::InvalidSpec("edge_tol must be positive".into()));
        }
        if !(self.edge_floor >= 0.0 && self.edge_floor.is_finite()) {
            return Err(NumericsError::InvalidSpec("edge_floor must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Quadrature and transform settings shared by every amplitude evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NumericsConfig {
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub transform: TransformSpec,
}

impl NumericsConfig {
    pub fn validate(&self) -> Result<()> {
        self.quadrature.validate()?;
        self.transform.validate()
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.quadrature.rel_tol = rel_tol;
        self
    }
}

// Phases are recomputed exactly every RESYNC samples to bound recurrence drift.
const RESYNC: usize = 128;

/// Uniform samples of a decaying function on `[-R, R]`, transformable at
/// arbitrary momenta.
///
/// The transform is the trapezoid sum with explicit phase factors plus the
/// first Euler–Maclaurin end correction.
#[derive(Debug, Clone)]
pub struct SampledSignal1d {
    origin: f64,
    step: f64,
    samples: Vec<Complex64>,
    // One-sided derivative estimates at the two window edges.
    left_slope: Complex64,
    right_slope: Complex64,
}

impl SampledSignal1d {
    /// Samples `f` on `[-R, R]` with `R` from `spec` (or `decay_hint`).
    pub fn new<F: FnMut(f64) -> Complex64>(
        mut f: F,
        decay_hint: f64,
        spec: &TransformSpec,
    ) -> Result<Self> {
        let mut numeric = *spec;
        numeric.scheme = TransformScheme::Numeric;
        numeric.validate()?;
        let radius = spec.radius_or(decay_hint);
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(NumericsError::InvalidSpec(format!(
                "truncation radius must be positive, got {radius}"
            )));
        }
        let n = spec.sample_count;
        let step = 2.0 * radius / (n - 1) as f64;
        let origin = -radius;
        let mut samples = Vec::with_capacity(n);
        for i in 0..n {
            let y = origin + step * i as f64;
            let v = f(y);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(NumericsError::NonFinite { at: y });
            }
            samples.push(v);
        }
        Self::from_samples(origin, step, samples, spec.edge_tol, spec.edge_floor)
    }

    pub fn from_samples(
        origin: f64,
        step: f64,
        samples: Vec<Complex64>,
        edge_tol: f64,
        edge_floor: f64,
    ) -> Result<Self> {
        let n = samples.len();
        if n < 8 {
            return Err(NumericsError::InvalidSpec("need at least 8 samples".into()));
        }
        let peak = samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let edge = samples[0].norm().max(samples[n - 1].norm());
        let limit = (edge_tol * peak).max(edge_floor);
        if peak > 0.0 && edge > limit {
            return Err(NumericsError::Truncation {
                radius: -origin,
                edge,
                limit,
            });
        }
        let left_slope =
            (samples[0] * -3.0 + samples[1] * 4.0 - samples[2]) / (2.0 * step);
        let right_slope =
            (samples[n - 1] * 3.0 - samples[n - 2] * 4.0 + samples[n - 3]) / (2.0 * step);
        Ok(Self {
            origin,
            step,
            samples,
            left_slope,
            right_slope,
        })
    }

    pub fn radius(&self) -> f64 {
        -self.origin
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// `∫ e^{-ipy} f(y) dy` over the sampled window.
    pub fn transform(&self, p: f64) -> Complex64 {
        let n = self.samples.len();
        let h = self.step;
        let step_phase = Complex64::from_polar(1.0, -p * h);
        let mut sum = Complex64::new(0.0, 0.0);
        for (block, chunk) in self.samples.chunks(RESYNC).enumerate() {
            let y0 = self.origin + h * (block * RESYNC) as f64;
            let mut phase = Complex64::from_polar(1.0, -p * y0);
            let mut acc = Complex64::new(0.0, 0.0);
            for v in chunk {
                acc += v * phase;
                phase *= step_phase;
            }
            sum += acc;
        }
        let first = self.samples[0];
        let last = self.samples[n - 1];
        let y_last = self.origin + h * (n - 1) as f64;
        let e_first = Complex64::from_polar(1.0, -p * self.origin);
        let e_last = Complex64::from_polar(1.0, -p * y_last);
        sum -= (first * e_first + last * e_last) * 0.5;
        // g(y) = f(y) e^{-ipy};  ∫ ≈ T - h²/12 [g'(b) - g'(a)]
        let i = Complex64::i();
        let g_right = (self.right_slope - i * p * last) * e_last;
        let g_left = (self.left_slope - i * p * first) * e_first;
        sum * h - (g_right - g_left) * (h * h / 12.0)
    }
}

/// Numeric Fourier transform `∫ e^{-ipy} f(y) dy` of a decaying function.
pub fn fourier_1d<F: FnMut(f64) -> Complex64>(
    f: F,
    p: f64,
    spec: &TransformSpec,
) -> Result<Complex64> {
    let radius = spec.truncation_radius.ok_or_else(|| {
        NumericsError::InvalidSpec("fourier_1d needs an explicit truncation radius".into())
    })?;
    Ok(SampledSignal1d::new(f, radius, spec)?.transform(p))
}

/// Uniform samples of a decaying function of the plane on `[-R, R]²`.
#[derive(Debug, Clone)]
pub struct SampledSignal2d {
    origin: f64,
    step: f64,
    n: usize,
    // Row-major: samples[i * n + j] = f(x_i, y_j), trapezoid weights folded in.
    weighted: Vec<Complex64>,
}

impl SampledSignal2d {
    pub fn new<F: FnMut(f64, f64) -> Complex64>(
        mut f: F,
        decay_hint: f64,
        spec: &TransformSpec,
    ) -> Result<Self> {
        let mut numeric = *spec;
        numeric.scheme = TransformScheme::Numeric;
        numeric.validate()?;
        let radius = spec.radius_or(decay_hint);
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(NumericsError::InvalidSpec(format!(
                "truncation radius must be positive, got {radius}"
            )));
        }
        let n = spec.sample_count;
        let step = 2.0 * radius / (n - 1) as f64;
        let origin = -radius;
        let mut weighted = Vec::with_capacity(n * n);
        let mut peak: f64 = 0.0;
        let mut edge: f64 = 0.0;
        for i in 0..n {
            let x = origin + step * i as f64;
            let wx = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            for j in 0..n {
                let y = origin + step * j as f64;
                let v = f(x, y);
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(NumericsError::NonFinite { at: x.hypot(y) });
                }
                peak = peak.max(v.norm());
                if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
                    edge = edge.max(v.norm());
                }
                let wy = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
                weighted.push(v * (wx * wy));
            }
        }
        let limit = (spec.edge_tol * peak).max(spec.edge_floor);
        if peak > 0.0 && edge > limit {
            return Err(NumericsError::Truncation {
                radius,
                edge,
                limit,
            });
        }
        Ok(Self {
            origin,
            step,
            n,
            weighted,
        })
    }

    /// `∫∫ e^{-i(p_x x + p_y y)} f(x, y) dx dy` over the sampled square.
    pub fn transform(&self, px: f64, py: f64) -> Complex64 {
        let n = self.n;
        let h = self.step;
        let phases = |p: f64| -> Vec<Complex64> {
            (0..n)
                .map(|i| Complex64::from_polar(1.0, -p * (self.origin + h * i as f64)))
                .collect()
        };
        let ex = phases(px);
        let ey = phases(py);
        let mut sum = Complex64::new(0.0, 0.0);
        for (i, row) in self.weighted.chunks(n).enumerate() {
            let inner: Complex64 = row.iter().zip(&ey).map(|(v, e)| v * e).sum();
            sum += inner * ex[i];
        }
        sum * (h * h)
    }
}

/// Numeric 2D Fourier transform `∫ e^{-i p⃗·r⃗} f(r⃗) d²r⃗`.
pub fn fourier_2d<F: FnMut(f64, f64) -> Complex64>(
    f: F,
    (px, py): (f64, f64),
    spec: &TransformSpec,
) -> Result<Complex64> {
    let radius = spec.truncation_radius.ok_or_else(|| {
        NumericsError::InvalidSpec("fourier_2d needs an explicit truncation radius".into())
    })?;
    Ok(SampledSignal2d::new(f, radius, spec)?.transform(px, py))
}
