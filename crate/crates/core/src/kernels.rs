//! Independent oracle for the 2D amplitude.
//!
//! The kernels `N⁽ʲ⁾ₐᵦ(p, p′)` of the fundamental transfer matrix are
//! discretized on a momentum grid over `(−k, k)`. The series solutions for
//! the channel functions `A₊`, `B₋` are assembled word by word and mapped
//! to the amplitude by Nyström evaluation at `p = k sin θ`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amp2d::{check_angle, ScatteringConfig2D};
use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre, integrate_2d, NumericsConfig, SampledSignal1d, TransformScheme};
use crate::profiles::{MomentTable, Profile2D};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `ϖ(p) = √(k² − p²)` inside the light cone, `i√(p² − k²)` outside.
pub fn varpi(p: f64, k: f64) -> Complex64 {
    if p.abs() < k {
        Complex64::new((k * k - p * p).sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (p * p - k * k).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Substitution {
    /// Gauss–Legendre directly in `p`.
    Direct,
    /// Gauss–Legendre in `φ` with `p = k sin φ`.
    Sine,
}

/// Quadrature nodes and weights for `∫_{−k}^{k} dp`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    pub k: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub substitution: Substitution,
}

impl MomentumGrid {
    pub const DEFAULT_NODES: usize = 201;

    pub fn sine(k: f64, n: usize) -> Result<Self> {
        Self::check(k, n)?;
        let (x, w) = gauss_legendre(n);
        let half = PI / 2.0;
        let nodes = x.iter().map(|&t| k * (half * t).sin()).collect();
        let weights = x
            .iter()
            .zip(&w)
            .map(|(&t, &wt)| wt * half * k * (half * t).cos())
            .collect();
        Self::finish(k, nodes, weights, Substitution::Sine)
    }

    pub fn direct(k: f64, n: usize) -> Result<Self> {
        Self::check(k, n)?;
        let (x, w) = gauss_legendre(n);
        let nodes = x.iter().map(|&t| k * t).collect();
        let weights = w.iter().map(|&wt| wt * k).collect();
        Self::finish(k, nodes, weights, Substitution::Direct)
    }

    fn check(k: f64, n: usize) -> Result<()> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidConfig(format!("k must be positive, got {k}")));
        }
        if n < 3 {
            return Err(Error::InvalidConfig(format!("grid needs at least 3 nodes, got {n}")));
        }
        Ok(())
    }

    fn finish(k: f64, nodes: Vec<f64>, weights: Vec<f64>, substitution: Substitution) -> Result<Self> {
        if nodes.iter().any(|p: &f64| p.abs() >= k * (1.0 - 1e-15)) {
            return Err(Error::Singular("grid node on the light cone".into()));
        }
        Ok(Self {
            k,
            nodes,
            weights,
            substitution,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Smallest distance from a node to `|p| = k`.
    pub fn edge_clearance(&self) -> f64 {
        self.nodes
            .iter()
            .map(|p| self.k - p.abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Entries `N⁽ʲ⁾ₐᵦ(pᵢ, p′ⱼ)` on a grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub order: u8,
    pub a: u8,
    pub b: u8,
    pub n: usize,
    pub values: Vec<Complex64>,
}

impl KernelMatrix {
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.n + j]
    }

    /// CSV dump: `i,j,p,p_prime,re,im`.
    pub fn to_csv(&self, grid: &MomentumGrid) -> Result<String> {
        if grid.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} nodes, grid has {}",
                self.n,
                grid.len()
            )));
        }
        let mut out = String::from("i,j,p,p_prime,re,im\n");
        for i in 0..self.n {
            for j in 0..self.n {
                let v = self.get(i, j);
                let _ = writeln!(
                    out,
                    "{i},{j},{:.16e},{:.16e},{:.16e},{:.16e}",
                    grid.nodes[i], grid.nodes[j], v.re, v.im
                );
            }
        }
        Ok(out)
    }
}

fn check_indices(a: u8, b: u8) -> Result<()> {
    if (1..=2).contains(&a) && (1..=2).contains(&b) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("kernel indices must be 1 or 2, got ({a}, {b})")))
    }
}

fn sign(n: u8) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `∫₀¹ dx̌₂ ∫₀^{x̌₂} dx̌₁ (x̌₂ − x̌₁) Q̃(x̌₁, x̌₂, p)`, where `Q̃` is the
/// y-transform of `w(x̌₁, y) w(x̌₂, y)`.
struct OrderedPairTable {
    profile: Arc<dyn Profile2D>,
    k: f64,
    numerics: NumericsConfig,
    signal: std::sync::OnceLock<std::result::Result<SampledSignal1d, crate::NumericsError>>,
}

impl OrderedPairTable {
    fn value_at(&self, p: f64) -> Result<Complex64> {
        let (profile, k) = (&self.profile, self.k);
        if self.numerics.transform.scheme == TransformScheme::Analytic
            && profile.product_transform(0.5, 0.5, p, k).is_some()
        {
            // x̌₁ = t x̌₂ maps the ordered simplex onto the unit square.
            return Ok(integrate_2d(
                |x2, t| {
                    profile.product_transform(t * x2, x2, p, k).unwrap_or(ZERO) * (x2 * x2 * (1.0 - t))
                },
                (0.0, 1.0),
                (0.0, 1.0),
                &self.numerics.quadrature,
            )?);
        }
        let signal = self.signal.get_or_init(|| {
            let quad = self.numerics.quadrature;
            let mut failure = None;
            let built = SampledSignal1d::new(
                |y| {
                    match integrate_2d(
                        |x2, t| {
                            profile.w(t * x2, y, k) * profile.w(x2, y, k) * (x2 * x2 * (1.0 - t))
                        },
                        (0.0, 1.0),
                        (0.0, 1.0),
                        &quad,
                    ) {
                        Ok(v) => v,
                        Err(e) => {
                            failure.get_or_insert(e);
                            ZERO
                        }
                    }
                },
                profile.decay_radius(),
                &self.numerics.transform.with_edge_floor(quad.abs_tol),
            );
            match failure {
                Some(e) => Err(e),
                None => built,
            }
        });
        Ok(signal.as_ref().map_err(|e| Error::Numerics(e.clone()))?.transform(p))
    }
}

/// Evaluates the kernels `N⁽ʲ⁾ₐᵦ(p, p′; k)` for `j ∈ {1, 2, 3}`.
pub struct KernelOracle {
    k: f64,
    m0: MomentTable,
    m1: MomentTable,
    m2: MomentTable,
    pairs: OrderedPairTable,
}

impl std::fmt::Debug for KernelOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KernelOracle").field("k", &self.k).finish()
    }
}

impl KernelOracle {
    pub fn new(profile: Arc<dyn Profile2D>, k: f64, numerics: NumericsConfig) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidConfig(format!("k must be positive, got {k}")));
        }
        Ok(Self {
            k,
            m0: MomentTable::new(profile.clone(), 0, k, numerics)?,
            m1: MomentTable::new(profile.clone(), 1, k, numerics)?,
            m2: MomentTable::new(profile.clone(), 2, k, numerics)?,
            pairs: OrderedPairTable {
                profile,
                k,
                numerics,
                signal: std::sync::OnceLock::new(),
            },
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    fn check_momenta(&self, p: f64, pp: f64) -> Result<()> {
        if !(pp.abs() < self.k) {
            return Err(Error::Singular(format!("p' = {pp} is not inside (-k, k)")));
        }
        if !(p.abs() <= self.k) {
            return Err(Error::Singular(format!("p = {p} is outside [-k, k]")));
        }
        Ok(())
    }

    fn root(&self, p: f64) -> f64 {
        (1.0 - (p / self.k).powi(2)).max(0.0).sqrt()
    }

    /// `(−1)ᵃ i w̄̃₀(p − p′) / (4π √(1 − p′²/k²))`.
    pub fn kernel_n1(&self, a: u8, b: u8, p: f64, pp: f64) -> Result<Complex64> {
        check_indices(a, b)?;
        self.check_momenta(p, pp)?;
        let w0 = self.m0.value_at(p - pp)?;
        Ok(Complex64::new(0.0, sign(a)) * w0 / (4.0 * PI * self.root(pp)))
    }

    /// `(1/4π)[(−1)^{a+b} − √((k² − p²)/(k² − p′²))] w̄̃₁(p − p′)`.
    pub fn kernel_n2(&self, a: u8, b: u8, p: f64, pp: f64) -> Result<Complex64> {
        check_indices(a, b)?;
        self.check_momenta(p, pp)?;
        let bracket = sign(a + b) - self.root(p) / self.root(pp);
        Ok(self.m1.value_at(p - pp)? * (bracket / (4.0 * PI)))
    }

    pub fn kernel_n3(&self, a: u8, b: u8, p: f64, pp: f64) -> Result<Complex64> {
        check_indices(a, b)?;
        self.check_momenta(p, pp)?;
        let k2 = self.k * self.k;
        let (rp, rpp) = (self.root(p), self.root(pp));
        let bracket = 1.0 - (p * p + pp * pp) / (2.0 * k2) - sign(a + b) * rp * rpp;
        let inner = self.m2.value_at(p - pp)? * bracket + self.pairs.value_at(p - pp)?;
        Ok(Complex64::new(0.0, sign(a - 1)) * inner / (4.0 * PI * rpp))
    }

    pub fn kernel(&self, order: u8, a: u8, b: u8, p: f64, pp: f64) -> Result<Complex64> {
        match order {
            1 => self.kernel_n1(a, b, p, pp),
            2 => self.kernel_n2(a, b, p, pp),
            3 => self.kernel_n3(a, b, p, pp),
            other => Err(Error::InvalidConfig(format!("kernel order {other} is not available"))),
        }
    }

    pub fn matrix(&self, order: u8, a: u8, b: u8, grid: &MomentumGrid) -> Result<KernelMatrix> {
        self.check_grid(grid)?;
        let n = grid.len();
        let mut values = Vec::with_capacity(n * n);
        for &p in &grid.nodes {
            for &pp in &grid.nodes {
                values.push(self.kernel(order, a, b, p, pp)?);
            }
        }
        Ok(KernelMatrix {
            order,
            a,
            b,
            n,
            values,
        })
    }

    fn check_grid(&self, grid: &MomentumGrid) -> Result<()> {
        if (grid.k - self.k).abs() > 1e-14 * self.k {
            return Err(Error::DimensionMismatch(format!(
                "grid built for k = {}, kernels for k = {}",
                grid.k, self.k
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// One kernel factor `N⁽ʲ⁾ₐᵦ` in an operator word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Factor {
    pub order: u8,
    pub a: u8,
    pub b: u8,
}

/// A signed product of kernels acting on `δ̌_{p₀}`, written left to right.
#[derive(Debug, Clone, PartialEq)]
pub struct Word {
    pub sign: f64,
    pub factors: Vec<Factor>,
}

impl Word {
    pub fn total_order(&self) -> u8 {
        self.factors.iter().map(|f| f.order).sum()
    }
}

/// Index patterns `(a, b)` of the series for one channel, as functions of
/// the number of `N₂₂` insertions.
fn patterns(side: Side, plus: bool, max_len: usize) -> Vec<(f64, Vec<(u8, u8)>)> {
    let mut out = Vec::new();
    match (side, plus) {
        (Side::Left, true) => {
            out.push((-1.0, vec![(1, 1)]));
            for m in 0..max_len.saturating_sub(1) {
                let mut w = vec![(1, 2)];
                w.extend(std::iter::repeat((2, 2)).take(m));
                w.push((2, 1));
                out.push((-1.0, w));
            }
        }
        (Side::Left, false) => {
            for m in 0..max_len {
                let mut w: Vec<(u8, u8)> = std::iter::repeat((2, 2)).take(m).collect();
                w.push((2, 1));
                out.push((1.0, w));
            }
        }
        (Side::Right, true) => {
            for m in 0..max_len {
                let mut w = vec![(1, 2)];
                w.extend(std::iter::repeat((2, 2)).take(m));
                out.push((-1.0, w));
            }
        }
        (Side::Right, false) => {
            for m in 1..=max_len {
                out.push((1.0, std::iter::repeat((2, 2)).take(m).collect()));
            }
        }
    }
    out.retain(|(_, w)| w.len() <= max_len);
    out
}

/// All compositions of orders `jᵢ ∈ [1, 3]` over `len` factors with sum ≤ `max`.
fn order_assignments(len: usize, max: u8) -> Vec<Vec<u8>> {
    fn rec(len: usize, left: u8, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        let remaining = (len - cur.len() - 1) as u8;
        for j in 1..=3u8 {
            if j + remaining <= left {
                cur.push(j);
                rec(len, left - j, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(len, max, &mut Vec::new(), &mut out);
    out
}

/// Operator words contributing to a channel up to total order `truncation` in `kℓ`.
pub fn channel_words(side: Side, plus: bool, truncation: u8) -> Vec<Word> {
    let mut words = Vec::new();
    for (sign, pattern) in patterns(side, plus, truncation as usize) {
        for orders in order_assignments(pattern.len(), truncation) {
            words.push(Word {
                sign,
                factors: pattern
                    .iter()
                    .zip(&orders)
                    .map(|(&(a, b), &order)| Factor { order, a, b })
                    .collect(),
            });
        }
    }
    words
}

/// One assembled channel: the smooth part on the grid plus the coefficient
/// of the singular part `2πϖ(p₀) δ(p − p₀)`.
#[derive(Debug, Clone)]
pub struct Channel {
    pub words: Vec<Word>,
    /// Per word, the result of all factors but the leftmost (None when the
    /// word has a single factor and acts on the delta directly).
    inner: Vec<Option<Vec<Complex64>>>,
    pub grid_values: Vec<Complex64>,
    pub delta: f64,
}

/// `A₊` and `B₋` for one incidence side.
#[derive(Debug)]
pub struct ChannelFunctions<'a> {
    pub side: Side,
    pub truncation: u8,
    pub a_plus: Channel,
    pub b_minus: Channel,
    oracle: &'a KernelOracle,
    grid: &'a MomentumGrid,
    config: ScatteringConfig2D,
}

fn apply_on_grid(
    oracle: &KernelOracle,
    f: Factor,
    grid: &MomentumGrid,
    v: &[Complex64],
    p: f64,
) -> Result<Complex64> {
    let mut acc = ZERO;
    for ((&pp, &w), &x) in grid.nodes.iter().zip(&grid.weights).zip(v) {
        acc += oracle.kernel(f.order, f.a, f.b, p, pp)? * x * w;
    }
    Ok(acc)
}

fn build_channel(
    oracle: &KernelOracle,
    grid: &MomentumGrid,
    config: &ScatteringConfig2D,
    words: Vec<Word>,
    delta: f64,
) -> Result<Channel> {
    let p0 = config.p0();
    let source = 2.0 * PI * config.varpi0();
    let mut inner = Vec::with_capacity(words.len());
    for word in &words {
        let n = word.factors.len();
        if n == 1 {
            inner.push(None);
            continue;
        }
        // Rightmost factor acts on the delta: its column at p₀.
        let last = word.factors[n - 1];
        let mut v: Vec<Complex64> = grid
            .nodes
            .iter()
            .map(|&p| oracle.kernel(last.order, last.a, last.b, p, p0).map(|x| x * source))
            .collect::<Result<_>>()?;
        for f in word.factors[1..n - 1].iter().rev() {
            v = grid
                .nodes
                .iter()
                .map(|&p| apply_on_grid(oracle, *f, grid, &v, p))
                .collect::<Result<_>>()?;
        }
        inner.push(Some(v));
    }
    let mut channel = Channel {
        words,
        inner,
        grid_values: Vec::new(),
        delta,
    };
    channel.grid_values = grid
        .nodes
        .iter()
        .map(|&p| channel_value(oracle, grid, config, &channel, p))
        .collect::<Result<_>>()?;
    Ok(channel)
}

fn channel_value(
    oracle: &KernelOracle,
    grid: &MomentumGrid,
    config: &ScatteringConfig2D,
    channel: &Channel,
    p: f64,
) -> Result<Complex64> {
    let kl = config.k_ell();
    let source = 2.0 * PI * config.varpi0();
    let mut total = ZERO;
    for (word, inner) in channel.words.iter().zip(&channel.inner) {
        let head = word.factors[0];
        let v = match inner {
            None => oracle.kernel(head.order, head.a, head.b, p, config.p0())? * source,
            Some(v) => apply_on_grid(oracle, head, grid, v, p)?,
        };
        total += v * (word.sign * kl.powi(i32::from(word.total_order())));
    }
    Ok(total)
}

/// Builds `A₊` and `B₋` from the series solutions, keeping terms up to
/// `(kℓ)^truncation`.
pub fn assemble_channels<'a>(
    oracle: &'a KernelOracle,
    grid: &'a MomentumGrid,
    config: &ScatteringConfig2D,
    truncation: u8,
) -> Result<ChannelFunctions<'a>> {
    config.validate()?;
    oracle.check_grid(grid)?;
    if (config.k - oracle.k).abs() > 1e-14 * config.k {
        return Err(Error::DimensionMismatch(format!(
            "config k = {} differs from kernel k = {}",
            config.k, oracle.k
        )));
    }
    if !(1..=3).contains(&truncation) {
        return Err(Error::InvalidConfig(format!(
            "truncation must be 1, 2 or 3, got {truncation}"
        )));
    }
    let side = if config.left_incident() { Side::Left } else { Side::Right };
    let (delta_a, delta_b) = match side {
        Side::Left => (1.0, 0.0),
        Side::Right => (0.0, 1.0),
    };
    let a_plus = build_channel(oracle, grid, config, channel_words(side, true, truncation), delta_a)?;
    let b_minus = build_channel(oracle, grid, config, channel_words(side, false, truncation), delta_b)?;
    Ok(ChannelFunctions {
        side,
        truncation,
        a_plus,
        b_minus,
        oracle,
        grid,
        config: *config,
    })
}

impl ChannelFunctions<'_> {
    /// Smooth part of `A₊` at an arbitrary `p` (Nyström interpolation).
    pub fn a_plus_at(&self, p: f64) -> Result<Complex64> {
        channel_value(self.oracle, self.grid, &self.config, &self.a_plus, p)
    }

    pub fn b_minus_at(&self, p: f64) -> Result<Complex64> {
        channel_value(self.oracle, self.grid, &self.config, &self.b_minus, p)
    }

    /// `𝔣(θ)` without the forward delta: `−i/√(2π)` times `A₊` for
    /// detectors at `x = +∞` or `B₋` for `x = −∞`, at `p = k sin θ`.
    pub fn amplitude(&self, theta: f64) -> Result<Complex64> {
        check_angle(theta)?;
        let p = self.config.k * theta.sin();
        let v = if theta.cos() > 0.0 {
            self.a_plus_at(p)?
        } else {
            self.b_minus_at(p)?
        };
        Ok(Complex64::new(0.0, -1.0 / (2.0 * PI).sqrt()) * v)
    }
}

/// Amplitude reconstructed from the discretized kernels, truncated at
/// `(kℓ)^truncation` with `truncation ∈ {1, 2}`.
pub fn amplitude_from_kernels(
    profile: Arc<dyn Profile2D>,
    config: &ScatteringConfig2D,
    theta: f64,
    truncation: u8,
    nodes: usize,
    numerics: &NumericsConfig,
) -> Result<Complex64> {
    if !(1..=2).contains(&truncation) {
        return Err(Error::InvalidConfig(format!(
            "amplitude assembly stops at truncation 2, got {truncation}"
        )));
    }
    let oracle = KernelOracle::new(profile, config.k, *numerics)?;
    let grid = MomentumGrid::sine(config.k, nodes)?;
    assemble_channels(&oracle, &grid, config, truncation)?.amplitude(theta)
}
