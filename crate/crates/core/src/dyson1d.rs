//! 1D transfer matrix of a slab `0 ≤ x ≤ ℓ` from the Dyson series in the
//! scaled coordinate `x̌ = x/ℓ`, with an adaptive stepping alternative.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// `w(x̌; k) = ε̂ − 1` of a 1D slab.
pub trait Profile1D: Send + Sync + fmt::Debug {
    fn eval(&self, x: f64, k: f64) -> Complex64;

    fn w(&self, x: f64, k: f64) -> Complex64 {
        if (0.0..=1.0).contains(&x) {
            self.eval(x, k)
        } else {
            ZERO
        }
    }
}

/// Homogeneous slab with `ε̂ = 1 + w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantProfile1D {
    pub w: Complex64,
}

impl ConstantProfile1D {
    /// Slab of refractive index `n`.
    pub fn from_index(n: Complex64) -> Self {
        Self { w: n * n - 1.0 }
    }
}

impl Profile1D for ConstantProfile1D {
    fn eval(&self, _x: f64, _k: f64) -> Complex64 {
        self.w
    }
}

type Fn1D = dyn Fn(f64, f64) -> Complex64 + Send + Sync;

#[derive(Clone)]
pub struct FnProfile1D {
    label: String,
    f: Arc<Fn1D>,
}

impl FnProfile1D {
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            f: Arc::new(f),
        }
    }
}

impl fmt::Debug for FnProfile1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnProfile1D").field("label", &self.label).finish()
    }
}

impl Profile1D for FnProfile1D {
    fn eval(&self, x: f64, k: f64) -> Complex64 {
        (self.f)(x, k)
    }
}

/// A 2×2 complex matrix `[[m11, m12], [m21, m22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix1D {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
}

impl TransferMatrix1D {
    pub const fn new(m11: Complex64, m12: Complex64, m21: Complex64, m22: Complex64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub fn det(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> Complex64 {
        self.m11 + self.m22
    }

    /// Largest entry modulus.
    pub fn norm(&self) -> f64 {
        [self.m11, self.m12, self.m21, self.m22]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.m11 * c, self.m12 * c, self.m21 * c, self.m22 * c)
    }

    pub fn inverse(&self) -> Result<Self> {
        let d = self.det();
        if d.norm() == 0.0 {
            return Err(Error::Singular("matrix has zero determinant".into()));
        }
        Ok(Self::new(self.m22, -self.m12, -self.m21, self.m11).scale(d.inv()))
    }
}

impl Add for TransferMatrix1D {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.m11 + o.m11, self.m12 + o.m12, self.m21 + o.m21, self.m22 + o.m22)
    }
}

impl Sub for TransferMatrix1D {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.m11 - o.m11, self.m12 - o.m12, self.m21 - o.m21, self.m22 - o.m22)
    }
}

impl Mul for TransferMatrix1D {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.m11 * o.m11 + self.m12 * o.m21,
            self.m11 * o.m12 + self.m12 * o.m22,
            self.m21 * o.m11 + self.m22 * o.m21,
            self.m21 * o.m12 + self.m22 * o.m22,
        )
    }
}

/// `𝓗̌(x̌) = −(k w/2) [[1, e^{−2ikℓx̌}], [−e^{2ikℓx̌}, −1]]`.
pub fn h_check(profile: &dyn Profile1D, x: f64, k: f64, ell: f64) -> TransferMatrix1D {
    let w = profile.w(x, k);
    if w == ZERO {
        return TransferMatrix1D::zero();
    }
    let phase = Complex64::from_polar(1.0, 2.0 * k * ell * x);
    TransferMatrix1D::new(ONE, phase.conj(), -phase, -ONE).scale(w * (-k / 2.0))
}

/// Controls the Dyson partial sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DysonSpec {
    pub max_terms: usize,
    /// Stop once the added term's largest entry falls below this.
    pub tol: f64,
    /// Uniform nodes on `[0, 1]` for the nested integrals.
    pub nodes: usize,
}

impl Default for DysonSpec {
    fn default() -> Self {
        Self {
            max_terms: 40,
            tol: 1e-15,
            nodes: 4097,
        }
    }
}

impl DysonSpec {
    pub fn validate(&self) -> Result<()> {
        if self.max_terms < 1 {
            return Err(Error::InvalidConfig("max_terms must be at least 1".into()));
        }
        if self.nodes < 5 {
            return Err(Error::InvalidConfig(format!("need at least 5 nodes, got {}", self.nodes)));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidConfig(format!("tol must be nonnegative, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Partial sums of the series with the norm of every added term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub matrix: TransferMatrix1D,
    /// `increments[n − 1]` is the largest entry of term `n`.
    pub increments: Vec<f64>,
    /// Partial sum after each term, starting from the identity.
    pub partial_sums: Vec<TransferMatrix1D>,
    pub converged: bool,
}

/// Cumulative integral on a uniform grid, fourth order: each cell uses the
/// cubic through four neighbouring nodes.
fn cumulative(f: &[TransferMatrix1D], h: f64) -> Vec<TransferMatrix1D> {
    let n = f.len();
    let mut out = Vec::with_capacity(n);
    out.push(TransferMatrix1D::zero());
    let c = h / 24.0;
    for i in 0..n - 1 {
        let cell = if i == 0 {
            f[0].scale((9.0 * c).into()) + f[1].scale((19.0 * c).into()) - f[2].scale((5.0 * c).into())
                + f[3].scale(c.into())
        } else if i == n - 2 {
            f[n - 4].scale(c.into()) - f[n - 3].scale((5.0 * c).into())
                + f[n - 2].scale((19.0 * c).into())
                + f[n - 1].scale((9.0 * c).into())
        } else {
            f[i].scale((13.0 * c).into()) + f[i + 1].scale((13.0 * c).into())
                - f[i - 1].scale(c.into())
                - f[i + 2].scale(c.into())
        };
        let next = out[i] + cell;
        out.push(next);
    }
    out
}

/// Dyson partial sums `Σₙ (−iℓ)ⁿ ∫_{ordered simplex} 𝓗̌(x̌ₙ)⋯𝓗̌(x̌₁)`, built
/// by the recursion `Tₙ(x̌) = ∫₀^{x̌} (−iℓ) 𝓗̌ Tₙ₋₁`.
pub fn dyson_series(profile: &dyn Profile1D, k: f64, ell: f64, spec: &DysonSpec) -> Result<SeriesReport> {
    check_physics(k, ell)?;
    spec.validate()?;
    let n = spec.nodes;
    let h = 1.0 / (n - 1) as f64;
    let gen: Vec<TransferMatrix1D> = (0..n)
        .map(|i| h_check(profile, i as f64 * h, k, ell).scale(-I * ell))
        .collect();
    if gen.iter().any(|m| !m.norm().is_finite()) {
        return Err(Error::Numerics(crate::NumericsError::NonFinite { at: f64::NAN }));
    }
    let mut term = vec![TransferMatrix1D::identity(); n];
    let mut sum = TransferMatrix1D::identity();
    let mut increments = Vec::new();
    let mut partial_sums = vec![sum];
    let mut converged = false;
    for _ in 0..spec.max_terms {
        let integrand: Vec<TransferMatrix1D> = gen.iter().zip(&term).map(|(g, t)| *g * *t).collect();
        term = cumulative(&integrand, h);
        let added = term[n - 1];
        sum = sum + added;
        increments.push(added.norm());
        partial_sums.push(sum);
        if added.norm() < spec.tol {
            converged = true;
            break;
        }
    }
    Ok(SeriesReport {
        matrix: sum,
        increments,
        partial_sums,
        converged,
    })
}

/// The series transfer matrix, failing when `max_terms` terms do not reach
/// the tolerance.
pub fn transfer_matrix_1d(profile: &dyn Profile1D, k: f64, ell: f64, spec: &DysonSpec) -> Result<TransferMatrix1D> {
    let report = dyson_series(profile, k, ell, spec)?;
    if !report.converged {
        return Err(Error::SeriesNoConvergence {
            terms: report.increments.len(),
            last_increment: report.increments.last().copied().unwrap_or(f64::NAN),
        });
    }
    Ok(report.matrix)
}

fn check_physics(k: f64, ell: f64) -> Result<()> {
    if !(k > 0.0 && k.is_finite() && ell > 0.0 && ell.is_finite()) {
        return Err(Error::InvalidConfig(format!("k and ell must be positive, got k = {k}, ell = {ell}")));
    }
    Ok(())
}

/// Solves `U′ = −iℓ 𝓗̌ U` on `[0, 1]` with Dormand–Prince 5(4) steps.
pub fn transfer_matrix_rk45(profile: &dyn Profile1D, k: f64, ell: f64, tol: f64) -> Result<TransferMatrix1D> {
    check_physics(k, ell)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!("tol must be positive, got {tol}")));
    }
    const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let rhs = |x: f64, u: TransferMatrix1D| h_check(profile, x, k, ell).scale(-I * ell) * u;
    let mut u = TransferMatrix1D::identity();
    let mut x = 0.0;
    let mut h = 1e-2;
    let mut steps = 0usize;
    while x < 1.0 {
        if steps > 1_000_000 {
            return Err(Error::Numerics(crate::NumericsError::NoConvergence {
                estimate: x.into(),
                error: h,
                subdivisions: steps,
            }));
        }
        steps += 1;
        h = h.min(1.0 - x);
        let mut stages = [TransferMatrix1D::zero(); 7];
        for s in 0..7 {
            let mut y = u;
            for (j, stage) in stages.iter().enumerate().take(s) {
                if A[s][j] != 0.0 {
                    y = y + stage.scale((h * A[s][j]).into());
                }
            }
            stages[s] = rhs(x + C[s] * h, y);
        }
        let mut high = u;
        let mut err = TransferMatrix1D::zero();
        for s in 0..7 {
            high = high + stages[s].scale((h * B5[s]).into());
            err = err + stages[s].scale((h * (B5[s] - B4[s])).into());
        }
        let scale = tol * (1.0 + u.norm().max(high.norm()));
        let ratio = err.norm() / scale;
        if !ratio.is_finite() {
            return Err(Error::Numerics(crate::NumericsError::NonFinite { at: x }));
        }
        if ratio <= 1.0 {
            x += h;
            u = high;
        }
        let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < 1e-14 {
            return Err(Error::Numerics(crate::NumericsError::NoConvergence {
                estimate: x.into(),
                error: err.norm(),
                subdivisions: steps,
            }));
        }
    }
    Ok(u)
}

/// Reflection and transmission amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scattering1D {
    pub r_left: Complex64,
    pub r_right: Complex64,
    pub t: Complex64,
}

/// `|M₂₂|` below this is reported as a near spectral singularity.
pub const M22_FLOOR: f64 = 1e-12;

/// `Rˡ = −M₂₁/M₂₂`, `Rʳ = M₁₂/M₂₂`, `T = 1/M₂₂`.
pub fn scattering_1d(m: &TransferMatrix1D) -> Result<Scattering1D> {
    if m.m22.norm() < M22_FLOOR {
        return Err(Error::Singular(format!(
            "|M22| = {:.3e} is below {M22_FLOOR:e}: near a spectral singularity",
            m.m22.norm()
        )));
    }
    let inv = m.m22.inv();
    Ok(Scattering1D {
        r_left: -m.m21 * inv,
        r_right: m.m12 * inv,
        t: inv,
    })
}

/// Transfer matrix of a homogeneous slab of index `n` and thickness `ℓ`,
/// from matching plane waves at both faces.
pub fn analytic_slab(n: Complex64, k: f64, ell: f64) -> Result<TransferMatrix1D> {
    check_physics(k, ell)?;
    let basis = |q: Complex64, x: f64| {
        let e = (I * q * x).exp();
        let ei = (-I * q * x).exp();
        TransferMatrix1D::new(e, ei, I * q * e, -I * q * ei)
    };
    let kc = Complex64::new(k, 0.0);
    let nk = n * k;
    Ok(basis(kc, ell).inverse()? * basis(nk, ell) * basis(nk, 0.0).inverse()? * basis(kc, 0.0))
}
