//! Compactly supported smoothing kernels and the constants derived from them.
//!
//! A kernel `K` is nonnegative, vanishes outside `[-A, A]` and integrates to
//! one. Besides `λ_K = ∫K²` and `ψ_K = ∫u²K/2`, band calibration needs the
//! boundary constant `K₁ = [K²(-A) + K²(A)] / (2λ_K)` and the roughness
//! constant `K₂ = ∫(K')² / (2λ_K)`. These fix the local behavior of the
//! kernel autocorrelation `r(s) = 1 - C₀|s|^α + o(|s|^α)`: `(α, C₀) = (1, K₁)`
//! when the kernel jumps at its boundary, otherwise `(2, K₂)`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ScbError};
use crate::quadrature::{integrate_with_breaks, DEFAULT_TOL};

/// Spacing of the central differences used for tabulated kernels.
pub const TABLE_DIFF_STEP: f64 = 1e-5;
/// Tolerance on `∫K = 1`.
pub const MASS_TOL: f64 = 1e-9;

/// Built-in kernels, all supported on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BuiltinKernel {
    #[default]
    Epanechnikov,
    #[serde(alias = "rect", alias = "uniform")]
    Rectangular,
    Triangular,
    #[serde(alias = "biweight")]
    Quartic,
}

impl BuiltinKernel {
    pub const ALL: [BuiltinKernel; 4] = [
        BuiltinKernel::Epanechnikov,
        BuiltinKernel::Rectangular,
        BuiltinKernel::Triangular,
        BuiltinKernel::Quartic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BuiltinKernel::Epanechnikov => "epanechnikov",
            BuiltinKernel::Rectangular => "rect",
            BuiltinKernel::Triangular => "triangular",
            BuiltinKernel::Quartic => "quartic",
        }
    }

    #[inline]
    fn eval(self, u: f64) -> f64 {
        if !(-1.0..=1.0).contains(&u) {
            return 0.0;
        }
        match self {
            BuiltinKernel::Epanechnikov => 0.75 * (1.0 - u * u),
            BuiltinKernel::Rectangular => 0.5,
            BuiltinKernel::Triangular => 1.0 - u.abs(),
            BuiltinKernel::Quartic => {
                let t = 1.0 - u * u;
                0.9375 * t * t
            }
        }
    }

    // One-sided values at the support endpoints are used for |u| = 1.
    #[inline]
    fn derivative(self, u: f64) -> f64 {
        if !(-1.0..=1.0).contains(&u) {
            return 0.0;
        }
        match self {
            BuiltinKernel::Epanechnikov => -1.5 * u,
            BuiltinKernel::Rectangular => 0.0,
            BuiltinKernel::Triangular => {
                if u > 0.0 {
                    -1.0
                } else if u < 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            BuiltinKernel::Quartic => -3.75 * u * (1.0 - u * u),
        }
    }

    fn cdf(self, u: f64) -> f64 {
        if u <= -1.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        match self {
            BuiltinKernel::Epanechnikov => 0.5 + 0.75 * (u - u * u * u / 3.0),
            BuiltinKernel::Rectangular => 0.5 * (u + 1.0),
            BuiltinKernel::Triangular => {
                if u <= 0.0 {
                    0.5 * (1.0 + u) * (1.0 + u)
                } else {
                    1.0 - 0.5 * (1.0 - u) * (1.0 - u)
                }
            }
            BuiltinKernel::Quartic => {
                let u3 = u * u * u;
                0.5 + 0.9375 * (u - 2.0 * u3 / 3.0 + u3 * u * u / 5.0)
            }
        }
    }

    // Exact variate generators.
    fn sample(self, rng: &mut dyn RngCore) -> f64 {
        let mut uni = || rng.random::<f64>() * 2.0 - 1.0;
        match self {
            // Devroye's rule for the Epanechnikov density.
            BuiltinKernel::Epanechnikov => {
                let (u1, u2, u3) = (uni(), uni(), uni());
                if u3.abs() >= u2.abs() && u3.abs() >= u1.abs() {
                    u2
                } else {
                    u3
                }
            }
            BuiltinKernel::Rectangular => uni(),
            BuiltinKernel::Triangular => 0.5 * (uni() + uni()),
            // 2·Beta(3,3) − 1; Beta(3,3) is the median of five uniforms.
            BuiltinKernel::Quartic => {
                let mut v = [uni(), uni(), uni(), uni(), uni()];
                v.sort_by(f64::total_cmp);
                v[2]
            }
        }
    }

    fn closed_form(self) -> KernelConstants {
        let (lambda_k, k1, k2, psi_k) = match self {
            BuiltinKernel::Epanechnikov => (0.6, 0.0, 1.25, 0.1),
            BuiltinKernel::Rectangular => (0.5, 0.5, 0.0, 1.0 / 6.0),
            BuiltinKernel::Triangular => (2.0 / 3.0, 0.0, 1.5, 1.0 / 12.0),
            BuiltinKernel::Quartic => (5.0 / 7.0, 0.0, 1.5, 1.0 / 14.0),
        };
        KernelConstants::from_parts(lambda_k, k1, k2, psi_k)
    }

    fn breakpoints(self) -> &'static [f64] {
        match self {
            BuiltinKernel::Triangular => &[-1.0, 0.0, 1.0],
            _ => &[-1.0, 1.0],
        }
    }
}

impl fmt::Display for BuiltinKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BuiltinKernel {
    type Err = ScbError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "epanechnikov" | "epa" => Ok(BuiltinKernel::Epanechnikov),
            "rect" | "rectangular" | "uniform" | "box" => Ok(BuiltinKernel::Rectangular),
            "triangular" | "triangle" => Ok(BuiltinKernel::Triangular),
            "quartic" | "biweight" => Ok(BuiltinKernel::Quartic),
            "gaussian" | "normal" => Err(ScbError::NotAKernel(format!(
                "`{s}` has unbounded support; use epanechnikov, rect, triangular or quartic"
            ))),
            other => Err(ScbError::NotAKernel(format!(
                "unknown kernel `{other}`; expected epanechnikov, rect, triangular or quartic"
            ))),
        }
    }
}

/// Kernel-derived constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConstants {
    pub lambda_k: f64,
    pub k1: f64,
    pub k2: f64,
    pub psi_k: f64,
    pub alpha: u8,
    pub c0: f64,
}

impl KernelConstants {
    fn from_parts(lambda_k: f64, k1: f64, k2: f64, psi_k: f64) -> Self {
        let (alpha, c0) = if k1 > 1e-12 { (1, k1) } else { (2, k2) };
        KernelConstants {
            lambda_k,
            k1,
            k2,
            psi_k,
            alpha,
            c0,
        }
    }

    /// Constants of `K_c(u) = K(u/c)/c`.
    fn rescaled(&self, c: f64) -> Self {
        KernelConstants::from_parts(self.lambda_k / c, self.k1 / c, self.k2 / (c * c), self.psi_k * c * c)
    }
}

/// Kernel sampled on an equispaced table over `[-A, A]`, linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
struct KernelTable {
    support: f64,
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl KernelTable {
    fn step(&self) -> f64 {
        2.0 * self.support / (self.values.len() - 1) as f64
    }

    fn eval(&self, u: f64) -> f64 {
        let a = self.support;
        if !(-a..=a).contains(&u) {
            return 0.0;
        }
        let h = self.step();
        let pos = (u + a) / h;
        let i = (pos.floor() as usize).min(self.values.len() - 2);
        let t = pos - i as f64;
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    fn derivative(&self, u: f64) -> f64 {
        let a = self.support;
        if !(-a..=a).contains(&u) {
            return 0.0;
        }
        let d = TABLE_DIFF_STEP;
        // Stay inside the support so boundary values get one-sided slopes.
        let lo = (u - d).max(-a);
        let hi = (u + d).min(a);
        (self.eval(hi) - self.eval(lo)) / (hi - lo)
    }

    fn nodes(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.values.len()).map(|i| -self.support + i as f64 * h).collect()
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let p: f64 = rng.random();
        let i = match self.cumulative.binary_search_by(|c| c.total_cmp(&p)) {
            Ok(i) => return -self.support + i as f64 * self.step(),
            Err(i) => i.clamp(1, self.values.len() - 1) - 1,
        };
        // Within the segment the density is linear; invert the quadratic CDF.
        let h = self.step();
        let (k0, k1) = (self.values[i], self.values[i + 1]);
        let target = p - self.cumulative[i];
        let slope = (k1 - k0) / h;
        let t = if slope.abs() < 1e-14 {
            if k0 > 0.0 {
                target / k0
            } else {
                0.0
            }
        } else {
            let disc = (k0 * k0 + 2.0 * slope * target).max(0.0);
            (disc.sqrt() - k0) / slope
        };
        -self.support + i as f64 * h + t.clamp(0.0, h)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Builtin(BuiltinKernel),
    Table(KernelTable),
}

/// A validated kernel together with its constants.
///
/// Profiles are immutable once built and cheap to clone.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelProfile {
    name: String,
    shape: Shape,
    scale: f64,
    constants: KernelConstants,
}

impl KernelProfile {
    /// A built-in kernel with closed-form constants.
    pub fn builtin(kind: BuiltinKernel) -> Self {
        KernelProfile {
            name: kind.as_str().to_string(),
            shape: Shape::Builtin(kind),
            scale: 1.0,
            constants: kind.closed_form(),
        }
    }

    pub fn epanechnikov() -> Self {
        Self::builtin(BuiltinKernel::Epanechnikov)
    }

    /// Look a kernel up by name (`epanechnikov`, `rect`, `triangular`, `quartic`).
    pub fn by_name(name: &str) -> Result<Self> {
        Ok(Self::builtin(name.parse()?))
    }

    /// A user kernel given by `values` at equispaced nodes on `[-support, support]`.
    /// Constants are computed by quadrature; derivative constants use central
    /// differences at spacing [`TABLE_DIFF_STEP`].
    pub fn from_table(name: &str, support: f64, values: Vec<f64>) -> Result<Self> {
        if !(support.is_finite() && support > 0.0) {
            return Err(ScbError::NotAKernel(format!("support radius must be positive, got {support}")));
        }
        if values.len() < 3 {
            return Err(ScbError::NotAKernel("a kernel table needs at least 3 nodes".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(ScbError::NotAKernel(format!("kernel takes the invalid value {v}")));
        }
        let h = 2.0 * support / (values.len() - 1) as f64;
        let mut cumulative = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in values.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            cumulative.push(acc);
        }
        if (acc - 1.0).abs() > MASS_TOL {
            return Err(ScbError::NotAKernel(format!("kernel integrates to {acc}, not 1")));
        }
        let table = KernelTable {
            support,
            values,
            cumulative,
        };
        let mut profile = KernelProfile {
            name: name.to_string(),
            shape: Shape::Table(table),
            scale: 1.0,
            constants: KernelConstants::from_parts(1.0, 0.0, 0.0, 0.0),
        };
        profile.constants = profile.quadrature_constants();
        Ok(profile)
    }

    /// The rescaled kernel `u ↦ K(u/c)/c`, supported on `[-cA, cA]`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(ScbError::DomainError(format!("kernel scale must be positive, got {c}")));
        }
        Ok(KernelProfile {
            name: format!("{}*{c}", self.name),
            shape: self.shape.clone(),
            scale: self.scale * c,
            constants: self.constants.rescaled(c),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The support radius `A`.
    pub fn support(&self) -> f64 {
        self.scale
            * match &self.shape {
                Shape::Builtin(_) => 1.0,
                Shape::Table(t) => t.support,
            }
    }

    pub fn constants(&self) -> &KernelConstants {
        &self.constants
    }

    pub fn lambda_k(&self) -> f64 {
        self.constants.lambda_k
    }

    pub fn psi_k(&self) -> f64 {
        self.constants.psi_k
    }

    /// `K(u)`; exactly zero outside the support.
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        let c = self.scale;
        match &self.shape {
            Shape::Builtin(k) => k.eval(u / c) / c,
            Shape::Table(t) => t.eval(u / c) / c,
        }
    }

    /// `K'(u)`, zero outside the support.
    #[inline]
    pub fn derivative(&self, u: f64) -> f64 {
        let c = self.scale;
        match &self.shape {
            Shape::Builtin(k) => k.derivative(u / c) / (c * c),
            Shape::Table(t) => t.derivative(u / c) / (c * c),
        }
    }

    /// Distribution function of a variate with density `K`.
    pub fn cdf(&self, u: f64) -> f64 {
        match &self.shape {
            Shape::Builtin(k) => k.cdf(u / self.scale),
            Shape::Table(_) => {
                let a = self.support();
                if u <= -a {
                    return 0.0;
                }
                let hi = u.min(a);
                integrate_with_breaks(|v| self.eval(v), -a, hi, &self.breakpoints(), DEFAULT_TOL)
            }
        }
    }

    /// Draw a variate with density `K`.
    pub fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.scale
            * match &self.shape {
                Shape::Builtin(k) => k.sample(rng),
                Shape::Table(t) => t.sample(rng),
            }
    }

    /// Points where `K` or `K'` may be discontinuous.
    pub fn breakpoints(&self) -> Vec<f64> {
        let raw = match &self.shape {
            Shape::Builtin(k) => k.breakpoints().to_vec(),
            Shape::Table(t) => t.nodes(),
        };
        raw.into_iter().map(|x| x * self.scale).collect()
    }

    /// Recompute every constant by adaptive quadrature, independent of any
    /// closed form.
    pub fn quadrature_constants(&self) -> KernelConstants {
        let a = self.support();
        let br = self.breakpoints();
        let lambda_k = integrate_with_breaks(|u| self.eval(u).powi(2), -a, a, &br, DEFAULT_TOL);
        let psi_k = 0.5 * integrate_with_breaks(|u| u * u * self.eval(u), -a, a, &br, DEFAULT_TOL);
        let roughness = integrate_with_breaks(|u| self.derivative(u).powi(2), -a, a, &br, DEFAULT_TOL);
        let k1 = (self.eval(-a).powi(2) + self.eval(a).powi(2)) / (2.0 * lambda_k);
        KernelConstants::from_parts(lambda_k, k1, roughness / (2.0 * lambda_k), psi_k)
    }

    /// `∫K` by quadrature.
    pub fn mass(&self) -> f64 {
        let a = self.support();
        integrate_with_breaks(|u| self.eval(u), -a, a, &self.breakpoints(), DEFAULT_TOL)
    }

    /// Kernel autocorrelation `r(s) = ∫K(x)K(x+s)dx / λ_K`.
    pub fn autocorrelation(&self, s: f64) -> f64 {
        let a = self.support();
        let s_abs = s.abs();
        if s_abs >= 2.0 * a {
            return 0.0;
        }
        let lo = -a;
        let hi = a - s_abs;
        let base = self.breakpoints();
        let mut br: Vec<f64> = base.iter().copied().collect();
        br.extend(base.iter().map(|x| x - s_abs));
        let overlap = integrate_with_breaks(|x| self.eval(x) * self.eval(x + s_abs), lo, hi, &br, DEFAULT_TOL);
        overlap / self.constants.lambda_k
    }
}

/// Evaluate the kernel (free-function form).
pub fn eval_kernel(profile: &KernelProfile, u: f64) -> f64 {
    profile.eval(u)
}

/// `r(s)` (free-function form).
pub fn kernel_autocorr(profile: &KernelProfile, s: f64) -> f64 {
    profile.autocorrelation(s)
}

/// Sample a kernel variate with any `Rng`.
pub fn sample_kernel<R: Rng>(profile: &KernelProfile, rng: &mut R) -> f64 {
    profile.sample(rng)
}
