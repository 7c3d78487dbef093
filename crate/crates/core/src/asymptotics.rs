//! Closed-form calibration constants for the maximum deviation of kernel
//! estimates: Gumbel normalizers, band halfwidth multipliers and the
//! long-memory limit scale.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ScbError};
use crate::kernel::KernelProfile;
use crate::quadrature::{integrate, DEFAULT_TOL};

/// Which logarithm enters the `z_α` term of `l₁`.
///
/// `BBar` uses the normalized bandwidth `b/(u−l)` everywhere. `B` uses the
/// raw bandwidth in the `z_α` term only; both agree on unit-width intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum L1LogArg {
    B,
    #[default]
    BBar,
}

impl std::str::FromStr for L1LogArg {
    type Err = ScbError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "b" => Ok(L1LogArg::B),
            "bbar" => Ok(L1LogArg::BBar),
            other => Err(ScbError::Config(format!("l1 log argument must be `b` or `bbar`, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationKind {
    Gumbel,
    Simulated,
    /// Cutoff supplied by the caller.
    Fixed,
}

/// How a band's halfwidth multiplier was obtained.
///
/// For simulated or fixed calibration `d_n` and `z_alpha` are informational
/// (and absent when the bandwidth is too large for them to be defined).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandCalibration {
    pub level: f64,
    pub method: CalibrationKind,
    pub d_n: Option<f64>,
    pub z_alpha: Option<f64>,
    pub halfwidth_scale: f64,
    pub bbar: f64,
}

impl BandCalibration {
    /// Gumbel calibration with multiplier `l₁`.
    pub fn gumbel(alpha: f64, b: f64, width: f64, profile: &KernelProfile, log_arg: L1LogArg) -> Result<Self> {
        let bbar = b / width;
        let d_n = normalizing_dn(bbar, profile)?;
        let z = gumbel_quantile(alpha)?;
        let l1 = match log_arg {
            L1LogArg::BBar => halfwidth_l1(alpha, bbar, profile)?,
            L1LogArg::B => halfwidth_l1_raw_b(alpha, b, bbar, profile)?,
        };
        Ok(BandCalibration {
            level: alpha,
            method: CalibrationKind::Gumbel,
            d_n: Some(d_n),
            z_alpha: Some(z),
            halfwidth_scale: l1,
            bbar,
        })
    }

    /// Calibration with an externally determined cutoff.
    pub fn with_cutoff(alpha: f64, b: f64, width: f64, profile: &KernelProfile, cutoff: f64, method: CalibrationKind) -> Self {
        let bbar = b / width;
        BandCalibration {
            level: alpha,
            method,
            d_n: normalizing_dn(bbar, profile).ok(),
            z_alpha: gumbel_quantile(alpha).ok(),
            halfwidth_scale: cutoff,
            bbar,
        }
    }
}

fn log_inverse_bbar(bbar: f64) -> Result<f64> {
    if !(bbar > 0.0 && bbar.is_finite()) {
        return Err(ScbError::DomainError(format!("normalized bandwidth must be positive, got {bbar}")));
    }
    let lb = -bbar.ln();
    if !(lb > 1.0) {
        return Err(ScbError::BandwidthTooLarge { bbar });
    }
    Ok(lb)
}

/// `d_n` from raw kernel constants. The `K₁ > 0` branch applies when `k1`
/// exceeds `1e-12`.
pub fn normalizing_dn_raw(bbar: f64, k1: f64, k2: f64) -> Result<f64> {
    let lb = log_inverse_bbar(bbar)?;
    let root = (2.0 * lb).sqrt();
    let correction = if k1 > 1e-12 {
        (k1 / std::f64::consts::PI.sqrt()).ln() + 0.5 * lb.ln()
    } else {
        if !(k2 > 0.0) {
            return Err(ScbError::DomainError(format!("K2 must be positive when K1 = 0, got {k2}")));
        }
        (k2.sqrt() / (std::f64::consts::SQRT_2 * std::f64::consts::PI)).ln()
    };
    Ok(root + correction / root)
}

/// Gumbel centering constant `d_n` at normalized bandwidth `bbar`.
pub fn normalizing_dn(bbar: f64, profile: &KernelProfile) -> Result<f64> {
    let c = profile.constants();
    normalizing_dn_raw(bbar, c.k1, c.k2)
}

/// `exp(−2e^{−z})`.
pub fn gumbel_cdf(z: f64) -> f64 {
    (-2.0 * (-z).exp()).exp()
}

/// `z_α` with `gumbel_cdf(z_α) = 1 − α`.
pub fn gumbel_quantile(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ScbError::DomainError(format!("level must lie in (0, 1), got {alpha}")));
    }
    Ok(-(-0.5 * (-alpha).ln_1p()).ln())
}

pub fn halfwidth_l1_raw(alpha: f64, bbar: f64, k1: f64, k2: f64) -> Result<f64> {
    let d = normalizing_dn_raw(bbar, k1, k2)?;
    let lb = log_inverse_bbar(bbar)?;
    Ok(gumbel_quantile(alpha)? / (2.0 * lb).sqrt() + d)
}

/// `l₁ = z_α/(2 log b̄⁻¹)^{1/2} + d_n`.
pub fn halfwidth_l1(alpha: f64, bbar: f64, profile: &KernelProfile) -> Result<f64> {
    let c = profile.constants();
    halfwidth_l1_raw(alpha, bbar, c.k1, c.k2)
}

/// `l₁` with `log b⁻¹` in the `z_α` term and `d_n` at `b̄`.
pub fn halfwidth_l1_raw_b(alpha: f64, b: f64, bbar: f64, profile: &KernelProfile) -> Result<f64> {
    let d = normalizing_dn(bbar, profile)?;
    if !(b > 0.0 && b < 1.0) {
        return Err(ScbError::DomainError(format!("log b^-1 needs 0 < b < 1, got {b}")));
    }
    Ok(gumbel_quantile(alpha)? / (-2.0 * b.ln()).sqrt() + d)
}

/// Exact `⌈width/(2b)⌉`, corrected for rounding in the division.
pub fn grid_count(width: f64, b: f64) -> Result<u64> {
    if !(b > 0.0 && width > 0.0) || !(width / b).is_finite() {
        return Err(ScbError::DomainError(format!("grid count needs positive width and bandwidth, got {width}, {b}")));
    }
    let step = 2.0 * b;
    let mut j = (width / step).ceil();
    // step·j is exact to one rounding under fma, so these residual signs are reliable.
    while step.mul_add(-j, width) > 0.0 {
        j += 1.0;
    }
    while j > 1.0 && step.mul_add(-(j - 1.0), width) <= 0.0 {
        j -= 1.0;
    }
    Ok(j as u64)
}

/// `l₂` for `J_n = ⌈width/(2b)⌉` grid points.
pub fn halfwidth_l2_on(alpha: f64, b: f64, width: f64) -> Result<f64> {
    let j = grid_count(width, b)?;
    if j < 2 {
        return Err(ScbError::DomainError(format!("l2 needs at least 2 grid points, got J = {j}")));
    }
    let lj = (j as f64).ln();
    let root = (2.0 * lj).sqrt();
    let z = gumbel_quantile(alpha)?;
    Ok(z / root + root - (0.5 * lj.ln() + (2.0 * std::f64::consts::PI.sqrt()).ln()) / root)
}

/// `l₂` on a unit-width interval.
pub fn halfwidth_l2(alpha: f64, b: f64) -> Result<f64> {
    halfwidth_l2_on(alpha, b, 1.0)
}

/// Long-memory coefficients `a_j = ℓ j^{−β}` and their limit constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrdSpec {
    pub beta: f64,
    pub ell: f64,
    pub c_beta: f64,
}

impl LrdSpec {
    pub fn new(beta: f64, ell: f64) -> Result<Self> {
        if !(ell > 0.0 && ell.is_finite()) {
            return Err(ScbError::DomainError(format!("ell must be positive, got {ell}")));
        }
        let mut spec = lrd_limit_scale(beta)?;
        spec.ell = ell;
        Ok(spec)
    }

    /// `b^{1/2} n^{1−β} ℓ`, the normalizer of the large-bandwidth limit.
    pub fn normalizer(&self, n: usize, b: f64) -> f64 {
        b.sqrt() * (n as f64).powf(1.0 - self.beta) * self.ell
    }

    /// `√c_β/√λ_K · max|f′|/√f`, where `max_ratio` is the maximum of
    /// `|f′|/√f` over the interval.
    pub fn half_normal_scale(&self, lambda_k: f64, max_ratio: f64) -> f64 {
        (self.c_beta / lambda_k).sqrt() * max_ratio
    }
}

/// `max |f′(x)|/√f(x)` over the given points.
pub fn max_gradient_ratio(points: &[f64], f: impl Fn(f64) -> f64, f1: impl Fn(f64) -> f64) -> f64 {
    points.iter().map(|&x| f1(x).abs() / f(x).sqrt()).fold(0.0, f64::max)
}

/// `c_β = ∫₀^∞ (x + x²)^{−β} dx / ((3 − 2β)(1 − β))` by quadrature, with `ℓ = 1`.
pub fn lrd_limit_scale(beta: f64) -> Result<LrdSpec> {
    if !(beta > 0.5 && beta < 1.0) {
        return Err(ScbError::DomainError(format!("beta must lie in (1/2, 1), got {beta}")));
    }
    // On [0,1] put x = t^p with p = 1/(1−β); on [1,∞) put x = t^{−q} with
    // q = 1/(2β−1). Both remove the endpoint singularity exactly.
    let p = 1.0 / (1.0 - beta);
    let q = 1.0 / (2.0 * beta - 1.0);
    let head = integrate(|t: f64| p * (1.0 + t.powf(p)).powf(-beta), 0.0, 1.0, DEFAULT_TOL);
    let tail = integrate(|t: f64| q * (1.0 + t.powf(q)).powf(-beta), 0.0, 1.0, DEFAULT_TOL);
    let c_beta = (head + tail) / ((3.0 - 2.0 * beta) * (1.0 - beta));
    Ok(LrdSpec { beta, ell: 1.0, c_beta })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Gumbel,
    HalfNormal,
    Indeterminate,
}

/// Finite-`n` reading of the bandwidth conditions. Heuristic only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthDiagnostics {
    pub n: usize,
    pub b: f64,
    /// `n^{−δ₁}`.
    pub lower_rate: f64,
    /// `n^{−δ₂}`.
    pub upper_rate: f64,
    pub rate_condition_holds: bool,
    pub nb: f64,
    /// `b^{1/2} n^{1−β} ℓ` under long memory.
    pub lrd_statistic: Option<f64>,
    pub regime: Option<Regime>,
}

pub fn check_bandwidth_conditions(n: usize, b: f64, delta1: f64, delta2: f64, lrd: Option<&LrdSpec>) -> BandwidthDiagnostics {
    let nf = n as f64;
    let lower_rate = nf.powf(-delta1);
    let upper_rate = nf.powf(-delta2);
    let tol = 1e-12 * b.abs();
    let rate_condition_holds = b >= lower_rate - tol && b <= upper_rate + tol;
    let (lrd_statistic, regime) = match lrd {
        Some(spec) => {
            let s = spec.normalizer(n, b);
            let log_n = nf.ln();
            let regime = if s < log_n.powf(-0.5) {
                Regime::Gumbel
            } else if s > log_n.sqrt() {
                Regime::HalfNormal
            } else {
                Regime::Indeterminate
            };
            (Some(s), Some(regime))
        }
        None => (None, None),
    };
    BandwidthDiagnostics {
        n,
        b,
        lower_rate,
        upper_rate,
        rate_condition_holds,
        nb: nf * b,
        lrd_statistic,
        regime,
    }
}
