//! Synthetic stationary processes and dependence diagnostics for linear
//! coefficient sequences.

use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Result, ScbError};

/// Default burn-in for recursive generators.
pub const DEFAULT_BURN_IN: usize = 1000;

/// Magnitude beyond which a recursion is declared divergent.
pub const DIVERGENCE_BOUND: f64 = 1e6;

/// Innovation law, standardized to mean 0 and variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Innovation {
    #[default]
    Normal,
    /// Uniform on `[−√3, √3]`.
    UniformCentered,
    Rademacher,
}

impl std::str::FromStr for Innovation {
    type Err = ScbError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Innovation::Normal),
            "uniform" | "uniform_centered" => Ok(Innovation::UniformCentered),
            "rademacher" => Ok(Innovation::Rademacher),
            other => Err(ScbError::Config(format!("unknown innovation `{other}` (normal, uniform, rademacher)"))),
        }
    }
}

impl Innovation {
    pub fn draw(&self, rng: &mut dyn RngCore) -> f64 {
        match self {
            Innovation::Normal => StandardNormal.sample(rng),
            Innovation::UniformCentered => 3f64.sqrt() * (2.0 * rng.random::<f64>() - 1.0),
            Innovation::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    /// `E ε⁴`.
    pub fn fourth_moment(&self) -> f64 {
        match self {
            Innovation::Normal => 3.0,
            Innovation::UniformCentered => 1.8,
            Innovation::Rademacher => 1.0,
        }
    }

    /// `‖ε − ε′‖_p` for independent copies `ε, ε′`.
    pub fn coupling_norm(&self, p: f64) -> f64 {
        let moment = match self {
            // ε − ε′ ~ N(0, 2).
            Innovation::Normal => 2f64.powf(p) * gamma((p + 1.0) / 2.0) / std::f64::consts::PI.sqrt(),
            // Triangular on [−2c, 2c] with c = √3.
            Innovation::UniformCentered => {
                let c = 3f64.sqrt();
                (2.0 * c).powf(p + 2.0) / (2.0 * c * c * (p + 1.0) * (p + 2.0))
            }
            // ±2 with probability 1/4 each, else 0.
            Innovation::Rademacher => 2f64.powf(p) / 2.0,
        };
        moment.powf(1.0 / p)
    }

    fn fill(&self, rng: &mut dyn RngCore, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = self.draw(rng);
        }
    }
}

/// Scalar function used for drifts and volatilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum FunctionSpec {
    /// `Σ c_k x^k`, constant term first.
    Polynomial { coeffs: Vec<f64> },
    /// `scale · |x|^exponent`.
    Power { scale: f64, exponent: f64 },
}

impl FunctionSpec {
    pub fn constant(c: f64) -> Self {
        FunctionSpec::Polynomial { coeffs: vec![c] }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            FunctionSpec::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
            FunctionSpec::Power { scale, exponent } => scale * x.abs().powf(*exponent),
        }
    }
}

/// Closed-form marginal laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "law")]
pub enum Marginal {
    Normal { mean: f64, sd: f64 },
    Uniform { lower: f64, upper: f64 },
}

impl Marginal {
    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Marginal::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
            }
            Marginal::Uniform { lower, upper } => {
                if x >= lower && x <= upper {
                    1.0 / (upper - lower)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn pdf_derivative(&self, x: f64) -> f64 {
        match *self {
            Marginal::Normal { mean, sd } => -(x - mean) / (sd * sd) * self.pdf(x),
            Marginal::Uniform { .. } => 0.0,
        }
    }

    pub fn pdf_second_derivative(&self, x: f64) -> f64 {
        match *self {
            Marginal::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                (z * z - 1.0) / (sd * sd) * self.pdf(x)
            }
            Marginal::Uniform { .. } => 0.0,
        }
    }

    /// Points where the density is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Marginal::Normal { .. } => Vec::new(),
            Marginal::Uniform { lower, upper } => vec![lower, upper],
        }
    }

    pub fn draw(&self, rng: &mut dyn RngCore) -> f64 {
        match *self {
            Marginal::Normal { mean, sd } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sd * z
            }
            Marginal::Uniform { lower, upper } => lower + (upper - lower) * rng.random::<f64>(),
        }
    }
}

fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}

/// A synthetic process; every kind is stationary under its stated constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ProcessModel {
    /// Independent draws from a marginal law.
    Iid { law: Marginal },
    /// `X_i = Σ_j a_j ε_{i−j}` over the given coefficients.
    Linear {
        coeffs: Vec<f64>,
        #[serde(default)]
        innovation: Innovation,
    },
    /// Linear process with `a_0 = 1`, `a_j = ℓ j^{−β}` for `1 ≤ j ≤ M`.
    LrdLinear {
        beta: f64,
        #[serde(default = "one")]
        ell: f64,
        /// Truncation lag `M`; `10 n` when absent.
        #[serde(default)]
        truncation: Option<usize>,
        #[serde(default)]
        innovation: Innovation,
    },
    /// `X_i = ε_i (a² + b² X²_{i−1})^{1/2}`.
    Arch {
        a: f64,
        b: f64,
        #[serde(default)]
        innovation: Innovation,
        #[serde(default = "default_burn_in")]
        burn_in: usize,
    },
    /// `Y_i = μ(Y_{i−1}) + σ(Y_{i−1}) η_i`, paired as `(Y_{i−1}, Y_i)`.
    NonlinearAr {
        mu: FunctionSpec,
        sigma: FunctionSpec,
        #[serde(default)]
        innovation: Innovation,
        #[serde(default)]
        y0: f64,
        #[serde(default = "default_burn_in")]
        burn_in: usize,
    },
    /// Euler scheme `R_{i+1} = R_i + μ(R_i)Δ + σ(R_i)√Δ η_i`, paired as
    /// `(R_i, R_{i+1} − R_i)`.
    DiffusionDiscrete {
        mu: FunctionSpec,
        sigma: FunctionSpec,
        delta: f64,
        x0: f64,
        #[serde(default)]
        innovation: Innovation,
    },
    /// `Y_i = μ(X_i) + σ(X_i) η_i` with an AR(1) regressor `X_i = φ X_{i−1} + ε_i`.
    Regression {
        phi: f64,
        mu: FunctionSpec,
        sigma: FunctionSpec,
        #[serde(default)]
        innovation: Innovation,
        #[serde(default = "default_burn_in")]
        burn_in: usize,
    },
}

fn one() -> f64 {
    1.0
}

/// A generated path. `x`/`y` are filled for models that produce regression pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub series: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Sample {
    fn series_only(series: Vec<f64>) -> Self {
        Sample {
            series,
            x: Vec::new(),
            y: Vec::new(),
        }
    }
}

impl ProcessModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            ProcessModel::Iid { law } => match *law {
                Marginal::Normal { sd, .. } if !(sd > 0.0) => Err(ScbError::DomainError("normal sd must be positive".into())),
                Marginal::Uniform { lower, upper } if !(lower < upper) => {
                    Err(ScbError::DomainError("uniform needs lower < upper".into()))
                }
                _ => Ok(()),
            },
            ProcessModel::Linear { coeffs, .. } => {
                if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
                    Err(ScbError::DomainError("linear coefficients must be finite and nonempty".into()))
                } else {
                    Ok(())
                }
            }
            ProcessModel::LrdLinear { beta, ell, .. } => {
                check_beta(*beta)?;
                if !(*ell > 0.0) {
                    return Err(ScbError::DomainError(format!("ell must be positive, got {ell}")));
                }
                Ok(())
            }
            ProcessModel::Arch { a, b, .. } => check_arch(*a, *b),
            ProcessModel::NonlinearAr { .. } => Ok(()),
            ProcessModel::DiffusionDiscrete { delta, .. } => {
                if *delta > 0.0 {
                    Ok(())
                } else {
                    Err(ScbError::DomainError(format!("time step must be positive, got {delta}")))
                }
            }
            ProcessModel::Regression { phi, .. } => {
                if phi.abs() < 1.0 {
                    Ok(())
                } else {
                    Err(ScbError::DomainError(format!("AR coefficient must satisfy |phi| < 1, got {phi}")))
                }
            }
        }
    }

    /// Marginal law of the series (or regressor) when it is known in closed form.
    pub fn marginal(&self, n: usize) -> Option<Marginal> {
        match self {
            ProcessModel::Iid { law } => Some(*law),
            ProcessModel::Linear {
                coeffs,
                innovation: Innovation::Normal,
            } => Some(Marginal::Normal {
                mean: 0.0,
                sd: coeffs.iter().map(|a| a * a).sum::<f64>().sqrt(),
            }),
            ProcessModel::LrdLinear {
                beta,
                ell,
                truncation,
                innovation: Innovation::Normal,
            } => {
                let m = truncation.unwrap_or(10 * n);
                Some(Marginal::Normal {
                    mean: 0.0,
                    sd: lrd_coefficients(*beta, *ell, m).iter().map(|a| a * a).sum::<f64>().sqrt(),
                })
            }
            ProcessModel::Regression {
                phi,
                innovation: Innovation::Normal,
                ..
            } => Some(Marginal::Normal {
                mean: 0.0,
                sd: (1.0 / (1.0 - phi * phi)).sqrt(),
            }),
            _ => None,
        }
    }

    /// Generate `n` observations (or pairs).
    pub fn generate(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<Sample> {
        self.validate()?;
        match self {
            ProcessModel::Iid { law } => Ok(Sample::series_only((0..n).map(|_| law.draw(rng)).collect())),
            ProcessModel::Linear { coeffs, innovation } => {
                Ok(Sample::series_only(LinearFilter::new(coeffs, n).generate(*innovation, rng)))
            }
            ProcessModel::LrdLinear {
                beta,
                ell,
                truncation,
                innovation,
            } => {
                let coeffs = lrd_coefficients(*beta, *ell, truncation.unwrap_or(10 * n));
                Ok(Sample::series_only(LinearFilter::new(&coeffs, n).generate(*innovation, rng)))
            }
            ProcessModel::Arch { a, b, innovation, burn_in } => {
                Ok(Sample::series_only(arch_path(*a, *b, n, *innovation, *burn_in, rng)?))
            }
            ProcessModel::NonlinearAr {
                mu,
                sigma,
                innovation,
                y0,
                burn_in,
            } => {
                let (x, y) = nonlinear_ar_path(mu, sigma, n, *innovation, *y0, *burn_in, rng)?;
                Ok(Sample {
                    series: y.clone(),
                    x,
                    y,
                })
            }
            ProcessModel::DiffusionDiscrete {
                mu,
                sigma,
                delta,
                x0,
                innovation,
            } => {
                let rates = diffusion_path(mu, sigma, *delta, n, *x0, *innovation, rng)?;
                let x = rates[..n].to_vec();
                let y = rates.windows(2).map(|w| w[1] - w[0]).collect();
                Ok(Sample { series: rates, x, y })
            }
            ProcessModel::Regression {
                phi,
                mu,
                sigma,
                innovation,
                burn_in,
            } => {
                let mut state = 0.0;
                for _ in 0..*burn_in {
                    state = phi * state + innovation.draw(rng);
                }
                let mut x = Vec::with_capacity(n);
                let mut y = Vec::with_capacity(n);
                for _ in 0..n {
                    state = phi * state + innovation.draw(rng);
                    let eta = innovation.draw(rng);
                    x.push(state);
                    y.push(mu.eval(state) + sigma.eval(state) * eta);
                }
                Ok(Sample { series: x.clone(), x, y })
            }
        }
    }

    /// Generate from `ChaCha8Rng::seed_from_u64(seed)`.
    pub fn generate_seeded(&self, n: usize, seed: u64) -> Result<Sample> {
        self.generate(n, &mut ChaCha8Rng::seed_from_u64(seed))
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.5 && beta < 1.0 {
        Ok(())
    } else {
        Err(ScbError::DomainError(format!("beta must lie in (1/2, 1), got {beta}")))
    }
}

fn check_arch(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && b > 0.0) {
        return Err(ScbError::DomainError(format!("ARCH needs a > 0 and b > 0, got a = {a}, b = {b}")));
    }
    if b >= 1.0 {
        return Err(ScbError::DomainError(format!("ARCH needs b < 1 for stationarity, got {b}")));
    }
    Ok(())
}

/// Direct convolution is used below this many multiply-adds.
const DIRECT_CONV_LIMIT: usize = 1 << 22;

/// Causal filter `X_i = Σ_{j<q} a_j ε_{i−j}` producing `n` outputs after a
/// burn-in of `q − 1` innovations. The coefficient spectrum is cached so
/// repeated replicates reuse it.
pub struct LinearFilter {
    coeffs: Vec<f64>,
    n: usize,
    fft: Option<FftPlan>,
}

struct FftPlan {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    spectrum: Vec<Complex<f64>>,
}

impl LinearFilter {
    pub fn new(coeffs: &[f64], n: usize) -> Self {
        let q = coeffs.len();
        let fft = if q.saturating_mul(n) > DIRECT_CONV_LIMIT {
            let size = (n + q - 1).next_power_of_two();
            let mut planner = FftPlanner::new();
            let forward = planner.plan_fft_forward(size);
            let inverse = planner.plan_fft_inverse(size);
            let mut spectrum: Vec<Complex<f64>> = coeffs.iter().map(|&a| Complex::new(a, 0.0)).collect();
            spectrum.resize(size, Complex::new(0.0, 0.0));
            forward.process(&mut spectrum);
            Some(FftPlan {
                size,
                forward,
                inverse,
                spectrum,
            })
        } else {
            None
        };
        LinearFilter {
            coeffs: coeffs.to_vec(),
            n,
            fft,
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Filter a given innovation sequence of length `n + q − 1`.
    pub fn apply(&self, innovations: &[f64]) -> Vec<f64> {
        let q = self.coeffs.len();
        let n = self.n;
        debug_assert_eq!(innovations.len(), n + q - 1);
        match &self.fft {
            None => (0..n)
                .map(|i| {
                    let t = i + q - 1;
                    self.coeffs.iter().enumerate().map(|(j, a)| a * innovations[t - j]).sum()
                })
                .collect(),
            Some(plan) => {
                let mut buf: Vec<Complex<f64>> = innovations.iter().map(|&e| Complex::new(e, 0.0)).collect();
                buf.resize(plan.size, Complex::new(0.0, 0.0));
                plan.forward.process(&mut buf);
                for (v, s) in buf.iter_mut().zip(&plan.spectrum) {
                    *v *= s;
                }
                plan.inverse.process(&mut buf);
                let scale = 1.0 / plan.size as f64;
                // Linear convolution index t = i + q − 1 needs no wrap since size ≥ n + q − 1.
                (0..n).map(|i| buf[i + q - 1].re * scale).collect()
            }
        }
    }

    pub fn generate(&self, innovation: Innovation, rng: &mut dyn RngCore) -> Vec<f64> {
        let mut eps = vec![0.0; self.n + self.coeffs.len() - 1];
        innovation.fill(rng, &mut eps);
        self.apply(&eps)
    }
}

/// `X_i = Σ_j a_j ε_{i−j}`, `n` values, burn-in of `len(coeffs) − 1` discarded.
pub fn gen_linear(coeffs: &[f64], n: usize, innovation: Innovation, seed: u64) -> Result<Vec<f64>> {
    ProcessModel::Linear {
        coeffs: coeffs.to_vec(),
        innovation,
    }
    .generate_seeded(n, seed)
    .map(|s| s.series)
}

/// `a_0 = 1`, `a_j = ℓ j^{−β}` for `1 ≤ j ≤ m`.
pub fn lrd_coefficients(beta: f64, ell: f64, m: usize) -> Vec<f64> {
    std::iter::once(1.0).chain((1..=m).map(|j| ell * (j as f64).powf(-beta))).collect()
}

/// Truncated long-memory linear process with truncation lag `m`.
pub fn gen_lrd(beta: f64, ell: f64, n: usize, m: usize, innovation: Innovation, seed: u64) -> Result<Vec<f64>> {
    ProcessModel::LrdLinear {
        beta,
        ell,
        truncation: Some(m),
        innovation,
    }
    .generate_seeded(n, seed)
    .map(|s| s.series)
}

fn arch_path(a: f64, b: f64, n: usize, innovation: Innovation, burn_in: usize, rng: &mut dyn RngCore) -> Result<Vec<f64>> {
    check_arch(a, b)?;
    let (a2, b2) = (a * a, b * b);
    let mut x = 0.0;
    let mut out = Vec::with_capacity(n);
    for step in 0..burn_in + n {
        x = innovation.draw(rng) * (a2 + b2 * x * x).sqrt();
        if !(x.abs() <= DIVERGENCE_BOUND) {
            return Err(ScbError::Diverged { step, value: x.abs() });
        }
        if step >= burn_in {
            out.push(x);
        }
    }
    Ok(out)
}

/// ARCH(1) path from `X_0 = 0` with the default burn-in discarded.
pub fn gen_arch(a: f64, b: f64, n: usize, innovation: Innovation, seed: u64) -> Result<Vec<f64>> {
    arch_path(a, b, n, innovation, DEFAULT_BURN_IN, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn nonlinear_ar_path(
    mu: &FunctionSpec,
    sigma: &FunctionSpec,
    n: usize,
    innovation: Innovation,
    y0: f64,
    burn_in: usize,
    rng: &mut dyn RngCore,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut prev = y0;
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for step in 0..burn_in + n {
        let next = mu.eval(prev) + sigma.eval(prev) * innovation.draw(rng);
        if !(next.abs() <= DIVERGENCE_BOUND) {
            return Err(ScbError::Diverged { step, value: next.abs() });
        }
        if step >= burn_in {
            x.push(prev);
            y.push(next);
        }
        prev = next;
    }
    Ok((x, y))
}

/// Pairs `(Y_{i−1}, Y_i)` of a nonlinear autoregression started at `y0`.
pub fn gen_nonlinear_ar(
    mu: &FunctionSpec,
    sigma: &FunctionSpec,
    n: usize,
    innovation: Innovation,
    y0: f64,
    burn_in: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    nonlinear_ar_path(mu, sigma, n, innovation, y0, burn_in, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn diffusion_path(
    mu: &FunctionSpec,
    sigma: &FunctionSpec,
    delta: f64,
    n: usize,
    x0: f64,
    innovation: Innovation,
    rng: &mut dyn RngCore,
) -> Result<Vec<f64>> {
    if !(delta > 0.0) {
        return Err(ScbError::DomainError(format!("time step must be positive, got {delta}")));
    }
    let root = delta.sqrt();
    let mut r = Vec::with_capacity(n + 1);
    r.push(x0);
    let mut cur = x0;
    for step in 0..n {
        cur = cur + mu.eval(cur) * delta + sigma.eval(cur) * root * innovation.draw(rng);
        if !(cur.abs() <= DIVERGENCE_BOUND) {
            return Err(ScbError::Diverged { step, value: cur.abs() });
        }
        r.push(cur);
    }
    Ok(r)
}

/// Euler path `R_0..R_n` of `dR = μ(R)dt + σ(R)dW` with step `delta`.
pub fn gen_diffusion_discrete(
    mu: &FunctionSpec,
    sigma: &FunctionSpec,
    delta: f64,
    n: usize,
    x0: f64,
    innovation: Innovation,
    seed: u64,
) -> Result<Vec<f64>> {
    diffusion_path(mu, sigma, delta, n, x0, innovation, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Physical dependence measures of a linear process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceDiagnostics {
    pub p: f64,
    /// `θ_{i,p} = |a_i| ‖ε_0 − ε_0′‖_p`.
    pub theta: Vec<f64>,
    /// `Θ_n = Σ_{i≤n} θ_i^{p/2}`.
    pub theta_cumulative: Vec<f64>,
    /// `(n, 𝒵_n)` at `n = 1, 2, 4, …`.
    pub z: Vec<(usize, f64)>,
    /// `Ψ_{n,2} = (Σ_{j≥n} a_j²)^{1/2}` for `n = 0..len`.
    pub psi_tail: Vec<f64>,
    /// Least-squares slope of `log Σ_{j≥n} a_j²` on `log n` over the upper
    /// half of the lags; `None` when fewer than four usable lags remain.
    pub tail_exponent: Option<f64>,
}

impl DependenceDiagnostics {
    /// `𝒵_n = Σ_{k≥−n} (Θ_{n+k} − Θ_k)²` with `Θ_k = 0` for `k < 0`.
    pub fn z_n(&self, n: usize) -> f64 {
        z_from_cumulative(&self.theta_cumulative, n)
    }
}

fn z_from_cumulative(theta_cum: &[f64], n: usize) -> f64 {
    let q = theta_cum.len();
    let at = |k: i64| -> f64 {
        if k < 0 {
            0.0
        } else {
            theta_cum[(k as usize).min(q - 1)]
        }
    };
    // Terms with k ≥ q − 1 vanish because Θ is constant from there on.
    (-(n as i64)..(q as i64 - 1)).map(|k| (at(n as i64 + k) - at(k)).powi(2)).sum()
}

pub fn dependence_diagnostics(coeffs: &[f64], p: f64, innovation: Innovation) -> Result<DependenceDiagnostics> {
    if coeffs.is_empty() {
        return Err(ScbError::EmptyData);
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(ScbError::DomainError(format!("moment order must be at least 1, got {p}")));
    }
    let norm = innovation.coupling_norm(p);
    let theta: Vec<f64> = coeffs.iter().map(|a| a.abs() * norm).collect();
    let mut acc = 0.0;
    let theta_cumulative: Vec<f64> = theta
        .iter()
        .map(|t| {
            acc += t.powf(p / 2.0);
            acc
        })
        .collect();
    let q = coeffs.len();
    let mut z = Vec::new();
    let mut n = 1usize;
    while n <= 2 * q {
        z.push((n, z_from_cumulative(&theta_cumulative, n)));
        n *= 2;
    }
    // Suffix sums from the small end for accuracy.
    let mut tail_sq = vec![0.0; q];
    let mut s = 0.0;
    for j in (0..q).rev() {
        s += coeffs[j] * coeffs[j];
        tail_sq[j] = s;
    }
    let psi_tail = tail_sq.iter().map(|v| v.sqrt()).collect();
    let tail_exponent = {
        let pts: Vec<(f64, f64)> = (q / 2..q)
            .filter(|&j| j >= 1 && tail_sq[j] > 0.0)
            .map(|j| ((j as f64).ln(), tail_sq[j].ln()))
            .collect();
        (pts.len() >= 4).then(|| -least_squares_slope(&pts))
    };
    Ok(DependenceDiagnostics {
        p,
        theta,
        theta_cumulative,
        z,
        psi_tail,
        tail_exponent,
    })
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn variance(x: &[f64]) -> f64 {
        let m = x.iter().sum::<f64>() / x.len() as f64;
        x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64
    }

    fn lag1(x: &[f64]) -> f64 {
        let m = x.iter().sum::<f64>() / x.len() as f64;
        let num: f64 = x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
        let den: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
        num / den
    }

    #[test]
    fn linear_examples() {
        let x = gen_linear(&[1.0], 50_000, Innovation::Normal, 1).unwrap();
        let v = variance(&x);
        assert!((0.97..=1.03).contains(&v), "{v}");
        assert_eq!(x, gen_linear(&[1.0], 50_000, Innovation::Normal, 1).unwrap());
        let x = gen_linear(&[1.0, 0.5], 50_000, Innovation::Normal, 2).unwrap();
        assert!((lag1(&x) - 0.4).abs() < 0.02);
    }

    #[test]
    fn fft_and_direct_convolution_agree() {
        let coeffs = lrd_coefficients(0.75, 1.0, 3000);
        let n = 2000;
        let direct = LinearFilter {
            coeffs: coeffs.clone(),
            n,
            fft: None,
        };
        let fast = LinearFilter::new(&coeffs, n);
        assert!(fast.fft.is_some());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut eps = vec![0.0; n + coeffs.len() - 1];
        Innovation::Normal.fill(&mut rng, &mut eps);
        let a = direct.apply(&eps);
        let b = fast.apply(&eps);
        let worst = a.iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn lrd_examples() {
        let a = lrd_coefficients(0.75, 1.0, 10);
        assert_eq!(a[1], 1.0);
        assert!((a[4] - 0.353_553_390_593_273_8).abs() < 1e-15);
        assert!(gen_lrd(0.5, 1.0, 10, 100, Innovation::Normal, 1).is_err());
        let n = 50_000;
        let m = 10 * n;
        let x = gen_lrd(0.75, 1.0, n, m, Innovation::Normal, 5).unwrap();
        let target: f64 = lrd_coefficients(0.75, 1.0, m).iter().map(|v| v * v).sum();
        let v = variance(&x);
        assert!((v / target - 1.0).abs() < 0.05, "{v} vs {target}");
    }

    #[test]
    fn arch_examples() {
        let x = gen_arch(1.0, 0.5, 100_000, Innovation::Normal, 3).unwrap();
        assert!((variance(&x) / (4.0 / 3.0) - 1.0).abs() < 0.05);
        let x = gen_arch(2.0, 1e-8, 50_000, Innovation::Normal, 3).unwrap();
        assert!((variance(&x) / 4.0 - 1.0).abs() < 0.03);
        assert!(gen_arch(1.0, 1.0, 10, Innovation::Normal, 3).is_err());
        assert_eq!(x, gen_arch(2.0, 1e-8, 50_000, Innovation::Normal, 3).unwrap());
    }

    #[test]
    fn nonlinear_ar_examples() {
        let zero = FunctionSpec::constant(0.0);
        let one = FunctionSpec::constant(1.0);
        let half = FunctionSpec::Polynomial { coeffs: vec![0.0, 0.5] };
        let (_, y) = gen_nonlinear_ar(&zero, &one, 50_000, Innovation::Normal, 0.0, 1000, 1).unwrap();
        assert!(lag1(&y).abs() < 0.02);
        let (x, y) = gen_nonlinear_ar(&half, &one, 50_000, Innovation::Normal, 0.0, 1000, 1).unwrap();
        assert!((lag1(&y) - 0.5).abs() < 0.02);
        assert_eq!(&x[1..], &y[..y.len() - 1]);
        let (_, y) = gen_nonlinear_ar(&half, &zero, 20, Innovation::Normal, 1.0, 0, 1).unwrap();
        for (i, v) in y.iter().enumerate() {
            assert_eq!(*v, 0.5f64.powi(i as i32 + 1));
        }
        let square = FunctionSpec::Polynomial { coeffs: vec![0.0, 0.0, 1.0] };
        let r = gen_nonlinear_ar(&square, &zero, 100, Innovation::Normal, 2.0, 0, 1);
        assert!(matches!(r, Err(ScbError::Diverged { .. })));
    }

    #[test]
    fn diffusion_examples() {
        let zero = FunctionSpec::constant(0.0);
        let r = gen_diffusion_discrete(&zero, &zero, 0.004, 100, 3.5, Innovation::Normal, 1).unwrap();
        assert!(r.iter().all(|v| *v == 3.5));
        let pull = FunctionSpec::Polynomial { coeffs: vec![2.0, -2.0] };
        let n = 1250;
        let r = gen_diffusion_discrete(&pull, &zero, 1.0 / 250.0, n, 0.0, Innovation::Normal, 1).unwrap();
        assert_eq!(r.len(), n + 1);
        assert!((r[n] - 1.0).abs() < 1e-3);
        assert!(gen_diffusion_discrete(&zero, &zero, 0.0, 10, 0.0, Innovation::Normal, 1).is_err());
    }

    #[test]
    fn diagnostics_examples() {
        let d = dependence_diagnostics(&[1.0], 2.0, Innovation::Normal).unwrap();
        assert!(d.theta[0] > 0.0);
        assert!(((d.z_n(200) / d.z_n(100)) - 2.0).abs() < 0.2);
        let geo: Vec<f64> = (0..60).map(|j| 0.5f64.powi(j)).collect();
        let d = dependence_diagnostics(&geo, 2.0, Innovation::Normal).unwrap();
        for n in 0..20 {
            assert!((d.psi_tail[n + 1] / d.psi_tail[n] - 0.5).abs() < 1e-12);
        }
        assert!(d.theta_cumulative.windows(2).all(|w| w[1] >= w[0]));
        assert!(d.z.windows(2).all(|w| w[1].1 >= w[0].1));
    }

    #[test]
    fn lrd_tail_rate() {
        let a = lrd_coefficients(0.75, 1.0, 1_000_000);
        let d = dependence_diagnostics(&a, 2.0, Innovation::Normal).unwrap();
        let tail = &d.psi_tail;
        let pts: Vec<(f64, f64)> = [10usize, 20, 50, 100, 200, 500, 1000]
            .iter()
            .map(|&n| ((n as f64).ln(), tail[n].ln()))
            .collect();
        let slope = least_squares_slope(&pts);
        assert!((slope + 0.25).abs() < 0.03, "{slope}");
    }

    #[test]
    fn coupling_norms() {
        // ‖ε − ε′‖_2 = √2 for any standardized law.
        for inn in [Innovation::Normal, Innovation::UniformCentered, Innovation::Rademacher] {
            assert!((inn.coupling_norm(2.0) - 2f64.sqrt()).abs() < 1e-12, "{inn:?}");
        }
    }

    #[test]
    fn halves_have_similar_means() {
        let models = [
            ProcessModel::Linear {
                coeffs: vec![1.0, 0.5],
                innovation: Innovation::Normal,
            },
            ProcessModel::Arch {
                a: 1.0,
                b: 0.5,
                innovation: Innovation::Normal,
                burn_in: DEFAULT_BURN_IN,
            },
            ProcessModel::NonlinearAr {
                mu: FunctionSpec::Polynomial { coeffs: vec![0.0, 0.5] },
                sigma: FunctionSpec::constant(1.0),
                innovation: Innovation::UniformCentered,
                y0: 0.0,
                burn_in: DEFAULT_BURN_IN,
            },
            ProcessModel::Regression {
                phi: 0.5,
                mu: FunctionSpec::Polynomial { coeffs: vec![0.0, 0.0, 1.0] },
                sigma: FunctionSpec::constant(0.5),
                innovation: Innovation::Normal,
                burn_in: DEFAULT_BURN_IN,
            },
        ];
        for m in models {
            let s = m.generate_seeded(50_000, 21).unwrap();
            assert_eq!(s.series.len(), 50_000);
            let (a, b) = s.series.split_at(25_000);
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            let sd = variance(&s.series).sqrt();
            assert!((mean(a) - mean(b)).abs() < 4.0 * sd / (25_000f64).sqrt(), "{m:?}");
        }
    }
}
