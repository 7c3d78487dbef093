//! Monte Carlo experiments: band coverage, convergence of the normalized
//! maximum deviation to its Gumbel limit, and the long-memory dichotomy.
//!
//! Replicate `r` draws its data from `ChaCha8Rng::seed_from_u64(seed)` on
//! stream `r`; any simulation calibration inside a replicate is seeded with
//! [`replicate_seed`]. Reports are therefore independent of thread count.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::asymptotics::{gumbel_cdf, gumbel_quantile, lrd_limit_scale, max_gradient_ratio, normalizing_dn};
use crate::bands::{
    density_band, fit_regression, gof_test, regression_band, volatility_band, BandOptions, CalibrationMethod,
    Candidate, SimultaneousBand, Target,
};
use crate::calibration::{quantile, Multiplier};
use crate::error::{Result, ScbError};
use crate::estimators::kde;
use crate::grid::{default_points, EvaluationGrid};
use crate::kernel::KernelProfile;
use crate::processes::{FunctionSpec, Innovation, LinearFilter, Marginal, ProcessModel};
use crate::quadrature::{integrate_with_breaks, DEFAULT_TOL};

/// Minimum fraction of replicates that must succeed.
pub const MIN_VALID_FRACTION: f64 = 0.95;

/// Seed for calibration inside replicate `r` (SplitMix64 finalizer).
pub fn replicate_seed(seed: u64, r: usize) -> u64 {
    let mut z = seed.wrapping_add((r as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn replicate_rng(seed: u64, r: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r as u64);
    rng
}

/// Bandwidth as a constant or as `scale · n^{−exponent}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum BandwidthRule {
    Fixed { b: f64 },
    Rate {
        exponent: f64,
        #[serde(default = "unit")]
        scale: f64,
    },
}

fn unit() -> f64 {
    1.0
}

impl BandwidthRule {
    pub fn bandwidth(&self, n: usize) -> f64 {
        match *self {
            BandwidthRule::Fixed { b } => b,
            BandwidthRule::Rate { exponent, scale } => scale * (n as f64).powf(-exponent),
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            BandwidthRule::Fixed { b } => format!("b={b}"),
            BandwidthRule::Rate { exponent, scale } if scale == 1.0 => format!("b=n^-{exponent}"),
            BandwidthRule::Rate { exponent, scale } => format!("b={scale}*n^-{exponent}"),
        }
    }
}

/// Calibration used inside coverage replicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum ExperimentCalibration {
    Gumbel,
    Simulated {
        reps: usize,
        #[serde(default)]
        multiplier: Multiplier,
    },
}

impl ExperimentCalibration {
    fn method(&self, seed: u64, r: usize) -> CalibrationMethod {
        match *self {
            ExperimentCalibration::Gumbel => CalibrationMethod::Gumbel,
            ExperimentCalibration::Simulated { reps, multiplier } => CalibrationMethod::Simulated {
                reps,
                seed: replicate_seed(seed, r),
                multiplier,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageConfig {
    pub model: ProcessModel,
    pub target: Target,
    pub n: usize,
    pub b: f64,
    pub interval: (f64, f64),
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_kernel")]
    pub kernel: String,
    pub calibration: ExperimentCalibration,
    #[serde(default)]
    pub options: BandOptions,
    pub reps: usize,
    pub seed: u64,
}

fn default_alpha() -> f64 {
    0.05
}

fn default_kernel() -> String {
    "epanechnikov".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    TrueF,
    ExactMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GumbelConfig {
    pub model: ProcessModel,
    pub n: usize,
    pub bandwidth: BandwidthRule,
    pub interval: (f64, f64),
    #[serde(default = "default_kernel")]
    pub kernel: String,
    pub reps: usize,
    pub centering: Centering,
    #[serde(default)]
    pub grid_points: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyConfig {
    pub beta: f64,
    #[serde(default = "unit")]
    pub ell: f64,
    pub rules: Vec<BandwidthRule>,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    #[serde(default = "default_kernel")]
    pub kernel: String,
    /// Defaults to `[−2s, 2s]` with `s²` the marginal variance.
    #[serde(default)]
    pub interval: Option<(f64, f64)>,
    /// Truncation lag; `10 n` when absent.
    #[serde(default)]
    pub truncation: Option<usize>,
    #[serde(default)]
    pub grid_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileRow {
    pub level: f64,
    pub empirical: f64,
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSummary {
    pub rule: BandwidthRule,
    pub b: f64,
    pub ks_gumbel: f64,
    pub ks_half_normal: f64,
    pub half_normal_scale: f64,
    /// `"gumbel"` or `"half_normal"`.
    pub closer: String,
    pub gumbel_statistics: Vec<f64>,
    pub half_normal_statistics: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Summary {
    Coverage {
        rate: f64,
        standard_error: f64,
        covered: usize,
        valid: usize,
    },
    Gumbel {
        ks_distance: f64,
        d_n: f64,
        quantiles: Vec<QuantileRow>,
    },
    Dichotomy {
        c_beta: f64,
        rules: Vec<RuleSummary>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: serde_json::Value,
    pub reps: usize,
    pub valid: usize,
    pub seed: u64,
    /// One statistic per replicate; `None` marks a failed replicate.
    pub statistics: Vec<Option<f64>>,
    /// Failure messages of invalid replicates, by replicate index.
    pub failures: Vec<(usize, String)>,
    pub summary: Summary,
    pub wall_time_secs: f64,
}

impl ExperimentReport {
    /// Plain-text table of the summary.
    pub fn render(&self) -> String {
        let mut out = format!(
            "experiment: {}\nreplicates: {} ({} valid)\nseed: {}\n",
            self.experiment, self.reps, self.valid, self.seed
        );
        match &self.summary {
            Summary::Coverage {
                rate,
                standard_error,
                covered,
                valid,
            } => {
                out += &format!("coverage: {rate:.4} (se {standard_error:.4}, {covered}/{valid})\n");
            }
            Summary::Gumbel { ks_distance, d_n, quantiles } => {
                out += &format!("d_n: {d_n:.6}\nKS distance to exp(-2e^-z): {ks_distance:.4}\n");
                out += &format!("{:>8} {:>12} {:>12}\n", "level", "empirical", "limit");
                for q in quantiles {
                    out += &format!("{:>8.3} {:>12.4} {:>12.4}\n", q.level, q.empirical, q.limit);
                }
            }
            Summary::Dichotomy { c_beta, rules } => {
                out += &format!("c_beta: {c_beta:.6}\n");
                out += &format!("{:>16} {:>10} {:>12} {:>14} {:>12}\n", "bandwidth", "b", "KS gumbel", "KS half-normal", "closer");
                for r in rules {
                    out += &format!(
                        "{:>16} {:>10.5} {:>12.4} {:>14.4} {:>12}\n",
                        r.rule.describe(),
                        r.b,
                        r.ks_gumbel,
                        r.ks_half_normal,
                        r.closer
                    );
                }
            }
        }
        out
    }
}

/// Kolmogorov–Smirnov distance between the empirical law of `sample` and `cdf`.
pub fn ks_distance(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).max((i + 1) as f64 / n - c)
        })
        .fold(0.0, f64::max)
}

/// CDF of `scale · |N(0,1)|`.
pub fn half_normal_cdf(t: f64, scale: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        erf(t / (scale * std::f64::consts::SQRT_2))
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(value)?)
}

fn collect_valid(statistics: &[Option<f64>], reps: usize) -> Result<Vec<f64>> {
    let valid: Vec<f64> = statistics.iter().flatten().copied().collect();
    if (valid.len() as f64) < MIN_VALID_FRACTION * reps as f64 {
        return Err(ScbError::TooManyFailures {
            failed: reps - valid.len(),
            total: reps,
        });
    }
    Ok(valid)
}

fn split_outcomes(outcomes: Vec<Result<f64>>) -> (Vec<Option<f64>>, Vec<(usize, String)>) {
    let mut stats = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(v) => stats.push(Some(v)),
            Err(e) => {
                stats.push(None);
                failures.push((i, e.to_string()));
            }
        }
    }
    (stats, failures)
}

/// Truth for a coverage target, when the model determines it.
fn coverage_truth(model: &ProcessModel, target: Target, n: usize) -> Result<Box<dyn Fn(f64) -> f64 + Sync>> {
    let square = |f: FunctionSpec, scale: f64| -> Box<dyn Fn(f64) -> f64 + Sync> {
        Box::new(move |x| scale * f.eval(x).powi(2))
    };
    match (target, model) {
        (Target::Density, m) => {
            let law = m
                .marginal(n)
                .ok_or_else(|| ScbError::Config("density coverage needs a model with a closed-form marginal".into()))?;
            Ok(Box::new(move |x| law.pdf(x)))
        }
        (Target::Regression, ProcessModel::NonlinearAr { mu, .. } | ProcessModel::Regression { mu, .. }) => {
            let mu = mu.clone();
            Ok(Box::new(move |x| mu.eval(x)))
        }
        (Target::Regression, ProcessModel::DiffusionDiscrete { mu, delta, .. }) => {
            let (mu, delta) = (mu.clone(), *delta);
            Ok(Box::new(move |x| mu.eval(x) * delta))
        }
        (Target::Variance, ProcessModel::NonlinearAr { sigma, .. } | ProcessModel::Regression { sigma, .. }) => {
            Ok(square(sigma.clone(), 1.0))
        }
        (Target::Variance, ProcessModel::DiffusionDiscrete { sigma, delta, .. }) => Ok(square(sigma.clone(), *delta)),
        _ => Err(ScbError::Config("regression and variance coverage need a model with regression pairs".into())),
    }
}

/// Build one band for a coverage replicate.
fn coverage_band(
    config: &CoverageConfig,
    kernel: &KernelProfile,
    method: &CalibrationMethod,
    rng: &mut ChaCha8Rng,
) -> Result<SimultaneousBand> {
    let sample = config.model.generate(config.n, rng)?;
    match config.target {
        Target::Density => Ok(density_band(
            &sample.series,
            config.b,
            config.interval,
            config.alpha,
            kernel,
            method,
            &config.options,
        )?
        .0),
        Target::Regression => {
            let fit = fit_regression(&sample.x, &sample.y, config.b, config.interval, kernel, &config.options)?;
            Ok(regression_band(&fit, &sample.x, config.alpha, kernel, method, &config.options)?.0)
        }
        Target::Variance => {
            let fit = fit_regression(&sample.x, &sample.y, config.b, config.interval, kernel, &config.options)?;
            let h = config.options.h.unwrap_or(config.b);
            let res = &fit.residuals;
            Ok(volatility_band(&res.x, &res.values, h, config.interval, config.alpha, kernel, method, &config.options)?.0)
        }
    }
}

/// Fraction of replicates whose band contains the truth at every grid point.
/// The per-replicate statistic is the maximum violation (0 when covered).
pub fn coverage_experiment(config: &CoverageConfig) -> Result<ExperimentReport> {
    if config.reps < 50 {
        return Err(ScbError::Config(format!("coverage needs at least 50 replicates, got {}", config.reps)));
    }
    config.model.validate()?;
    let start = Instant::now();
    let kernel = KernelProfile::by_name(&config.kernel)?;
    let truth = coverage_truth(&config.model, config.target, config.n)?;
    let outcomes: Vec<Result<f64>> = (0..config.reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(config.seed, r);
            let method = config.calibration.method(config.seed, r);
            let band = coverage_band(config, &kernel, &method, &mut rng)?;
            let g = gof_test(&band, &Candidate::Function(&*truth))?;
            Ok(g.max_violation)
        })
        .collect();
    let (statistics, failures) = split_outcomes(outcomes);
    let valid = collect_valid(&statistics, config.reps)?;
    let covered = valid.iter().filter(|v| **v == 0.0).count();
    let rate = covered as f64 / valid.len() as f64;
    Ok(ExperimentReport {
        experiment: "coverage".into(),
        config: to_json(config)?,
        reps: config.reps,
        valid: valid.len(),
        seed: config.seed,
        statistics,
        failures,
        summary: Summary::Coverage {
            rate,
            standard_error: (rate * (1.0 - rate) / valid.len() as f64).sqrt(),
            covered,
            valid: valid.len(),
        },
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// `E f_n(x) = ∫ K(v) f(x − b v) dv` by quadrature.
pub fn exact_kde_mean(law: &Marginal, kernel: &KernelProfile, b: f64, x: f64) -> f64 {
    let a = kernel.support();
    let mut breaks = kernel.breakpoints();
    breaks.extend(law.breakpoints().iter().map(|p| (x - p) / b));
    integrate_with_breaks(|v| kernel.eval(v) * law.pdf(x - b * v), -a, a, &breaks, DEFAULT_TOL)
}

/// `sup_x √(nb) |f_n(x) − c(x)| / √(λ_K f(x))` over the grid.
fn max_deviation(
    data: &[f64],
    b: f64,
    grid: &EvaluationGrid,
    kernel: &KernelProfile,
    center: &[f64],
    root_f: &[f64],
) -> Result<f64> {
    let f_n = kde(data, b, grid, kernel)?;
    let scale = (data.len() as f64 * b / kernel.lambda_k()).sqrt();
    Ok(f_n
        .values
        .iter()
        .zip(center)
        .zip(root_f)
        .map(|((v, c), r)| scale * (v - c).abs() / r)
        .fold(0.0, f64::max))
}

struct DeviationSetup {
    grid: EvaluationGrid,
    center: Vec<f64>,
    root_f: Vec<f64>,
}

fn deviation_setup(
    law: &Marginal,
    kernel: &KernelProfile,
    b: f64,
    interval: (f64, f64),
    grid_points: Option<usize>,
    centering: Centering,
) -> Result<DeviationSetup> {
    let (l, u) = interval;
    let grid = EvaluationGrid::new(l, u, grid_points.unwrap_or_else(|| default_points(l, u, b)))?;
    let mut root_f = Vec::with_capacity(grid.len());
    for &x in grid.points() {
        let f = law.pdf(x);
        if !(f > 0.0) {
            return Err(ScbError::DensityTooSmall { x, value: f, floor: 0.0 });
        }
        root_f.push(f.sqrt());
    }
    let center = grid
        .points()
        .iter()
        .map(|&x| match centering {
            Centering::TrueF => law.pdf(x),
            Centering::ExactMean => exact_kde_mean(law, kernel, b, x),
        })
        .collect();
    Ok(DeviationSetup { grid, center, root_f })
}

const QUANTILE_LEVELS: [f64; 5] = [0.1, 0.5, 0.9, 0.95, 0.99];

/// Empirical law of `(2 log b̄⁻¹)^{1/2}(Δ_n − d_n)` against `exp(−2e^{−z})`.
pub fn gumbel_convergence_experiment(config: &GumbelConfig) -> Result<ExperimentReport> {
    if config.reps < 2 {
        return Err(ScbError::Config("need at least 2 replicates".into()));
    }
    config.model.validate()?;
    let start = Instant::now();
    let kernel = KernelProfile::by_name(&config.kernel)?;
    let b = config.bandwidth.bandwidth(config.n);
    let (l, u) = config.interval;
    if !(l < u) {
        return Err(ScbError::DomainError(format!("interval needs l < u, got [{l}, {u}]")));
    }
    let bbar = b / (u - l);
    let d_n = normalizing_dn(bbar, &kernel)?;
    let root = (-2.0 * bbar.ln()).sqrt();
    let law = config.model.marginal(config.n).ok_or_else(|| {
        ScbError::Config("the Gumbel experiment needs a model with a closed-form marginal density".into())
    })?;
    let setup = deviation_setup(&law, &kernel, b, config.interval, config.grid_points, config.centering)?;
    let outcomes: Vec<Result<f64>> = (0..config.reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(config.seed, r);
            let data = config.model.generate(config.n, &mut rng)?.series;
            let delta = max_deviation(&data, b, &setup.grid, &kernel, &setup.center, &setup.root_f)?;
            Ok(root * (delta - d_n))
        })
        .collect();
    let (statistics, failures) = split_outcomes(outcomes);
    let valid = collect_valid(&statistics, config.reps)?;
    let ks = ks_distance(&valid, gumbel_cdf);
    let quantiles = QUANTILE_LEVELS
        .iter()
        .map(|&level| {
            Ok(QuantileRow {
                level,
                empirical: quantile(&valid, level)?,
                limit: gumbel_quantile(1.0 - level)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport {
        experiment: "gumbel".into(),
        config: to_json(config)?,
        reps: config.reps,
        valid: valid.len(),
        seed: config.seed,
        statistics,
        failures,
        summary: Summary::Gumbel {
            ks_distance: ks,
            d_n,
            quantiles,
        },
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// For each bandwidth rule, compare the normalized maximum deviation of a
/// Gaussian long-memory process with the Gumbel and the scaled half-normal
/// limits. All rules share the same simulated paths.
pub fn dichotomy_experiment(config: &DichotomyConfig) -> Result<ExperimentReport> {
    let lrd = lrd_limit_scale(config.beta)?;
    if config.rules.is_empty() {
        return Err(ScbError::Config("at least one bandwidth rule is required".into()));
    }
    if config.reps < 2 {
        return Err(ScbError::Config("need at least 2 replicates".into()));
    }
    let start = Instant::now();
    let kernel = KernelProfile::by_name(&config.kernel)?;
    let model = ProcessModel::LrdLinear {
        beta: config.beta,
        ell: config.ell,
        truncation: config.truncation,
        innovation: Innovation::Normal,
    };
    model.validate()?;
    let n = config.n;
    let law = model.marginal(n).expect("Gaussian linear marginal");
    let sd = match law {
        Marginal::Normal { sd, .. } => sd,
        Marginal::Uniform { .. } => unreachable!("Gaussian linear marginal"),
    };
    let interval = config.interval.unwrap_or((-2.0 * sd, 2.0 * sd));
    let (l, u) = interval;
    if !(l < u) {
        return Err(ScbError::DomainError(format!("interval needs l < u, got [{l}, {u}]")));
    }

    struct Rule {
        b: f64,
        setup: DeviationSetup,
        d_n: f64,
        root: f64,
        normalizer: f64,
        scale: f64,
    }
    let rules = config
        .rules
        .iter()
        .map(|rule| {
            let b = rule.bandwidth(n);
            let bbar = b / (u - l);
            let setup = deviation_setup(&law, &kernel, b, interval, config.grid_points, Centering::ExactMean)?;
            let ratio = max_gradient_ratio(setup.grid.points(), |x| law.pdf(x), |x| law.pdf_derivative(x));
            Ok(Rule {
                b,
                d_n: normalizing_dn(bbar, &kernel)?,
                root: (-2.0 * bbar.ln()).sqrt(),
                normalizer: b.sqrt() * (n as f64).powf(1.0 - config.beta) * config.ell,
                scale: (lrd.c_beta / kernel.lambda_k()).sqrt() * ratio,
                setup,
            })
        })
        .collect::<Result<Vec<Rule>>>()?;

    let m = config.truncation.unwrap_or(10 * n);
    let coeffs = crate::processes::lrd_coefficients(config.beta, config.ell, m);
    let filter = LinearFilter::new(&coeffs, n);
    let outcomes: Vec<Result<Vec<f64>>> = (0..config.reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(config.seed, r);
            let data = filter.generate(Innovation::Normal, &mut rng);
            rules
                .iter()
                .map(|rule| max_deviation(&data, rule.b, &rule.setup.grid, &kernel, &rule.setup.center, &rule.setup.root_f))
                .collect()
        })
        .collect();
    let mut deltas: Vec<Option<Vec<f64>>> = Vec::with_capacity(config.reps);
    let mut failures = Vec::new();
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(v) => deltas.push(Some(v)),
            Err(e) => {
                deltas.push(None);
                failures.push((i, e.to_string()));
            }
        }
    }
    // The per-replicate statistic recorded is Δ_n under the first rule.
    let statistics: Vec<Option<f64>> = deltas.iter().map(|d| d.as_ref().map(|v| v[0])).collect();
    let valid_count = collect_valid(&statistics, config.reps)?.len();
    let summaries = rules
        .iter()
        .zip(&config.rules)
        .enumerate()
        .map(|(k, (rule, spec))| {
            let raw: Vec<f64> = deltas.iter().flatten().map(|v| v[k]).collect();
            let gumbel_stats: Vec<f64> = raw.iter().map(|d| rule.root * (d - rule.d_n)).collect();
            let half_stats: Vec<f64> = raw.iter().map(|d| d / rule.normalizer).collect();
            let ks_gumbel = ks_distance(&gumbel_stats, gumbel_cdf);
            let ks_half_normal = ks_distance(&half_stats, |t| half_normal_cdf(t, rule.scale));
            RuleSummary {
                rule: *spec,
                b: rule.b,
                ks_gumbel,
                ks_half_normal,
                half_normal_scale: rule.scale,
                closer: if ks_gumbel < ks_half_normal { "gumbel" } else { "half_normal" }.into(),
                gumbel_statistics: gumbel_stats,
                half_normal_statistics: half_stats,
            }
        })
        .collect();
    Ok(ExperimentReport {
        experiment: "dichotomy".into(),
        config: to_json(config)?,
        reps: config.reps,
        valid: valid_count,
        seed: config.seed,
        statistics,
        failures,
        summary: Summary::Dichotomy {
            c_beta: lrd.c_beta,
            rules: summaries,
        },
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}
