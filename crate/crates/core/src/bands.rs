//! Simultaneous confidence bands for the density, drift and volatility,
//! and goodness-of-fit tests by band containment.

use serde::{Deserialize, Serialize};

use crate::asymptotics::{BandCalibration, CalibrationKind, L1LogArg};
use crate::calibration::{simulate_pi_n, Multiplier, PiConfig, PiSample, SmoothedBootstrap};
use crate::error::{Result, ScbError};
use crate::estimators::{
    bias_with_floor, density_floor, kde, kde_derivative, local_poly_fit, nadaraya_watson, residuals,
    variance_estimate, CurveEstimate, CurveKind, Residuals,
};
use crate::grid::{default_points, EvaluationGrid};
use crate::kernel::KernelProfile;

/// Floor applied to `σ²_n` before taking square roots.
pub const VARIANCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Density,
    Regression,
    Variance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum CalibrationMethod {
    Gumbel,
    Simulated { reps: usize, seed: u64, multiplier: Multiplier },
    FixedCutoff { cutoff: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BandOptions {
    /// Number of grid points on the band interval; default `max(201, ⌈10(u−l)/b⌉)`.
    pub grid_points: Option<usize>,
    pub l1_log_arg: L1LogArg,
    /// Subtract the second-order bias from regression and volatility centers.
    pub bias_correct: bool,
    /// Subtract `b²ψ_K f''` from the density center.
    pub density_bias_correct: bool,
    /// Clip the lower density envelope at zero.
    pub clip_density: bool,
    /// Volatility bandwidth; defaults to the drift bandwidth.
    pub h: Option<f64>,
    /// Fixed `ν_η = Eη⁴ − 1`; estimated from standardized residuals when absent.
    pub nu_eta: Option<f64>,
    /// Replace `σ̂` by a constant in the regression halfwidth.
    pub sigma_override: Option<f64>,
}

impl Default for BandOptions {
    fn default() -> Self {
        BandOptions {
            grid_points: None,
            l1_log_arg: L1LogArg::BBar,
            bias_correct: true,
            density_bias_correct: false,
            clip_density: true,
            h: None,
            nu_eta: None,
            sigma_override: None,
        }
    }
}

/// Simulation settings recorded alongside a band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub reps: usize,
    pub seed: u64,
    pub cutoff: f64,
    pub config: PiConfig,
}

impl From<&PiSample> for SimulationSummary {
    fn from(s: &PiSample) -> Self {
        SimulationSummary {
            reps: s.reps,
            seed: s.seed,
            cutoff: s.cutoff,
            config: s.config.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BandDiagnostics {
    pub warnings: Vec<String>,
    pub dropped_residuals: usize,
    pub clipped_variance: usize,
    /// Grid points whose bias-corrected center was negative and floored at zero.
    pub negative_center: usize,
    pub nu_eta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimultaneousBand {
    pub target: Target,
    pub grid: EvaluationGrid,
    pub center: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Halfwidth divided by the calibration multiplier.
    pub scale: Vec<f64>,
    /// Significance level α; nominal coverage is 1 − α.
    pub level: f64,
    pub bandwidth: f64,
    pub kernel: String,
    pub n: usize,
    pub calibration: BandCalibration,
    pub simulation: Option<SimulationSummary>,
    pub diagnostics: BandDiagnostics,
}

impl SimultaneousBand {
    pub fn halfwidth(&self, i: usize) -> f64 {
        self.calibration.halfwidth_scale * self.scale[i]
    }

    fn check(&self) -> Result<()> {
        let m = self.grid.len();
        if [self.center.len(), self.lower.len(), self.upper.len(), self.scale.len()].iter().any(|&l| l != m) {
            return Err(ScbError::Invariant("band arrays differ in length".into()));
        }
        for i in 0..m {
            if !(self.lower[i] <= self.center[i] && self.center[i] <= self.upper[i]) {
                return Err(ScbError::Invariant(format!(
                    "band not ordered at x = {}: {} <= {} <= {}",
                    self.grid.points()[i],
                    self.lower[i],
                    self.center[i],
                    self.upper[i]
                )));
            }
        }
        Ok(())
    }
}

fn validate_common(x: &[f64], b: f64, interval: (f64, f64), alpha: f64) -> Result<()> {
    if x.is_empty() {
        return Err(ScbError::EmptyData);
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(ScbError::DomainError(format!("bandwidth must be positive, got {b}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ScbError::DomainError(format!("level must lie in (0, 1), got {alpha}")));
    }
    let (l, u) = interval;
    if !(l < u) {
        return Err(ScbError::DomainError(format!("interval needs l < u, got [{l}, {u}]")));
    }
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, c), &v| (a.min(v), c.max(v)));
    if !(l > lo && u < hi) {
        return Err(ScbError::DomainError(format!(
            "interval [{l}, {u}] must lie inside the data range ({lo}, {hi})"
        )));
    }
    Ok(())
}

fn band_grid(interval: (f64, f64), b: f64, options: &BandOptions) -> Result<EvaluationGrid> {
    let (l, u) = interval;
    EvaluationGrid::new(l, u, options.grid_points.unwrap_or_else(|| default_points(l, u, b)))
}

fn small_sample_warning(n: usize, b: f64, warnings: &mut Vec<String>) {
    if (n as f64) * b < 50.0 {
        warnings.push(format!("n*b = {:.1} is below 50; asymptotic calibration may be poor", n as f64 * b));
    }
}

fn first_failure(curve: &CurveEstimate, lo: f64, hi: f64) -> Option<(usize, f64)> {
    let f = curve.failures_within(lo, hi);
    f.first().map(|&i| (f.len(), curve.grid.points()[i]))
}

fn require_no_empty_window(curve: &CurveEstimate, lo: f64, hi: f64) -> Result<()> {
    match first_failure(curve, lo, hi) {
        Some((count, first)) => Err(ScbError::EmptyWindow { count, first }),
        None => Ok(()),
    }
}

fn require_nonsingular(curve: &CurveEstimate, lo: f64, hi: f64) -> Result<()> {
    match first_failure(curve, lo, hi) {
        Some((count, first)) => Err(ScbError::SingularFit { count, first }),
        None => Ok(()),
    }
}

fn require_density(f: &CurveEstimate, floor: f64) -> Result<()> {
    for (&v, &x) in f.values.iter().zip(f.grid.points()) {
        if !(v >= floor) {
            return Err(ScbError::DensityTooSmall { x, value: v, floor });
        }
    }
    Ok(())
}

/// `b²ψ_K(g'' + 2g'f'/f)` for the regression of `y` on `x`, with every
/// derivative taken at bandwidth `2b`. Inside `[l, u]` failures are errors;
/// outside it the term is set to zero where it cannot be computed.
fn regression_bias(
    x: &[f64],
    y: &[f64],
    b: f64,
    grid: &EvaluationGrid,
    kernel: &KernelProfile,
    interval: (f64, f64),
) -> Result<CurveEstimate> {
    let (l, u) = interval;
    let b2 = 2.0 * b;
    let d1 = local_poly_fit(x, y, b2, grid, kernel, 2, 1)?;
    let d2 = local_poly_fit(x, y, b2, grid, kernel, 3, 2)?;
    require_nonsingular(&d1, l, u)?;
    require_nonsingular(&d2, l, u)?;
    let f = kde(x, b2, grid, kernel)?;
    let f1 = kde_derivative(x, b2, grid, kernel)?;
    let floor = density_floor(l, u);
    // Outside [l, u] an uncomputable term is zeroed; a dummy density keeps
    // the floor check inside bias_with_floor to interior points.
    let mut fz = f.clone();
    let mut zero_out = Vec::new();
    for (i, &p) in grid.points().iter().enumerate() {
        let ok = f.values[i] >= floor && d1.values[i].is_finite() && d2.values[i].is_finite();
        if (p < l || p > u) && !ok {
            zero_out.push(i);
            fz.values[i] = 1.0;
        }
    }
    let mut bias = bias_with_floor(&d1, &d2, &fz, &f1, b, kernel.psi_k(), floor)?;
    for i in zero_out {
        bias.values[i] = 0.0;
    }
    bias.failed.retain(|&i| bias.values[i].is_nan());
    Ok(bias)
}

/// Drift estimate and its by-products on a working grid that extends the
/// band interval by one kernel reach on each side.
#[derive(Debug, Clone)]
pub struct RegressionFit {
    pub band_grid: EvaluationGrid,
    /// Offset of the band grid inside the working grid.
    pub offset: usize,
    /// Raw Nadaraya–Watson estimate on the working grid.
    pub mu: CurveEstimate,
    /// Bias term on the working grid (zero when correction is off).
    pub bias: CurveEstimate,
    /// Bias-corrected drift on the working grid.
    pub mu_tilde: CurveEstimate,
    /// Density estimate at `b` on the band grid.
    pub f: CurveEstimate,
    /// `σ²_n` at `h` on the band grid.
    pub sigma2: CurveEstimate,
    pub residuals: Residuals,
    pub b: f64,
    pub h: f64,
    pub warnings: Vec<String>,
}

impl RegressionFit {
    pub fn mu_tilde_on_band(&self) -> Result<CurveEstimate> {
        self.mu_tilde.restrict(self.offset, self.band_grid.len())
    }
}

/// Estimate `μ̃_n`, residuals and `σ²_n` for `Y = μ(X) + σ(X)η`.
pub fn fit_regression(
    x: &[f64],
    y: &[f64],
    b: f64,
    interval: (f64, f64),
    kernel: &KernelProfile,
    options: &BandOptions,
) -> Result<RegressionFit> {
    if x.len() != y.len() {
        return Err(ScbError::DomainError(format!("x and y lengths differ ({} vs {})", x.len(), y.len())));
    }
    validate_common(x, b, interval, 0.5)?;
    let (l, u) = interval;
    let h = options.h.unwrap_or(b);
    if !(h > 0.0 && h.is_finite()) {
        return Err(ScbError::DomainError(format!("volatility bandwidth must be positive, got {h}")));
    }
    let mut warnings = Vec::new();
    small_sample_warning(x.len(), b, &mut warnings);
    let tgrid = band_grid(interval, b, options)?;
    let ext = (kernel.support() * b.max(h) / tgrid.spacing()).ceil() as usize + 1;
    let wgrid = tgrid.extend(ext);

    let mu = nadaraya_watson(x, y, b, &wgrid, kernel)?;
    require_no_empty_window(&mu, l, u)?;
    let bias = if options.bias_correct {
        regression_bias(x, y, b, &wgrid, kernel, interval)?
    } else {
        CurveEstimate::constant(&wgrid, 0.0, CurveKind::Bias)
    };
    let mut mu_tilde = mu.clone();
    for (m, bi) in mu_tilde.values.iter_mut().zip(&bias.values) {
        *m -= bi;
    }
    let f = kde(x, b, &tgrid, kernel)?;
    require_density(&f, density_floor(l, u))?;

    let res = residuals(x, y, &mu_tilde)?;
    let sigma2 = variance_estimate(&res.x, &res.squared(), h, &tgrid, kernel)?;
    require_no_empty_window(&sigma2, l, u)?;
    Ok(RegressionFit {
        band_grid: tgrid,
        offset: ext,
        mu,
        bias,
        mu_tilde,
        f,
        sigma2,
        residuals: res,
        b,
        h,
        warnings,
    })
}

/// Outcome of calibrating a band's multiplier.
struct Calibrated {
    calibration: BandCalibration,
    sample: Option<PiSample>,
}

#[allow(clippy::too_many_arguments)]
fn calibrate(
    method: &CalibrationMethod,
    x: &[f64],
    b: f64,
    grid: &EvaluationGrid,
    kernel: &KernelProfile,
    f: &CurveEstimate,
    alpha: f64,
    log_arg: L1LogArg,
) -> Result<Calibrated> {
    let width = grid.width();
    match *method {
        CalibrationMethod::Gumbel => Ok(Calibrated {
            calibration: BandCalibration::gumbel(alpha, b, width, kernel, log_arg)?,
            sample: None,
        }),
        CalibrationMethod::Simulated { reps, seed, multiplier } => {
            let sampler = SmoothedBootstrap::new(x, b, kernel)?;
            let sample = simulate_pi_n(&sampler, &multiplier, x.len(), b, grid, kernel, f, reps, alpha, seed)?;
            Ok(Calibrated {
                calibration: BandCalibration::with_cutoff(alpha, b, width, kernel, sample.cutoff, CalibrationKind::Simulated),
                sample: Some(sample),
            })
        }
        CalibrationMethod::FixedCutoff { cutoff } => {
            if !(cutoff >= 0.0 && cutoff.is_finite()) {
                return Err(ScbError::DomainError(format!("cutoff must be nonnegative, got {cutoff}")));
            }
            Ok(Calibrated {
                calibration: BandCalibration::with_cutoff(alpha, b, width, kernel, cutoff, CalibrationKind::Fixed),
                sample: None,
            })
        }
    }
}

/// Per-point halfwidth scale for a target: the Gumbel form carries
/// `√(λ_K/(nb))`, the simulated form does not.
fn gumbel_factor(method: &CalibrationMethod, lambda_k: f64, n: usize, bw: f64) -> f64 {
    match method {
        CalibrationMethod::Gumbel => (lambda_k / (n as f64 * bw)).sqrt(),
        _ => 1.0,
    }
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    target: Target,
    grid: EvaluationGrid,
    center: Vec<f64>,
    scale: Vec<f64>,
    cal: Calibrated,
    bandwidth: f64,
    kernel: &KernelProfile,
    n: usize,
    clip_lower: bool,
    diagnostics: BandDiagnostics,
) -> Result<(SimultaneousBand, Option<PiSample>)> {
    let q = cal.calibration.halfwidth_scale;
    let lower = center
        .iter()
        .zip(&scale)
        .map(|(c, s)| {
            let v = c - q * s;
            if clip_lower {
                v.max(0.0)
            } else {
                v
            }
        })
        .collect();
    let upper = center.iter().zip(&scale).map(|(c, s)| c + q * s).collect();
    let band = SimultaneousBand {
        target,
        grid,
        center,
        lower,
        upper,
        scale,
        level: cal.calibration.level,
        bandwidth,
        kernel: kernel.name().to_string(),
        n,
        simulation: cal.sample.as_ref().map(SimulationSummary::from),
        calibration: cal.calibration,
        diagnostics,
    };
    band.check()?;
    Ok((band, cal.sample))
}

/// Drift band `μ̃_n(x) ± L σ̂(x) √(λ_K/(n b f_n(x)))` (Gumbel) or
/// `μ̃_n(x) ± q σ̂(x)/f_n^{1/2}(x)` (simulated).
pub fn scb_regression(
    x: &[f64],
    y: &[f64],
    b: f64,
    interval: (f64, f64),
    alpha: f64,
    kernel: &KernelProfile,
    method: &CalibrationMethod,
    options: &BandOptions,
) -> Result<SimultaneousBand> {
    let fit = fit_regression(x, y, b, interval, kernel, options)?;
    Ok(regression_band(&fit, x, alpha, kernel, method, options)?.0)
}

/// Drift band from an existing fit; also returns the `Π_n` sample when simulated.
pub fn regression_band(
    fit: &RegressionFit,
    x: &[f64],
    alpha: f64,
    kernel: &KernelProfile,
    method: &CalibrationMethod,
    options: &BandOptions,
) -> Result<(SimultaneousBand, Option<PiSample>)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ScbError::DomainError(format!("level must lie in (0, 1), got {alpha}")));
    }
    let grid = fit.band_grid.clone();
    let n = x.len();
    let cal = calibrate(method, x, fit.b, &grid, kernel, &fit.f, alpha, options.l1_log_arg)?;
    let g = gumbel_factor(method, kernel.lambda_k(), n, fit.b);
    let scale = (0..grid.len())
        .map(|i| {
            let sigma = options
                .sigma_override
                .unwrap_or_else(|| fit.sigma2.values[i].max(VARIANCE_FLOOR).sqrt());
            g * sigma / fit.f.values[i].sqrt()
        })
        .collect();
    let center = fit.mu_tilde_on_band()?.values;
    let diagnostics = BandDiagnostics {
        warnings: fit.warnings.clone(),
        dropped_residuals: fit.residuals.dropped,
        clipped_variance: fit.sigma2.clipped,
        negative_center: 0,
        nu_eta: None,
    };
    assemble(Target::Regression, grid, center, scale, cal, fit.b, kernel, n, false, diagnostics)
}

/// Density band `f_n(x) ± L √(λ_K f_n(x)/(n b))` (Gumbel) or
/// `f_n(x) ± q f_n^{1/2}(x)` (simulated).
pub fn scb_density(
    data: &[f64],
    b: f64,
    interval: (f64, f64),
    alpha: f64,
    kernel: &KernelProfile,
    method: &CalibrationMethod,
    options: &BandOptions,
) -> Result<SimultaneousBand> {
    Ok(density_band(data, b, interval, alpha, kernel, method, options)?.0)
}

pub fn density_band(
    data: &[f64],
    b: f64,
    interval: (f64, f64),
    alpha: f64,
    kernel: &KernelProfile,
    method: &CalibrationMethod,
    options: &BandOptions,
) -> Result<(SimultaneousBand, Option<PiSample>)> {
    validate_common(data, b, interval, alpha)?;
    let (l, u) = interval;
    let mut diagnostics = BandDiagnostics::default();
    small_sample_warning(data.len(), b, &mut diagnostics.warnings);
    let grid = band_grid(interval, b, options)?;
    let f = kde(data, b, &grid, kernel)?;
    require_density(&f, density_floor(l, u))?;
    let mut center = f.values.clone();
    if options.density_bias_correct {
        // f'' from a cubic local fit to the estimate itself, on a working grid
        // wide enough that the fit is interior on [l, u].
        let ext = (kernel.support() * 2.0 * b / grid.spacing()).ceil() as usize + 1;
        let wgrid = grid.extend(ext);
        let fw = kde(data, b, &wgrid, kernel)?;
        let d2 = local_poly_fit(wgrid.points(), &fw.values, 2.0 * b, &grid, kernel, 3, 2)?;
        require_nonsingular(&d2, l, u)?;
        let factor = b * b * kernel.psi_k();
        for (c, d) in center.iter_mut().zip(&d2.values) {
            *c -= factor * d;
            if *c < 0.0 {
                *c = 0.0;
                diagnostics.negative_center += 1;
            }
        }
    }
    let cal = calibrate(method, data, b, &grid, kernel, &f, alpha, options.l1_log_arg)?;
    let g = gumbel_factor(method, kernel.lambda_k(), data.len(), b);
    let scale = f.values.iter().map(|v| g * v.sqrt()).collect();
    assemble(
        Target::Density,
        grid,
        center,
        scale,
        cal,
        b,
        kernel,
        data.len(),
        options.clip_density,
        diagnostics,
    )
}

/// `E(e/σ̂)⁴ − 1` over regressors inside the interval.
pub fn estimate_nu_eta(x: &[f64], e: &[f64], sigma2: &CurveEstimate) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (&xi, &ei) in x.iter().zip(e) {
        if let Some(s2) = sigma2.at(xi) {
            let z2 = ei * ei / s2.max(VARIANCE_FLOOR);
            sum += z2 * z2;
            count += 1;
        }
    }
    if count == 0 {
        return Err(ScbError::EmptyData);
    }
    let nu = sum / count as f64 - 1.0;
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(ScbError::DomainError(format!("estimated nu_eta = {nu} is not positive")));
    }
    Ok(nu)
}

/// Volatility band `σ̃²_n(x) ± L σ²_n(x) √(λ_K ν_η/(n h f_n(x)))` (Gumbel) or
/// `σ̃²_n(x) ± q σ²_n(x) √ν_η / f_n^{1/2}(x)` (simulated), from residuals `e`.
#[allow(clippy::too_many_arguments)]
pub fn scb_volatility(
    x: &[f64],
    e: &[f64],
    h: f64,
    interval: (f64, f64),
    alpha: f64,
    kernel: &KernelProfile,
    method: &CalibrationMethod,
    options: &BandOptions,
) -> Result<SimultaneousBand> {
    Ok(volatility_band(x, e, h, interval, alpha, kernel, method, options)?.0)
}

#[allow(clippy::too_many_arguments)]
pub fn volatility_band(
    x: &[f64],
    e: &[f64],
    h: f64,
    interval: (f64, f64),
    alpha: f64,
    kernel: &KernelProfile,
    method: &CalibrationMethod,
    options: &BandOptions,
) -> Result<(SimultaneousBand, Option<PiSample>)> {
    if x.len() != e.len() {
        return Err(ScbError::DomainError(format!("x and residual lengths differ ({} vs {})", x.len(), e.len())));
    }
    validate_common(x, h, interval, alpha)?;
    let (l, u) = interval;
    let mut diagnostics = BandDiagnostics::default();
    small_sample_warning(x.len(), h, &mut diagnostics.warnings);
    let grid = band_grid(interval, h, options)?;
    let e2: Vec<f64> = e.iter().map(|v| v * v).collect();
    let sigma2 = variance_estimate(x, &e2, h, &grid, kernel)?;
    require_no_empty_window(&sigma2, l, u)?;
    diagnostics.clipped_variance = sigma2.clipped;
    let f = kde(x, h, &grid, kernel)?;
    require_density(&f, density_floor(l, u))?;
    let nu = match options.nu_eta {
        Some(v) if v > 0.0 && v.is_finite() => v,
        Some(v) => return Err(ScbError::DomainError(format!("nu_eta must be positive, got {v}"))),
        None => estimate_nu_eta(x, e, &sigma2)?,
    };
    diagnostics.nu_eta = Some(nu);
    let mut center = sigma2.values.clone();
    if options.bias_correct {
        let bias = regression_bias(x, &e2, h, &grid, kernel, interval)?;
        for (c, bi) in center.iter_mut().zip(&bias.values) {
            *c -= bi;
            if *c < 0.0 {
                *c = 0.0;
                diagnostics.negative_center += 1;
            }
        }
    }
    if diagnostics.negative_center > 0 {
        diagnostics
            .warnings
            .push(format!("bias-corrected variance was negative at {} grid point(s); floored at 0", diagnostics.negative_center));
    }
    let cal = calibrate(method, x, h, &grid, kernel, &f, alpha, options.l1_log_arg)?;
    let g = gumbel_factor(method, kernel.lambda_k(), x.len(), h);
    let scale = sigma2
        .values
        .iter()
        .zip(&f.values)
        .map(|(s2, fv)| g * s2 * nu.sqrt() / fv.sqrt())
        .collect();
    assemble(Target::Variance, grid, center, scale, cal, h, kernel, x.len(), false, diagnostics)
}

/// Hypothesis checked by [`gof_test`].
#[derive(Clone)]
pub enum Candidate<'a> {
    /// A fixed curve on the band grid.
    Values(&'a [f64]),
    /// A function evaluated on the band grid.
    Function(&'a dyn Fn(f64) -> f64),
    /// Polynomial of the given degree fitted by least squares to the pairs
    /// whose regressor lies in the band interval.
    Polynomial { degree: usize, x: &'a [f64], y: &'a [f64] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofResult {
    pub hypothesis: String,
    pub contained: bool,
    pub max_violation: f64,
    pub violation_argmax: f64,
    pub level: f64,
    /// Fitted coefficients, constant term first, for family hypotheses.
    pub coefficients: Option<Vec<f64>>,
}

/// Ordinary least squares polynomial fit, coefficients constant term first.
pub fn fit_polynomial(x: &[f64], y: &[f64], degree: usize) -> Result<Vec<f64>> {
    let p = degree + 1;
    if x.len() < p {
        return Err(ScbError::DomainError(format!("need at least {p} points for a degree-{degree} fit")));
    }
    // Center and scale x for conditioning, then map back.
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let spread = x.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut a = vec![vec![0.0; p]; p];
    let mut rhs = vec![0.0; p];
    for (&xi, &yi) in x.iter().zip(y) {
        let t = (xi - mean) / spread;
        let mut pows = vec![1.0; 2 * p - 1];
        for k in 1..2 * p - 1 {
            pows[k] = pows[k - 1] * t;
        }
        for r in 0..p {
            rhs[r] += pows[r] * yi;
            for c in 0..p {
                a[r][c] += pows[r + c];
            }
        }
    }
    let scaled = solve_dense(a, rhs).ok_or(ScbError::SingularFit { count: 1, first: mean })?;
    // Expand Σ c_k ((x − m)/s)^k into powers of x.
    let mut coef = vec![0.0; p];
    for (k, ck) in scaled.iter().enumerate() {
        let mut binom = 1.0;
        for j in 0..=k {
            // Term C(k, j) x^j (−m)^{k−j} / s^k.
            coef[j] += ck * binom * (-mean).powi((k - j) as i32) / spread.powi(k as i32);
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
    }
    Ok(coef)
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-13 * scale {
            return None;
        }
        a.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for c in col..n {
                a[row][c] -= f * a[col][c];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut sol = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * sol[c]).sum();
        sol[row] = (rhs[row] - s) / a[row][row];
    }
    Some(sol)
}

fn eval_poly(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Reject the hypothesis when the candidate leaves the band anywhere on the grid.
pub fn gof_test(band: &SimultaneousBand, candidate: &Candidate<'_>) -> Result<GofResult> {
    let pts = band.grid.points();
    let (values, hypothesis, coefficients): (Vec<f64>, String, Option<Vec<f64>>) = match candidate {
        Candidate::Values(v) => {
            if v.len() != pts.len() {
                return Err(ScbError::GridMismatch);
            }
            (v.to_vec(), "supplied curve".into(), None)
        }
        Candidate::Function(f) => (pts.iter().map(|&x| f(x)).collect(), "supplied function".into(), None),
        Candidate::Polynomial { degree, x, y } => {
            let (l, u) = (band.grid.lower(), band.grid.upper());
            let (xs, ys): (Vec<f64>, Vec<f64>) =
                x.iter().zip(y.iter()).filter(|(xi, _)| **xi >= l && **xi <= u).map(|(a, b)| (*a, *b)).unzip();
            let coef = fit_polynomial(&xs, &ys, *degree)?;
            let name = match degree {
                0 => "constant".to_string(),
                1 => "affine".to_string(),
                d => format!("polynomial of degree {d}"),
            };
            (pts.iter().map(|&t| eval_poly(&coef, t)).collect(), name, Some(coef))
        }
    };
    let mut worst = 0.0;
    let mut arg = pts[0];
    for (i, &v) in values.iter().enumerate() {
        let excess = if v.is_nan() {
            f64::INFINITY
        } else {
            (band.lower[i] - v).max(v - band.upper[i]).max(0.0)
        };
        if excess > worst {
            worst = excess;
            arg = pts[i];
        }
    }
    Ok(GofResult {
        hypothesis,
        contained: worst == 0.0,
        max_violation: worst,
        violation_argmax: arg,
        level: band.level,
        coefficients,
    })
}
