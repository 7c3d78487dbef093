//! End-to-end drift and volatility bands for a discretely sampled short-rate
//! series, with an affine-drift goodness-of-fit check.
//!
//! Every JSON output carries the configuration hash. Apart from the
//! `generated_at` field of `summary.json`, outputs are a deterministic
//! function of the configuration and the input data.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::bands::{
    fit_regression, gof_test, regression_band, volatility_band, BandOptions, CalibrationMethod, Candidate,
    GofResult, SimulationSummary, SimultaneousBand,
};
use crate::calibration::{Multiplier, PiSample};
use crate::error::{Result, ScbError};
use crate::io::{
    config_hash, data_digest, export_record, load_series, write_json, BandRecord, DiffusionDataset, ExportFormat,
    LoadOptions, LoadedSeries, DEFAULT_DELTA,
};
use crate::kernel::KernelProfile;
use crate::processes::{gen_diffusion_discrete, FunctionSpec, Innovation};

/// Levels at which the simulated cutoff is reported.
const REPORTED_LEVELS: [f64; 3] = [0.90, 0.95, 0.99];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "source")]
pub enum PipelineInput {
    File {
        path: PathBuf,
        column: String,
        #[serde(default = "comma")]
        delimiter: char,
    },
    /// Euler path of `dR = 2(1 − R)dt + 0.3 dW` started at 1.
    Synthetic {
        n: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
}

fn comma() -> char {
    ','
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum PipelineCalibration {
    Gumbel,
    Simulated {
        reps: usize,
        #[serde(default)]
        multiplier: Multiplier,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub input: PipelineInput,
    #[serde(default = "default_delta")]
    pub delta: f64,
    pub b: f64,
    /// Volatility bandwidth; defaults to `b`.
    #[serde(default)]
    pub h: Option<f64>,
    /// Defaults to the 2.5% and 97.5% empirical quantiles of the regressors.
    #[serde(default)]
    pub interval: Option<(f64, f64)>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_kernel")]
    pub kernel: String,
    pub calibration: PipelineCalibration,
    pub seed: u64,
    #[serde(default)]
    pub options: BandOptions,
    /// Also write bands rescaled by `1/Δ`.
    #[serde(default)]
    pub per_annum: bool,
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

fn default_alpha() -> f64 {
    0.05
}

fn default_kernel() -> String {
    "epanechnikov".into()
}

impl PipelineConfig {
    /// Synthetic run used as a smoke test: n = 5000 daily steps, b = 0.05 on `[0.8, 1.2]`.
    pub fn synthetic(n: usize, seed: u64) -> Self {
        PipelineConfig {
            input: PipelineInput::Synthetic { n, seed: None },
            delta: DEFAULT_DELTA,
            b: 0.05,
            h: None,
            interval: Some((0.8, 1.2)),
            alpha: 0.05,
            kernel: default_kernel(),
            calibration: PipelineCalibration::Simulated {
                reps: 1000,
                multiplier: Multiplier::Normal,
            },
            seed,
            options: BandOptions::default(),
            per_annum: false,
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(ScbError::FileNotFound(path.display().to_string()));
        }
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Drift and diffusion coefficient of the synthetic input.
pub fn synthetic_drift() -> FunctionSpec {
    FunctionSpec::Polynomial { coeffs: vec![2.0, -2.0] }
}

pub fn synthetic_diffusion() -> FunctionSpec {
    FunctionSpec::constant(0.3)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub config_hash: String,
    pub method: String,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    /// `(level, cutoff)` pairs for the drift band.
    pub cutoffs: Vec<(f64, f64)>,
    pub regression: SimulationSummary,
    pub volatility_reuses_regression: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub config_hash: String,
    pub affine_drift: GofResult,
    pub affine_rejected: bool,
    /// Only for synthetic input: the true per-step drift against the band.
    pub true_drift: Option<GofResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub config_hash: String,
    pub data_digest: String,
    pub rows: usize,
    pub dropped_rows: usize,
    pub pairs: usize,
    pub delta: f64,
    pub interval: (f64, f64),
    pub interval_coverage: f64,
    pub b: f64,
    pub h: f64,
    pub alpha: f64,
    pub kernel: String,
    pub drift_cutoff: f64,
    pub volatility_cutoff: f64,
    pub affine_rejected: bool,
    pub warnings: Vec<String>,
    pub files: Vec<String>,
    /// Seconds since the Unix epoch; excluded from the hash.
    pub generated_at: u64,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub summary: PipelineSummary,
    pub regression: SimultaneousBand,
    pub volatility: SimultaneousBand,
    pub calibration: Option<CalibrationReport>,
    pub gof: GofReport,
}

fn stage<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.at_stage(name))
}

fn load_input(config: &PipelineConfig) -> Result<LoadedSeries> {
    match &config.input {
        PipelineInput::File { path, column, delimiter } => {
            if !delimiter.is_ascii() {
                return Err(ScbError::Config(format!("delimiter must be ASCII, got `{delimiter}`")));
            }
            load_series(path, column, &LoadOptions { delimiter: *delimiter as u8 })
        }
        PipelineInput::Synthetic { n, seed } => {
            let values = gen_diffusion_discrete(
                &synthetic_drift(),
                &synthetic_diffusion(),
                config.delta,
                *n,
                1.0,
                Innovation::Normal,
                seed.unwrap_or(config.seed),
            )?;
            Ok(LoadedSeries {
                rows: values.len(),
                values,
                dropped: 0,
                source: "synthetic".into(),
                column: "rate".into(),
            })
        }
    }
}

fn default_interval(x: &[f64]) -> Result<(f64, f64)> {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let at = |p: f64| s[((s.len() - 1) as f64 * p).round() as usize];
    let (l, u) = (at(0.025), at(0.975));
    if l < u {
        Ok((l, u))
    } else {
        Err(ScbError::DomainError("regressors are too concentrated to choose an interval".into()))
    }
}

fn cutoff_table(sample: &PiSample) -> Result<Vec<(f64, f64)>> {
    REPORTED_LEVELS.iter().map(|&p| Ok((p, sample.cutoff_at(1.0 - p)?))).collect()
}

/// Run every stage and write outputs into `out_dir`, which is created if needed.
pub fn run_pipeline(config: &PipelineConfig, out_dir: &Path) -> Result<PipelineOutput> {
    let series = stage("load", load_input(config))?;
    let data = stage("pairs", DiffusionDataset::from_loaded(&series, config.delta))?;
    let hash = stage(
        "hash",
        config_hash(&serde_json::json!({"config": config, "data": data_digest(&series.values)})),
    )?;
    let kernel = stage("kernel", KernelProfile::by_name(&config.kernel))?;
    let interval = match config.interval {
        Some(t) => t,
        None => stage("interval", default_interval(&data.x))?,
    };
    let b = config.b;
    let h = config.h.unwrap_or(b);
    let mut options = config.options.clone();
    options.h = Some(h);

    let fit = stage("drift", fit_regression(&data.x, &data.y, b, interval, &kernel, &options))?;
    let drift_method = match config.calibration {
        PipelineCalibration::Gumbel => CalibrationMethod::Gumbel,
        PipelineCalibration::Simulated { reps, multiplier } => CalibrationMethod::Simulated {
            reps,
            seed: config.seed,
            multiplier,
        },
    };
    let (regression, pi) = stage(
        "drift band",
        regression_band(&fit, &data.x, config.alpha, &kernel, &drift_method, &options),
    )?;

    // Π_n depends on the regressors, bandwidth and grid only, so the drift
    // sample calibrates the volatility band whenever h = b.
    let reuse = pi.is_some() && h == b;
    let vol_method = match (&pi, config.calibration) {
        (Some(p), _) if reuse => CalibrationMethod::FixedCutoff { cutoff: p.cutoff },
        (_, PipelineCalibration::Simulated { reps, multiplier }) => CalibrationMethod::Simulated {
            reps,
            seed: config.seed.wrapping_add(1),
            multiplier,
        },
        _ => CalibrationMethod::Gumbel,
    };
    let res = &fit.residuals;
    let (mut volatility, _) = stage(
        "volatility band",
        volatility_band(&res.x, &res.values, h, interval, config.alpha, &kernel, &vol_method, &options),
    )?;
    if reuse {
        volatility.simulation = regression.simulation.clone();
    }

    let affine = stage(
        "goodness of fit",
        gof_test(
            &regression,
            &Candidate::Polynomial {
                degree: 1,
                x: &data.x,
                y: &data.y,
            },
        ),
    )?;
    let true_drift = match config.input {
        PipelineInput::Synthetic { .. } => {
            let (mu, delta) = (synthetic_drift(), config.delta);
            let truth = move |x: f64| mu.eval(x) * delta;
            Some(stage("goodness of fit", gof_test(&regression, &Candidate::Function(&truth)))?)
        }
        PipelineInput::File { .. } => None,
    };
    let gof = GofReport {
        config_hash: hash.clone(),
        affine_rejected: !affine.contained,
        affine_drift: affine,
        true_drift,
    };
    let calibration = match &pi {
        Some(p) => Some(CalibrationReport {
            config_hash: hash.clone(),
            method: "simulated".into(),
            reps: Some(p.reps),
            seed: Some(p.seed),
            cutoffs: stage("calibration", cutoff_table(p))?,
            regression: SimulationSummary::from(p),
            volatility_reuses_regression: reuse,
        }),
        None => None,
    };

    let mut files = Vec::new();
    stage("write", std::fs::create_dir_all(out_dir).map_err(ScbError::from))?;
    let mut emit_band = |name: &str, record: BandRecord| -> Result<()> {
        for (ext, format) in [("csv", ExportFormat::Csv), ("json", ExportFormat::Json)] {
            let file = format!("{name}.{ext}");
            export_record(&record, &out_dir.join(&file), format)?;
            files.push(file);
        }
        Ok(())
    };
    let per_step = "per step";
    stage(
        "write",
        emit_band(
            "regression_band",
            BandRecord::from_band(&regression).with_hash(&hash).with_units(per_step),
        ),
    )?;
    stage(
        "write",
        emit_band(
            "volatility_band",
            BandRecord::from_band(&volatility).with_hash(&hash).with_units(per_step),
        ),
    )?;
    if config.per_annum {
        let factor = 1.0 / config.delta;
        stage(
            "write",
            emit_band(
                "regression_band_per_annum",
                BandRecord::from_band(&regression)
                    .with_hash(&hash)
                    .with_units("per annum")
                    .rescaled(factor),
            ),
        )?;
        stage(
            "write",
            emit_band(
                "volatility_band_per_annum",
                BandRecord::from_band(&volatility)
                    .with_hash(&hash)
                    .with_units("per annum")
                    .rescaled(factor),
            ),
        )?;
    }
    if let Some(c) = &calibration {
        stage("write", write_json(c, &out_dir.join("calibration.json")))?;
        files.push("calibration.json".into());
    }
    stage("write", write_json(&gof, &out_dir.join("gof.json")))?;
    files.push("gof.json".into());

    let mut warnings = fit.warnings.clone();
    warnings.extend(volatility.diagnostics.warnings.iter().cloned());
    warnings.dedup();
    let summary = PipelineSummary {
        config_hash: hash,
        data_digest: data_digest(&series.values),
        rows: series.rows,
        dropped_rows: series.dropped,
        pairs: data.n,
        delta: config.delta,
        interval,
        interval_coverage: data.coverage(interval),
        b,
        h,
        alpha: config.alpha,
        kernel: kernel.name().to_string(),
        drift_cutoff: regression.calibration.halfwidth_scale,
        volatility_cutoff: volatility.calibration.halfwidth_scale,
        affine_rejected: gof.affine_rejected,
        warnings,
        files,
        generated_at: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    };
    stage("write", write_json(&summary, &out_dir.join("summary.json")))?;
    Ok(PipelineOutput {
        summary,
        regression,
        volatility,
        calibration,
        gof,
    })
}
