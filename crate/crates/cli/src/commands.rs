use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use scb_core::asymptotics::{
    check_bandwidth_conditions, gumbel_quantile, halfwidth_l1, halfwidth_l2_on, normalizing_dn, L1LogArg,
};
use scb_core::bands::{
    density_band, fit_regression, gof_test, regression_band, volatility_band, BandOptions, CalibrationMethod,
    Candidate, SimultaneousBand,
};
use scb_core::calibration::{simulate_pi_n, Multiplier, SmoothedBootstrap};
use scb_core::estimators::kde;
use scb_core::harness::{
    coverage_experiment, dichotomy_experiment, gumbel_convergence_experiment, CoverageConfig, DichotomyConfig,
    ExperimentReport, GumbelConfig,
};
use scb_core::io::{
    config_hash, export_record, load_columns, make_regression_pairs, write_band_csv_to, write_json, BandRecord,
    ExportFormat, LoadOptions, DEFAULT_DELTA,
};
use scb_core::pipeline::{run_pipeline, PipelineConfig};
use scb_core::processes::ProcessModel;
use scb_core::{EvaluationGrid, KernelProfile};

#[derive(Debug, Parser)]
#[command(name = "scb", version, about = "Simultaneous confidence bands for time series")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Kernel constants and Gumbel normalizers.
    Constants(ConstantsArgs),
    /// Band for the marginal density of a series.
    Density(DensityArgs),
    /// Band for the regression (drift) function.
    Regress(RegressArgs),
    /// Band for the conditional variance.
    Volatility(RegressArgs),
    /// Simulated cutoff of the maximum deviation surrogate.
    Calibrate(CalibrateArgs),
    /// Generate a series from a process model.
    Simulate(SimulateArgs),
    /// Monte Carlo experiments.
    Experiment {
        #[arg(value_enum)]
        kind: ExperimentKind,
        /// JSON experiment configuration.
        #[arg(long)]
        config: PathBuf,
        /// Report file (JSON).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Drift and volatility bands for a rate series, with an affine-drift test.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExperimentKind {
    Coverage,
    Gumbel,
    Dichotomy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Method {
    Gumbel,
    Simulated,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for ExportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ExportFormat::Csv,
            Format::Json => ExportFormat::Json,
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct ConstantsArgs {
    #[arg(long, default_value = "epanechnikov")]
    kernel: String,
    /// Bandwidth; adds d_n, z_alpha, l1 and l2 to the output.
    #[arg(long)]
    b: Option<f64>,
    /// Interval width used to normalize b.
    #[arg(long, default_value_t = 1.0)]
    width: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Sample size for the bandwidth-condition check.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
struct InputArgs {
    /// Headed delimited text file.
    #[arg(long)]
    #[serde(rename = "path")]
    input: PathBuf,
    #[arg(long, default_value_t = ',')]
    delim: char,
}

impl InputArgs {
    fn options(&self) -> Result<LoadOptions> {
        if !self.delim.is_ascii() {
            bail!(scb_core::ScbError::Config(format!("delimiter must be ASCII, got `{}`", self.delim)));
        }
        Ok(LoadOptions {
            delimiter: self.delim as u8,
        })
    }
}

#[derive(Debug, Args, Serialize)]
struct BandArgs {
    /// Band interval [lower, upper].
    #[arg(long, allow_hyphen_values = true)]
    lower: f64,
    #[arg(long, allow_hyphen_values = true)]
    upper: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value = "epanechnikov")]
    kernel: String,
    #[arg(long, value_enum, default_value_t = Method::Simulated)]
    method: Method,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value = "normal")]
    multiplier: String,
    #[arg(long, env = "SCB_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    grid_points: Option<usize>,
    /// Use log(1/b) instead of log(1/b̄) in the Gumbel multiplier.
    #[arg(long)]
    raw_log: bool,
    /// Output file; CSV goes to stdout when absent.
    #[arg(long)]
    #[serde(rename = "output")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    #[serde(skip)]
    format: Format,
}

impl BandArgs {
    fn method(&self) -> Result<CalibrationMethod> {
        Ok(match self.method {
            Method::Gumbel => CalibrationMethod::Gumbel,
            Method::Simulated => CalibrationMethod::Simulated {
                reps: self.reps,
                seed: self.seed,
                multiplier: self.multiplier.parse::<Multiplier>()?,
            },
        })
    }

    fn options(&self) -> BandOptions {
        BandOptions {
            grid_points: self.grid_points,
            l1_log_arg: if self.raw_log { L1LogArg::B } else { L1LogArg::BBar },
            ..BandOptions::default()
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct DensityArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    column: String,
    #[arg(long)]
    b: f64,
    /// Subtract the second-order bias from the center.
    #[arg(long)]
    bias_correct: bool,
    /// Keep negative lower envelopes instead of clipping at zero.
    #[arg(long)]
    no_clip: bool,
    #[command(flatten)]
    band: BandArgs,
}

#[derive(Debug, Args, Serialize)]
struct RegressArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Rate series; pairs are (R_t, R_{t+1} − R_t).
    #[arg(long, conflicts_with_all = ["x_column", "y_column"])]
    column: Option<String>,
    #[arg(long, requires = "y_column")]
    x_column: Option<String>,
    #[arg(long, requires = "x_column")]
    y_column: Option<String>,
    /// Time step for --column input.
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    /// Drift bandwidth.
    #[arg(long)]
    b: f64,
    /// Volatility bandwidth; defaults to b.
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    no_bias_correct: bool,
    /// Test a polynomial of this degree against the band.
    #[arg(long)]
    gof_degree: Option<usize>,
    #[command(flatten)]
    band: BandArgs,
}

impl RegressArgs {
    fn pairs(&self) -> Result<(Vec<f64>, Vec<f64>, usize)> {
        let opts = self.input.options()?;
        match (&self.column, &self.x_column, &self.y_column) {
            (Some(c), _, _) => {
                let t = load_columns(&self.input.input, &[c], &opts)?;
                let d = make_regression_pairs(&t.columns[0], self.delta)?;
                Ok((d.x, d.y, t.dropped))
            }
            (None, Some(xc), Some(yc)) => {
                let mut t = load_columns(&self.input.input, &[xc, yc], &opts)?;
                let y = t.columns.pop().unwrap_or_default();
                let x = t.columns.pop().unwrap_or_default();
                Ok((x, y, t.dropped))
            }
            _ => bail!(scb_core::ScbError::Config("give --column or both --x-column and --y-column".into())),
        }
    }

    fn options(&self) -> BandOptions {
        BandOptions {
            bias_correct: !self.no_bias_correct,
            h: self.h,
            ..self.band.options()
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct CalibrateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    column: String,
    #[arg(long)]
    b: f64,
    #[arg(long, allow_hyphen_values = true)]
    lower: f64,
    #[arg(long, allow_hyphen_values = true)]
    upper: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value = "epanechnikov")]
    kernel: String,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value = "normal")]
    multiplier: String,
    #[arg(long, env = "SCB_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    grid_points: Option<usize>,
    /// Include every replicate in the output.
    #[arg(long)]
    keep_values: bool,
    #[arg(long)]
    #[serde(rename = "output")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SimulateOutput {
    /// One column `value`.
    Series,
    /// Columns `x,y`.
    Pairs,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// JSON process model.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long, env = "SCB_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = SimulateOutput::Series)]
    what: SimulateOutput,
    /// CSV file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    /// JSON pipeline configuration.
    #[arg(long, conflicts_with = "synthetic")]
    config: Option<PathBuf>,
    /// Run on a synthetic diffusion path of this length instead.
    #[arg(long)]
    synthetic: Option<usize>,
    /// Overrides the configuration seed.
    #[arg(long, env = "SCB_SEED")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Constants(a) => constants(&a),
        Command::Density(a) => density(&a),
        Command::Regress(a) => regress(&a),
        Command::Volatility(a) => volatility(&a),
        Command::Calibrate(a) => calibrate(&a),
        Command::Simulate(a) => simulate(&a),
        Command::Experiment { kind, config, out } => experiment(kind, &config, out.as_deref()),
        Command::Pipeline(a) => pipeline(&a),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    if !path.is_file() {
        bail!(scb_core::ScbError::FileNotFound(path.display().to_string()));
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value = serde_json::from_str(&text)
        .map_err(scb_core::ScbError::from)
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok(value)
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn constants(a: &ConstantsArgs) -> Result<()> {
    let k = KernelProfile::by_name(&a.kernel)?;
    let c = k.constants();
    let mut out = serde_json::json!({
        "kernel": k.name(),
        "support": k.support(),
        "lambda_k": c.lambda_k,
        "k1": c.k1,
        "k2": c.k2,
        "psi_k": c.psi_k,
    });
    if let Some(b) = a.b {
        let bbar = b / a.width;
        out["b"] = b.into();
        out["bbar"] = bbar.into();
        out["alpha"] = a.alpha.into();
        out["z_alpha"] = gumbel_quantile(a.alpha)?.into();
        out["d_n"] = normalizing_dn(bbar, &k)?.into();
        out["l1"] = halfwidth_l1(a.alpha, bbar, &k)?.into();
        out["l2"] = halfwidth_l2_on(a.alpha, b, a.width)?.into();
        if let Some(n) = a.n {
            out["conditions"] = serde_json::to_value(check_bandwidth_conditions(n, b, 0.0, 0.0, None))?;
        }
    }
    print_json(&out)
}

fn emit(band: &SimultaneousBand, args: &BandArgs, hash: &str) -> Result<()> {
    for w in &band.diagnostics.warnings {
        eprintln!("warning: {w}");
    }
    let record = BandRecord::from_band(band).with_hash(hash);
    match &args.out {
        Some(path) => {
            export_record(&record, path, args.format.into())
                .with_context(|| format!("writing {}", path.display()))?;
            eprintln!(
                "wrote {} ({} points, cutoff {:.6})",
                path.display(),
                record.x.len(),
                record.cutoff
            );
        }
        None => match args.format {
            Format::Csv => write_band_csv_to(&record.table(), std::io::stdout().lock())?,
            Format::Json => print_json(&record)?,
        },
    }
    Ok(())
}

fn density(a: &DensityArgs) -> Result<()> {
    let t = load_columns(&a.input.input, &[&a.column], &a.input.options()?)?;
    if t.dropped > 0 {
        eprintln!("dropped {} invalid row(s)", t.dropped);
    }
    let kernel = KernelProfile::by_name(&a.band.kernel)?;
    let options = BandOptions {
        density_bias_correct: a.bias_correct,
        clip_density: !a.no_clip,
        ..a.band.options()
    };
    let (band, _) = density_band(
        &t.columns[0],
        a.b,
        (a.band.lower, a.band.upper),
        a.band.alpha,
        &kernel,
        &a.band.method()?,
        &options,
    )?;
    emit(&band, &a.band, &config_hash(a)?)
}

fn regress(a: &RegressArgs) -> Result<()> {
    let (x, y, dropped) = a.pairs()?;
    if dropped > 0 {
        eprintln!("dropped {dropped} invalid row(s)");
    }
    let kernel = KernelProfile::by_name(&a.band.kernel)?;
    let options = a.options();
    let interval = (a.band.lower, a.band.upper);
    let fit = fit_regression(&x, &y, a.b, interval, &kernel, &options)?;
    let (band, _) = regression_band(&fit, &x, a.band.alpha, &kernel, &a.band.method()?, &options)?;
    emit(&band, &a.band, &config_hash(a)?)?;
    if let Some(degree) = a.gof_degree {
        let g = gof_test(&band, &Candidate::Polynomial { degree, x: &x, y: &y })?;
        eprintln!(
            "{} hypothesis {} at level {} (max violation {:.3e} at x = {:.4})",
            g.hypothesis,
            if g.contained { "not rejected" } else { "rejected" },
            g.level,
            g.max_violation,
            g.violation_argmax
        );
    }
    Ok(())
}

fn volatility(a: &RegressArgs) -> Result<()> {
    let (x, y, dropped) = a.pairs()?;
    if dropped > 0 {
        eprintln!("dropped {dropped} invalid row(s)");
    }
    let kernel = KernelProfile::by_name(&a.band.kernel)?;
    let options = a.options();
    let interval = (a.band.lower, a.band.upper);
    let fit = fit_regression(&x, &y, a.b, interval, &kernel, &options)?;
    let res = &fit.residuals;
    let (band, _) = volatility_band(
        &res.x,
        &res.values,
        options.h.unwrap_or(a.b),
        interval,
        a.band.alpha,
        &kernel,
        &a.band.method()?,
        &options,
    )?;
    emit(&band, &a.band, &config_hash(a)?)
}

fn calibrate(a: &CalibrateArgs) -> Result<()> {
    let t = load_columns(&a.input.input, &[&a.column], &a.input.options()?)?;
    let data = &t.columns[0];
    let kernel = KernelProfile::by_name(&a.kernel)?;
    let grid = match a.grid_points {
        Some(m) => EvaluationGrid::new(a.lower, a.upper, m)?,
        None => EvaluationGrid::for_bandwidth(a.lower, a.upper, a.b)?,
    };
    let f = kde(data, a.b, &grid, &kernel)?;
    let sampler = SmoothedBootstrap::new(data, a.b, &kernel)?;
    let multiplier: Multiplier = a.multiplier.parse()?;
    let sample = simulate_pi_n(&sampler, &multiplier, data.len(), a.b, &grid, &kernel, &f, a.reps, a.alpha, a.seed)?;
    let mut out = serde_json::json!({
        "config_hash": config_hash(a)?,
        "n": data.len(),
        "dropped_rows": t.dropped,
        "reps": sample.reps,
        "seed": sample.seed,
        "alpha": a.alpha,
        "cutoff": sample.cutoff,
        "cutoffs": {
            "0.90": sample.cutoff_at(0.10)?,
            "0.95": sample.cutoff_at(0.05)?,
            "0.99": sample.cutoff_at(0.01)?,
        },
        "config": sample.config,
    });
    if a.keep_values {
        out["values"] = serde_json::to_value(&sample.values)?;
    }
    match &a.out {
        Some(p) => write_json(&out, p)?,
        None => print_json(&out)?,
    }
    Ok(())
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let model: ProcessModel = read_json(&a.model)?;
    model.validate()?;
    let sample = model.generate_seeded(a.n, a.seed)?;
    let sink: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = std::io::BufWriter::new(sink);
    match a.what {
        SimulateOutput::Series => {
            writeln!(w, "value")?;
            for v in &sample.series {
                writeln!(w, "{v:.17e}")?;
            }
        }
        SimulateOutput::Pairs => {
            if sample.x.is_empty() {
                bail!(scb_core::ScbError::Config("this model has no regression pairs".into()));
            }
            writeln!(w, "x,y")?;
            for (x, y) in sample.x.iter().zip(&sample.y) {
                writeln!(w, "{x:.17e},{y:.17e}")?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn experiment(kind: ExperimentKind, config: &Path, out: Option<&Path>) -> Result<()> {
    let report: ExperimentReport = match kind {
        ExperimentKind::Coverage => coverage_experiment(&read_json::<CoverageConfig>(config)?)?,
        ExperimentKind::Gumbel => gumbel_convergence_experiment(&read_json::<GumbelConfig>(config)?)?,
        ExperimentKind::Dichotomy => dichotomy_experiment(&read_json::<DichotomyConfig>(config)?)?,
    };
    print!("{}", report.render());
    if let Some(p) = out {
        let hash = config_hash(&report.config)?;
        let mut value = serde_json::to_value(&report)?;
        value["config_hash"] = hash.into();
        write_json(&value, p)?;
    }
    Ok(())
}

fn pipeline(a: &PipelineArgs) -> Result<()> {
    let mut config = match (&a.config, a.synthetic) {
        (Some(p), _) => PipelineConfig::from_json_file(p)?,
        (None, Some(n)) => PipelineConfig::synthetic(n, a.seed.unwrap_or(0)),
        (None, None) => bail!(scb_core::ScbError::Config("give --config or --synthetic".into())),
    };
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    let out = run_pipeline(&config, &a.out)?;
    let s = &out.summary;
    println!("pairs: {} ({} row(s) dropped)", s.pairs, s.dropped_rows);
    println!(
        "interval: [{}, {}] covering {:.1}% of regressors",
        s.interval.0,
        s.interval.1,
        100.0 * s.interval_coverage
    );
    println!("drift cutoff: {:.4}", s.drift_cutoff);
    println!("volatility cutoff: {:.4}", s.volatility_cutoff);
    println!(
        "affine drift: {} at level {}",
        if s.affine_rejected { "rejected" } else { "not rejected" },
        s.alpha
    );
    for w in &s.warnings {
        eprintln!("warning: {w}");
    }
    println!("config hash: {}", s.config_hash);
    println!("outputs: {}", a.out.display());
    Ok(())
}
