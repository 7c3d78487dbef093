//! Delimited-text ingestion, regression pairs for discretely sampled
//! diffusions, band export and configuration hashing.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::asymptotics::{BandCalibration, CalibrationKind};
use crate::bands::{BandDiagnostics, SimulationSummary, SimultaneousBand, Target};
use crate::error::{Result, ScbError};

/// Daily sampling in years.
pub const DEFAULT_DELTA: f64 = 1.0 / 250.0;

/// Keys removed before hashing a configuration.
const UNHASHED_KEYS: [&str; 5] = ["path", "out_dir", "output", "timestamp", "generated_at"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadOptions {
    pub delimiter: u8,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions { delimiter: b',' }
    }
}

/// A numeric column in file order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadedSeries {
    pub values: Vec<f64>,
    /// Rows whose cell was missing, blank or non-numeric.
    pub dropped: usize,
    pub rows: usize,
    pub source: String,
    pub column: String,
}

/// Read column `column` of a headed delimited file.
pub fn load_series(path: &Path, column: &str, options: &LoadOptions) -> Result<LoadedSeries> {
    let mut table = load_columns(path, &[column], options)?;
    Ok(LoadedSeries {
        values: table.columns.pop().unwrap_or_default(),
        dropped: table.dropped,
        rows: table.rows,
        source: table.source,
        column: column.to_string(),
    })
}

/// Several numeric columns, row-aligned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadedTable {
    pub columns: Vec<Vec<f64>>,
    /// Rows with at least one missing, blank or non-numeric cell.
    pub dropped: usize,
    pub rows: usize,
    pub source: String,
}

/// Read the named columns, dropping any row where one of them is invalid.
pub fn load_columns(path: &Path, columns: &[&str], options: &LoadOptions) -> Result<LoadedTable> {
    if !path.is_file() {
        return Err(ScbError::FileNotFound(path.display().to_string()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    let idx = columns
        .iter()
        .map(|c| headers.iter().position(|h| h == *c).ok_or_else(|| ScbError::ColumnNotFound(c.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![Vec::new(); columns.len()];
    let mut rows = 0;
    let mut kept = 0;
    for record in reader.records() {
        let record = record?;
        rows += 1;
        let parsed: Option<Vec<f64>> = idx
            .iter()
            .map(|&i| record.get(i).and_then(|c| c.parse::<f64>().ok()).filter(|v| v.is_finite()))
            .collect();
        if let Some(vals) = parsed {
            for (col, v) in out.iter_mut().zip(vals) {
                col.push(v);
            }
            kept += 1;
        }
    }
    if kept == 0 {
        return Err(ScbError::AllRowsInvalid(columns.join(",")));
    }
    Ok(LoadedTable {
        columns: out,
        dropped: rows - kept,
        rows,
        source: path.display().to_string(),
    })
}

/// Regression pairs `X_i = R_{t_i}`, `Y_i = R_{t_{i+1}} − R_{t_i}`.
///
/// Drift and variance fitted to these pairs are per step (`μΔ`, `σ²Δ`);
/// [`DiffusionDataset::per_annum`] converts to per-unit-time values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionDataset {
    pub raw: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub delta: f64,
    pub n: usize,
    pub source: String,
    pub column: String,
}

pub fn make_regression_pairs(series: &[f64], delta: f64) -> Result<DiffusionDataset> {
    if series.len() < 2 {
        return Err(ScbError::SeriesTooShort(series.len()));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(ScbError::DomainError(format!("time step must be positive, got {delta}")));
    }
    let x = series[..series.len() - 1].to_vec();
    let y: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(DiffusionDataset {
        raw: series.to_vec(),
        n: x.len(),
        x,
        y,
        delta,
        source: String::new(),
        column: String::new(),
    })
}

impl DiffusionDataset {
    pub fn from_loaded(series: &LoadedSeries, delta: f64) -> Result<Self> {
        let mut ds = make_regression_pairs(&series.values, delta)?;
        ds.source = series.source.clone();
        ds.column = series.column.clone();
        Ok(ds)
    }

    /// Fraction of regressors inside `[l, u]`.
    pub fn coverage(&self, interval: (f64, f64)) -> f64 {
        let inside = self.x.iter().filter(|&&v| v >= interval.0 && v <= interval.1).count();
        inside as f64 / self.n as f64
    }

    /// Per-step drift or variance divided by `Δ`.
    pub fn per_annum(&self, value: f64) -> f64 {
        value / self.delta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ExportFormat {
    type Err = ScbError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            other => Err(ScbError::Config(format!("unknown export format `{other}`"))),
        }
    }
}

/// Band values with their calibration metadata, as written to JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandRecord {
    pub target: Target,
    /// Significance level α.
    pub level: f64,
    pub method: CalibrationKind,
    pub bandwidth: f64,
    pub kernel: String,
    pub n: usize,
    pub cutoff: f64,
    pub x: Vec<f64>,
    pub center: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub calibration: BandCalibration,
    pub simulation: Option<SimulationSummary>,
    pub diagnostics: BandDiagnostics,
    #[serde(default)]
    pub units: Option<String>,
    #[serde(default)]
    pub config_hash: Option<String>,
}

impl BandRecord {
    pub fn from_band(band: &SimultaneousBand) -> Self {
        BandRecord {
            target: band.target,
            level: band.level,
            method: band.calibration.method,
            bandwidth: band.bandwidth,
            kernel: band.kernel.clone(),
            n: band.n,
            cutoff: band.calibration.halfwidth_scale,
            x: band.grid.points().to_vec(),
            center: band.center.clone(),
            lower: band.lower.clone(),
            upper: band.upper.clone(),
            calibration: band.calibration.clone(),
            simulation: band.simulation.clone(),
            diagnostics: band.diagnostics.clone(),
            units: None,
            config_hash: None,
        }
    }

    pub fn with_hash(mut self, hash: &str) -> Self {
        self.config_hash = Some(hash.to_string());
        self
    }

    pub fn with_units(mut self, units: &str) -> Self {
        self.units = Some(units.to_string());
        self
    }

    /// Multiply center and envelopes by `factor > 0`.
    pub fn rescaled(mut self, factor: f64) -> Self {
        for v in self.center.iter_mut().chain(&mut self.lower).chain(&mut self.upper) {
            *v *= factor;
        }
        self
    }

    pub fn table(&self) -> BandTable {
        BandTable {
            x: self.x.clone(),
            center: self.center.clone(),
            lower: self.lower.clone(),
            upper: self.upper.clone(),
        }
    }
}

/// The four exported columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandTable {
    pub x: Vec<f64>,
    pub center: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

pub const CSV_HEADER: [&str; 4] = ["x", "center", "lower", "upper"];

fn sig12(v: f64) -> String {
    format!("{v:.11e}")
}

pub fn write_band_csv(table: &BandTable, path: &Path) -> Result<()> {
    write_band_csv_to(table, File::create(path)?)
}

pub fn write_band_csv_to<W: Write>(table: &BandTable, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for i in 0..table.x.len() {
        w.write_record([
            sig12(table.x[i]),
            sig12(table.center[i]),
            sig12(table.lower[i]),
            sig12(table.upper[i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn export_band(band: &SimultaneousBand, path: &Path, format: ExportFormat) -> Result<()> {
    export_record(&BandRecord::from_band(band), path, format)
}

pub fn export_record(record: &BandRecord, path: &Path, format: ExportFormat) -> Result<()> {
    match format {
        ExportFormat::Csv => write_band_csv(&record.table(), path),
        ExportFormat::Json => write_json(record, path),
    }
}

pub fn import_band_csv(path: &Path) -> Result<BandTable> {
    if !path.is_file() {
        return Err(ScbError::FileNotFound(path.display().to_string()));
    }
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(ScbError::Config(format!("unexpected band header {header:?}")));
    }
    let mut t = BandTable {
        x: Vec::new(),
        center: Vec::new(),
        lower: Vec::new(),
        upper: Vec::new(),
    };
    for record in reader.records() {
        let record = record?;
        let mut vals = [0.0; 4];
        for (k, v) in vals.iter_mut().enumerate() {
            let cell = record.get(k).unwrap_or("");
            *v = cell
                .parse()
                .map_err(|_| ScbError::Config(format!("non-numeric band cell `{cell}`")))?;
        }
        t.x.push(vals[0]);
        t.center.push(vals[1]);
        t.lower.push(vals[2]);
        t.upper.push(vals[3]);
    }
    Ok(t)
}

pub fn import_band_json(path: &Path) -> Result<BandRecord> {
    if !path.is_file() {
        return Err(ScbError::FileNotFound(path.display().to_string()));
    }
    Ok(serde_json::from_reader(std::io::BufReader::new(File::open(path)?))?)
}

fn strip_unhashed(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Object(map) => {
            map.retain(|k, _| !UNHASHED_KEYS.contains(&k.as_str()));
            map.values_mut().for_each(strip_unhashed);
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(strip_unhashed),
        _ => {}
    }
}

/// SHA-256 of the configuration's canonical JSON (sorted keys) with path and
/// timestamp fields removed, as lowercase hex.
pub fn config_hash<T: Serialize>(config: &T) -> Result<String> {
    let mut value = serde_json::to_value(config)?;
    strip_unhashed(&mut value);
    let bytes = serde_json::to_vec(&value)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// SHA-256 of the little-endian bytes of a series.
pub fn data_digest(values: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}
