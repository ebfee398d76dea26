//! Configuration ingestion and result serialization.
//!
//! Configuration files are flat TOML: one `key = value` line per parameter,
//! no tables. Unknown keys are rejected and missing keys take the reference
//! defaults. Numbers in CSV outputs carry 15 significant digits in fixed
//! notation, which is the granularity of every byte-identity guarantee.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{ChannelSnapshot, LinkBudget, LinkType};
use crate::config::{SimConfig, ValidationError};
use crate::energy::EnergyReport;
use crate::harness::{SweepReport, SweepScenario, TrialReport};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed configuration: {0}")]
    Parse(String),
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot write an empty sweep report")]
    EmptyReport,
    #[error("plot data check failed: {0}")]
    PlotData(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io { path: path.to_path_buf(), source }
}

/// Parses a flat configuration document and validates the result.
pub fn parse_config(text: &str) -> Result<SimConfig, ConfigError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    for (key, value) in &table {
        if !SimConfig::KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey(key.clone()));
        }
        if value.is_table() {
            return Err(ConfigError::Parse(format!("`{key}` must be a plain value, not a table")));
        }
    }
    let config: SimConfig = table.try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<SimConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_config(&text)
}

/// Fully resolved configuration as a flat document.
pub fn render_config(config: &SimConfig) -> String {
    toml::to_string(config).expect("a flat config always serializes")
}

/// Fixed-notation decimal with 15 significant digits.
pub fn fmt_sig15(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // Round to 15 significant digits first so the exponent reflects carries.
    let sci = format!("{x:.14e}");
    let (mantissa, exponent) = sci.split_once('e').expect("scientific notation has an exponent");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if exponent >= 14 {
        // Beyond f64's exact decimal range: pad the 15 digits with zeros.
        let (sign, mantissa) = mantissa.strip_prefix('-').map_or(("", mantissa), |m| ("-", m));
        let digits = mantissa.replace('.', "");
        return format!("{sign}{digits}{}", "0".repeat((exponent - 14) as usize));
    }
    let rounded: f64 = sci.parse().expect("round trip of a formatted float");
    let decimals = (14 - exponent) as usize;
    format!("{rounded:.decimals$}")
}

pub const SWEEP_CSV_HEADER: [&str; 7] = ["users", "scenario", "mean_energy_j", "std_energy_j", "ci95_j", "trials", "rejected"];

/// Sweep report as CSV, rows sorted by (users, scenario name).
pub fn sweep_csv_string(report: &SweepReport) -> Result<String, OutputError> {
    if report.points.is_empty() {
        return Err(OutputError::EmptyReport);
    }
    let mut rows = Vec::new();
    for point in &report.points {
        for s in &point.scenarios {
            rows.push((point.users, s.scenario.name(), s.stats, point.trials, point.rejected));
        }
    }
    rows.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_CSV_HEADER)?;
    for (users, scenario, stats, trials, rejected) in rows {
        w.write_record([
            users.to_string(),
            scenario.to_string(),
            fmt_sig15(stats.mean),
            fmt_sig15(stats.std),
            fmt_sig15(stats.ci95),
            trials.to_string(),
            rejected.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| OutputError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_sweep_csv(report: &SweepReport, path: &Path) -> Result<(), OutputError> {
    let text = sweep_csv_string(report)?;
    fs::write(path, text).map_err(io_err(path))
}

/// One row of a sweep CSV.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SweepCsvRow {
    pub users: usize,
    pub scenario: String,
    pub mean_energy_j: f64,
    pub std_energy_j: f64,
    pub ci95_j: f64,
    pub trials: usize,
    pub rejected: usize,
}

/// Reads a sweep CSV back and checks it is plot-ready: exact header, every
/// user count carrying all three scenarios, rows sorted, finite non-negative
/// statistics, and rejected never above trials.
pub fn check_plot_data(path: &Path) -> Result<Vec<SweepCsvRow>, OutputError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != SWEEP_CSV_HEADER {
        return Err(OutputError::PlotData(format!("unexpected header {header:?}")));
    }
    let rows: Vec<SweepCsvRow> = reader.deserialize().collect::<Result<_, _>>()?;
    if rows.is_empty() {
        return Err(OutputError::PlotData("no data rows".into()));
    }
    let names: Vec<&str> = SweepScenario::ALL.iter().map(|s| s.name()).collect();
    for chunk in rows.chunks(names.len()) {
        let got: Vec<&str> = chunk.iter().map(|r| r.scenario.as_str()).collect();
        if got != names || chunk.iter().any(|r| r.users != chunk[0].users) {
            return Err(OutputError::PlotData(format!("incomplete or unsorted group at users={}", chunk[0].users)));
        }
    }
    if rows.windows(2).any(|w| w[0].users > w[1].users) {
        return Err(OutputError::PlotData("rows are not sorted by users".into()));
    }
    for r in &rows {
        let stats = [r.mean_energy_j, r.std_energy_j, r.ci95_j];
        if stats.iter().any(|v| !v.is_finite() || *v < 0.0) || r.rejected > r.trials {
            return Err(OutputError::PlotData(format!("invalid statistics in row {r:?}")));
        }
    }
    Ok(rows)
}

pub const ENERGY_CSV_HEADER: [&str; 9] =
    ["trial", "scenario", "total_j", "tx_macro_j", "tx_phantom_j", "tx_d2d_j", "rx_total_j", "outage_users", "rejected"];

/// One CSV row per (trial, scenario) with the itemized energy.
pub fn energy_csv_string(trials: &[TrialReport]) -> Result<String, OutputError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(ENERGY_CSV_HEADER)?;
    let row = |trial: u64, name: &str, r: &EnergyReport| {
        vec![
            trial.to_string(),
            name.to_string(),
            fmt_sig15(r.total),
            fmt_sig15(r.tx_macro),
            fmt_sig15(r.tx_phantom),
            fmt_sig15(r.tx_d2d),
            fmt_sig15(r.rx_total),
            r.outage_users.to_string(),
            "false".to_string(),
        ]
    };
    for t in trials {
        if t.rejected {
            w.write_record([t.trial_index.to_string(), String::new(), String::new(), String::new(), String::new(), String::new(), String::new(), String::new(), "true".into()])?;
            continue;
        }
        let named = [
            ("macro", &t.macro_only),
            ("phantom", &t.phantom),
            ("supercell", &t.super_cell),
            ("situation3", &t.situation3),
        ];
        for (name, report) in named {
            if let Some(r) = report {
                w.write_record(row(t.trial_index, name, r))?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| OutputError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub const LINKS_CSV_HEADER: [&str; 8] =
    ["user_id", "link_type", "peer_id", "distance_m", "path_loss_db", "shadowing_db", "fading_gain", "rate_bps"];

/// Every link budget of a snapshot: macro and phantom links per user, then the
/// D-Links drawn so far. `peer_id` is `macro` for M-Links, the cell id for
/// PH-Links and the other user's id for D-Links.
pub fn links_csv_string(snapshot: &ChannelSnapshot) -> Result<String, OutputError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(LINKS_CSV_HEADER)?;
    let mut record = |user: u32, peer: String, b: &LinkBudget| {
        w.write_record([
            user.to_string(),
            b.link_type.as_str().to_string(),
            peer,
            fmt_sig15(b.distance_m),
            fmt_sig15(b.path_loss_db),
            fmt_sig15(b.shadowing_db),
            fmt_sig15(b.fading_gain),
            fmt_sig15(b.rate_bps),
        ])
    };
    for user in snapshot.users() {
        let m = snapshot.macro_link(user).expect("user from the snapshot");
        debug_assert_eq!(m.link_type, LinkType::MLink);
        record(user.0, "macro".into(), m)?;
        for (cell, b) in snapshot.phantom_links(user) {
            record(user.0, cell.0.to_string(), b)?;
        }
    }
    for ((a, b), budget) in snapshot.cached_d_links() {
        record(a.0, b.0.to_string(), &budget)?;
    }
    let bytes = w.into_inner().map_err(|e| OutputError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputChecksum {
    pub file: String,
    pub sha256: String,
}

/// Everything needed to reproduce a sweep's outputs with the same binary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub master_seed: u64,
    /// Seconds since the Unix epoch, taken from `SOURCE_DATE_EPOCH` when set.
    /// Left empty otherwise so repeated runs stay byte-identical.
    pub timestamp: Option<u64>,
    pub config: SimConfig,
    pub outputs: Vec<OutputChecksum>,
}

impl RunManifest {
    pub fn new(config: &SimConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: config.seed,
            timestamp: std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.trim().parse().ok()),
            config: config.clone(),
            outputs: Vec::new(),
        }
    }
}

/// Writes `name` under `dir` and records its checksum in `manifest`.
pub fn write_output(dir: &Path, name: &str, bytes: &[u8], manifest: &mut RunManifest) -> Result<PathBuf, OutputError> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(io_err(&path))?;
    manifest.outputs.push(OutputChecksum { file: name.to_string(), sha256: sha256_hex(bytes) });
    Ok(path)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), OutputError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(text.as_bytes()).map_err(io_err(path))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, OutputError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes `sweep.csv`, `sweep.json` and `manifest.json` into `dir`.
pub fn write_sweep_outputs(dir: &Path, config: &SimConfig, report: &SweepReport) -> Result<RunManifest, OutputError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut manifest = RunManifest::new(config);
    write_output(dir, "sweep.csv", sweep_csv_string(report)?.as_bytes(), &mut manifest)?;
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    write_output(dir, "sweep.json", json.as_bytes(), &mut manifest)?;
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}
