//! Command-line front end: configuration, scenario dispatch, and table
//! emission for the `psam` binary.
//!
//! Every scenario produces a [`SweepTable`]. CSV output carries only the
//! header and rows; the metadata block goes to a `<out>.meta.json` sidecar.
//! JSON output is one `{metadata, columns, rows}` object.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{
    minimum_bit_energy, optimize_period, optimize_pilot_and_profile, optimize_pilot_power,
    sweep_snr, MAX_PERIOD,
};
use crate::spectrum::ChannelParams;
use crate::validate::run_validation;
use crate::wiener::{AliasMode, FilterKind};
use crate::{db_to_linear, linear_to_db};

/// Significant digits of every CSV number.
pub const CSV_DIGITS: usize = 12;
/// Upper bound on SNR grid points, to catch a mistyped step.
const MAX_GRID_POINTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    RateVsPeriod,
    RateVsSnr,
    PowerProfile,
    BitEnergy,
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub alpha: f64,
    pub sigma_h_sq: f64,
    pub sigma_n_sq: f64,
    /// Single SNR for `rate-vs-period` and `power-profile`.
    pub snr_db: f64,
    pub snr_min_db: f64,
    pub snr_max_db: f64,
    pub snr_step_db: f64,
    pub filter: FilterKind,
    pub aliasing: AliasMode,
    pub m_min: usize,
    pub m_max: usize,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub seed: u64,
}

impl RunConfig {
    pub fn defaults(scenario: Scenario) -> Self {
        Self {
            scenario,
            alpha: 0.99,
            sigma_h_sq: 1.0,
            sigma_n_sq: 1.0,
            snr_db: 0.0,
            snr_min_db: -10.0,
            snr_max_db: 10.0,
            snr_step_db: 0.5,
            filter: FilterKind::Noncausal,
            aliasing: AliasMode::Considered,
            m_min: 2,
            m_max: 100,
            out: None,
            format: OutputFormat::Csv,
            seed: 42,
        }
    }

    pub fn channel(&self) -> Result<ChannelParams> {
        ChannelParams::new(self.alpha, self.sigma_h_sq, self.sigma_n_sq)
    }

    /// Checks fields in declaration order; the error names the first bad one.
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid("alpha", format!("{} is outside [0, 1)", self.alpha)));
        }
        for (field, v) in [("sigma-h-sq", self.sigma_h_sq), ("sigma-n-sq", self.sigma_n_sq)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(field, format!("{v} must be positive and finite")));
            }
        }
        for (field, v) in [
            ("snr-db", self.snr_db),
            ("snr-min-db", self.snr_min_db),
            ("snr-max-db", self.snr_max_db),
        ] {
            if !v.is_finite() || v.abs() > 200.0 {
                return Err(Error::invalid(field, format!("{v} dB is not a usable SNR")));
            }
        }
        if self.snr_max_db < self.snr_min_db {
            return Err(Error::invalid("snr-max-db", "is below snr-min-db"));
        }
        if !(self.snr_step_db > 0.0 && self.snr_step_db.is_finite()) {
            return Err(Error::invalid("snr-step-db", "must be positive"));
        }
        if (self.snr_max_db - self.snr_min_db) / self.snr_step_db > MAX_GRID_POINTS as f64 {
            return Err(Error::invalid(
                "snr-step-db",
                format!("grid would exceed {MAX_GRID_POINTS} points"),
            ));
        }
        if self.filter == FilterKind::Causal
            && self.aliasing == AliasMode::Considered
            && self.scenario != Scenario::Validate
        {
            return Err(Error::invalid(
                "aliasing",
                "causal filtering is only available with --aliasing ignored",
            ));
        }
        if self.m_min < 2 {
            return Err(Error::invalid("m-min", "must be at least 2"));
        }
        if self.m_max > MAX_PERIOD {
            return Err(Error::invalid("m-max", format!("must be at most {MAX_PERIOD}")));
        }
        if self.m_max < self.m_min {
            return Err(Error::invalid("m-max", "is below m-min"));
        }
        Ok(())
    }

    /// SNR grid in dB, endpoints included.
    pub fn snr_grid_db(&self) -> Vec<f64> {
        let n = ((self.snr_max_db - self.snr_min_db) / self.snr_step_db + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| self.snr_min_db + i as f64 * self.snr_step_db)
            .collect()
    }

    /// Average power `P = snr sigma_n^2` for a linear SNR.
    fn power(&self, snr_db: f64) -> f64 {
        db_to_linear(snr_db) * self.sigma_n_sq
    }
}

/// Keys accepted in a `--config` TOML file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub alpha: Option<f64>,
    pub sigma_h_sq: Option<f64>,
    pub sigma_n_sq: Option<f64>,
    pub snr_db: Option<f64>,
    pub snr_min_db: Option<f64>,
    pub snr_max_db: Option<f64>,
    pub snr_step_db: Option<f64>,
    pub filter: Option<FilterKind>,
    pub aliasing: Option<AliasMode>,
    pub m_min: Option<usize>,
    pub m_max: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub seed: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }
}

#[derive(Debug, Parser)]
#[command(name = "psam", version, about = "Training period and power optimization for pilot-assisted transmission")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimized rate at every training period for one SNR.
    RateVsPeriod(Flags),
    /// Optimal period and rate over an SNR grid.
    RateVsSnr(Flags),
    /// Pilot and data powers over one period (position 0 is the pilot).
    PowerProfile(Flags),
    /// Energy per bit over an SNR grid.
    BitEnergy(Flags),
    /// Compare analytic error variances with the oracles.
    Validate(Flags),
}

impl Command {
    fn split(self) -> (Scenario, Flags) {
        match self {
            Command::RateVsPeriod(f) => (Scenario::RateVsPeriod, f),
            Command::RateVsSnr(f) => (Scenario::RateVsSnr, f),
            Command::PowerProfile(f) => (Scenario::PowerProfile, f),
            Command::BitEnergy(f) => (Scenario::BitEnergy, f),
            Command::Validate(f) => (Scenario::Validate, f),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Fading correlation between consecutive symbols, in [0, 1).
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub sigma_h_sq: Option<f64>,
    #[arg(long)]
    pub sigma_n_sq: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_min_db: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_max_db: Option<f64>,
    #[arg(long)]
    pub snr_step_db: Option<f64>,
    /// noncausal or causal
    #[arg(long, value_parser = parse_filter)]
    pub filter: Option<FilterKind>,
    /// considered or ignored
    #[arg(long, value_parser = parse_alias)]
    pub aliasing: Option<AliasMode>,
    #[arg(long)]
    pub m_min: Option<usize>,
    #[arg(long)]
    pub m_max: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or json
    #[arg(long, value_parser = parse_format)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// TOML file with any of the above keys; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn parse_filter(s: &str) -> std::result::Result<FilterKind, String> {
    match s {
        "noncausal" => Ok(FilterKind::Noncausal),
        "causal" => Ok(FilterKind::Causal),
        _ => Err("expected noncausal or causal".into()),
    }
}

fn parse_alias(s: &str) -> std::result::Result<AliasMode, String> {
    match s {
        "considered" => Ok(AliasMode::Considered),
        "ignored" => Ok(AliasMode::Ignored),
        _ => Err("expected considered or ignored".into()),
    }
}

fn parse_format(s: &str) -> std::result::Result<OutputFormat, String> {
    match s {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        _ => Err("expected csv or json".into()),
    }
}

/// Merges flags over file values over defaults, then validates.
pub fn resolve_config(scenario: Scenario, flags: Flags, file: Option<FileConfig>) -> Result<RunConfig> {
    let file = file.unwrap_or_default();
    let mut cfg = RunConfig::defaults(scenario);
    macro_rules! layer {
        ($($field:ident),*) => {
            $(
                if let Some(v) = file.$field.clone() { cfg.$field = v; }
                if let Some(v) = flags.$field.clone() { cfg.$field = v; }
            )*
        };
    }
    layer!(
        alpha, sigma_h_sq, sigma_n_sq, snr_db, snr_min_db, snr_max_db, snr_step_db, filter,
        aliasing, m_min, m_max, format, seed
    );
    if let Some(v) = file.out {
        cfg.out = Some(v);
    }
    if let Some(v) = flags.out {
        cfg.out = Some(v);
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parses a full command line (program name first), loading `--config` if
/// given.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Config(e.to_string()))?;
    let (scenario, flags) = cli.command.split();
    let file = flags.config.as_deref().map(FileConfig::load).transpose()?;
    resolve_config(scenario, flags, file)
}

/// A row that could not be computed. Only JSON metadata records these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedRow {
    /// Independent variable of the missing row.
    pub key: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub config: RunConfig,
    pub tool: String,
    pub version: String,
    /// Seconds since the epoch, from `SOURCE_DATE_EPOCH` when set. Left
    /// empty otherwise so identical configurations give identical bytes.
    pub timestamp: Option<u64>,
    pub summary: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub failures: Vec<FailedRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub metadata: Metadata,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SweepTable {
    pub fn new(config: RunConfig, columns: &[&str]) -> Self {
        let timestamp = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|s| s.trim().parse().ok());
        Self {
            metadata: Metadata {
                config,
                tool: env!("CARGO_PKG_NAME").into(),
                version: env!("CARGO_PKG_VERSION").into(),
                timestamp,
                summary: BTreeMap::new(),
                notes: Vec::new(),
                failures: Vec::new(),
            },
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::DimensionMismatch {
                expected: self.columns.len(),
                actual: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    fn summarize(&mut self, key: &str, value: f64) {
        self.metadata.summary.insert(key.into(), value);
    }

    fn fail(&mut self, key: f64, message: impl Into<String>) {
        self.metadata.failures.push(FailedRow {
            key,
            message: message.into(),
        });
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_number(v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Numerical(format!("cannot serialize table: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid table JSON: {e}")))
    }
}

/// `%g`-style formatting with [`CSV_DIGITS`] significant digits.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let p = CSV_DIGITS as i32;
    let sci = format!("{:.*e}", CSV_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        trim_zeros(&format!("{:.*}", (p - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Runs the configured scenario.
pub fn run_scenario(cfg: &RunConfig) -> Result<SweepTable> {
    cfg.validate()?;
    match cfg.scenario {
        Scenario::RateVsPeriod => rate_vs_period(cfg),
        Scenario::RateVsSnr => rate_vs_snr(cfg),
        Scenario::PowerProfile => power_profile(cfg),
        Scenario::BitEnergy => bit_energy_table(cfg),
        Scenario::Validate => validate_table(cfg),
    }
}

fn rate_vs_period(cfg: &RunConfig) -> Result<SweepTable> {
    use rayon::prelude::*;
    let ch = cfg.channel()?;
    let power = cfg.power(cfg.snr_db);
    let mut table = SweepTable::new(cfg.clone(), &["M", "rate_bits", "P_t_star"]);
    let outcomes: Vec<_> = (cfg.m_min..=cfg.m_max)
        .into_par_iter()
        .map(|m| (m, optimize_pilot_power(&ch, m, power, cfg.filter, cfg.aliasing)))
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (m, outcome) in outcomes {
        match outcome {
            Ok(o) => {
                let rate = o.result.rate_bits;
                if best.is_none_or(|(_, r)| rate > r) {
                    best = Some((m, rate));
                }
                if o.diagnostics.grid_fallback || o.diagnostics.multimodal_grid {
                    table
                        .metadata
                        .notes
                        .push(format!("M={m}: pilot-power search {:?}", o.diagnostics));
                }
                table.push_row(vec![m as f64, rate, o.pilot_power])?;
            }
            Err(e) => table.fail(m as f64, e.to_string()),
        }
    }
    let (m_star, rate) = best.ok_or_else(|| Error::Numerical("no period could be evaluated".into()))?;
    table.summarize("M_star", m_star as f64);
    table.summarize("rate_bits_max", rate);
    Ok(table)
}

fn rate_vs_snr(cfg: &RunConfig) -> Result<SweepTable> {
    let ch = cfg.channel()?;
    let grid = cfg.snr_grid_db();
    let snrs: Vec<f64> = grid.iter().map(|&d| db_to_linear(d)).collect();
    let rows = sweep_snr(&ch, &snrs, cfg.m_min..=cfg.m_max, cfg.filter, cfg.aliasing)?;
    let mut table = SweepTable::new(cfg.clone(), &["snr_db", "M_star", "rate_bits"]);
    for (db, row) in grid.iter().zip(rows) {
        match row.outcome {
            Ok(o) => table.push_row(vec![*db, o.period as f64, o.best.rate_bits])?,
            Err(msg) => table.fail(*db, msg),
        }
    }
    if table.rows.is_empty() {
        return Err(Error::Numerical("every SNR point failed".into()));
    }
    Ok(table)
}

fn power_profile(cfg: &RunConfig) -> Result<SweepTable> {
    let ch = cfg.channel()?;
    let power = cfg.power(cfg.snr_db);
    let period = if cfg.m_min == cfg.m_max {
        cfg.m_min
    } else {
        optimize_period(&ch, power, cfg.m_min..=cfg.m_max, cfg.filter, cfg.aliasing)?.period
    };
    let opt = optimize_pilot_and_profile(&ch, period, power, cfg.filter, cfg.aliasing)?;
    let mut table = SweepTable::new(cfg.clone(), &["position", "power"]);
    table.push_row(vec![0.0, opt.pilot_power])?;
    for (i, &p) in opt.allocation.powers.iter().enumerate() {
        table.push_row(vec![(i + 1) as f64, p])?;
    }
    table.summarize("M", period as f64);
    table.summarize("rate_bits", opt.result.rate_bits);
    table.summarize("kkt_residual", opt.allocation.kkt_residual);
    Ok(table)
}

fn bit_energy_table(cfg: &RunConfig) -> Result<SweepTable> {
    let ch = cfg.channel()?;
    let grid = cfg.snr_grid_db();
    let snrs: Vec<f64> = grid.iter().map(|&d| db_to_linear(d)).collect();
    let curve = minimum_bit_energy(&ch, &snrs, cfg.m_min..=cfg.m_max, cfg.filter, cfg.aliasing)?;
    let mut table = SweepTable::new(cfg.clone(), &["snr_db", "eb_n0_db", "rate_bits", "M_star"]);
    for (db, p) in grid.iter().zip(&curve.points) {
        if p.eb_n0.is_finite() {
            table.push_row(vec![*db, linear_to_db(p.eb_n0), p.rate_bits, p.period as f64])?;
        } else {
            table.fail(*db, "rate is zero, bit energy unbounded");
        }
    }
    let best = curve.minimum();
    table.summarize("snr_db_at_minimum", grid[curve.best]);
    table.summarize("eb_n0_db_min", linear_to_db(best.eb_n0));
    Ok(table)
}

fn validate_table(cfg: &RunConfig) -> Result<SweepTable> {
    let cases = run_validation(cfg.seed)?;
    let mut table = SweepTable::new(cfg.clone(), &["case", "analytic", "oracle", "abs_diff", "pass"]);
    table.metadata.notes.push(
        "validation uses unit fading and noise variances; only the seed is taken from the configuration"
            .into(),
    );
    let mut passed = 0usize;
    for (i, c) in cases.iter().enumerate() {
        table.push_row(vec![
            i as f64,
            c.analytic,
            c.oracle,
            c.abs_diff,
            if c.pass { 1.0 } else { 0.0 },
        ])?;
        passed += c.pass as usize;
        table
            .metadata
            .notes
            .push(format!("case {i}: {} (allowed {:.3e})", c.label, c.allowed));
    }
    table.summarize("cases", cases.len() as f64);
    table.summarize("passed", passed as f64);
    Ok(table)
}

/// Path of the metadata sidecar written next to a CSV file.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Writes `table` in the configured format. Returns the files written;
/// empty when the table went to standard output.
pub fn emit(table: &SweepTable, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let body = match cfg.format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => table.to_json()?,
    };
    let Some(out) = &cfg.out else {
        let mut stdout = std::io::stdout().lock();
        stdout.write_all(body.as_bytes())?;
        stdout.flush()?;
        return Ok(Vec::new());
    };
    write_atomic(out, body.as_bytes())?;
    let mut written = vec![out.clone()];
    if cfg.format == OutputFormat::Csv {
        let meta = serde_json::to_string_pretty(&table.metadata)
            .map_err(|e| Error::Numerical(format!("cannot serialize metadata: {e}")))?;
        let path = sidecar_path(out);
        write_atomic(&path, format!("{meta}\n").as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Entry point of the binary: parse, run, emit, map errors to exit codes.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let (scenario, flags) = cli.command.split();
    let result = flags
        .config
        .as_deref()
        .map(FileConfig::load)
        .transpose()
        .and_then(|file| resolve_config(scenario, flags, file))
        .and_then(|cfg| {
            let table = run_scenario(&cfg)?;
            for f in &table.metadata.failures {
                log::warn!("row {} failed: {}", f.key, f.message);
            }
            emit(&table, &cfg)
        });
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
