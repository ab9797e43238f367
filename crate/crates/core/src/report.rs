//! Run configuration and analysis reports.
//!
//! Config files are flat `key = value` text (`#` starts a comment) or JSON.
//! Keys: the [`PipelineConfig`] fields plus `out` and `csv_dir`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::FourierTable;
use crate::group::GroupSet;
use crate::increment::{dispatch, IncrementResult, Iteration, IterationStep, PipelineConfig, Termination};
use crate::spectrum::{
    case_split_from_table, dyadic_peak_from_table, smoothing_from_level, CaseSplit, SmoothingReport,
    SpectrumLevel, SpectrumSummary,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub pipeline: PipelineConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv_dir: Option<PathBuf>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("bad value for {key}: {value:?}")))
}

impl RunConfig {
    /// Parses `key = value` text, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("config JSON: {e}")))?
        } else {
            let mut cfg = RunConfig::default();
            for (i, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", i + 1)))?;
                cfg.set(key.trim(), value.trim())?;
            }
            cfg
        };
        cfg.pipeline.validate()?;
        Ok(cfg)
    }

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let p = &mut self.pipeline;
        match key {
            "mu" => p.mu = parse_value(key, value)?,
            "f" => p.f = parse_value(key, value)?,
            "c_omega" => p.c_omega = parse_value(key, value)?,
            "extraction_budget" => p.extraction_budget = parse_value(key, value)?,
            "max_rounds" => p.max_rounds = parse_value(key, value)?,
            "large_l" => p.large_l = Some(parse_value(key, value)?),
            "ap_floor" => p.ap_floor = parse_value(key, value)?,
            "tolerance" => p.tolerance = parse_value(key, value)?,
            "max_rank" => p.max_rank = parse_value(key, value)?,
            "selection_samples" => p.selection_samples = parse_value(key, value)?,
            "y_cap" => p.y_cap = parse_value(key, value)?,
            "seed" => p.seed = parse_value(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "csv_dir" => self.csv_dir = Some(PathBuf::from(value)),
            other => return Err(Error::Parse(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// `key = value` text; floats use the shortest round-trip form.
    pub fn to_text(&self) -> String {
        let p = &self.pipeline;
        let mut lines = vec![
            format!("mu = {}", p.mu),
            format!("f = {}", p.f),
            format!("c_omega = {}", p.c_omega),
            format!("extraction_budget = {}", p.extraction_budget),
            format!("max_rounds = {}", p.max_rounds),
        ];
        if let Some(l) = p.large_l {
            lines.push(format!("large_l = {l}"));
        }
        lines.extend([
            format!("ap_floor = {}", p.ap_floor),
            format!("tolerance = {}", p.tolerance),
            format!("max_rank = {}", p.max_rank),
            format!("selection_samples = {}", p.selection_samples),
            format!("y_cap = {}", p.y_cap),
            format!("seed = {}", p.seed),
        ]);
        if let Some(o) = &self.out {
            lines.push(format!("out = {}", o.display()));
        }
        if let Some(c) = &self.csv_dir {
            lines.push(format!("csv_dir = {}", c.display()));
        }
        let mut text = lines.join("\n");
        text.push('\n');
        text
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDescriptor {
    pub source: String,
    pub n: usize,
    pub size: usize,
    pub density: f64,
}

impl InputDescriptor {
    pub fn of(set: &GroupSet, source: impl Into<String>) -> Self {
        InputDescriptor {
            source: source.into(),
            n: set.modulus(),
            size: set.len(),
            density: set.density(),
        }
    }
}

/// Everything a run produced. Each number is a deterministic function of the
/// input and the config; `timing_ms` is the only exception and is absent
/// unless requested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub input: InputDescriptor,
    pub config: PipelineConfig,
    pub case_split: Option<CaseSplit>,
    pub spectra: Vec<SpectrumSummary>,
    pub smoothing: Option<SmoothingReport>,
    pub increments: Vec<IncrementResult>,
    pub trajectory: Vec<IterationStep>,
    pub termination: Option<Termination>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl AnalysisReport {
    pub fn new(input: InputDescriptor, config: PipelineConfig) -> Self {
        AnalysisReport {
            schema_version: SCHEMA_VERSION,
            input,
            config,
            case_split: None,
            spectra: Vec::new(),
            smoothing: None,
            increments: Vec::new(),
            trajectory: Vec::new(),
            termination: None,
            timing_ms: None,
        }
    }

    pub fn with_iteration(mut self, it: Iteration) -> Self {
        self.trajectory = it.steps;
        self.increments.extend(it.results);
        self.termination = Some(it.termination);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields are finite")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: AnalysisReport =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("report JSON: {e}")))?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "report schema_version {} is not {SCHEMA_VERSION}",
                r.schema_version
            )));
        }
        Ok(r)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}

/// Case split, spectra at the band edges `delta^{1/10}`, `delta^{1-mu}` and
/// `delta^{1+mu}`, the smoothing test on the SML peak and one dispatched
/// increment.
pub fn analyze(set: &GroupSet, source: &str, cfg: &PipelineConfig) -> Result<AnalysisReport> {
    cfg.validate()?;
    let mut report = AnalysisReport::new(InputDescriptor::of(set, source), cfg.clone());
    let table = FourierTable::of_set(set);
    let cs = case_split_from_table(&table, set.len(), cfg.mu)?;
    let delta = cs.delta;
    for theta in [delta.powf(0.1), delta.powf(1.0 - cfg.mu), delta.powf(1.0 + cfg.mu)] {
        report.spectra.push(SpectrumLevel::from_table(&table, set.len(), theta)?.summary(delta));
    }
    let peak = dyadic_peak_from_table(&table, set.len(), delta.powf(1.0 + cfg.mu), delta.powf(1.0 - cfg.mu))?;
    report.smoothing = smoothing_from_level(&peak.level, delta, 20.0 * cfg.mu).ok();
    report.case_split = Some(cs);
    report.increments.push(dispatch(set, cfg)?);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

fn write_rows<R: Serialize>(path: &Path, rows: impl IntoIterator<Item = R>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for row in rows {
        w.serialize(row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// JSON: one file at `path`. CSV: `spectra.csv`, `increments.csv`,
/// `ledger.csv` and `trajectory.csv` inside the directory `path`. Returns
/// the files written.
pub fn write_report(report: &AnalysisReport, format: ReportFormat, path: &Path) -> Result<Vec<PathBuf>> {
    match format {
        ReportFormat::Json => {
            let mut text = report.to_json();
            text.push('\n');
            fs::write(path, text).map_err(io_err(path))?;
            Ok(vec![path.to_path_buf()])
        }
        ReportFormat::Csv => {
            fs::create_dir_all(path).map_err(io_err(path))?;
            let spectra = path.join("spectra.csv");
            write_rows(&spectra, &report.spectra)?;

            #[derive(Serialize)]
            struct IncRow {
                index: usize,
                provenance: crate::increment::Provenance,
                rank: usize,
                radius: f64,
                t: usize,
                old_density: f64,
                new_density: f64,
                factor: f64,
            }
            let increments = path.join("increments.csv");
            write_rows(
                &increments,
                report.increments.iter().enumerate().map(|(index, r)| IncRow {
                    index,
                    provenance: r.provenance,
                    rank: r.bohr.rank(),
                    radius: r.bohr.radius,
                    t: r.t,
                    old_density: r.old_density,
                    new_density: r.new_density,
                    factor: r.factor,
                }),
            )?;

            #[derive(Serialize)]
            struct LedgerRow<'a> {
                increment: usize,
                name: &'a str,
                lhs: f64,
                rhs: f64,
                holds: bool,
            }
            let ledger = path.join("ledger.csv");
            write_rows(
                &ledger,
                report.increments.iter().enumerate().flat_map(|(i, r)| {
                    r.ledger.iter().map(move |e| LedgerRow {
                        increment: i,
                        name: &e.name,
                        lhs: e.lhs,
                        rhs: e.rhs,
                        holds: e.holds,
                    })
                }),
            )?;

            let trajectory = path.join("trajectory.csv");
            write_rows(&trajectory, &report.trajectory)?;
            Ok(vec![spectra, increments, ledger, trajectory])
        }
    }
}

/// The raw transform of `set` as `r,re,im,magnitude`.
pub fn write_spectrum_csv(set: &GroupSet, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    FourierTable::of_set(set)
        .write_csv(std::io::BufWriter::new(file))
        .map_err(io_err(path))
}
