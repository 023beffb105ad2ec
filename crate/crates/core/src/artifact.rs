//! CSV artifacts: `#`-prefixed provenance header, a column-name row, then
//! one record per line.
//!
//! ```text
//! # rismod 0.1.0
//! # job: sep
//! # config: {"job":"sep",...}
//! snr_db,metric,value,stderr,trials,channels
//! -20,sep_sim,0.0123,0.0011,10000,100
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modulation::{ConstellationSet, SymbolLabel};
use crate::montecarlo::SweepResult;

pub const CONSTELLATION_COLUMNS: [&str; 7] = ["label", "l", "l1", "l2", "v", "re", "im"];
pub const SWEEP_COLUMNS: [&str; 6] = ["snr_db", "metric", "value", "stderr", "trials", "channels"];

/// Provenance carried in the `#` lines.
#[derive(Debug, Clone, PartialEq)]
pub struct ArtifactHeader {
    pub version: String,
    pub job: String,
    pub config: serde_json::Value,
}

impl ArtifactHeader {
    pub fn new(job: &str, config: serde_json::Value) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            job: job.to_string(),
            config,
        }
    }

    fn write(&self, out: &mut String) {
        out.push_str(&format!("# rismod {}\n", self.version));
        out.push_str(&format!("# job: {}\n", self.job));
        out.push_str(&format!("# config: {}\n", self.config));
    }

    fn parse(text: &str) -> Result<Self> {
        let mut version = None;
        let mut job = None;
        let mut config = None;
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            let body = line[1..].trim_start();
            if let Some(v) = body.strip_prefix("rismod ") {
                version = Some(v.trim().to_string());
            } else if let Some(j) = body.strip_prefix("job:") {
                job = Some(j.trim().to_string());
            } else if let Some(c) = body.strip_prefix("config:") {
                config = Some(
                    serde_json::from_str(c.trim())
                        .map_err(|e| Error::Schema(format!("header config is not JSON: {e}")))?,
                );
            }
        }
        Ok(Self {
            version: version
                .ok_or_else(|| Error::Schema("missing '# rismod' header line".into()))?,
            job: job.ok_or_else(|| Error::Schema("missing '# job:' header line".into()))?,
            config: config
                .ok_or_else(|| Error::Schema("missing '# config:' header line".into()))?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstellationRow {
    pub label: usize,
    pub l: Option<usize>,
    pub l1: Option<usize>,
    pub l2: Option<usize>,
    pub v: Option<usize>,
    pub re: f64,
    pub im: f64,
}

impl ConstellationRow {
    fn new(label: usize, sym: &SymbolLabel, re: f64, im: f64) -> Self {
        let (l, l1, l2, v) = match *sym {
            SymbolLabel::Psk { m } => (None, None, None, Some(m)),
            SymbolLabel::Apsk { layer, phase } => (Some(layer), None, None, Some(phase)),
            SymbolLabel::Qapsk {
                layer_i,
                layer_q,
                phase,
            } => (None, Some(layer_i), Some(layer_q), Some(phase)),
        };
        Self {
            label,
            l,
            l1,
            l2,
            v,
            re,
            im,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    SepSim,
    SepTheory,
    CapacitySim,
    CapacityUb,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::SepSim => "sep_sim",
            Metric::SepTheory => "sep_theory",
            Metric::CapacitySim => "capacity_sim",
            Metric::CapacityUb => "capacity_ub",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Metric::SepSim,
            Metric::SepTheory,
            Metric::CapacitySim,
            Metric::CapacityUb,
        ]
        .into_iter()
        .find(|m| m.name() == s)
        .ok_or_else(|| Error::Schema(format!("column 'metric': unknown metric '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub snr_db: f64,
    pub metric: Metric,
    pub value: f64,
    pub stderr: Option<f64>,
    pub trials: Option<u64>,
    pub channels: Option<usize>,
}

pub fn constellation_rows(c: &ConstellationSet) -> Vec<ConstellationRow> {
    c.points
        .iter()
        .zip(&c.labels)
        .enumerate()
        .map(|(k, (z, sym))| ConstellationRow::new(k, sym, z.re, z.im))
        .collect()
}

/// Flattens a sweep to rows, grid point by grid point, metrics in a fixed order.
pub fn sweep_rows(result: &SweepResult) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for p in &result.points {
        let theory = |metric, value| SweepRow {
            snr_db: p.snr_db,
            metric,
            value,
            stderr: None,
            trials: None,
            channels: None,
        };
        if let Some(e) = p.sep_sim {
            rows.push(SweepRow {
                snr_db: p.snr_db,
                metric: Metric::SepSim,
                value: e.value,
                stderr: Some(e.stderr),
                trials: Some(e.trials),
                channels: Some(e.channels),
            });
        }
        if let Some(v) = p.sep_theory {
            rows.push(theory(Metric::SepTheory, v));
        }
        if let Some(e) = p.capacity_sim {
            rows.push(SweepRow {
                snr_db: p.snr_db,
                metric: Metric::CapacitySim,
                value: e.value,
                stderr: Some(e.stderr),
                trials: Some(e.trials),
                channels: Some(e.channels),
            });
        }
        if let Some(v) = p.capacity_ub {
            rows.push(theory(Metric::CapacityUb, v));
        }
    }
    rows
}

fn write_csv<T: Serialize>(header: &ArtifactHeader, rows: &[T]) -> Result<String> {
    let mut out = String::new();
    header.write(&mut out);
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    out.push_str(std::str::from_utf8(&body).map_err(|e| Error::Io(e.to_string()))?);
    Ok(out)
}

pub fn write_constellation_csv(
    header: &ArtifactHeader,
    rows: &[ConstellationRow],
) -> Result<String> {
    write_csv(header, rows)
}

pub fn write_sweep_csv(header: &ArtifactHeader, rows: &[SweepRow]) -> Result<String> {
    write_csv(header, rows)
}

fn read_csv<T: for<'de> Deserialize<'de>>(
    text: &str,
    columns: &[&str],
) -> Result<(ArtifactHeader, Vec<T>)> {
    let header = ArtifactHeader::parse(text)?;
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let names: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    for (i, want) in columns.iter().enumerate() {
        match names.get(i) {
            Some(got) if got == want => {}
            Some(got) => {
                return Err(Error::Schema(format!(
                    "column {} must be '{want}', found '{got}'",
                    i + 1
                )))
            }
            None => return Err(Error::Schema(format!("missing column '{want}'"))),
        }
    }
    if let Some(extra) = names.get(columns.len()) {
        return Err(Error::Schema(format!("unexpected column '{extra}'")));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.deserialize().enumerate() {
        let row: T = rec.map_err(|e| {
            let col = match e.kind() {
                csv::ErrorKind::Deserialize { err, .. } => err
                    .field()
                    .and_then(|f| columns.get(f as usize))
                    .copied()
                    .unwrap_or("?"),
                _ => "?",
            };
            Error::Schema(format!("column '{col}' in data row {}: {e}", i + 1))
        })?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Schema("no data rows".into()));
    }
    Ok((header, rows))
}

pub fn read_constellation_csv(text: &str) -> Result<(ArtifactHeader, Vec<ConstellationRow>)> {
    read_csv(text, &CONSTELLATION_COLUMNS)
}

pub fn read_sweep_csv(text: &str) -> Result<(ArtifactHeader, Vec<SweepRow>)> {
    read_csv(text, &SWEEP_COLUMNS)
}

/// The CSV without its `#` lines.
pub fn csv_body(text: &str) -> &str {
    let mut rest = text;
    while rest.starts_with('#') {
        rest = rest.split_once('\n').map_or("", |(_, r)| r);
    }
    rest
}
