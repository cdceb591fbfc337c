use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const TOOL: &str = "hypermet";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub relative: f64,
    pub absolute: f64,
    pub grid: f64,
}

/// Tabular data behind a report, exported as CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scatter {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub config: Value,
    pub tolerances: Tolerances,
    pub generated_at: String,
    pub passed: bool,
    pub result: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scatter: Option<Scatter>,
}

#[derive(Serialize)]
pub struct ExperimentConfig<'a, A: Serialize> {
    pub command: &'a str,
    pub seed: u64,
    pub tolerance: f64,
    pub args: &'a A,
    /// SHA-256 of each input file.
    pub inputs: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Report {
    pub fn new<A: Serialize>(
        config: &ExperimentConfig<'_, A>,
        tolerances: Tolerances,
        passed: bool,
        result: Value,
        scatter: Option<Scatter>,
    ) -> Result<Self> {
        let config = serde_json::to_value(config)?;
        let config_hash = sha256_hex(serde_json::to_string(&config)?.as_bytes());
        Ok(Self {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: config["command"].as_str().unwrap_or_default().into(),
            config_hash,
            config,
            tolerances,
            generated_at: humantime::format_rfc3339_seconds(std::time::SystemTime::now()).to_string(),
            passed,
            result,
            scatter,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing report {}", path.display()))
    }
}

/// Writes the report scatter as CSV with a header row.
pub fn export_scatter(report: &Report, out: impl Write) -> Result<()> {
    let Some(scatter) = &report.scatter else {
        bail!("report for `{}` has no scatter data", report.command);
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&scatter.columns)?;
    for row in &scatter.rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a scatter written by [`export_scatter`].
pub fn import_scatter(input: impl Read) -> Result<Scatter> {
    let mut r = csv::Reader::from_reader(input);
    let columns = r.headers()?.iter().map(str::to_string).collect();
    let rows = r
        .deserialize::<Vec<f64>>()
        .collect::<std::result::Result<Vec<_>, _>>()
        .context("scatter rows must be numeric")?;
    Ok(Scatter { columns, rows })
}
