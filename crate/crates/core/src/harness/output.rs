//! CSV and JSON emission of sweep results.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::sweep::SweepResult;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "sweep_var,value,algorithm,mean_sum_rate,se_sum_rate,mean_sum_interference,se_sum_interference,outage_rate,trials,seed";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::config(format!("unknown output format `{other}`"))),
        }
    }
}

/// Floats use the shortest representation that parses back exactly.
pub fn to_csv(result: &SweepResult) -> String {
    let mut out = String::with_capacity(64 * (result.points.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for p in &result.points {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            result.sweep_var,
            p.value,
            p.algorithm,
            p.mean_sum_rate,
            p.se_sum_rate,
            p.mean_sum_interference,
            p.se_sum_interference,
            p.outage_rate,
            p.trials,
            result.seed
        )
        .expect("writing to a String cannot fail");
    }
    out
}

pub fn to_json(result: &SweepResult) -> Result<String> {
    serde_json::to_string_pretty(result).map_err(|e| Error::Degenerate(format!("cannot encode result: {e}")))
}

pub fn from_json(text: &str) -> Result<SweepResult> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })
}

pub fn render(result: &SweepResult, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => Ok(to_csv(result)),
        OutputFormat::Json => to_json(result).map(|mut s| {
            s.push('\n');
            s
        }),
    }
}

/// Writes `result` to `path`, creating parent directories.
pub fn emit_results(result: &SweepResult, format: OutputFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = render(result, format)?;
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
