//! Report and series files.
//!
//! `report.json` (schema `slicewatch.report.v1`):
//!
//! | key | content |
//! |---|---|
//! | `schema` | `"slicewatch.report.v1"` |
//! | `mode` | `pn-ocsvm` or `pl-cca` |
//! | `variant` | `distributed` or `baseline` |
//! | `artd` | pollution ratio applied to the training window |
//! | `num_runs`, `training_steps` | run count and unscored prefix length |
//! | `source` | `simulated` or the ingested file name |
//! | `config_hash` | sha256 of the config echo |
//! | `seeds` | base seeds; run `r` adds `r` to each |
//! | `config` | full effective configuration |
//! | `aggregate` | `{confusion, metrics}` pooled over every run and target |
//! | `mean_over_runs` | metrics averaged over runs, skipping undefined values |
//! | `runs[]` | `{run, seeds, confusion, metrics, targets[]}` |
//! | `runs[].targets[]` | `{target, alarms, confusion, metrics}` |
//!
//! Confusion matrices have keys `tp, tn, fp, fn`. Metrics have keys `accuracy, precision,
//! recall, f1, false_positive_rate`; an undefined metric is `null`. Without labels every
//! confusion and metrics entry is `null`.
//!
//! Each series is a CSV named `<name>.csv` whose first column is `step`; undefined values
//! are written as `null`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::detect::{Mode, Variant};
use super::metrics::{ConfusionMatrix, Metrics};
use crate::config::{Config, Seeds};
use crate::error::{Error, Result};

pub const REPORT_SCHEMA: &str = "slicewatch.report.v1";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetReport {
    pub target: String,
    /// Alarms raised on scored steps.
    pub alarms: u64,
    pub confusion: Option<ConfusionMatrix>,
    pub metrics: Option<Metrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub run: usize,
    pub seeds: Seeds,
    pub confusion: Option<ConfusionMatrix>,
    pub metrics: Option<Metrics>,
    pub targets: Vec<TargetReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub mode: Mode,
    pub variant: Variant,
    pub artd: f64,
    pub num_runs: usize,
    pub training_steps: usize,
    pub source: String,
    pub config_hash: String,
    pub seeds: Seeds,
    pub config: Config,
    pub aggregate: Option<Summary>,
    pub mean_over_runs: Option<Metrics>,
    pub runs: Vec<RunReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub columns: Vec<String>,
    pub steps: Vec<usize>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl Series {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (step, row) in self.steps.iter().zip(&self.values) {
            out.push_str(&step.to_string());
            for v in row {
                out.push(',');
                match v {
                    Some(x) => out.push_str(&x.to_string()),
                    None => out.push_str("null"),
                }
            }
            out.push('\n');
        }
        out
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes `report.json` and one `<name>.csv` per series into `dir`, creating it if needed.
pub fn emit_results(report: &Report, series: &[Series], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(REPORT_FILE);
    let mut json = serde_json::to_string_pretty(report).map_err(|e| Error::Json { path: path.clone(), source: e })?;
    json.push('\n');
    write(&path, json.as_bytes())?;
    for s in series {
        write(&dir.join(format!("{}.csv", s.name)), s.to_csv().as_bytes())?;
    }
    Ok(())
}

pub fn read_report(path: &Path) -> Result<Report> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json { path: path.into(), source: e })
}
