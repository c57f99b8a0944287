//! Report rows, the CSV table and the JSON summary.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::harness::config::{ExperimentConfig, Suite};
use crate::synth::GENERATOR;

/// Version of the JSON summary layout.
pub const SCHEMA_VERSION: u32 = 1;
/// CSV header, in column order.
pub const CSV_HEADER: [&str; 11] = ["suite", "cell", "grid", "k", "p", "m", "s", "metric", "value", "threshold", "pass"];

/// How a row's value is judged against its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    AtMost,
    AtLeast,
    /// Reported without a pass criterion.
    Info,
}

/// One check of a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub suite: Suite,
    pub cell: String,
    pub grid: usize,
    pub k: usize,
    pub p: f64,
    pub m: Option<usize>,
    pub s: Option<f64>,
    pub metric: String,
    pub value: f64,
    pub threshold: Option<f64>,
    pub comparison: Comparison,
    pub pass: bool,
}

impl Row {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        suite: Suite,
        cell: impl Into<String>,
        grid: usize,
        k: usize,
        p: f64,
        metric: &str,
        value: f64,
        threshold: f64,
        comparison: Comparison,
    ) -> Row {
        let pass = match comparison {
            Comparison::AtMost => value <= threshold,
            Comparison::AtLeast => value >= threshold,
            Comparison::Info => true,
        };
        Row {
            suite,
            cell: cell.into(),
            grid,
            k,
            p,
            m: None,
            s: None,
            metric: metric.into(),
            value,
            threshold: (comparison != Comparison::Info).then_some(threshold),
            comparison,
            pass,
        }
    }

    pub fn with_m(mut self, m: usize) -> Row {
        self.m = Some(m);
        self
    }

    pub fn with_s(mut self, s: f64) -> Row {
        self.s = Some(s);
        self
    }

    /// A failed row recording an error in place of a measurement.
    pub fn error(suite: Suite, cell: impl Into<String>, grid: usize, k: usize, p: f64, metric: &str) -> Row {
        Row {
            suite,
            cell: cell.into(),
            grid,
            k,
            p,
            m: None,
            s: None,
            metric: metric.into(),
            value: f64::NAN,
            threshold: None,
            comparison: Comparison::AtMost,
            pass: false,
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn csv_record(row: &Row) -> [String; 11] {
    [
        row.suite.name().to_string(),
        row.cell.clone(),
        row.grid.to_string(),
        row.k.to_string(),
        num(row.p),
        row.m.map(|m| m.to_string()).unwrap_or_default(),
        row.s.map(num).unwrap_or_default(),
        row.metric.clone(),
        num(row.value),
        row.threshold.map(num).unwrap_or_default(),
        row.pass.to_string(),
    ]
}

/// The CSV table of `rows`, header first.
pub fn csv_bytes(rows: &[Row]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| LabError::Config(format!("CSV encoding failed: {e}"));
    w.write_record(CSV_HEADER).map_err(io)?;
    for row in rows {
        w.write_record(csv_record(row)).map_err(io)?;
    }
    w.into_inner().map_err(|e| LabError::Config(format!("CSV encoding failed: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub informational: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub crate_version: String,
    pub generator: String,
}

/// Contents of the JSON summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub suite: Suite,
    pub counts: Counts,
    pub all_passed: bool,
    pub config: ExperimentConfig,
    pub versions: Versions,
    /// Suite-specific aggregates.
    pub details: serde_json::Value,
}

impl Summary {
    pub fn new(config: &ExperimentConfig, rows: &[Row], details: serde_json::Value) -> Summary {
        let informational = rows.iter().filter(|r| r.comparison == Comparison::Info).count();
        let failed = rows.iter().filter(|r| !r.pass).count();
        Summary {
            schema_version: SCHEMA_VERSION,
            suite: config.suite,
            counts: Counts { total: rows.len(), passed: rows.len() - failed, failed, informational },
            all_passed: failed == 0,
            config: config.clone(),
            versions: Versions { crate_version: env!("CARGO_PKG_VERSION").into(), generator: GENERATOR.into() },
            details,
        }
    }
}

/// Paths written by [`emit_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub plot: Option<PathBuf>,
}

const PLOT_SCRIPT: &str = r#"import csv
import sys
from collections import defaultdict

path = sys.argv[1] if len(sys.argv) > 1 else "SUITE.csv"
series = defaultdict(list)
with open(path, newline="") as fh:
    for row in csv.DictReader(fh):
        series[row["metric"]].append(float(row["value"]))
try:
    import matplotlib.pyplot as plt
except ImportError:
    for metric, values in sorted(series.items()):
        print(metric, min(values), max(values), len(values))
    sys.exit(0)
fig, axes = plt.subplots(len(series), 1, figsize=(6, 2.5 * len(series)), squeeze=False)
for ax, (metric, values) in zip(axes[:, 0], sorted(series.items())):
    ax.plot(values, "o")
    ax.set_title(metric)
fig.tight_layout()
fig.savefig(path.replace(".csv", ".png"))
"#;

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let io = |e: std::io::Error| LabError::Config(format!("cannot write {}: {e}", path.display()));
    let mut f = std::fs::File::create(&tmp).map_err(io)?;
    f.write_all(bytes).map_err(io)?;
    f.sync_all().map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

/// Writes `<suite>.csv`, `<suite>.json` and optionally `<suite>_plot.py` into `dir`.
pub fn emit_report(dir: &Path, summary: &Summary, rows: &[Row], plot: bool) -> Result<ReportFiles> {
    std::fs::create_dir_all(dir).map_err(|e| LabError::Config(format!("cannot create {}: {e}", dir.display())))?;
    let name = summary.suite.name();
    let csv = dir.join(format!("{name}.csv"));
    let json = dir.join(format!("{name}.json"));
    let mut json_text = serde_json::to_string_pretty(summary).map_err(|e| LabError::Config(e.to_string()))?;
    json_text.push('\n');
    write_atomic(&csv, &csv_bytes(rows)?)?;
    write_atomic(&json, json_text.as_bytes())?;
    let plot = if plot {
        let path = dir.join(format!("{name}_plot.py"));
        write_atomic(&path, PLOT_SCRIPT.replace("SUITE", name).as_bytes())?;
        Some(path)
    } else {
        None
    };
    Ok(ReportFiles { csv, json, plot })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_results_give_header_only() {
        let bytes = csv_bytes(&[]).unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "suite,cell,grid,k,p,m,s,metric,value,threshold,pass\n");
    }

    #[test]
    fn rows_render_with_optional_columns() {
        let row = Row::new(Suite::Norm, "a", 64, 2, 4.0, "gradient-relative-error", 1.5e-9, 1e-5, Comparison::AtMost)
            .with_m(1);
        let text = String::from_utf8(csv_bytes(&[row]).unwrap()).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "norm,a,64,2,4e0,1,,gradient-relative-error,1.5e-9,1e-5,true");
        let info = Row::new(Suite::Norm, "b", 64, 2, 4.0, "x", 3.0, 1.0, Comparison::Info);
        assert!(info.pass && info.threshold.is_none());
    }

    #[test]
    fn writes_report_files() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::for_suite(Suite::Norm);
        let summary = Summary::new(&cfg, &[], serde_json::Value::Null);
        let files = emit_report(dir.path(), &summary, &[], true).unwrap();
        assert!(files.csv.exists() && files.json.exists() && files.plot.unwrap().exists());
        let back: Summary = serde_json::from_str(&std::fs::read_to_string(files.json).unwrap()).unwrap();
        assert_eq!(back.schema_version, SCHEMA_VERSION);
        assert_eq!(back.versions.generator, GENERATOR);
    }
}
