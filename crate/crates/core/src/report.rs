//! CSV, JSON and Markdown renderings of a run.
//!
//! * CSV columns are exactly
//!   `test_id,source_id,op,params,sim,ssim,expected,actual,verdict`, with SSIM
//!   at full precision.
//! * Markdown is a pipe table (modification, SSIM to two decimals, result)
//!   followed by a one-line summary.
//! * JSON is `{"rows": [...], "summary": {...}}`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::runner::{ReportRow, RunSummary};

pub const CSV_HEADER: [&str; 9] = [
    "test_id", "source_id", "op", "params", "sim", "ssim", "expected", "actual", "verdict",
];

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("nothing to report: the run has no rows")]
    Empty,
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
    Md,
}

impl ReportFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        path.extension()?.to_str()?.parse().ok()
    }
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "md" | "markdown" => Ok(ReportFormat::Md),
            other => Err(format!("unknown report format {other:?} (csv, json, md)")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReportOptions {
    /// Clamp displayed SSIM values to `[0, 1]` in the Markdown table.
    pub clamp01: bool,
}

pub fn export_report(
    rows: &[ReportRow],
    summary: &RunSummary,
    format: ReportFormat,
    path: impl AsRef<Path>,
    opts: ReportOptions,
) -> Result<(), ReportError> {
    if rows.is_empty() {
        return Err(ReportError::Empty);
    }
    let path = path.as_ref();
    let text = render(rows, summary, format, opts);
    let io = |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io)?;
    }
    fs::write(path, text).map_err(io)
}

pub fn render(rows: &[ReportRow], summary: &RunSummary, format: ReportFormat, opts: ReportOptions) -> String {
    match format {
        ReportFormat::Csv => to_csv(rows),
        ReportFormat::Json => to_json(rows, summary),
        ReportFormat::Md => to_markdown(rows, summary, opts),
    }
}

pub fn to_csv(rows: &[ReportRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in rows {
        let record = [
            r.test_id.clone(),
            r.source_id.clone().unwrap_or_else(|| "-".into()),
            r.op.clone().unwrap_or_else(|| "-".into()),
            r.params.clone().unwrap_or_default(),
            r.sim.map(|s| s.to_string()).unwrap_or_default(),
            r.ssim.map(|s| s.to_string()).unwrap_or_default(),
            r.expected.clone(),
            r.actual.clone(),
            r.verdict.to_string(),
        ];
        w.write_record(&record).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

#[derive(Serialize)]
struct JsonReport<'a> {
    rows: &'a [ReportRow],
    summary: &'a RunSummary,
}

#[derive(Deserialize)]
struct JsonReportOwned {
    rows: Vec<ReportRow>,
    summary: RunSummary,
}

pub fn to_json(rows: &[ReportRow], summary: &RunSummary) -> String {
    let mut text =
        serde_json::to_string_pretty(&JsonReport { rows, summary }).expect("report serializes");
    text.push('\n');
    text
}

/// Parses a JSON report back into rows and summary (wall time is not
/// stored and comes back as zero).
pub fn from_json(text: &str) -> serde_json::Result<(Vec<ReportRow>, RunSummary)> {
    let r: JsonReportOwned = serde_json::from_str(text)?;
    Ok((r.rows, r.summary))
}

pub fn to_markdown(rows: &[ReportRow], summary: &RunSummary, opts: ReportOptions) -> String {
    let with_mse = rows.iter().any(|r| r.mse.is_some());
    let mut out = String::new();
    out.push_str("| test | source | modification | SSIM |");
    if with_mse {
        out.push_str(" MSE |");
    }
    out.push_str(" result | verdict |\n|---|---|---|---:|");
    if with_mse {
        out.push_str("---:|");
    }
    out.push_str("---|---|\n");

    for r in rows {
        let modification = match (&r.op, &r.params) {
            (Some(op), Some(p)) if p == "{}" => op.clone(),
            (Some(op), Some(p)) => format!("{op} {p}"),
            (Some(op), None) => op.clone(),
            _ => "original".into(),
        };
        let marker = if r.geometric { " †" } else { "" };
        let ssim = r.ssim.map_or_else(
            || "-".into(),
            |s| format!("{:.2}", if opts.clamp01 { s.clamp(0.0, 1.0) } else { s }),
        );
        let _ = write!(
            out,
            "| {} | {} | {}{} | {} |",
            cell(&r.test_id),
            cell(r.source_id.as_deref().unwrap_or("-")),
            cell(&modification),
            marker,
            ssim
        );
        if with_mse {
            let _ = write!(out, " {} |", r.mse.map_or_else(|| "-".into(), |m| format!("{m:.2}")));
        }
        let _ = writeln!(out, " {} | {} |", cell(&r.actual), r.verdict);
    }
    let _ = writeln!(
        out,
        "\n{} passed, {} failed, {} total.",
        summary.passed, summary.failed, summary.total
    );
    if rows.iter().any(|r| r.geometric) {
        out.push_str("\n† geometric modification; the expected output was kept from the source image.\n");
    }
    out
}

fn cell(s: &str) -> String {
    s.replace('|', "\\|").replace('\n', " ")
}
