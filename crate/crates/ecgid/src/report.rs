//! Report files. CSV is canonical and re-readable with [`read_report`];
//! Markdown mirrors the published table layout.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use ecgid_core::experiments::{Cell, ExperimentReport, Scheme};
use ecgid_core::stats::CorrelationResult;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::record::write_file;

pub const NOT_IMPLEMENTED: &str = "not implemented";
pub const SKIPPED: &str = "skipped";

/// One parsed report cell.
#[derive(Debug, Clone, PartialEq)]
pub enum TableCell {
    Value(f64),
    NotImplemented,
    Skipped,
    Empty,
}

impl TableCell {
    fn render(&self) -> String {
        match self {
            TableCell::Value(v) => v.to_string(),
            TableCell::NotImplemented => NOT_IMPLEMENTED.into(),
            TableCell::Skipped => SKIPPED.into(),
            TableCell::Empty => String::new(),
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s.trim() {
            "" => TableCell::Empty,
            NOT_IMPLEMENTED => TableCell::NotImplemented,
            SKIPPED => TableCell::Skipped,
            v => TableCell::Value(v.parse().ok()?),
        })
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            TableCell::Value(v) => Some(*v),
            _ => None,
        }
    }
}

/// A report grid as stored: method rows, condition and summary columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    /// Column names after `method`.
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<TableCell>)>,
}

impl ReportTable {
    pub fn from_report(report: &ExperimentReport) -> Self {
        let columns = report
            .conditions
            .iter()
            .cloned()
            .chain(report.summary_columns().iter().map(|s| s.to_string()))
            .collect();
        let rows = report
            .rows
            .iter()
            .map(|row| {
                let cells = row.cells.iter().map(|c| match c {
                    Cell::Accuracy(a) => TableCell::Value(*a),
                    Cell::NotImplemented => TableCell::NotImplemented,
                    Cell::Skipped(_) => TableCell::Skipped,
                });
                let summary = report
                    .summary(row)
                    .into_iter()
                    .map(|s| s.map_or(TableCell::Empty, TableCell::Value));
                (row.method.clone(), cells.chain(summary).collect())
            })
            .collect();
        ReportTable { columns, rows }
    }

    pub fn value(&self, method: &str, column: &str) -> Option<f64> {
        let c = self.columns.iter().position(|x| x == column)?;
        self.rows
            .iter()
            .find(|(m, _)| m == method)?
            .1
            .get(c)?
            .value()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header = std::iter::once("method".to_string()).chain(self.columns.iter().cloned());
        // writing to a Vec cannot fail
        w.write_record(header).expect("in-memory csv");
        for (m, cells) in &self.rows {
            w.write_record(std::iter::once(m.clone()).chain(cells.iter().map(TableCell::render)))
                .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
    }

    /// Percentages rounded to whole points, as in the published tables.
    pub fn to_markdown(&self, title: &str) -> String {
        let mut s = String::new();
        if !title.is_empty() {
            let _ = writeln!(s, "## {title}\n");
        }
        let _ = writeln!(s, "| Method | {} |", self.columns.join(" | "));
        let _ = writeln!(s, "|---|{}", "---:|".repeat(self.columns.len()));
        for (m, cells) in &self.rows {
            let cells: Vec<String> = cells
                .iter()
                .map(|c| match c {
                    TableCell::Value(v) => format!("{:.0}", v * 100.0),
                    TableCell::NotImplemented => "n/i".into(),
                    TableCell::Skipped => "skip".into(),
                    TableCell::Empty => String::new(),
                })
                .collect();
            let _ = writeln!(s, "| {m} | {} |", cells.join(" | "));
        }
        s
    }
}

pub fn write_report(path: &Path, report: &ExperimentReport) -> Result<()> {
    write_file(path, ReportTable::from_report(report).to_csv().as_bytes())
}

pub fn read_report(path: &Path) -> Result<ReportTable> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let header = r.headers().map_err(|e| Error::csv(path, e))?.clone();
    if header.get(0) != Some("method") {
        return Err(Error::csv(path, "first column must be 'method'"));
    }
    let columns = header.iter().skip(1).map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let cells = rec
            .iter()
            .skip(1)
            .map(|c| {
                TableCell::parse(c)
                    .ok_or_else(|| Error::csv(path, format!("line {}: bad cell '{c}'", i + 2)))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((rec[0].to_string(), cells));
    }
    Ok(ReportTable { columns, rows })
}

pub fn correlations_markdown(report: &ExperimentReport) -> String {
    let mut s = String::new();
    if report.correlations.is_empty() {
        return s;
    }
    let _ = writeln!(s, "\n| x | y | Spearman | p | Kendall tau-b | p | n |");
    let _ = writeln!(s, "|---|---|---:|---:|---:|---:|---:|");
    let f = |c: &Option<CorrelationResult>| match c {
        Some(c) => (
            format!("{:.3}", c.coefficient),
            format!("{:.4}", c.p_value),
            c.n.to_string(),
        ),
        None => (String::new(), String::new(), String::new()),
    };
    for c in &report.correlations {
        let (rs, ps, n1) = f(&c.spearman);
        let (rk, pk, n2) = f(&c.kendall);
        let n = if n1.is_empty() { n2 } else { n1 };
        let _ = writeln!(s, "| {} | {} | {rs} | {ps} | {rk} | {pk} | {n} |", c.x, c.y);
    }
    s
}

pub fn write_markdown(path: &Path, report: &ExperimentReport) -> Result<()> {
    let mut s = ReportTable::from_report(report).to_markdown(report.scheme.name());
    s.push_str(&correlations_markdown(report));
    write_file(path, s.as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct SeriesPoint {
    pub method: String,
    pub slot_hours: f64,
    /// Empty for skipped slots.
    pub accuracy: Option<f64>,
}

/// Tidy `(method, slot_hours, accuracy)` rows of a Holter report.
pub fn series(report: &ExperimentReport) -> Vec<SeriesPoint> {
    let hours: Vec<f64> = (0..report.conditions.len())
        .map(ecgid_core::experiments::slot_hours)
        .collect();
    report
        .rows
        .iter()
        .filter(|r| r.kind.is_some())
        .flat_map(|r| {
            r.cells.iter().zip(&hours).map(|(c, h)| SeriesPoint {
                method: r.method.clone(),
                slot_hours: *h,
                accuracy: c.accuracy(),
            })
        })
        .collect()
}

pub fn write_series(path: &Path, report: &ExperimentReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let points = series(report);
    if points.is_empty() {
        w.write_record(["method", "slot_hours", "accuracy"])
            .map_err(|e| Error::csv(path, e))?;
    }
    for p in points {
        w.serialize(p).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_series(path: &Path) -> Result<Vec<SeriesPoint>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    r.deserialize()
        .map(|p| p.map_err(|e| Error::csv(path, e)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct CorrelationRow {
    pub x: String,
    pub y: String,
    pub method: String,
    pub coefficient: Option<f64>,
    pub p_value: Option<f64>,
    pub n: Option<usize>,
    pub note: Option<String>,
}

pub fn correlation_rows(report: &ExperimentReport) -> Vec<CorrelationRow> {
    let mut out = Vec::new();
    for c in &report.correlations {
        for (name, r) in [("spearman", &c.spearman), ("kendall_tau_b", &c.kendall)] {
            out.push(CorrelationRow {
                x: c.x.clone(),
                y: c.y.clone(),
                method: name.into(),
                coefficient: r.map(|r| r.coefficient),
                p_value: r.map(|r| r.p_value),
                n: r.map(|r| r.n),
                note: c.note.clone(),
            });
        }
    }
    out
}

pub fn write_correlations(path: &Path, report: &ExperimentReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let rows = correlation_rows(report);
    if rows.is_empty() {
        w.write_record(["x", "y", "method", "coefficient", "p_value", "n", "note"])
            .map_err(|e| Error::csv(path, e))?;
    }
    for r in rows {
        w.serialize(r).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_correlations(path: &Path) -> Result<Vec<CorrelationRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    r.deserialize()
        .map(|p| p.map_err(|e| Error::csv(path, e)))
        .collect()
}

#[derive(Serialize)]
struct SkippedCell<'a> {
    method: &'a str,
    condition: &'a str,
    reason: &'a str,
}

/// Everything that may differ between identical runs (timestamp, argv)
/// goes here rather than into the CSV files.
pub fn write_meta(path: &Path, report: &ExperimentReport, argv: &[String]) -> Result<()> {
    let skipped: Vec<SkippedCell> = report
        .rows
        .iter()
        .flat_map(|r| {
            r.cells
                .iter()
                .zip(&report.conditions)
                .filter_map(move |(c, cond)| match c {
                    Cell::Skipped(reason) => Some(SkippedCell {
                        method: &r.method,
                        condition: cond,
                        reason,
                    }),
                    _ => None,
                })
        })
        .collect();
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = serde_json::json!({
        "tool": "ecgid",
        "version": env!("CARGO_PKG_VERSION"),
        "created_unix": timestamp,
        "argv": argv,
        "scheme": report.scheme.name(),
        "conditions": report.conditions,
        "metadata": report.metadata,
        "skipped": skipped,
    });
    let text = serde_json::to_string_pretty(&meta).map_err(|e| Error::bad_file(path, e))?;
    write_file(path, text.as_bytes())
}

/// Writes `<scheme>.csv`, `<scheme>_correlations.csv`, the Holter series
/// when relevant, optionally `<scheme>.md`, and `<scheme>.meta.json`.
pub fn write_all(
    dir: &Path,
    report: &ExperimentReport,
    markdown: bool,
    argv: &[String],
) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = report.scheme.name();
    let mut written = vec![dir.join(format!("{name}.csv"))];
    write_report(&written[0], report)?;
    let corr = dir.join(format!("{name}_correlations.csv"));
    write_correlations(&corr, report)?;
    written.push(corr);
    if report.scheme == Scheme::HolterDrift {
        let s = dir.join(format!("{name}_series.csv"));
        write_series(&s, report)?;
        written.push(s);
    }
    if markdown {
        let md = dir.join(format!("{name}.md"));
        write_markdown(&md, report)?;
        written.push(md);
    }
    let meta = dir.join(format!("{name}.meta.json"));
    write_meta(&meta, report, argv)?;
    written.push(meta);
    Ok(written)
}
