//! CSV and aligned-text report writers. CSV keeps full precision with
//! empty cells for undefined values; text tables round to 4 decimals and
//! print `undefined`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::{MacroValue, MetricsReport};
use crate::model::History;

pub const UNDEFINED: &str = "undefined";

pub fn fmt4(v: Option<f64>) -> String {
    v.map_or_else(|| UNDEFINED.to_string(), |x| format!("{x:.4}"))
}

pub fn full(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x}"))
}

/// Column-aligned plain-text table.
#[derive(Debug, Clone, Default)]
pub struct TextTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl TextTable {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Self {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<S: Into<String>>(&mut self, row: impl IntoIterator<Item = S>) {
        self.rows.push(row.into_iter().map(Into::into).collect());
    }

    pub fn render(&self) -> String {
        let ncol = self.headers.len();
        let mut width: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for r in &self.rows {
            for (w, c) in width.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, cells: &[String]| {
            let mut s = String::new();
            for (i, w) in width.iter().enumerate().take(ncol) {
                let c = cells.get(i).map_or("", String::as_str);
                if i > 0 {
                    s.push_str("  ");
                }
                let _ = write!(s, "{c:<w$}");
            }
            out.push_str(s.trim_end());
            out.push('\n');
        };
        line(&mut out, &self.headers);
        let rule: Vec<String> = width.iter().map(|&w| "-".repeat(w)).collect();
        line(&mut out, &rule);
        for r in &self.rows {
            line(&mut out, r);
        }
        out
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_err(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Internal(format!("{}: {other:?}", path.display())),
    }
}

/// Writes rows (first row is the header) to a CSV file.
pub fn write_csv_rows(path: &Path, rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for r in rows {
        w.write_record(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub const HISTORY_HEADER: [&str; 8] = ["stage", "epoch", "updates", "J", "J_x", "J_y", "sigma1_sq", "sigma2_sq"];

pub fn history_rows(histories: &[History]) -> Vec<Vec<String>> {
    let mut rows = vec![HISTORY_HEADER.iter().map(|s| s.to_string()).collect()];
    for h in histories {
        for e in &h.epochs {
            rows.push(vec![
                h.stage.clone(),
                e.epoch.to_string(),
                e.updates.to_string(),
                format!("{}", e.loss.total),
                full(e.loss.j_x),
                full(e.loss.j_y),
                full(e.loss.sigma1_sq),
                full(e.loss.sigma2_sq),
            ]);
        }
    }
    rows
}

pub fn write_history(path: &Path, histories: &[History]) -> Result<()> {
    write_csv_rows(path, &history_rows(histories))
}

pub const METRICS_HEADER: [&str; 10] =
    ["head", "support", "tp", "fp", "tn", "fn", "recall", "precision", "f_beta", "beta"];

pub fn metrics_rows(report: &MetricsReport) -> Vec<Vec<String>> {
    let mut rows = vec![METRICS_HEADER.iter().map(|s| s.to_string()).collect()];
    for h in &report.heads {
        let c = &h.counts;
        rows.push(vec![
            h.head.clone(),
            h.support().to_string(),
            c.tp.to_string(),
            c.fp.to_string(),
            c.tn.to_string(),
            c.fn_.to_string(),
            full(h.recall),
            full(h.precision),
            full(h.f_beta),
            full(h.beta),
        ]);
    }
    rows
}

fn macro_cell(m: &MacroValue) -> String {
    if m.skipped == 0 {
        fmt4(m.mean)
    } else {
        format!("{} ({} skipped)", fmt4(m.mean), m.skipped)
    }
}

pub fn metrics_text(report: &MetricsReport) -> String {
    let mut t = TextTable::new(METRICS_HEADER);
    for h in &report.heads {
        let c = &h.counts;
        t.push([
            h.head.clone(),
            h.support().to_string(),
            c.tp.to_string(),
            c.fp.to_string(),
            c.tn.to_string(),
            c.fn_.to_string(),
            fmt4(h.recall),
            fmt4(h.precision),
            fmt4(h.f_beta),
            fmt4(h.beta),
        ]);
    }
    let m = &report.macro_avg;
    format!(
        "{}\nmacro recall     {}\nmacro precision  {}\nmacro F_beta     {}\n",
        t.render(),
        macro_cell(&m.recall),
        macro_cell(&m.precision),
        macro_cell(&m.f_beta)
    )
}

/// `metrics.csv` and `metrics.txt` in `dir`.
pub fn write_metrics(dir: &Path, report: &MetricsReport) -> Result<()> {
    write_csv_rows(&dir.join("metrics.csv"), &metrics_rows(report))?;
    write_text(&dir.join("metrics.txt"), &metrics_text(report))
}

/// Median of the values; `None` when empty.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}
