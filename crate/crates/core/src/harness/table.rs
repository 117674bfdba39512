//! Text renderings of a grid: per-cell Δλ tables and the count/interval
//! summary.
//!
//! Δλ values use 4 significant digits (`1.803e-4`), interval endpoints 2
//! (`2.8e-5`). Output is a pure function of the report.

use serde::Serialize;

use super::grid::{estimator_index, GridReport, TableFormat};
use super::HarnessError;
use crate::driver::EstimatorMode;

pub const TABLE_COLUMNS: [&str; 7] = [
    "method",
    "problem",
    "I",
    "delta_lambda_bar",
    "delta_lambda_hat",
    "delta_lambda_tilde",
    "delta_lambda_breve",
];

const INTERVAL_NAMES: [&str; 4] = ["bar", "hat", "tilde", "breve"];

/// `1.803e-4` style, 4 significant digits.
pub fn sci4(value: f64) -> String {
    format!("{value:.3e}")
}

/// `2.8e-5` style, 2 significant digits.
pub fn sci2(value: f64) -> String {
    format!("{value:.1e}")
}

#[derive(Debug, Serialize)]
struct TableRow {
    method: String,
    problem: String,
    #[serde(rename = "I")]
    i: Option<usize>,
    delta_lambda_bar: Option<String>,
    delta_lambda_hat: Option<String>,
    delta_lambda_tilde: Option<String>,
    delta_lambda_breve: Option<String>,
}

impl TableRow {
    fn cells(&self) -> [String; 7] {
        let opt = |v: &Option<String>| v.clone().unwrap_or_default();
        [
            self.method.clone(),
            self.problem.clone(),
            self.i.map(|i| i.to_string()).unwrap_or_default(),
            opt(&self.delta_lambda_bar),
            opt(&self.delta_lambda_hat),
            opt(&self.delta_lambda_tilde),
            opt(&self.delta_lambda_breve),
        ]
    }
}

fn rows(report: &GridReport) -> Vec<TableRow> {
    report
        .cells
        .iter()
        .map(|cell| {
            let d = cell.deltas().map(|v| v.map(sci4));
            let [bar, hat, tilde, breve] = d;
            TableRow {
                method: cell.method.to_string(),
                problem: cell.problem.to_string(),
                i: cell.iteration_count(),
                delta_lambda_bar: bar,
                delta_lambda_hat: hat,
                delta_lambda_tilde: tilde,
                delta_lambda_breve: breve,
            }
        })
        .collect()
}

/// One row per (method, problem) with `I` and the four Δλ.
pub fn emit_table(report: &GridReport, format: TableFormat) -> Result<String, HarnessError> {
    if report.is_empty() {
        return Err(HarnessError::Usage(
            "nothing to tabulate: empty selection".into(),
        ));
    }
    let rows = rows(report);
    match format {
        TableFormat::Csv => {
            let header = TABLE_COLUMNS.map(String::from);
            render_csv(&header, rows.iter().map(TableRow::cells))
        }
        TableFormat::Json => Ok(serde_json::to_string_pretty(&rows)? + "\n"),
        TableFormat::Markdown => {
            let header = TABLE_COLUMNS.map(String::from);
            Ok(render_markdown(&header, rows.iter().map(TableRow::cells)))
        }
    }
}

#[derive(Debug, Serialize)]
struct SummaryRow {
    method: String,
    counts: Vec<(String, Option<usize>)>,
    intervals: Vec<(String, Option<[String; 2]>)>,
}

fn summary_rows(report: &GridReport) -> Vec<SummaryRow> {
    report
        .methods
        .iter()
        .map(|&method| {
            let counts = report
                .problems
                .iter()
                .map(|&p| {
                    let i = report.cell(method, p).and_then(|c| c.iteration_count());
                    (p.to_string(), i)
                })
                .collect();
            let intervals = EstimatorMode::ALL
                .iter()
                .map(|&est| {
                    let range = report
                        .interval(method, est)
                        .map(|iv| [sci2(iv.lo), sci2(iv.hi)]);
                    (INTERVAL_NAMES[estimator_index(est)].to_string(), range)
                })
                .collect();
            SummaryRow {
                method: method.to_string(),
                counts,
                intervals,
            }
        })
        .collect()
}

/// Iteration-count matrix plus the four min/max Δλ intervals per method.
pub fn emit_summary(report: &GridReport, format: TableFormat) -> Result<String, HarnessError> {
    if report.is_empty() {
        return Err(HarnessError::Usage(
            "nothing to summarize: empty selection".into(),
        ));
    }
    let rows = summary_rows(report);
    if format == TableFormat::Json {
        return Ok(serde_json::to_string_pretty(&rows)? + "\n");
    }
    let mut header = vec!["method".to_string()];
    header.extend(report.problems.iter().map(|p| p.to_string()));
    match format {
        TableFormat::Csv => {
            for name in INTERVAL_NAMES {
                header.push(format!("{name}_lo"));
                header.push(format!("{name}_hi"));
            }
            let body = rows.iter().map(|r| {
                let mut cells = vec![r.method.clone()];
                cells.extend(
                    r.counts
                        .iter()
                        .map(|(_, i)| i.map(|i| i.to_string()).unwrap_or_default()),
                );
                for (_, range) in &r.intervals {
                    let [lo, hi] = range.clone().unwrap_or_default();
                    cells.push(lo);
                    cells.push(hi);
                }
                cells
            });
            render_csv(&header, body)
        }
        _ => {
            header.extend(INTERVAL_NAMES.iter().map(|n| format!("I({n})")));
            let body = rows.iter().map(|r| {
                let mut cells = vec![r.method.clone()];
                cells.extend(
                    r.counts
                        .iter()
                        .map(|(_, i)| i.map(|i| i.to_string()).unwrap_or_default()),
                );
                cells.extend(r.intervals.iter().map(|(_, range)| {
                    range
                        .as_ref()
                        .map(|[lo, hi]| format!("[{lo}, {hi}]"))
                        .unwrap_or_default()
                }));
                cells
            });
            Ok(render_markdown(&header, body))
        }
    }
}

fn render_csv<R, I>(header: &[String], body: I) -> Result<String, HarnessError>
where
    R: AsRef<[String]>,
    I: Iterator<Item = R>,
{
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header)?;
    for row in body {
        writer.write_record(row.as_ref())?;
    }
    let bytes = writer.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn render_markdown<R, I>(header: &[String], body: I) -> String
where
    R: AsRef<[String]>,
    I: Iterator<Item = R>,
{
    let line = |cells: &[String]| format!("| {} |\n", cells.join(" | "));
    let mut out = line(header);
    out += &line(&vec!["---".to_string(); header.len()]);
    for row in body {
        out += &line(row.as_ref());
    }
    out
}
