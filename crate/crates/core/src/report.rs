//! CSV rows and aligned-text rendering for simulation, analysis and
//! published-value comparison results.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analysis::AnalyticSummary;
use crate::error::{Error, Result};
use crate::model::{Algorithm, Hypothesis, ScenarioConfig};
use crate::sim::MonteCarloSummary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Simulation,
    Analysis,
}

/// One result line. `gamma` holds the local knob (γ, or c for GLR nodes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario_id: String,
    pub algorithm: Algorithm,
    pub gamma: f64,
    pub beta: f64,
    pub trials: u64,
    pub edd_mean: f64,
    pub edd_stderr: Option<f64>,
    pub pfa_hat: f64,
    pub pfa_lo: Option<f64>,
    pub pfa_hi: Option<f64>,
    pub truncated: u64,
    pub seed: Option<u64>,
    pub hypothesis: Hypothesis,
    pub source: Source,
}

impl ResultRow {
    pub fn from_simulation(cfg: &ScenarioConfig, s: &MonteCarloSummary, seed: u64) -> Self {
        Self {
            scenario_id: cfg.id.clone(),
            algorithm: cfg.algorithm,
            gamma: cfg.local_parameter(),
            beta: cfg.fusion_threshold,
            trials: s.trials,
            edd_mean: s.edd_mean,
            edd_stderr: Some(s.edd_stderr),
            pfa_hat: s.pfa_hat,
            pfa_lo: Some(s.pfa_ci95.0),
            pfa_hi: Some(s.pfa_ci95.1),
            truncated: s.truncated_count,
            seed: Some(seed),
            hypothesis: s.truth,
            source: Source::Simulation,
        }
    }

    pub fn from_analysis(cfg: &ScenarioConfig, a: &AnalyticSummary) -> Self {
        Self {
            scenario_id: cfg.id.clone(),
            algorithm: cfg.algorithm,
            gamma: cfg.local_parameter(),
            beta: cfg.fusion_threshold,
            trials: 0,
            edd_mean: a.edd,
            edd_stderr: None,
            pfa_hat: a.pfa,
            pfa_lo: None,
            pfa_hi: None,
            truncated: 0,
            seed: None,
            hypothesis: cfg.true_hypothesis,
            source: Source::Analysis,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Pfa,
    Edd,
}

/// How a reproduced cell is judged against its published value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tolerance {
    /// |ours − published| ≤ tol·published.
    Relative(f64),
    /// Ours inside `[lo, hi]`, e.g. the published estimate's Wilson-95%
    /// interval at its trial count.
    Interval { lo: f64, hi: f64 },
    /// Our interval `[lo, hi]` covers the published value (a calibration
    /// target, say).
    Covers { lo: f64, hi: f64 },
    /// Shown for reference; never fails.
    Informational,
}

impl Tolerance {
    pub fn accepts(&self, published: f64, ours: f64) -> bool {
        match *self {
            Tolerance::Relative(tol) => (ours - published).abs() <= tol * published.abs(),
            Tolerance::Interval { lo, hi } => (lo..=hi).contains(&ours),
            Tolerance::Covers { lo, hi } => (lo..=hi).contains(&published),
            Tolerance::Informational => true,
        }
    }

    fn describe(&self) -> String {
        match *self {
            Tolerance::Relative(tol) => format!("±{}%", (tol * 1000.0).round() / 10.0),
            Tolerance::Interval { lo, hi } => format!("in [{lo:.6}, {hi:.6}]"),
            Tolerance::Covers { lo, hi } => format!("ci [{lo:.6}, {hi:.6}]"),
            Tolerance::Informational => "info".into(),
        }
    }
}

/// One reproduced table cell against its published value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonCell {
    pub table: u8,
    pub algorithm: Algorithm,
    pub hypothesis: Hypothesis,
    /// Column key: target P_FA, or the row's β for Table IV.
    pub column: f64,
    pub source: Source,
    pub metric: Metric,
    pub published: f64,
    pub ours: f64,
    pub rel_err: f64,
    pub tolerance: String,
    pub pass: bool,
}

impl ComparisonCell {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        table: u8,
        algorithm: Algorithm,
        hypothesis: Hypothesis,
        column: f64,
        source: Source,
        metric: Metric,
        published: f64,
        ours: f64,
        tolerance: Tolerance,
    ) -> Self {
        Self {
            table,
            algorithm,
            hypothesis,
            column,
            source,
            metric,
            published,
            ours,
            rel_err: (ours - published) / published,
            tolerance: tolerance.describe(),
            pass: tolerance.accepts(published, ours),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Record {
    Result(ResultRow),
    Comparison(ComparisonCell),
}

impl From<ResultRow> for Record {
    fn from(r: ResultRow) -> Self {
        Record::Result(r)
    }
}

impl From<ComparisonCell> for Record {
    fn from(c: ComparisonCell) -> Self {
        Record::Comparison(c)
    }
}

fn sort_results(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        a.scenario_id
            .cmp(&b.scenario_id)
            .then(a.algorithm.cmp(&b.algorithm))
            .then(a.hypothesis.cmp(&b.hypothesis))
            .then(a.source.cmp(&b.source))
            .then(a.gamma.total_cmp(&b.gamma))
            .then(a.beta.total_cmp(&b.beta))
    });
}

fn sort_cells(cells: &mut [ComparisonCell]) {
    cells.sort_by(|a, b| {
        a.table
            .cmp(&b.table)
            .then(a.algorithm.cmp(&b.algorithm))
            .then(a.hypothesis.cmp(&b.hypothesis))
            .then(a.column.total_cmp(&b.column))
            .then(a.source.cmp(&b.source))
            .then(a.metric.cmp(&b.metric))
    });
}

fn opt(v: Option<f64>, prec: usize) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.prec$}"))
}

fn align(header: &[&str], body: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in body {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: Vec<String>| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&width)
            .map(|(c, &w)| format!("{c:>w$}"))
            .collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(header.iter().map(|s| s.to_string()).collect());
    for row in body {
        line(row.clone());
    }
    out
}

fn render_results(rows: &[ResultRow]) -> String {
    let header = [
        "scenario", "algorithm", "H", "source", "gamma", "beta", "trials", "E_DD", "se",
        "P_FA", "lo", "hi", "trunc",
    ];
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.scenario_id.clone(),
                r.algorithm.to_string(),
                r.hypothesis.to_string(),
                format!("{:?}", r.source).to_lowercase(),
                format!("{:.4}", r.gamma),
                format!("{:.4}", r.beta),
                r.trials.to_string(),
                format!("{:.4}", r.edd_mean),
                opt(r.edd_stderr, 4),
                format!("{:.6}", r.pfa_hat),
                opt(r.pfa_lo, 6),
                opt(r.pfa_hi, 6),
                r.truncated.to_string(),
            ]
        })
        .collect();
    align(&header, &body)
}

fn render_cells(cells: &[ComparisonCell]) -> String {
    let header = [
        "table", "algorithm", "H", "column", "source", "metric", "published", "ours", "rel_err",
        "tolerance", "pass",
    ];
    let body: Vec<Vec<String>> = cells
        .iter()
        .map(|c| {
            vec![
                c.table.to_string(),
                c.algorithm.to_string(),
                c.hypothesis.to_string(),
                format!("{}", c.column),
                format!("{:?}", c.source).to_lowercase(),
                format!("{:?}", c.metric).to_uppercase(),
                format!("{}", c.published),
                format!("{:.6}", c.ours),
                format!("{:+.2}%", 100.0 * c.rel_err),
                c.tolerance.clone(),
                if c.pass { "PASS" } else { "FAIL" }.into(),
            ]
        })
        .collect();
    align(&header, &body)
}

/// Sort, write CSV to `csv_out` and return the aligned-text rendering. All
/// records must share one schema.
pub fn emit_table<W: Write>(records: &[Record], csv_out: W) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(csv_out);
    let text = match records.first() {
        None => return Err(Error::Usage("no rows to emit".into())),
        Some(Record::Result(_)) => {
            let mut rows = records
                .iter()
                .map(|r| match r {
                    Record::Result(row) => Ok(row.clone()),
                    Record::Comparison(_) => Err(mixed()),
                })
                .collect::<Result<Vec<_>>>()?;
            sort_results(&mut rows);
            for r in &rows {
                wtr.serialize(r)?;
            }
            render_results(&rows)
        }
        Some(Record::Comparison(_)) => {
            let mut cells = records
                .iter()
                .map(|r| match r {
                    Record::Comparison(c) => Ok(c.clone()),
                    Record::Result(_) => Err(mixed()),
                })
                .collect::<Result<Vec<_>>>()?;
            sort_cells(&mut cells);
            for c in &cells {
                wtr.serialize(c)?;
            }
            render_cells(&cells)
        }
    };
    wtr.flush()?;
    Ok(text)
}

fn mixed() -> Error {
    Error::Usage("cannot emit result rows and comparison cells in one table".into())
}

/// Read result rows back from CSV produced by [`emit_table`].
pub fn read_results<R: std::io::Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    rdr.deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}
