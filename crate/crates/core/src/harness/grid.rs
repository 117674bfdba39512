//! The (method, problem, mode) grid behind the benchmark tables.
//!
//! Runs are independent and go through a rayon pool. Assembly happens after
//! all runs finish, in (method, problem, mode) order, so the output does not
//! depend on scheduling.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::driver::{self, EstimatorMode, PrecisionPolicy, RunReport};
use crate::methods::{self, MethodId};
use crate::precision::{self, BigScalar};
use crate::problems::{self, ProblemId};

pub const DEFAULT_ETA: u32 = 2200;
pub const MIN_ETA: u32 = 50;

/// Mode whose run supplies a cell's reported numbers, best first. ACLOC
/// carries the most guard digits on every benchmark row, so its iterates sit
/// closest to the exact-arithmetic sequence.
pub const CANONICAL_ORDER: [EstimatorMode; 4] = [
    EstimatorMode::Acloc,
    EstimatorMode::Pcloc,
    EstimatorMode::Ecloc,
    EstimatorMode::Cloc,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    #[default]
    Csv,
    Json,
    Markdown,
}

impl TableFormat {
    pub fn extension(self) -> &'static str {
        match self {
            TableFormat::Csv => "csv",
            TableFormat::Json => "json",
            TableFormat::Markdown => "md",
        }
    }
}

impl FromStr for TableFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            "markdown" | "md" => Ok(TableFormat::Markdown),
            other => Err(HarnessError::Usage(format!(
                "unknown format {other:?} (expected csv, json or markdown)"
            ))),
        }
    }
}

impl fmt::Display for TableFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableFormat::Csv => "csv",
            TableFormat::Json => "json",
            TableFormat::Markdown => "markdown",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub methods: Vec<MethodId>,
    pub problems: Vec<ProblemId>,
    pub modes: Vec<EstimatorMode>,
    pub eta: u32,
    pub output_dir: PathBuf,
    pub format: TableFormat,
    pub parallelism: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            methods: MethodId::ALL.to_vec(),
            problems: ProblemId::ALL.to_vec(),
            modes: EstimatorMode::ALL.to_vec(),
            eta: DEFAULT_ETA,
            output_dir: PathBuf::from("grid-out"),
            format: TableFormat::Csv,
            parallelism: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

impl GridConfig {
    /// Parses a JSON config; missing fields take their defaults.
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let config: GridConfig =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        fn check<T: Copy + Eq + std::hash::Hash + fmt::Debug>(
            what: &str,
            items: &[T],
        ) -> Result<(), HarnessError> {
            if items.is_empty() {
                return Err(HarnessError::Usage(format!("empty {what} selection")));
            }
            let mut seen = HashSet::new();
            if let Some(dup) = items.iter().find(|x| !seen.insert(**x)) {
                return Err(HarnessError::Usage(format!(
                    "{what} {dup:?} selected twice"
                )));
            }
            Ok(())
        }
        check("method", &self.methods)?;
        check("problem", &self.problems)?;
        check("mode", &self.modes)?;
        if self.eta < MIN_ETA {
            return Err(HarnessError::Config(format!(
                "eta = {} is below the minimum of {MIN_ETA}",
                self.eta
            )));
        }
        if self.parallelism == 0 {
            return Err(HarnessError::Config("parallelism must be positive".into()));
        }
        Ok(())
    }
}

/// One mode's outcome inside a grid cell. Exactly one of `report` and `error`
/// is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRun {
    pub mode: EstimatorMode,
    pub report: Option<RunReport>,
    pub error: Option<String>,
}

impl ModeRun {
    pub fn succeeded(&self) -> bool {
        self.report
            .as_ref()
            .is_some_and(|r| r.stop_reason.is_success())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub method: MethodId,
    pub problem: ProblemId,
    pub runs: Vec<ModeRun>,
}

impl GridCell {
    pub fn report(&self, mode: EstimatorMode) -> Option<&RunReport> {
        self.runs
            .iter()
            .find(|r| r.mode == mode)
            .and_then(|r| r.report.as_ref())
    }

    /// The report whose numbers represent this cell, see [`CANONICAL_ORDER`].
    pub fn canonical(&self) -> Option<&RunReport> {
        let pick = |want_success: bool| {
            CANONICAL_ORDER.iter().find_map(|&mode| {
                self.runs
                    .iter()
                    .find(|r| r.mode == mode && (!want_success || r.succeeded()))
                    .and_then(|r| r.report.as_ref())
            })
        };
        pick(true).or_else(|| pick(false))
    }

    pub fn iteration_count(&self) -> Option<usize> {
        self.canonical().map(|r| r.i)
    }

    /// Δλ of the canonical report, ordered bar, hat, tilde, breve.
    pub fn deltas(&self) -> [Option<f64>; 4] {
        self.canonical().map_or([None; 4], |r| r.deltas_f64())
    }

    pub fn all_succeeded(&self) -> bool {
        self.runs.iter().all(ModeRun::succeeded)
    }

    /// Whether every mode that produced a report stopped at the same `I`.
    pub fn same_iteration_count(&self) -> bool {
        let mut counts = self
            .runs
            .iter()
            .filter_map(|r| r.report.as_ref())
            .map(|r| r.i);
        match counts.next() {
            Some(first) => counts.all(|i| i == first),
            None => false,
        }
    }
}

/// Position of an estimator's value in `[bar, hat, tilde, breve]`.
pub fn estimator_index(estimator: EstimatorMode) -> usize {
    match estimator {
        EstimatorMode::Cloc => 0,
        EstimatorMode::Acloc => 1,
        EstimatorMode::Ecloc => 2,
        EstimatorMode::Pcloc => 3,
    }
}

/// Min and max Δλ of one estimator over the problems of one method row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorInterval {
    pub estimator: EstimatorMode,
    pub method: MethodId,
    pub lo: f64,
    pub hi: f64,
    pub lo_problem: ProblemId,
    pub hi_problem: ProblemId,
}

impl ErrorInterval {
    pub fn contains(&self, value: f64) -> bool {
        self.lo <= value && value <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub eta: u32,
    pub methods: Vec<MethodId>,
    pub problems: Vec<ProblemId>,
    pub modes: Vec<EstimatorMode>,
    pub cells: Vec<GridCell>,
    pub intervals: Vec<ErrorInterval>,
}

impl GridReport {
    pub fn cell(&self, method: MethodId, problem: ProblemId) -> Option<&GridCell> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.problem == problem)
    }

    pub fn interval(&self, method: MethodId, estimator: EstimatorMode) -> Option<&ErrorInterval> {
        self.intervals
            .iter()
            .find(|i| i.method == method && i.estimator == estimator)
    }

    /// True when every run of every cell met a stopping criterion.
    pub fn all_succeeded(&self) -> bool {
        self.cells.iter().all(GridCell::all_succeeded)
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// A one-cell report around a single run, for rendering it as a table.
    pub fn from_run(report: RunReport) -> Self {
        let cells = vec![GridCell {
            method: report.method_id,
            problem: report.problem_id,
            runs: vec![ModeRun {
                mode: report.mode,
                report: Some(report.clone()),
                error: None,
            }],
        }];
        GridReport {
            eta: report.eta,
            methods: vec![report.method_id],
            problems: vec![report.problem_id],
            modes: vec![report.mode],
            intervals: error_intervals(&cells),
            cells,
        }
    }
}

/// Runs every selected (method, problem, mode) combination.
///
/// A failed run is stored in its cell and does not stop the grid.
pub fn run_grid(config: &GridConfig) -> Result<GridReport, HarnessError> {
    config.validate()?;
    let jobs: Vec<(MethodId, ProblemId, EstimatorMode)> = config
        .methods
        .iter()
        .flat_map(|&m| {
            config
                .problems
                .iter()
                .flat_map(move |&p| config.modes.iter().map(move |&mode| (m, p, mode)))
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let policy = PrecisionPolicy::default();
    let eta = config.eta;
    let outcomes: Vec<ModeRun> = pool.install(|| {
        jobs.par_iter()
            .map(|&(method, problem, mode)| {
                match driver::run(method, problem, mode, eta, &policy) {
                    Ok(report) => ModeRun {
                        mode,
                        report: Some(report),
                        error: None,
                    },
                    Err(e) => ModeRun {
                        mode,
                        report: None,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect()
    });

    let per_cell = config.modes.len();
    let mut outcomes = outcomes.into_iter();
    let mut cells = Vec::with_capacity(jobs.len() / per_cell);
    for chunk in jobs.chunks(per_cell) {
        let (method, problem, _) = chunk[0];
        cells.push(GridCell {
            method,
            problem,
            runs: outcomes.by_ref().take(per_cell).collect(),
        });
    }
    let intervals = error_intervals(&cells);
    Ok(GridReport {
        eta,
        methods: config.methods.clone(),
        problems: config.problems.clone(),
        modes: config.modes.clone(),
        cells,
        intervals,
    })
}

/// Per (method, estimator) min/max of the canonical Δλ over problems, in
/// order of first appearance.
pub fn error_intervals(cells: &[GridCell]) -> Vec<ErrorInterval> {
    let mut methods: Vec<MethodId> = Vec::new();
    for c in cells {
        if !methods.contains(&c.method) {
            methods.push(c.method);
        }
    }
    let mut out = Vec::new();
    for method in methods {
        for estimator in EstimatorMode::ALL {
            let k = estimator_index(estimator);
            let values: Vec<(ProblemId, f64)> = cells
                .iter()
                .filter(|c| c.method == method)
                .filter_map(|c| c.deltas()[k].map(|d| (c.problem, d)))
                .collect();
            let lo = values.iter().min_by(|a, b| a.1.total_cmp(&b.1));
            let hi = values.iter().max_by(|a, b| a.1.total_cmp(&b.1));
            if let (Some(&(lo_problem, lo)), Some(&(hi_problem, hi))) = (lo, hi) {
                out.push(ErrorInterval {
                    estimator,
                    method,
                    lo,
                    hi,
                    lo_problem,
                    hi_problem,
                });
            }
        }
    }
    out
}

/// Worst disagreement between the iterate sequences of a cell's modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeAgreement {
    pub same_i: bool,
    /// `max log10(|x_k^A - x_k^B| / bound_k)` over mode pairs and common
    /// indices; `<= 0` means every pair agrees within its bound.
    pub worst_excess: f64,
    pub worst_at: Option<(EstimatorMode, EstimatorMode, usize)>,
}

/// Absolute slack on top of the propagated rounding bound (a few ulps and
/// derivative constants).
const AGREEMENT_SLACK_LOG10: f64 = 1.0;

/// Compares the iterates of every pair of modes in `cell`.
///
/// Iterate `x_j` of a run is rounded to `D_j` digits, the precision it was
/// formed at. That rounding reaches `x_k` scaled by roughly
/// `rho^(k-j) |e_k / e_j|`, so the two runs may differ at index `k` by
///
/// ```text
/// bound_k = 10 * sum_{j<=k} rho^(k-j) * 10^(-D_j) * |e_k / e_j|
/// ```
///
/// with `D_j` the smaller of the two precisions at `j`. At `j = k` this is
/// the smaller working precision itself.
pub fn cross_mode_agreement(cell: &GridCell, eta: u32) -> Result<ModeAgreement, HarnessError> {
    let reports: Vec<(EstimatorMode, &RunReport)> = cell
        .runs
        .iter()
        .filter_map(|r| r.report.as_ref().map(|rep| (r.mode, rep)))
        .collect();
    let root = problems::cached_reference_root(&problems::problem(cell.problem), eta + 64)
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let log10_rho = methods::order_of(&cell.method.spec(), 30).to_f64().log10();
    let mut out = ModeAgreement {
        same_i: cell.same_iteration_count(),
        worst_excess: f64::NEG_INFINITY,
        worst_at: None,
    };
    let trace_err = |e: driver::DriverError| HarnessError::Config(e.to_string());
    for (a, (mode_a, rep_a)) in reports.iter().enumerate() {
        let common_log_e = log_errors(rep_a, &root.value).map_err(trace_err)?;
        for (mode_b, rep_b) in reports.iter().skip(a + 1) {
            let n = rep_a.i.min(rep_b.i);
            for k in 1..=n {
                let xa = rep_a.iterate(k).map_err(trace_err)?;
                let xb = rep_b.iterate(k).map_err(trace_err)?;
                let diff = Float::with_val(xa.prec().max(xb.prec()), &xa - &xb);
                if diff.is_zero() {
                    continue;
                }
                let terms: Vec<f64> = (0..=k)
                    .map(|j| {
                        let d = rep_a.digits_schedule[j].min(rep_b.digits_schedule[j]) as f64;
                        (k - j) as f64 * log10_rho - d + common_log_e[k] - common_log_e[j]
                    })
                    .collect();
                let bound = log10_sum(&terms) + AGREEMENT_SLACK_LOG10;
                let excess = precision::log10_abs(&diff).to_f64() - bound;
                if excess > out.worst_excess {
                    out.worst_excess = excess;
                    out.worst_at = Some((*mode_a, *mode_b, k));
                }
            }
        }
    }
    Ok(out)
}

fn log_errors(report: &RunReport, alpha: &BigScalar) -> Result<Vec<f64>, driver::DriverError> {
    (0..=report.i)
        .map(|k| {
            let x = report.iterate(k)?;
            let e = Float::with_val(alpha.prec(), &x - alpha);
            // an exact hit contributes nothing to later indices
            Ok(if e.is_zero() {
                f64::NEG_INFINITY
            } else {
                precision::log10_abs(&e).to_f64()
            })
        })
        .collect()
}

/// `log10(sum 10^t)` without overflow.
fn log10_sum(terms: &[f64]) -> f64 {
    let finite: Vec<f64> = terms.iter().copied().filter(|t| t.is_finite()).collect();
    let Some(max) = finite.iter().copied().reduce(f64::max) else {
        return f64::NEG_INFINITY;
    };
    max + finite
        .iter()
        .map(|t| 10f64.powf(t - max))
        .sum::<f64>()
        .log10()
}
