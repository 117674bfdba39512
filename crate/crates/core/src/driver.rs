//! Runs one method on one problem under an estimator mode: digit schedule,
//! stopping rule, trace recording and the final order estimates.
//!
//! Each step computes `x_{n+1}` at the current working precision, then
//! evaluates the mode's driving quantity on the newest window. If the
//! stopping rule fires, `x_{n+1}` is discarded and `x_n` is the last
//! admissible iterate `x_I`. Otherwise the precision for the next step is
//! raised to the mode's schedule (never lowered) and `x_{n+1}` is accepted.

use std::fmt;
use std::str::FromStr;

use rug::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimators::{self, EstimatorError};
use crate::methods::{self, MethodError, MethodId, MethodState};
use crate::precision::{self, digits_to_bits, BigScalar, CONTROL_DIGITS};
use crate::problems::{self, ProblemError, ProblemId, TestProblem};

/// Significant digits kept for the order estimates in a report.
const LAMBDA_DIGITS: usize = 40;

#[derive(Debug, Error)]
pub enum DriverError {
    #[error("unknown estimator mode {0:?} (expected cloc, acloc, ecloc or pcloc)")]
    UnknownMode(String),
    #[error("invalid precision policy: {0}")]
    Policy(String),
    #[error("reference root unavailable: {0}")]
    Root(#[from] ProblemError),
    #[error("malformed trace: {0}")]
    Trace(String),
}

/// Which order estimator drives the digit schedule and the stopping rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorMode {
    Cloc,
    Acloc,
    Ecloc,
    Pcloc,
}

impl EstimatorMode {
    pub const ALL: [EstimatorMode; 4] = [
        EstimatorMode::Cloc,
        EstimatorMode::Acloc,
        EstimatorMode::Ecloc,
        EstimatorMode::Pcloc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorMode::Cloc => "cloc",
            EstimatorMode::Acloc => "acloc",
            EstimatorMode::Ecloc => "ecloc",
            EstimatorMode::Pcloc => "pcloc",
        }
    }

    /// Only CLOC needs the true root to drive the iteration.
    pub fn needs_root(self) -> bool {
        self == EstimatorMode::Cloc
    }

    /// Index of the newest iterate at which the driving quantity exists.
    fn first_quantity_index(self) -> usize {
        match self {
            EstimatorMode::Cloc => 0,
            EstimatorMode::Pcloc => 1,
            EstimatorMode::Acloc | EstimatorMode::Ecloc => 2,
        }
    }

    /// Multiplier of `(-log10 q + 2)` in the digit schedule.
    fn schedule_factor(self, rho: &BigScalar) -> BigScalar {
        let bits = digits_to_bits(CONTROL_DIGITS);
        let rho = Float::with_val(bits, rho);
        let rho_m1 = Float::with_val(bits, &rho - 1u32);
        match self {
            EstimatorMode::Cloc => rho,
            // rho^3 / (rho - 1)
            EstimatorMode::Acloc => {
                Float::with_val(bits, Float::with_val(bits, rho.square_ref()) * &rho) / rho_m1
            }
            // rho^3 / (2 rho - 1)
            EstimatorMode::Ecloc => {
                let den = Float::with_val(bits, &rho * 2u32) - 1u32;
                Float::with_val(bits, Float::with_val(bits, rho.square_ref()) * &rho) / den
            }
            // rho^2 / (rho - 1)
            EstimatorMode::Pcloc => Float::with_val(bits, rho.square_ref()) / rho_m1,
        }
    }

    /// Exponent `T` of the stopping threshold `10^-T`.
    pub fn threshold_exponent(self, rho: &BigScalar, eta: u32) -> BigScalar {
        let bits = digits_to_bits(CONTROL_DIGITS);
        let rho = Float::with_val(bits, rho);
        let eta = Float::with_val(bits, eta);
        let rho_m1 = Float::with_val(bits, &rho - 1u32);
        let rho2 = Float::with_val(bits, rho.square_ref());
        match self {
            EstimatorMode::Cloc => eta,
            // eta (rho - 1) / rho^2
            EstimatorMode::Acloc => Float::with_val(bits, eta * rho_m1) / rho2,
            // eta (2 rho - 1) / rho^2
            EstimatorMode::Ecloc => {
                let num = Float::with_val(bits, &rho * 2u32) - 1u32;
                Float::with_val(bits, eta * num) / rho2
            }
            // eta (rho - 1) / rho
            EstimatorMode::Pcloc => Float::with_val(bits, eta * rho_m1) / rho,
        }
    }
}

impl fmt::Display for EstimatorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorMode {
    type Err = DriverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EstimatorMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| DriverError::UnknownMode(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionPolicy {
    pub bootstrap_digits: u32,
    /// Upper bound on working digits; `None` means `ceil(rho (eta + 2)) + 1024`.
    pub max_digits: Option<u32>,
    pub monotone: bool,
    pub iteration_cap: usize,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy {
            bootstrap_digits: 64,
            max_digits: None,
            monotone: true,
            iteration_cap: 1000,
        }
    }
}

impl PrecisionPolicy {
    fn resolve_max_digits(&self, rho: &BigScalar, eta: u32) -> Result<u32, DriverError> {
        let needed = min_cap(rho, eta);
        let max = self.max_digits.unwrap_or(needed + 1024 - 64);
        if self.bootstrap_digits < 30 {
            return Err(DriverError::Policy(format!(
                "bootstrap_digits {} < 30",
                self.bootstrap_digits
            )));
        }
        if max < needed {
            return Err(DriverError::Policy(format!(
                "max_digits {max} below ceil(rho (eta + 2)) + 64 = {needed}"
            )));
        }
        Ok(max)
    }
}

/// `ceil(rho (eta + 2)) + 64`.
fn min_cap(rho: &BigScalar, eta: u32) -> u32 {
    let bits = digits_to_bits(CONTROL_DIGITS);
    let v = Float::with_val(bits, rho * (eta + 2));
    let ceil = v.ceil().to_f64() as u32;
    ceil + 64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    CriterionMet,
    ExactZero,
    Degenerate,
    IterationCap,
    DomainError,
}

impl StopReason {
    pub fn is_success(self) -> bool {
        matches!(self, StopReason::CriterionMet | StopReason::ExactZero)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaLambda {
    pub bar: Option<String>,
    pub hat: Option<String>,
    pub tilde: Option<String>,
    pub breve: Option<String>,
}

/// Full trace and final estimates of one run. Numbers are decimal strings.
///
/// `iterates[k]` is `x_k` for `k = 0..=I` (index 0 is the starting point `x_0`),
/// `residuals[k]` is `f(x_k)` at the precision of the step taken from `x_k`,
/// and `digits_schedule[k]` is the working precision `x_k` was computed at.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub method_id: MethodId,
    pub problem_id: ProblemId,
    pub mode: EstimatorMode,
    pub eta: u32,
    #[serde(rename = "I")]
    pub i: usize,
    pub iterates: Vec<String>,
    pub residuals: Vec<String>,
    pub digits_schedule: Vec<u32>,
    pub lambda_bar: Option<String>,
    pub lambda_hat: Option<String>,
    pub lambda_tilde: Option<String>,
    pub lambda_breve: Option<String>,
    pub delta_lambda: DeltaLambda,
    pub stop_reason: StopReason,
    /// `x_{I+1}`: computed to test the stopping rule, never admitted.
    #[serde(default)]
    pub rejected_iterate: Option<String>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Δλ values as `f64`, in the order bar, hat, tilde, breve.
    pub fn deltas_f64(&self) -> [Option<f64>; 4] {
        let d = &self.delta_lambda;
        [&d.bar, &d.hat, &d.tilde, &d.breve].map(|v| v.as_deref().and_then(|s| s.parse().ok()))
    }

    pub fn iterate(&self, k: usize) -> Result<BigScalar, DriverError> {
        parse_trace_value(
            self.iterates
                .get(k)
                .ok_or_else(|| DriverError::Trace(format!("iterate {k} missing")))?,
        )
    }

    pub fn residual(&self, k: usize) -> Result<BigScalar, DriverError> {
        parse_trace_value(
            self.residuals
                .get(k)
                .ok_or_else(|| DriverError::Trace(format!("residual {k} missing")))?,
        )
    }
}

/// Parses a trace string at a precision matched to its digit count.
fn parse_trace_value(text: &str) -> Result<BigScalar, DriverError> {
    let mantissa = text.split(['e', 'E', '@']).next().unwrap_or(text);
    let digits = mantissa
        .chars()
        .filter(|c| c.is_ascii_digit())
        .count()
        .max(1) as u32;
    precision::parse_decimal(text, digits.max(CONTROL_DIGITS))
        .map_err(|e| DriverError::Trace(e.to_string()))
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("driving quantity is zero")]
    ConvergedExactly,
    #[error("driving quantity is not below one")]
    NotAsymptotic,
}

/// Working digits suggested by the mode's schedule:
/// `floor(factor (-log10 q + 2))` with factor `rho`, `rho^3/(rho-1)`,
/// `rho^3/(2rho-1)` or `rho^2/(rho-1)`.
pub fn adaptive_digits(
    mode: EstimatorMode,
    rho: &BigScalar,
    quantity: &BigScalar,
) -> Result<u32, ScheduleError> {
    if quantity.is_zero() {
        return Err(ScheduleError::ConvergedExactly);
    }
    let bits = digits_to_bits(CONTROL_DIGITS);
    if Float::with_val(bits, quantity.abs_ref()) >= 1u32 {
        return Err(ScheduleError::NotAsymptotic);
    }
    let neg_log = -precision::log10_abs(quantity);
    let arg = Float::with_val(bits, neg_log + 2u32);
    let value = Float::with_val(bits, mode.schedule_factor(rho) * arg);
    Ok(precision::floor_with_slack(&value).clamp(0, u32::MAX as i64) as u32)
}

/// `|quantity| < 10^-T` for the mode's threshold exponent `T`.
pub fn should_stop(mode: EstimatorMode, rho: &BigScalar, eta: u32, quantity: &BigScalar) -> bool {
    if quantity.is_zero() {
        return true;
    }
    let log = precision::log10_abs(quantity);
    let threshold = mode.threshold_exponent(rho, eta);
    log < -threshold
}

/// The four estimates at the last admissible iterate.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lambdas {
    pub bar: Option<BigScalar>,
    pub hat: Option<BigScalar>,
    pub tilde: Option<BigScalar>,
    pub breve: Option<BigScalar>,
}

impl Lambdas {
    pub fn as_array(&self) -> [Option<&BigScalar>; 4] {
        [
            self.bar.as_ref(),
            self.hat.as_ref(),
            self.tilde.as_ref(),
            self.breve.as_ref(),
        ]
    }
}

/// Recomputes CLOC, ACLOC, ECLOC and PCLOC at index `I` from a stored trace.
/// CLOC needs `alpha`; an estimate whose window is too short or degenerate is
/// absent.
pub fn lambdas_at_i(report: &RunReport, alpha: Option<&BigScalar>) -> Result<Lambdas, DriverError> {
    let i = report.i;
    if report.iterates.len() <= i || report.residuals.len() <= i {
        return Err(DriverError::Trace(format!(
            "trace holds {} iterates / {} residuals, I = {i}",
            report.iterates.len(),
            report.residuals.len()
        )));
    }
    let x = |k: usize| report.iterate(k);
    let mut out = Lambdas::default();
    if i >= 1 {
        if let Some(alpha) = alpha {
            let (xi, xim1) = (x(i)?, x(i - 1)?);
            let bits = xi.prec().max(alpha.prec());
            let e_i = Float::with_val(bits, &xi - alpha);
            let e_im1 = Float::with_val(bits, &xim1 - alpha);
            out.bar = estimators::cloc(&e_i, &e_im1).ok();
        }
        out.breve = estimators::pcloc(&report.residual(i)?, &report.residual(i - 1)?).ok();
    }
    if i >= 2 {
        out.hat = estimators::acloc(&x(i)?, &x(i - 1)?, &x(i - 2)?).ok();
    }
    if i >= 3 {
        let window = [x(i - 3)?, x(i - 2)?, x(i - 1)?, x(i)?];
        out.tilde = estimators::ecloc(&window).ok();
    }
    Ok(out)
}

fn fill_estimates(report: &mut RunReport, alpha: Option<&BigScalar>) -> Result<(), DriverError> {
    let lambdas = lambdas_at_i(report, alpha)?;
    let spec = report.method_id.spec();
    let render = |v: Option<&BigScalar>| v.map(|v| precision::to_decimal_digits(v, LAMBDA_DIGITS));
    let delta = |v: Option<&BigScalar>| {
        v.map(|v| {
            let rho = methods::order_of(&spec, precision::bits_to_digits(v.prec()));
            let d = Float::with_val(v.prec(), &rho - v).abs();
            precision::to_decimal_digits(&d, LAMBDA_DIGITS)
        })
    };
    let [bar, hat, tilde, breve] = lambdas.as_array();
    report.lambda_bar = render(bar);
    report.lambda_hat = render(hat);
    report.lambda_tilde = render(tilde);
    report.lambda_breve = render(breve);
    report.delta_lambda = DeltaLambda {
        bar: delta(bar),
        hat: delta(hat),
        tilde: delta(tilde),
        breve: delta(breve),
    };
    Ok(())
}

/// Driving quantity of `mode` with `next` as the newest iterate.
/// `None` while the window is too short.
fn driving_quantity(
    mode: EstimatorMode,
    xs: &[BigScalar],
    f_last: &BigScalar,
    next: &BigScalar,
    f_next: &BigScalar,
    alpha: Option<&BigScalar>,
    bits: u32,
) -> Result<Option<BigScalar>, EstimatorError> {
    let newest = xs.len();
    if newest < mode.first_quantity_index() {
        return Ok(None);
    }
    let n = xs.len() - 1;
    let q = match mode {
        EstimatorMode::Cloc => {
            let alpha = alpha.expect("CLOC runs carry a reference root");
            Float::with_val(bits, next - alpha)
        }
        EstimatorMode::Acloc => {
            let num = Float::with_val(bits, next - &xs[n]);
            let den = Float::with_val(bits, &xs[n] - &xs[n - 1]);
            if den.is_zero() {
                return Err(EstimatorError::ConvergedExactly);
            }
            num / den
        }
        EstimatorMode::Ecloc => estimators::aitken_error(next, &xs[n], &xs[n - 1])?,
        EstimatorMode::Pcloc => {
            if f_last.is_zero() {
                return Err(EstimatorError::ConvergedExactly);
            }
            Float::with_val(bits, f_next / f_last)
        }
    };
    Ok(Some(q))
}

fn stop_for(err: &MethodError) -> StopReason {
    match err {
        MethodError::Problem(ProblemError::Domain { .. }) => StopReason::DomainError,
        _ => StopReason::Degenerate,
    }
}

/// Runs `method` on `problem` to `eta` correct decimals under `mode`.
///
/// The CLOC estimate is reported in every mode (it uses a reference root
/// refined to `eta + 64` digits); the root only steers the iteration in CLOC
/// mode.
pub fn run(
    method: MethodId,
    problem: ProblemId,
    mode: EstimatorMode,
    eta: u32,
    policy: &PrecisionPolicy,
) -> Result<RunReport, DriverError> {
    run_problem(method, &problems::problem(problem), mode, eta, policy)
}

/// As [`run`], for a problem record whose starting points may differ from the
/// published ones.
pub fn run_problem(
    method: MethodId,
    test_problem: &TestProblem,
    mode: EstimatorMode,
    eta: u32,
    policy: &PrecisionPolicy,
) -> Result<RunReport, DriverError> {
    let spec = method.spec();
    let problem = test_problem.id;
    let rho = methods::order_of(&spec, CONTROL_DIGITS);
    let max_digits = policy.resolve_max_digits(&rho, eta)?;
    let root = match problems::cached_reference_root(test_problem, eta + 64) {
        Ok(root) => Some(root),
        Err(e) if mode.needs_root() => return Err(e.into()),
        Err(_) => None,
    };
    let alpha = root.as_ref().map(|r| &r.value);

    let mut digits = policy.bootstrap_digits.min(max_digits);
    let (x0, previous) = if spec.memory == 0 {
        (test_problem.x0(digits), None)
    } else {
        let (xm1, x0) = test_problem.seeds_with_memory(digits);
        (x0, Some(xm1))
    };
    let mut xs = vec![x0.clone()];
    let mut fs: Vec<BigScalar> = Vec::new();
    let mut schedule = vec![digits];
    let mut state = MethodState::new(x0, previous);
    let mut rejected = None;

    let stop_reason = loop {
        let n = xs.len() - 1;
        if n >= policy.iteration_cap {
            break StopReason::IterationCap;
        }
        let bits = digits_to_bits(digits);

        let fx = match state.f_current.as_ref() {
            Some(f) if f.prec() >= bits => f.clone(),
            _ => match test_problem.eval_bits(&state.current, 0, bits) {
                Ok(f) => f,
                Err(e) => break stop_for(&MethodError::from(e)),
            },
        };
        if fs.len() > n {
            fs[n] = fx.clone();
        } else {
            fs.push(fx.clone());
        }
        if fx.is_zero() {
            break StopReason::ExactZero;
        }
        state.f_current = Some(fx.clone());

        let next = match methods::step_bits(&spec, &state, test_problem, bits) {
            Ok(x) => x,
            Err(e) => break stop_for(&e),
        };
        let f_next = match test_problem.eval_bits(&next, 0, bits) {
            Ok(f) => f,
            Err(e) => break stop_for(&MethodError::from(e)),
        };

        let quantity = match driving_quantity(mode, &xs, &fx, &next, &f_next, alpha, bits) {
            Ok(q) => q,
            Err(EstimatorError::ConvergedExactly) => break StopReason::ExactZero,
            Err(_) => break StopReason::Degenerate,
        };
        let mut suggested = digits;
        if let Some(q) = &quantity {
            if q.is_zero() {
                break StopReason::ExactZero;
            }
            if should_stop(mode, &rho, eta, q) {
                rejected = Some(precision::to_decimal_string(&next));
                break StopReason::CriterionMet;
            }
            match adaptive_digits(mode, &rho, q) {
                Ok(d) => suggested = d,
                Err(ScheduleError::ConvergedExactly) => break StopReason::ExactZero,
                Err(ScheduleError::NotAsymptotic) => {}
            }
        }

        xs.push(next.clone());
        fs.push(f_next.clone());
        schedule.push(digits);
        state.advance(next, Some(f_next));

        digits = if policy.monotone {
            digits.max(suggested)
        } else {
            suggested.max(policy.bootstrap_digits)
        }
        .min(max_digits);
    };

    let i = xs.len() - 1;
    fs.truncate(i + 1);
    let mut report = RunReport {
        method_id: method,
        problem_id: problem,
        mode,
        eta,
        i,
        iterates: xs.iter().map(precision::to_decimal_string).collect(),
        residuals: fs.iter().map(precision::to_decimal_string).collect(),
        digits_schedule: schedule,
        lambda_bar: None,
        lambda_hat: None,
        lambda_tilde: None,
        lambda_breve: None,
        delta_lambda: DeltaLambda::default(),
        stop_reason,
        rejected_iterate: rejected,
    };
    // A failure before the first residual leaves the trace one residual short.
    if report.residuals.len() == report.iterates.len() {
        fill_estimates(&mut report, alpha)?;
    }
    Ok(report)
}
