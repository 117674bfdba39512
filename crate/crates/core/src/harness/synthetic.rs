//! Synthetic error sequences `e_{n+1} = C |e_n|^rho (1 + c |e_n|^sigma)` and
//! checks of the asymptotic laws the order estimators rest on.
//!
//! Errors are stored as binary floats, so tiny magnitudes keep full relative
//! precision; differences like `e_n - e_{n-1}` are formed directly from the
//! errors (the root cancels).

use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::estimators;
use crate::precision::{self, digits_to_bits, BigScalar};

/// Working precision of the generator and the checks.
pub const SYNTHETIC_DIGITS: u32 = 80;
/// Auto-sized sequences run until `|e_n|` drops below `10^-TARGET_EXPONENT`.
pub const TARGET_EXPONENT: i64 = 60;
/// Reconstruction checks are only meaningful this deep.
pub const RECONSTRUCTION_DEPTH: f64 = 50.0;
const MIN_COUNT: usize = 6;
const MAX_COUNT: usize = 200;

pub const IDENTITY_TOL: f64 = 1e-15;
pub const RECONSTRUCTION_TOL: f64 = 1e-2;
pub const SLOPE_TOL: f64 = 1e-3;

/// Model parameters as decimal strings. `rho` also accepts `phi`,
/// `1+sqrt2` and `1+sqrt3`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticModel {
    pub c: String,
    pub rho: String,
    #[serde(default = "default_sigma")]
    pub sigma: String,
    /// Coefficient of the `|e|^sigma` term; `0` gives the clean power law.
    #[serde(default = "zero")]
    pub perturbation: String,
    pub e0: String,
    /// Number of errors `e_0..e_{count-1}`; chosen automatically when absent.
    #[serde(default)]
    pub count: Option<usize>,
    /// Residual scale: `f_n = gamma e_n (1 + e_n)`.
    #[serde(default = "one")]
    pub gamma: String,
}

fn default_sigma() -> String {
    "0.5".into()
}
fn zero() -> String {
    "0".into()
}
fn one() -> String {
    "1".into()
}

impl SyntheticModel {
    pub fn new(c: &str, rho: &str, e0: &str) -> Self {
        SyntheticModel {
            c: c.into(),
            rho: rho.into(),
            sigma: default_sigma(),
            perturbation: zero(),
            e0: e0.into(),
            count: None,
            gamma: one(),
        }
    }

    pub fn with_count(mut self, count: usize) -> Self {
        self.count = Some(count);
        self
    }

    pub fn with_perturbation(mut self, coefficient: &str, sigma: &str) -> Self {
        self.perturbation = coefficient.into();
        self.sigma = sigma.into();
        self
    }

    pub fn with_gamma(mut self, gamma: &str) -> Self {
        self.gamma = gamma.into();
        self
    }

    fn label(&self) -> String {
        format!(
            "C={} rho={} e0={} c={} sigma={}",
            self.c, self.rho, self.e0, self.perturbation, self.sigma
        )
    }
}

/// Model parameters realized at [`SYNTHETIC_DIGITS`].
#[derive(Debug, Clone)]
struct Params {
    c: BigScalar,
    rho: BigScalar,
    sigma: BigScalar,
    perturbation: BigScalar,
    e0: BigScalar,
    gamma: BigScalar,
}

fn parse_param(name: &str, text: &str) -> Result<BigScalar, HarnessError> {
    precision::parse_decimal(text, SYNTHETIC_DIGITS).map_err(|_| {
        HarnessError::Config(format!(
            "model parameter {name} = {text:?} is not a decimal"
        ))
    })
}

/// Parses `rho`, including the three irrational orders by name.
pub fn parse_rho(text: &str, digits: u32) -> Result<BigScalar, HarnessError> {
    let bits = digits_to_bits(digits);
    let sqrt = |k: u32| Float::with_val(bits, k).sqrt();
    match text.trim().to_ascii_lowercase().replace(' ', "").as_str() {
        "phi" | "golden" | "(1+sqrt5)/2" => Ok(Float::with_val(bits, sqrt(5) + 1u32) / 2u32),
        "1+sqrt2" => Ok(sqrt(2) + 1u32),
        "1+sqrt3" => Ok(sqrt(3) + 1u32),
        other => precision::parse_decimal(other, digits).map_err(|_| {
            HarnessError::Config(format!("model parameter rho = {text:?} is not a decimal"))
        }),
    }
}

fn params(model: &SyntheticModel) -> Result<Params, HarnessError> {
    let p = Params {
        c: parse_param("C", &model.c)?,
        rho: parse_rho(&model.rho, SYNTHETIC_DIGITS)?,
        sigma: parse_param("sigma", &model.sigma)?,
        perturbation: parse_param("perturbation", &model.perturbation)?,
        e0: parse_param("e0", &model.e0)?,
        gamma: parse_param("gamma", &model.gamma)?,
    };
    let bad = |what: &str| Err(HarnessError::Config(format!("{what} ({})", model.label())));
    if p.c.is_zero() {
        return bad("C must be nonzero");
    }
    let golden = parse_rho("phi", SYNTHETIC_DIGITS)?;
    if p.rho < Float::with_val(golden.prec(), &golden - 1e-30) {
        return bad("rho must be at least (1+sqrt5)/2");
    }
    if !(p.sigma > 0u32 && p.sigma < 1u32) {
        return bad("sigma must lie in (0, 1)");
    }
    if !(p.e0 > 0u32 && p.e0 < 1u32) {
        return bad("e0 must lie in (0, 1)");
    }
    if p.gamma.is_zero() {
        return bad("gamma must be nonzero");
    }
    if model.count == Some(0) {
        return bad("count must be positive");
    }
    Ok(p)
}

/// Errors `e_0..e_{count-1}` and residuals `f_n = gamma e_n (1 + e_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSequence {
    pub errors: Vec<BigScalar>,
    pub residuals: Vec<BigScalar>,
}

fn next_error(p: &Params, e: &BigScalar) -> BigScalar {
    let bits = e.prec();
    let mag = Float::with_val(bits, e.abs_ref());
    let main = powf(&mag, &p.rho) * &p.c;
    if p.perturbation.is_zero() {
        return main;
    }
    let corr = powf(&mag, &p.sigma) * &p.perturbation;
    main * (corr + 1u32)
}

fn powf(base: &BigScalar, exp: &BigScalar) -> BigScalar {
    base.clone().pow(exp)
}

/// Evaluates the recurrence exactly (to [`SYNTHETIC_DIGITS`] relative digits).
///
/// Fails with [`HarnessError::ModelInvalid`] as soon as an error reaches
/// magnitude 1, stops decreasing, or vanishes.
pub fn generate_model_sequence(model: &SyntheticModel) -> Result<ModelSequence, HarnessError> {
    let p = params(model)?;
    let depth = precision::pow10(-TARGET_EXPONENT, precision::CONTROL_DIGITS);
    let mut errors = vec![p.e0.clone()];
    loop {
        let last = errors.last().expect("seeded");
        let done = match model.count {
            Some(n) => errors.len() >= n,
            None => {
                errors.len() >= MIN_COUNT && Float::with_val(last.prec(), last.abs_ref()) < depth
            }
        };
        if done {
            break;
        }
        if errors.len() >= MAX_COUNT {
            return Err(HarnessError::ModelInvalid(format!(
                "no error below 1e-{TARGET_EXPONENT} within {MAX_COUNT} terms ({})",
                model.label()
            )));
        }
        let next = next_error(&p, last);
        let next_mag = Float::with_val(next.prec(), next.abs_ref());
        let last_mag = Float::with_val(last.prec(), last.abs_ref());
        if next.is_zero() || !next.is_finite() || next_mag >= 1u32 || next_mag >= last_mag {
            return Err(HarnessError::ModelInvalid(format!(
                "e_{} = {} ({})",
                errors.len(),
                precision::to_decimal_digits(&next, 6),
                model.label()
            )));
        }
        errors.push(next);
    }
    let residuals = errors
        .iter()
        .map(|e| Float::with_val(e.prec(), e + 1u32) * e * &p.gamma)
        .collect();
    Ok(ModelSequence { errors, residuals })
}

/// One checked quantity: observed against predicted with its error measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub observed: f64,
    pub predicted: f64,
    pub error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(observed: f64, predicted: f64, error: f64, tolerance: f64) -> Self {
        Check {
            observed,
            predicted,
            error,
            tolerance,
            passed: error.is_finite() && error <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelCheck {
    pub model: SyntheticModel,
    /// Index the checks are taken at (the last generated error).
    pub n: usize,
    pub log10_abs_e_n: f64,
    /// `lambda_bar_n - rho` against `ln(|C| (1 + c|e_{n-1}|^sigma)) / ln|e_{n-1}|`,
    /// relative error.
    pub lambda_bar_identity: Check,
    /// `|e_n|` rebuilt from `e_hat_n / e_hat_{n-1}`, `e_tilde_n` and `Q_n`;
    /// error is `|ln pred - ln|e_n|| / |ln|e_n||`.
    pub acloc_reconstruction: Check,
    pub ecloc_reconstruction: Check,
    pub pcloc_reconstruction: Check,
    /// Least-squares slope of `ln|e_tilde_k|` on `ln|e_k|` over the last four
    /// indices against `(2 rho - 1) / rho^2`.
    pub aitken_slope: Check,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedModel {
    pub model: SyntheticModel,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropositionReport {
    pub checked: Vec<ModelCheck>,
    pub skipped: Vec<SkippedModel>,
    pub all_passed: bool,
}

impl PropositionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// The model grid used by the proposition suite: `C` in
/// `{1e-3, 1e-1, 10, 1e3}`, the six benchmark-relevant orders plus 3 and 4,
/// and `e0` in `{1e-2, 1e-4}`.
pub fn default_models() -> Vec<SyntheticModel> {
    let mut out = Vec::new();
    for c in ["1e-3", "1e-1", "10", "1e3"] {
        for rho in ["phi", "2", "1+sqrt2", "1+sqrt3", "3", "4"] {
            for e0 in ["1e-2", "1e-4"] {
                out.push(SyntheticModel::new(c, rho, e0));
            }
        }
    }
    out
}

/// Checks every model; models whose recurrence leaves `(0, 1)` are listed
/// as skipped rather than failed.
pub fn verify_propositions(models: &[SyntheticModel]) -> Result<PropositionReport, HarnessError> {
    let mut checked = Vec::new();
    let mut skipped = Vec::new();
    for model in models {
        match check_model(model) {
            Ok(c) => checked.push(c),
            Err(HarnessError::ModelInvalid(reason)) => skipped.push(SkippedModel {
                model: model.clone(),
                reason,
            }),
            Err(e) => return Err(e),
        }
    }
    let all_passed = checked.iter().all(|c| c.passed);
    Ok(PropositionReport {
        checked,
        skipped,
        all_passed,
    })
}

fn ln_abs(x: &BigScalar) -> BigScalar {
    Float::with_val(x.prec(), x.abs_ref()).ln()
}

fn log_magnitude_error(predicted_ln: &BigScalar, actual_ln: &BigScalar) -> f64 {
    let diff = Float::with_val(actual_ln.prec(), predicted_ln - actual_ln);
    (diff / actual_ln).abs().to_f64()
}

/// Runs all checks on one model at its last index.
pub fn check_model(model: &SyntheticModel) -> Result<ModelCheck, HarnessError> {
    let p = params(model)?;
    let seq = generate_model_sequence(model)?;
    let e = &seq.errors;
    let n = e.len() - 1;
    if n < 5 {
        return Err(HarnessError::Config(format!(
            "need at least 6 errors for the checks, got {} ({})",
            e.len(),
            model.label()
        )));
    }
    let bits = digits_to_bits(SYNTHETIC_DIGITS);
    let f = |x: BigScalar| Float::with_val(bits, x);
    let rho = &p.rho;
    let ln_c = ln_abs(&p.c);
    let ln_e_n = ln_abs(&e[n]);
    let log10_abs_e_n = precision::log10_abs(&e[n]).to_f64();
    let est_err = |err: estimators::EstimatorError| {
        HarnessError::ModelInvalid(format!("estimator failed: {err} ({})", model.label()))
    };

    // lambda_bar identity
    let lambda_bar = estimators::cloc(&e[n], &e[n - 1]).map_err(est_err)?;
    let observed = f(Float::with_val(bits, &lambda_bar - rho));
    let ln_prev = ln_abs(&e[n - 1]);
    let mag_prev = f(e[n - 1].clone().abs());
    let corr = f(next_error_correction(&p, &mag_prev));
    let predicted = f(Float::with_val(bits, &ln_c + corr.ln()) / &ln_prev);
    let diff = f(Float::with_val(bits, &observed - &predicted)).abs();
    let identity_err = if predicted.is_zero() {
        diff.to_f64()
    } else {
        (diff / predicted.clone().abs()).to_f64()
    };
    let lambda_bar_identity = Check::new(
        observed.to_f64(),
        predicted.to_f64(),
        identity_err,
        IDENTITY_TOL,
    );

    let rho_m1 = f(Float::with_val(bits, rho - 1u32));
    let rho2 = f(Float::with_val(bits, rho.square_ref()));
    let two_rho_m1 = f(Float::with_val(bits, rho * 2u32) - 1u32);
    let inv_one_minus_rho = f(Float::with_val(bits, &rho_m1).recip()) * -1i32;

    // ACLOC: e_n ~ C^(1/(1-rho)) (e_hat_n / e_hat_{n-1})^(rho^2/(rho-1))
    let hat_n = f(Float::with_val(bits, &e[n] - &e[n - 1]));
    let hat_prev = f(Float::with_val(bits, &e[n - 1] - &e[n - 2]));
    let ratio = f(hat_n / &hat_prev);
    let pred_ln = f(Float::with_val(bits, &ln_c * &inv_one_minus_rho)
        + Float::with_val(
            bits,
            ln_abs(&ratio) * Float::with_val(bits, &rho2 / &rho_m1),
        ));
    let acloc_reconstruction = Check::new(
        ln_e_n.to_f64(),
        pred_ln.to_f64(),
        log_magnitude_error(&pred_ln, &ln_e_n),
        RECONSTRUCTION_TOL,
    );

    // ECLOC: e_n ~ C^beta e_tilde_n^(rho^2/(2rho-1)), beta = (rho-1)/(2rho-1)
    let tilde = |k: usize| aitken_from_errors(&e[k], &e[k - 1], &e[k - 2], bits);
    let tilde_n = tilde(n);
    let beta = f(Float::with_val(bits, &rho_m1 / &two_rho_m1));
    let pred_ln = f(Float::with_val(bits, &ln_c * &beta)
        + Float::with_val(
            bits,
            ln_abs(&tilde_n) * Float::with_val(bits, &rho2 / &two_rho_m1),
        ));
    let ecloc_reconstruction = Check::new(
        ln_e_n.to_f64(),
        pred_ln.to_f64(),
        log_magnitude_error(&pred_ln, &ln_e_n),
        RECONSTRUCTION_TOL,
    );

    // PCLOC: e_n ~ C^(1/(1-rho)) Q_n^(rho/(rho-1))
    let q = f(Float::with_val(
        bits,
        &seq.residuals[n] / &seq.residuals[n - 1],
    ));
    let pred_ln = f(Float::with_val(bits, &ln_c * &inv_one_minus_rho)
        + Float::with_val(bits, ln_abs(&q) * Float::with_val(bits, rho / &rho_m1)));
    let pcloc_reconstruction = Check::new(
        ln_e_n.to_f64(),
        pred_ln.to_f64(),
        log_magnitude_error(&pred_ln, &ln_e_n),
        RECONSTRUCTION_TOL,
    );

    // Aitken exponent: slope of ln|e_tilde_k| against ln|e_k|, last four k
    let points: Vec<(f64, f64)> = (n - 3..=n)
        .map(|k| (ln_abs(&e[k]).to_f64(), ln_abs(&tilde(k)).to_f64()))
        .collect();
    let slope = least_squares_slope(&points);
    let want = f(two_rho_m1.clone() / &rho2).to_f64();
    let aitken_slope = Check::new(slope, want, (slope - want).abs(), SLOPE_TOL);

    let deep = -log10_abs_e_n > RECONSTRUCTION_DEPTH;
    let passed = lambda_bar_identity.passed
        && aitken_slope.passed
        && (!deep
            || (acloc_reconstruction.passed
                && ecloc_reconstruction.passed
                && pcloc_reconstruction.passed));
    Ok(ModelCheck {
        model: model.clone(),
        n,
        log10_abs_e_n,
        lambda_bar_identity,
        acloc_reconstruction,
        ecloc_reconstruction,
        pcloc_reconstruction,
        aitken_slope,
        passed,
    })
}

/// `1 + c |e|^sigma`.
fn next_error_correction(p: &Params, mag: &BigScalar) -> BigScalar {
    if p.perturbation.is_zero() {
        return Float::with_val(mag.prec(), 1u32);
    }
    powf(mag, &p.sigma) * &p.perturbation + 1u32
}

/// Aitken error estimate `(e_k - e_{k-1})^2 / (e_k - 2 e_{k-1} + e_{k-2})`,
/// written on errors (the root cancels from every difference).
fn aitken_from_errors(
    e_k: &BigScalar,
    e_km1: &BigScalar,
    e_km2: &BigScalar,
    bits: u32,
) -> BigScalar {
    let d1 = Float::with_val(bits, e_k - e_km1);
    let d2 = Float::with_val(bits, e_k - Float::with_val(bits, e_km1 * 2u32)) + e_km2;
    Float::with_val(bits, d1.square_ref()) / d2
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
