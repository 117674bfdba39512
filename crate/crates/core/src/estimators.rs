//! Order estimators computed from short windows of iterates or residuals.
//!
//! All four ratios use natural logarithms; the ratio is base independent.
//! Every estimator refuses inputs of magnitude `>= 1` (the log changes sign
//! there) and reports an exactly vanishing error as
//! [`EstimatorError::ConvergedExactly`], which callers treat as success.

use rug::Float;
use thiserror::Error;

use crate::precision::BigScalar;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorError {
    #[error("an error, difference or residual is exactly zero")]
    ConvergedExactly,
    #[error("input magnitude is not below one; the sequence is not yet asymptotic")]
    NotAsymptotic,
    #[error("zero second difference in Aitken extrapolation")]
    DegenerateExtrapolation,
    #[error("estimator undefined for these residuals")]
    Undefined,
    #[error("window too short: need {needed} values, got {got}")]
    WindowTooShort { needed: usize, got: usize },
}

/// Up to four consecutive iterates (oldest first) with optional residuals
/// and true errors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IterateWindow {
    pub xs: Vec<BigScalar>,
    pub fs: Option<Vec<BigScalar>>,
    pub es: Option<Vec<BigScalar>>,
}

impl IterateWindow {
    pub fn new(xs: Vec<BigScalar>) -> Self {
        IterateWindow {
            xs,
            fs: None,
            es: None,
        }
    }

    pub fn is_consistent(&self) -> bool {
        let n = self.xs.len();
        n <= 4
            && self.fs.as_ref().is_none_or(|f| f.len() == n)
            && self.es.as_ref().is_none_or(|e| e.len() == n)
    }

    fn last(&self, k: usize) -> Result<&[BigScalar], EstimatorError> {
        let n = self.xs.len();
        if n < k {
            return Err(EstimatorError::WindowTooShort { needed: k, got: n });
        }
        Ok(&self.xs[n - k..])
    }

    /// ACLOC from the three newest iterates.
    pub fn acloc(&self) -> Result<BigScalar, EstimatorError> {
        let w = self.last(3)?;
        acloc(&w[2], &w[1], &w[0])
    }

    /// ECLOC from the four newest iterates.
    pub fn ecloc(&self) -> Result<BigScalar, EstimatorError> {
        let w = self.last(4)?;
        ecloc(&[w[0].clone(), w[1].clone(), w[2].clone(), w[3].clone()])
    }

    /// CLOC from the two newest true errors.
    pub fn cloc(&self) -> Result<BigScalar, EstimatorError> {
        let es = self.es.as_deref().unwrap_or(&[]);
        if es.len() < 2 {
            return Err(EstimatorError::WindowTooShort {
                needed: 2,
                got: es.len(),
            });
        }
        cloc(&es[es.len() - 1], &es[es.len() - 2])
    }

    /// PCLOC from the two newest residuals.
    pub fn pcloc(&self) -> Result<BigScalar, EstimatorError> {
        let fs = self.fs.as_deref().unwrap_or(&[]);
        if fs.len() < 2 {
            return Err(EstimatorError::WindowTooShort {
                needed: 2,
                got: fs.len(),
            });
        }
        pcloc(&fs[fs.len() - 1], &fs[fs.len() - 2])
    }
}

/// Aitken limit and the error estimate it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolatedError {
    pub alpha_tilde: BigScalar,
    pub e_tilde: BigScalar,
}

fn work_bits(values: &[&BigScalar]) -> u32 {
    values.iter().map(|v| v.prec()).max().unwrap_or(64)
}

/// `ln|a|` after checking `0 < |a| < 1`.
fn ln_abs_small(a: &BigScalar, bits: u32) -> Result<BigScalar, EstimatorError> {
    if a.is_zero() {
        return Err(EstimatorError::ConvergedExactly);
    }
    let mag = Float::with_val(bits, a.abs_ref());
    if mag >= 1u32 {
        return Err(EstimatorError::NotAsymptotic);
    }
    Ok(mag.ln())
}

/// `ln|num| / ln|den|` for two magnitudes in `(0, 1)`.
pub fn log_ratio(num: &BigScalar, den: &BigScalar) -> Result<BigScalar, EstimatorError> {
    let bits = work_bits(&[num, den]);
    let ln_num = ln_abs_small(num, bits)?;
    let ln_den = ln_abs_small(den, bits)?;
    Ok(ln_num / ln_den)
}

/// CLOC: `ln|e_n| / ln|e_{n-1}|`.
pub fn cloc(e_n: &BigScalar, e_prev: &BigScalar) -> Result<BigScalar, EstimatorError> {
    log_ratio(e_n, e_prev)
}

/// ACLOC: `ln|x_n - x_{n-1}| / ln|x_{n-1} - x_{n-2}|`.
pub fn acloc(
    x_n: &BigScalar,
    x_nm1: &BigScalar,
    x_nm2: &BigScalar,
) -> Result<BigScalar, EstimatorError> {
    let bits = work_bits(&[x_n, x_nm1, x_nm2]);
    let d_n = Float::with_val(bits, x_n - x_nm1);
    let d_prev = Float::with_val(bits, x_nm1 - x_nm2);
    log_ratio(&d_n, &d_prev)
}

/// Aitken's Δ² limit `x_n - (x_n - x_{n-1})^2 / (x_n - 2x_{n-1} + x_{n-2})`.
pub fn aitken_alpha(
    x_n: &BigScalar,
    x_nm1: &BigScalar,
    x_nm2: &BigScalar,
) -> Result<ExtrapolatedError, EstimatorError> {
    let bits = work_bits(&[x_n, x_nm1, x_nm2]);
    let first = Float::with_val(bits, x_n - x_nm1);
    let second = Float::with_val(bits, &first - Float::with_val(bits, x_nm1 - x_nm2));
    if second.is_zero() {
        return Err(EstimatorError::DegenerateExtrapolation);
    }
    let e_tilde = Float::with_val(bits, first.square_ref()) / &second;
    let alpha_tilde = Float::with_val(bits, x_n - &e_tilde);
    // Report the error as x_n - alpha_tilde so the stated identity is exact.
    let e_tilde = Float::with_val(bits, x_n - &alpha_tilde);
    Ok(ExtrapolatedError {
        alpha_tilde,
        e_tilde,
    })
}

/// Aitken error estimate `(x_n - x_{n-1})^2 / (x_n - 2x_{n-1} + x_{n-2})`,
/// computed without forming the extrapolated limit.
pub fn aitken_error(
    x_n: &BigScalar,
    x_nm1: &BigScalar,
    x_nm2: &BigScalar,
) -> Result<BigScalar, EstimatorError> {
    let bits = work_bits(&[x_n, x_nm1, x_nm2]);
    let first = Float::with_val(bits, x_n - x_nm1);
    let second = Float::with_val(bits, &first - Float::with_val(bits, x_nm1 - x_nm2));
    if second.is_zero() {
        return Err(EstimatorError::DegenerateExtrapolation);
    }
    Ok(Float::with_val(bits, first.square_ref()) / &second)
}

/// ECLOC from `[x_{n-3}, x_{n-2}, x_{n-1}, x_n]` (oldest first).
pub fn ecloc(window: &[BigScalar; 4]) -> Result<BigScalar, EstimatorError> {
    let [x3, x2, x1, x0] = window;
    let e_n = aitken_error(x0, x1, x2)?;
    let e_prev = aitken_error(x1, x2, x3)?;
    log_ratio(&e_n, &e_prev)
}

/// PCLOC: `ln|f(x_n)| / ln|f(x_{n-1})|`.
pub fn pcloc(f_n: &BigScalar, f_prev: &BigScalar) -> Result<BigScalar, EstimatorError> {
    log_ratio(f_n, f_prev)
}

/// Residual-quotient order
/// `ln|f(x_{n+1})/f(x_n)| / ln|f(x_n)/f(x_{n-1})|`.
pub fn pcoc(
    f_np1: &BigScalar,
    f_n: &BigScalar,
    f_nm1: &BigScalar,
) -> Result<BigScalar, EstimatorError> {
    if f_np1.is_zero() || f_n.is_zero() || f_nm1.is_zero() {
        return Err(EstimatorError::Undefined);
    }
    let bits = work_bits(&[f_np1, f_n, f_nm1]);
    let q_num = Float::with_val(bits, f_np1 / f_n).abs();
    let q_den = Float::with_val(bits, f_n / f_nm1).abs();
    if q_num == 1u32 || q_den == 1u32 {
        return Err(EstimatorError::Undefined);
    }
    Ok(q_num.ln() / q_den.ln())
}
