//! One-point iteration functions: Newton, Chebyshev, Schröder and the
//! secant method with two of its variants.

use std::fmt;
use std::str::FromStr;

use rug::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::precision::{digits_to_bits, BigScalar};
use crate::problems::{Equation, ProblemError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MethodError {
    #[error("unknown method id {0:?} (expected phi1..phi6)")]
    UnknownMethod(String),
    #[error("degenerate secant: f(x) == f(y)")]
    DegenerateSecant,
    #[error("zero derivative at the current iterate")]
    ZeroDerivative,
    #[error("method needs x_(n-1) but the state holds only x_n")]
    MissingPrevious,
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MethodId {
    /// Newton, order 2.
    Phi1,
    /// Chebyshev, order 3.
    Phi2,
    /// Schröder, order 4.
    Phi3,
    /// Secant, order (1 + √5)/2.
    Phi4,
    /// Secant variant re-using `x_n`, order 1 + √2.
    Phi5,
    /// Secant variant through `2 φ4 - x_n`, order 1 + √3.
    Phi6,
}

impl MethodId {
    pub const ALL: [MethodId; 6] = [
        MethodId::Phi1,
        MethodId::Phi2,
        MethodId::Phi3,
        MethodId::Phi4,
        MethodId::Phi5,
        MethodId::Phi6,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MethodId::Phi1 => "phi1",
            MethodId::Phi2 => "phi2",
            MethodId::Phi3 => "phi3",
            MethodId::Phi4 => "phi4",
            MethodId::Phi5 => "phi5",
            MethodId::Phi6 => "phi6",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MethodId::Phi1 => "Newton",
            MethodId::Phi2 => "Chebyshev",
            MethodId::Phi3 => "Schröder",
            MethodId::Phi4 => "Secant",
            MethodId::Phi5 => "Secant variant 1",
            MethodId::Phi6 => "Secant variant 2",
        }
    }

    pub fn spec(self) -> MethodSpec {
        MethodSpec::new(self)
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodId {
    type Err = MethodError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MethodId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| MethodError::UnknownMethod(s.to_string()))
    }
}

impl TryFrom<String> for MethodId {
    type Error = MethodError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<MethodId> for String {
    fn from(value: MethodId) -> Self {
        value.as_str().to_string()
    }
}

/// Theoretical order, kept symbolic so it can be realized at any precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Integer(u32),
    /// `a + b √c / d` with small integers.
    Quadratic {
        a: u32,
        b: u32,
        radicand: u32,
        denom: u32,
    },
}

impl Order {
    pub fn at_digits(self, digits: u32) -> BigScalar {
        let bits = digits_to_bits(digits);
        match self {
            Order::Integer(k) => Float::with_val(bits, k),
            Order::Quadratic {
                a,
                b,
                radicand,
                denom,
            } => {
                let root = Float::with_val(bits, radicand).sqrt();
                let num = Float::with_val(bits, root * b) + a;
                Float::with_val(bits, num / denom)
            }
        }
    }

    pub fn to_f64(self) -> f64 {
        self.at_digits(20).to_f64()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MethodSpec {
    pub id: MethodId,
    /// Number of previous iterates the step uses besides `x_n`.
    pub memory: u8,
    pub rho: Order,
    pub derivative_order_needed: u8,
}

impl MethodSpec {
    pub fn new(id: MethodId) -> Self {
        let (memory, rho, derivative_order_needed) = match id {
            MethodId::Phi1 => (0, Order::Integer(2), 1),
            MethodId::Phi2 => (0, Order::Integer(3), 2),
            MethodId::Phi3 => (0, Order::Integer(4), 3),
            MethodId::Phi4 => (
                1,
                Order::Quadratic {
                    a: 1,
                    b: 1,
                    radicand: 5,
                    denom: 2,
                },
                0,
            ),
            MethodId::Phi5 => (
                1,
                Order::Quadratic {
                    a: 1,
                    b: 1,
                    radicand: 2,
                    denom: 1,
                },
                0,
            ),
            MethodId::Phi6 => (
                1,
                Order::Quadratic {
                    a: 1,
                    b: 1,
                    radicand: 3,
                    denom: 1,
                },
                0,
            ),
        };
        MethodSpec {
            id,
            memory,
            rho,
            derivative_order_needed,
        }
    }
}

/// Theoretical order of `method` correct to `digits` decimals.
pub fn order_of(method: &MethodSpec, digits: u32) -> BigScalar {
    method.rho.at_digits(digits)
}

/// Iterates the next step reads, plus residuals already evaluated at them.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodState {
    pub current: BigScalar,
    pub previous: Option<BigScalar>,
    pub f_current: Option<BigScalar>,
    pub f_previous: Option<BigScalar>,
}

impl MethodState {
    pub fn new(current: BigScalar, previous: Option<BigScalar>) -> Self {
        MethodState {
            current,
            previous,
            f_current: None,
            f_previous: None,
        }
    }

    /// Shifts the window: `next` becomes `x_n`, the old `x_n` becomes `x_{n-1}`.
    pub fn advance(&mut self, next: BigScalar, f_next: Option<BigScalar>) {
        let old = std::mem::replace(&mut self.current, next);
        let old_f = std::mem::replace(&mut self.f_current, f_next);
        self.previous = Some(old);
        self.f_previous = old_f;
    }
}

/// `[x, y]^{-1}_f = (y - x) / (f(y) - f(x))`, at the precision of `x`.
pub fn divided_difference_inverse(
    x: &BigScalar,
    y: &BigScalar,
    fx: &BigScalar,
    fy: &BigScalar,
) -> Result<BigScalar, MethodError> {
    divided_difference_inverse_bits(x, y, fx, fy, x.prec())
}

fn divided_difference_inverse_bits(
    x: &BigScalar,
    y: &BigScalar,
    fx: &BigScalar,
    fy: &BigScalar,
    bits: u32,
) -> Result<BigScalar, MethodError> {
    let df = Float::with_val(bits, fy - fx);
    if df.is_zero() {
        return Err(MethodError::DegenerateSecant);
    }
    let dx = Float::with_val(bits, y - x);
    Ok(dx / df)
}

/// Residual at `x` for precision `bits`, reusing `cached` when it was computed
/// at least that precisely.
fn residual(
    problem: &impl Equation,
    x: &BigScalar,
    cached: Option<&BigScalar>,
    bits: u32,
) -> Result<BigScalar, ProblemError> {
    match cached {
        Some(f) if f.prec() >= bits => Ok(Float::with_val(bits, f)),
        _ => problem.eval_bits(x, 0, bits),
    }
}

/// One step of `method` from `state`, all arithmetic at `digits` decimals.
pub fn step(
    method: &MethodSpec,
    state: &MethodState,
    problem: &impl Equation,
    digits: u32,
) -> Result<BigScalar, MethodError> {
    step_bits(method, state, problem, digits_to_bits(digits))
}

pub fn step_bits(
    method: &MethodSpec,
    state: &MethodState,
    problem: &impl Equation,
    bits: u32,
) -> Result<BigScalar, MethodError> {
    macro_rules! v {
        ($e:expr) => {
            Float::with_val(bits, $e)
        };
    }
    let x = v!(&state.current);
    let fx = residual(problem, &state.current, state.f_current.as_ref(), bits)?;
    match method.id {
        MethodId::Phi1 | MethodId::Phi2 | MethodId::Phi3 => {
            let d1 = problem.eval_bits(&x, 1, bits)?;
            if d1.is_zero() {
                return Err(MethodError::ZeroDerivative);
            }
            let u = v!(&fx / &d1);
            let y = v!(&x - &u);
            if method.id == MethodId::Phi1 {
                return Ok(y);
            }
            let d2 = problem.eval_bits(&x, 2, bits)?;
            // L = (f''/f') u
            let l = v!(v!(&d2 / &d1) * &u);
            let z = v!(&y - v!(v!(&l * &u) / 2u32));
            if method.id == MethodId::Phi2 {
                return Ok(z);
            }
            let d3 = problem.eval_bits(&x, 3, bits)?;
            // M = f'''/(3! f') u^2
            let m = v!(v!(&d3 / v!(6u32 * &d1)) * v!(u.square_ref()));
            let correction = v!(v!(v!(l.square_ref()) / 2u32) - &m);
            Ok(v!(&z - v!(correction * &u)))
        }
        MethodId::Phi4 | MethodId::Phi5 | MethodId::Phi6 => {
            let prev = state
                .previous
                .as_ref()
                .ok_or(MethodError::MissingPrevious)?;
            let prev = v!(prev);
            let fprev = residual(problem, &prev, state.f_previous.as_ref(), bits)?;
            let slope_inv = divided_difference_inverse_bits(&prev, &x, &fprev, &fx, bits)?;
            let y = v!(&x - v!(slope_inv * &fx));
            if method.id == MethodId::Phi4 {
                return Ok(y);
            }
            let fy = problem.eval_bits(&y, 0, bits)?;
            let slope_inv = if method.id == MethodId::Phi5 {
                divided_difference_inverse_bits(&x, &y, &fx, &fy, bits)?
            } else {
                let w = v!(v!(2u32 * &y) - &x);
                let fw = problem.eval_bits(&w, 0, bits)?;
                divided_difference_inverse_bits(&x, &w, &fx, &fw, bits)?
            };
            Ok(v!(&y - v!(slope_inv * &fy)))
        }
    }
}
