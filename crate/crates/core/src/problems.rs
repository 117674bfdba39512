//! The seven benchmark equations, their analytic derivatives and
//! high-precision reference roots.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use rug::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::precision::{self, digits_to_bits, BigScalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProblemError {
    #[error("unknown problem id {0:?} (expected f1..f7)")]
    UnknownProblem(String),
    #[error("derivative order {0} not available (max 3)")]
    BadOrder(u8),
    #[error("{problem}: argument {x} outside the domain (x > 0 required)")]
    Domain { problem: ProblemId, x: String },
    #[error(
        "{problem}: reference root did not reach 1e-{digits} within {iterations} Newton steps"
    )]
    RootRefinement {
        problem: ProblemId,
        digits: u32,
        iterations: usize,
    },
    #[error("{problem}: zero derivative during root refinement")]
    ZeroDerivative { problem: ProblemId },
}

/// Identifier of a benchmark equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ProblemId {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
}

impl ProblemId {
    pub const ALL: [ProblemId; 7] = [
        ProblemId::F1,
        ProblemId::F2,
        ProblemId::F3,
        ProblemId::F4,
        ProblemId::F5,
        ProblemId::F6,
        ProblemId::F7,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemId::F1 => "f1",
            ProblemId::F2 => "f2",
            ProblemId::F3 => "f3",
            ProblemId::F4 => "f4",
            ProblemId::F5 => "f5",
            ProblemId::F6 => "f6",
            ProblemId::F7 => "f7",
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemId {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProblemId::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| ProblemError::UnknownProblem(s.to_string()))
    }
}

impl TryFrom<String> for ProblemId {
    type Error = ProblemError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<ProblemId> for String {
    fn from(value: ProblemId) -> Self {
        value.as_str().to_string()
    }
}

/// One benchmark equation with its published root and starting points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestProblem {
    pub id: ProblemId,
    /// Human-readable formula.
    pub formula: &'static str,
    /// Root to 25 significant digits.
    pub root_25: &'static str,
    /// Starting point for methods without memory.
    pub x0: &'static str,
    /// `(x_{-1}, x_0)` for methods with memory.
    pub x_minus1_x0: (&'static str, &'static str),
}

/// Looks up a problem by its string id (`"f1"`..`"f7"`).
pub fn get_problem(id: &str) -> Result<TestProblem, ProblemError> {
    Ok(problem(id.parse()?))
}

pub fn problem(id: ProblemId) -> TestProblem {
    let (formula, root_25, x0, pair) = match id {
        ProblemId::F1 => (
            "x^3 - 3x^2 + x - 2",
            "2.893289196304497788906356",
            "2.5",
            ("2.25", "2.60"),
        ),
        ProblemId::F2 => (
            "x^3 + cos x - 2",
            "1.172577964753970012673333",
            "1.5",
            ("1.50", "2.50"),
        ),
        ProblemId::F3 => (
            "2 sin x + 1 - x",
            "2.380061273139339017212548",
            "2.5",
            ("1.00", "2.00"),
        ),
        ProblemId::F4 => (
            "(x + 1) e^(x - 1) - 1",
            "0.557145598997611416858672",
            "1.0",
            ("0.00", "0.75"),
        ),
        ProblemId::F5 => ("e^(x^2 + 7x - 30) - 1", "3.0", "2.94", ("2.90", "3.10")),
        ProblemId::F6 => (
            "e^(-x) + cos x",
            "1.746139530408012417650703",
            "1.5",
            ("1.60", "1.90"),
        ),
        ProblemId::F7 => (
            "x - 3 ln x",
            "1.857183860207835336456981",
            "2.0",
            ("1.00", "2.00"),
        ),
    };
    TestProblem {
        id,
        formula,
        root_25,
        x0,
        x_minus1_x0: pair,
    }
}

/// A scalar equation `f(x) = 0` with derivatives up to third order.
pub trait Equation {
    /// `order`-th derivative at `x`, every operation at `bits` bits.
    fn eval_bits(&self, x: &BigScalar, order: u8, bits: u32) -> Result<BigScalar, ProblemError>;
}

impl Equation for TestProblem {
    fn eval_bits(&self, x: &BigScalar, order: u8, bits: u32) -> Result<BigScalar, ProblemError> {
        TestProblem::eval_bits(self, x, order, bits)
    }
}

impl TestProblem {
    /// `order`-th derivative of the equation at `x`, every operation carried
    /// out at `digits` decimal digits.
    pub fn eval(&self, x: &BigScalar, order: u8, digits: u32) -> Result<BigScalar, ProblemError> {
        self.eval_bits(x, order, digits_to_bits(digits))
    }

    /// As [`TestProblem::eval`], with the precision given in bits.
    pub fn eval_bits(
        &self,
        x: &BigScalar,
        order: u8,
        bits: u32,
    ) -> Result<BigScalar, ProblemError> {
        if order > 3 {
            return Err(ProblemError::BadOrder(order));
        }
        let x = Float::with_val(bits, x);
        macro_rules! v {
            ($e:expr) => {
                Float::with_val(bits, $e)
            };
        }
        let out = match self.id {
            ProblemId::F1 => match order {
                // ((x - 3) x + 1) x - 2
                0 => v!(v!(v!(v!(&x - 3u32) * &x) + 1u32) * &x) - 2u32,
                // (3x - 6) x + 1
                1 => v!(v!(v!(3u32 * &x) - 6u32) * &x) + 1u32,
                2 => v!(6u32 * &x) - 6u32,
                _ => v!(6u32),
            },
            ProblemId::F2 => {
                let (sin, cos) = v!(&x).sin_cos(v!(0u32));
                let x2 = v!(x.square_ref());
                match order {
                    0 => v!(v!(&x2 * &x) + &cos) - 2u32,
                    1 => v!(3u32 * &x2) - &sin,
                    2 => v!(6u32 * &x) - &cos,
                    _ => v!(6u32) + &sin,
                }
            }
            ProblemId::F3 => {
                let (sin, cos) = v!(&x).sin_cos(v!(0u32));
                match order {
                    0 => v!(v!(2u32 * &sin) + 1u32) - &x,
                    1 => v!(2u32 * &cos) - 1u32,
                    2 => v!(-2i32 * &sin),
                    _ => v!(-2i32 * &cos),
                }
            }
            ProblemId::F4 => {
                let g = v!(&x - 1u32).exp();
                match order {
                    0 => v!(v!(v!(&x + 1u32) * &g) - 1u32),
                    k => v!(v!(&x + (k as u32 + 1)) * &g),
                }
            }
            ProblemId::F5 => {
                // g = x^2 + 7x - 30 = (x + 7) x - 30, g' = 2x + 7
                let g = v!(v!(v!(&x + 7u32) * &x) - 30u32);
                if order == 0 {
                    g.exp_m1()
                } else {
                    let eg = g.exp();
                    let dg = v!(v!(2u32 * &x) + 7u32);
                    let poly = match order {
                        1 => dg,
                        2 => v!(dg.square_ref()) + 2u32,
                        _ => v!(v!(dg.square_ref()) + 6u32) * &dg,
                    };
                    v!(poly * &eg)
                }
            }
            ProblemId::F6 => {
                let em = v!(-&x).exp();
                let (sin, cos) = v!(&x).sin_cos(v!(0u32));
                match order {
                    0 => em + &cos,
                    1 => v!(-em) - &sin,
                    2 => em - &cos,
                    _ => v!(-em) + &sin,
                }
            }
            ProblemId::F7 => {
                if x.is_sign_negative() || x.is_zero() {
                    return Err(ProblemError::Domain {
                        problem: self.id,
                        x: precision::to_decimal_digits(&x, 30),
                    });
                }
                match order {
                    0 => v!(&x - v!(3u32 * v!(x.ln_ref()))),
                    1 => v!(1u32 - v!(3u32 / &x)),
                    2 => v!(3u32 / v!(x.square_ref())),
                    _ => v!(-6i32 / v!(v!(x.square_ref()) * &x)),
                }
            }
        };
        Ok(out)
    }

    pub fn x0(&self, digits: u32) -> BigScalar {
        precision::parse_decimal(self.x0, digits).expect("table literal")
    }

    pub fn seeds_with_memory(&self, digits: u32) -> (BigScalar, BigScalar) {
        (
            precision::parse_decimal(self.x_minus1_x0.0, digits).expect("table literal"),
            precision::parse_decimal(self.x_minus1_x0.1, digits).expect("table literal"),
        )
    }

    pub fn root_25(&self, digits: u32) -> BigScalar {
        precision::parse_decimal(self.root_25, digits).expect("table literal")
    }
}

/// A root refined to a requested number of correct decimals.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceRoot {
    pub problem_id: ProblemId,
    pub digits: u32,
    pub value: BigScalar,
    /// `|f(value)|` at `digits + 10` decimal digits.
    pub residual_bound: BigScalar,
}

impl ReferenceRoot {
    pub fn value_string(&self) -> String {
        precision::to_decimal_digits(&self.value, self.digits as usize + 1)
    }
}

const ROOT_START_DIGITS: u32 = 30;
const ROOT_MAX_STEPS: usize = 200;

/// Refines the root of `problem` by Newton's method with digit doubling until
/// `|f(value)| < 10^-digits`. Refinement always starts from the published
/// `x0`, so edited starting points cannot select a different root.
pub fn reference_root(problem: &TestProblem, digits: u32) -> Result<ReferenceRoot, ProblemError> {
    let target = digits + 10;
    let mut working = ROOT_START_DIGITS.min(target);
    let mut x = self::problem(problem.id).x0(target);
    let threshold = precision::pow10(-(digits as i64), precision::CONTROL_DIGITS);
    for _ in 0..ROOT_MAX_STEPS {
        let bits = digits_to_bits(working);
        let fx = problem.eval_bits(&x, 0, bits)?;
        let dfx = problem.eval_bits(&x, 1, bits)?;
        if working == target && fx.clone().abs() < threshold {
            return Ok(ReferenceRoot {
                problem_id: problem.id,
                digits,
                residual_bound: fx.abs(),
                value: Float::with_val(digits_to_bits(target), &x),
            });
        }
        if dfx.is_zero() {
            return Err(ProblemError::ZeroDerivative {
                problem: problem.id,
            });
        }
        let step = Float::with_val(bits, &fx / &dfx);
        x = Float::with_val(digits_to_bits(target), &x - &step);
        if fx.is_zero() || step.clone().abs() < precision::pow10(-(working as i64) / 2, 20) {
            working = (working * 2).min(target);
        }
    }
    Err(ProblemError::RootRefinement {
        problem: problem.id,
        digits,
        iterations: ROOT_MAX_STEPS,
    })
}

type RootKey = (ProblemId, u32);

fn root_cache() -> &'static Mutex<HashMap<RootKey, Arc<ReferenceRoot>>> {
    static CACHE: OnceLock<Mutex<HashMap<RootKey, Arc<ReferenceRoot>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Memoized [`reference_root`], shared between concurrent runs.
pub fn cached_reference_root(
    problem: &TestProblem,
    digits: u32,
) -> Result<Arc<ReferenceRoot>, ProblemError> {
    let key = (problem.id, digits);
    if let Some(hit) = root_cache().lock().expect("root cache").get(&key) {
        return Ok(Arc::clone(hit));
    }
    let root = Arc::new(reference_root(problem, digits)?);
    root_cache()
        .lock()
        .expect("root cache")
        .entry(key)
        .or_insert_with(|| Arc::clone(&root));
    Ok(root)
}
