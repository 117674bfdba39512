//! Computational local orders of convergence (CLOC, ACLOC, ECLOC, PCLOC) for
//! one-point iterative root finders run under adaptive multiple-precision
//! arithmetic.
//!
//! The crate is organised bottom-up:
//!
//! * [`problems`]: the seven benchmark equations and their reference roots,
//! * [`methods`]: Newton, Chebyshev, Schröder, secant and two secant variants,
//! * [`estimators`]: the four order estimators, Aitken extrapolation and the
//!   residual-quotient order,
//! * [`driver`]: one run of a method under a digit schedule and stopping rule,
//! * [`harness`]: batch grids, table rendering and the synthetic-model checks.
//!
//! Precision is always explicit. No routine reads an ambient default.

pub mod driver;
pub mod estimators;
pub mod harness;
pub mod methods;
pub mod precision;
pub mod problems;

pub use driver::{run, EstimatorMode, PrecisionPolicy, RunReport, StopReason};
pub use methods::{MethodId, MethodSpec};
pub use precision::BigScalar;
pub use problems::{get_problem, ProblemId, TestProblem};
