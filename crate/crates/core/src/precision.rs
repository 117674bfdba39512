//! Working precision and decimal conversion helpers for [`BigScalar`].
//!
//! Every routine in this crate takes its precision explicitly, counted in
//! decimal digits. Digits are mapped onto an MPFR mantissa length in bits;
//! nothing reads or writes a process-wide default.

use rug::float::Round;
use rug::ops::{AssignRound, Pow};
use rug::Float;
use thiserror::Error;

/// Arbitrary-precision scalar used throughout the crate.
pub type BigScalar = Float;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Precision used for schedule and threshold arithmetic (at least 30 digits).
pub const CONTROL_DIGITS: u32 = 40;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("not a decimal number: {0:?}")]
    Invalid(String),
}

/// Mantissa bits that hold `digits` decimal digits.
pub fn digits_to_bits(digits: u32) -> u32 {
    ((digits as f64) * LOG2_10).ceil() as u32
}

/// Decimal digits held by a mantissa of `bits` bits (rounded down).
pub fn bits_to_digits(bits: u32) -> u32 {
    ((bits as f64) / LOG2_10).floor() as u32
}

/// A scalar from an exact integer at the given precision.
pub fn from_int(value: i64, digits: u32) -> BigScalar {
    Float::with_val(digits_to_bits(digits), value)
}

/// Parses a decimal string (`"2.5"`, `"-1.2e-40"`) at `digits` decimal digits.
pub fn parse_decimal(text: &str, digits: u32) -> Result<BigScalar, ParseError> {
    parse_with_bits(text, digits_to_bits(digits))
}

pub fn parse_with_bits(text: &str, bits: u32) -> Result<BigScalar, ParseError> {
    let parsed = Float::parse(text.trim()).map_err(|_| ParseError::Invalid(text.to_string()))?;
    Ok(Float::with_val(bits, parsed))
}

/// Decimal rendering that parses back to the identical value at the same
/// precision.
pub fn to_decimal_string(value: &BigScalar) -> String {
    if value.is_zero() {
        return "0".to_string();
    }
    let digits = round_trip_digits(value.prec());
    value.to_string_radix(10, Some(digits))
}

/// Decimal rendering with at most `digits` significant digits.
pub fn to_decimal_digits(value: &BigScalar, digits: usize) -> String {
    if value.is_zero() {
        return "0".to_string();
    }
    value.to_string_radix(10, Some(digits.max(1)))
}

fn round_trip_digits(bits: u32) -> usize {
    // 1 + ceil(p * log10 2) digits always round-trip a p-bit mantissa.
    1 + ((bits as f64) / LOG2_10).ceil() as usize
}

/// `log10 |value|` evaluated at [`CONTROL_DIGITS`]. `value` must be nonzero.
pub fn log10_abs(value: &BigScalar) -> BigScalar {
    Float::with_val(digits_to_bits(CONTROL_DIGITS), value.abs_ref()).log10()
}

/// Floor of `value`, treating anything within `1e-20` below an integer as that
/// integer. Schedule factors are computed in binary, so `2 * 102` can come out
/// as `203.999...`.
pub fn floor_with_slack(value: &BigScalar) -> i64 {
    let slack = Float::with_val(value.prec(), Float::parse("1e-20").expect("literal"));
    let nudged = Float::with_val(value.prec(), value + &slack);
    let floored = nudged.floor();
    floored
        .to_integer()
        .and_then(|i| i.to_i64())
        .unwrap_or(if floored.is_sign_negative() {
            i64::MIN
        } else {
            i64::MAX
        })
}

/// Copy of `value` rounded to `digits` decimal digits.
pub fn at_digits(value: &BigScalar, digits: u32) -> BigScalar {
    let mut out = Float::new(digits_to_bits(digits));
    out.assign_round(value, Round::Nearest);
    out
}

/// Copy of `value` rounded to `bits` bits.
pub fn at_bits(value: &BigScalar, bits: u32) -> BigScalar {
    Float::with_val(bits, value)
}

/// `10^exponent` at the given precision.
pub fn pow10(exponent: i64, digits: u32) -> BigScalar {
    let ten = from_int(10, digits);
    ten.pow(exponent)
}
