//! Outward-rounded interval arithmetic over MPFR floats.

mod complex;
mod linalg;
mod real;

pub use complex::ComplexInterval;
pub use linalg::{approximate_inverse, strict_subset, strict_subset_real, IntervalBox, IntervalMatrix, PointMatrix};
pub use real::RealInterval;

#[allow(unused_imports)]
pub(crate) use real::round_to;

use rug::float::Round;
use rug::Float;

/// Precision used when no configuration overrides it.
pub const DEFAULT_PRECISION: u32 = 53;

/// Decimal rendering of `x` rounded toward `-inf`.
pub fn fmt_down(x: &Float, digits: usize) -> String {
    fmt_directed(x, digits, Round::Down)
}

/// Decimal rendering of `x` rounded toward `+inf`.
pub fn fmt_up(x: &Float, digits: usize) -> String {
    fmt_directed(x, digits, Round::Up)
}

/// Round-to-nearest decimal rendering; only for human-facing output.
pub fn fmt_nearest(x: &Float, digits: usize) -> String {
    fmt_directed(x, digits, Round::Nearest)
}

fn fmt_directed(x: &Float, digits: usize, round: Round) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x.is_sign_negative() { "-inf".into() } else { "inf".into() };
    }
    if x.is_zero() {
        return "0".into();
    }
    x.to_string_radix_round(10, Some(digits.max(1)), round)
}

/// Parses a decimal produced by [`fmt_down`]/[`fmt_up`] (or any MPFR-readable
/// literal) into a float of the given precision, rounding as requested.
pub fn parse_float(s: &str, prec: u32, round: Round) -> Option<Float> {
    match s.trim() {
        "inf" | "+inf" => return Some(Float::with_val(prec, rug::float::Special::Infinity)),
        "-inf" => return Some(Float::with_val(prec, rug::float::Special::NegInfinity)),
        _ => {}
    }
    let parsed = Float::parse(s.trim()).ok()?;
    let (f, _) = Float::with_val_round(prec, parsed, round);
    (!f.is_nan()).then_some(f)
}
