//! Exact rational scalars.
//!
//! All coefficient identities in this crate are proved in exact arithmetic;
//! floating-point values are derived shadows of these rationals.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

/// Arbitrary-precision rational, always reduced, denominator positive.
pub type Rational = num_rational::BigRational;

/// Rational from a signed numerator / denominator pair.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Rational from an integer.
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Nearest `f64` to an exact rational.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().expect("rational out of f64 range")
}

/// Canonical `"num/den"` rendering (denominator always printed).
pub fn to_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Serde helper: serialize a rational as its `"num/den"` string.
pub fn serialize<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&to_string(r))
}
