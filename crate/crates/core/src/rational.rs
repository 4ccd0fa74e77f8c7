//! Exact rational helpers: parsing, formatting and float round trips.
//!
//! Rationals travel through configuration files and reports as `"p/q"`
//! strings so that no value is ever rounded on the way in or out.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Parses `"p/q"` or a bare integer `"p"` into a reduced rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::InvalidConfig("empty rational literal".into()));
    }
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let numer: BigInt = num_str
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad rational numerator in {s:?}")))?;
    let denom: BigInt = den_str
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad rational denominator in {s:?}")))?;
    if denom.is_zero() {
        return Err(Error::InvalidConfig(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(numer, denom))
}

/// Formats a rational as `"p"` for integers and `"p/q"` otherwise.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Rational with the exact value of a finite float (floats are dyadic).
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Domain(format!("non-finite float {x}")))
}

/// Float value of `numer / denom` for integers of any size.
///
/// The quotient is scaled so that about 64 significant bits survive the
/// integer division before the final rounding, which keeps the result
/// within one unit in the last place of the true value regardless of
/// operand size (plain `to_f64` on numerator and denominator would
/// overflow to infinity past 1024 bits).
pub fn big_ratio_to_f64(numer: &BigInt, denom: &BigInt) -> f64 {
    if numer.is_zero() {
        return 0.0;
    }
    if denom.is_zero() {
        return f64::NAN;
    }
    let negative = numer.is_negative() != denom.is_negative();
    let n = numer.abs();
    let d = denom.abs();
    let shift = d.bits() as i64 - n.bits() as i64 + 64;
    let q = if shift >= 0 {
        (n << shift as u64) / d
    } else {
        n / (d << (-shift) as u64)
    };
    let magnitude = q.to_f64().unwrap_or(f64::INFINITY) * 2f64.powi(-shift as i32);
    if negative {
        -magnitude
    } else {
        magnitude
    }
}

/// Float value of a rational via [`big_ratio_to_f64`].
pub fn rational_to_f64(r: &BigRational) -> f64 {
    big_ratio_to_f64(r.numer(), r.denom())
}

/// Small-integer rational constructor.
pub fn rat_int(n: i64) -> BigRational {
    BigRational::from_i64(n).expect("i64 fits")
}

/// Small-fraction rational constructor; panics on zero denominator.
pub fn rat_frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Largest integer at or below the rational.
pub fn floor_int(r: &BigRational) -> BigInt {
    r.floor().to_integer()
}

/// Smallest integer at or above the rational.
pub fn ceil_int(r: &BigRational) -> BigInt {
    r.ceil().to_integer()
}

/// Clamps a rational into `[0, 1]`.
pub fn clamp_unit(r: BigRational) -> BigRational {
    if r.is_negative() {
        BigRational::zero()
    } else if r > BigRational::one() {
        BigRational::one()
    } else {
        r
    }
}

/// Serde adapter serializing rationals as `"p/q"` strings.
///
/// Use as `#[serde(with = "crate::rational::serde_rational")]`.
pub mod serde_rational {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> std::result::Result<BigRational, D::Error> {
        let s = String::deserialize(de)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<BigRational>` as a list of `"p/q"` strings.
pub mod serde_rational_vec {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        v: &[BigRational],
        ser: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_seq(v.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> std::result::Result<Vec<BigRational>, D::Error> {
        let strings = Vec::<String>::deserialize(de)?;
        strings
            .iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}
