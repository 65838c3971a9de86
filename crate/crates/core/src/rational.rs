//! Helpers for exact rationals written as `p/q` strings.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Parses `"p/q"` or an integer `"p"` into an exact rational.
///
/// Decimal notation is rejected so that exact quantities never pass through
/// a float.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let parsed = match s.split_once('/') {
        Some((num, den)) => {
            let num: BigInt = num
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad numerator in '{s}'")))?;
            let den: BigInt = den
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad denominator in '{s}'")))?;
            if den.is_zero() {
                return Err(Error::invalid(format!("zero denominator in '{s}'")));
            }
            BigRational::new(num, den)
        }
        None => {
            let num: BigInt = s
                .parse()
                .map_err(|_| Error::invalid(format!("'{s}' is not an integer or p/q rational")))?;
            BigRational::from_integer(num)
        }
    };
    Ok(parsed)
}

/// Formats a rational as `p/q`, or `p` when the denominator is one.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact conversion of a finite float into a rational.
pub fn from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::invalid(format!("{x} is not finite")))
}

pub fn pow(base: &BigRational, exp: u32) -> BigRational {
    num_traits::pow(base.clone(), exp as usize)
}

/// Serde adapter storing a rational as a `"p/q"` string.
pub mod serde_pq {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_rational(&s).map_err(serde::de::Error::custom)
    }
}
