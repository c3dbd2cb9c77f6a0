//! Exact decimal numbers for table cells.

use std::fmt;
use std::ops::{Add, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exponents beyond this are rejected rather than expanded.
const MAX_EXPONENT: i64 = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("not a decimal number: `{0}`")]
pub struct NumberParseError(pub String);

/// An exact rational value that renders as a terminating decimal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Number(BigRational);

impl Number {
    pub fn from_i64(v: i64) -> Self {
        Number(BigRational::from_integer(v.into()))
    }

    pub fn from_ratio(r: BigRational) -> Self {
        Number(r)
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn into_ratio(self) -> BigRational {
        self.0
    }

    /// WikiSQL-style coercion: trims, drops thousands separators, then parses.
    pub fn coerce(raw: &str) -> Option<Number> {
        let cleaned: String = raw.trim().chars().filter(|c| *c != ',').collect();
        cleaned.parse().ok()
    }

    /// Rounds half away from zero to `places` fractional digits.
    pub fn round_dp(&self, places: u32) -> Number {
        let scale = BigInt::from(10u32).pow(places);
        let scaled = &self.0 * BigRational::from_integer(scale.clone());
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let rounded = if scaled.is_negative() { -((-scaled) + half).floor() } else { (scaled + half).floor() };
        Number(rounded / BigRational::from_integer(scale))
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }
}

impl Add for &Number {
    type Output = Number;
    fn add(self, rhs: &Number) -> Number {
        Number(&self.0 + &rhs.0)
    }
}

impl Sub for &Number {
    type Output = Number;
    fn sub(self, rhs: &Number) -> Number {
        Number(&self.0 - &rhs.0)
    }
}

impl FromStr for Number {
    type Err = NumberParseError;

    /// `[+-]digits[.digits][e[+-]digits]`, with digits on at least one side
    /// of the point.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || NumberParseError(s.to_string());
        let bytes = s.as_bytes();
        let mut i = 0;
        let negative = match bytes.first() {
            Some(b'-') => {
                i += 1;
                true
            }
            Some(b'+') => {
                i += 1;
                false
            }
            _ => false,
        };
        let mut digits = String::new();
        let mut frac_len: i64 = 0;
        let mut seen_point = false;
        while i < bytes.len() {
            match bytes[i] {
                b'0'..=b'9' => {
                    digits.push(bytes[i] as char);
                    if seen_point {
                        frac_len += 1;
                    }
                }
                b'.' if !seen_point => seen_point = true,
                _ => break,
            }
            i += 1;
        }
        if digits.is_empty() {
            return Err(err());
        }
        let mut exponent: i64 = 0;
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let rest = &s[i + 1..];
            exponent = rest.parse().map_err(|_| err())?;
            if exponent.abs() > MAX_EXPONENT {
                return Err(err());
            }
        } else if i != bytes.len() {
            return Err(err());
        }
        let mantissa: BigInt = digits.parse().map_err(|_| err())?;
        let mantissa = if negative { -mantissa } else { mantissa };
        let shift = exponent - frac_len;
        let ten = BigInt::from(10u32);
        let value = if shift >= 0 {
            BigRational::from_integer(mantissa * ten.pow(shift as u32))
        } else {
            BigRational::new(mantissa, ten.pow((-shift) as u32))
        };
        Ok(Number(value))
    }
}

impl fmt::Display for Number {
    /// Integers print without a fractional part; other values print their
    /// shortest exact decimal expansion. Values without a terminating
    /// expansion are rounded to 10 places.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            return write!(f, "{}", self.0.numer());
        }
        let denom = self.0.denom();
        let (twos, rest) = strip_factor(denom, 2);
        let (fives, rest) = strip_factor(&rest, 5);
        let value = if rest.is_one() { self.clone() } else { self.round_dp(10) };
        let places = if rest.is_one() { twos.max(fives) } else { 10 };
        let scaled = value.0 * BigRational::from_integer(BigInt::from(10u32).pow(places as u32));
        debug_assert!(scaled.is_integer());
        let n = scaled.to_integer();
        let (sign, magnitude) = match n.sign() {
            Sign::Minus => ("-", -n),
            _ => ("", n),
        };
        let digits = magnitude.to_string();
        let digits = format!("{digits:0>width$}", width = places + 1);
        let (int, frac) = digits.split_at(digits.len() - places);
        let frac = frac.trim_end_matches('0');
        if frac.is_empty() {
            write!(f, "{sign}{int}")
        } else {
            write!(f, "{sign}{int}.{frac}")
        }
    }
}

fn strip_factor(n: &BigInt, factor: u32) -> (usize, BigInt) {
    let factor = BigInt::from(factor);
    let mut n = n.clone();
    let mut count = 0;
    while !n.is_zero() && n.is_multiple_of(&factor) {
        n /= &factor;
        count += 1;
    }
    (count, n)
}

impl Number {
    /// Lossy conversion for diagnostics.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}
