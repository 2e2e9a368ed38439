//! Exact rational helpers used by the equilibrium solver.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational number.
pub type Q = BigRational;

pub fn q(numer: i64, denom: i64) -> Q {
    Q::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parses a plain decimal literal such as `"0.95"`, `"-1.5"`, `"3"` or
/// `"1e-3"` into the exact rational it denotes.
pub fn parse_decimal(s: &str) -> Option<Q> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Q::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Q::from_integer(numer);
    if scale >= 0 {
        value *= Q::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Q::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -value } else { value })
}

/// Converts a float to the rational whose shortest decimal representation it
/// prints as, so that `0.05_f64` becomes exactly `1/20`.
pub fn from_f64_decimal(x: f64) -> Option<Q> {
    if !x.is_finite() {
        return None;
    }
    parse_decimal(&format!("{x}"))
}

/// `"55/72"` for non-integers, `"1"` for integers.
pub fn display(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn abs(x: &Q) -> Q {
    x.abs()
}

pub fn pow(x: &Q, exp: usize) -> Q {
    let mut out = one();
    for _ in 0..exp {
        out *= x;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_parse_exactly() {
        assert_eq!(parse_decimal("0.95").unwrap(), q(19, 20));
        assert_eq!(parse_decimal("-2.435").unwrap(), q(-2435, 1000));
        assert_eq!(parse_decimal("1e-3").unwrap(), q(1, 1000));
        assert_eq!(parse_decimal("3").unwrap(), q(3, 1));
        assert_eq!(parse_decimal("11/24").unwrap(), q(11, 24));
        assert_eq!(parse_decimal(".5").unwrap(), q(1, 2));
        assert!(parse_decimal("abc").is_none());
        assert!(parse_decimal("1/0").is_none());
        assert!(parse_decimal("").is_none());
    }

    #[test]
    fn floats_round_trip_through_shortest_decimal() {
        assert_eq!(from_f64_decimal(0.05).unwrap(), q(1, 20));
        assert_eq!(from_f64_decimal(0.9).unwrap(), q(9, 10));
        assert!(from_f64_decimal(f64::NAN).is_none());
    }

    #[test]
    fn display_forms() {
        assert_eq!(display(&q(110, 144)), "55/72");
        assert_eq!(display(&q(4, 4)), "1");
    }
}
