//! Exact rational helpers shared by every module.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::str::FromStr;

/// Arbitrary-precision rational used for weights, ratios, values and potentials.
pub type Q = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {input:?} as a rational: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: String,
}

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"3"`, `"-1/3"`, `"0.55"` or `"1.5e-3"` exactly.
pub fn parse_q(input: &str) -> Result<Q, ParseRationalError> {
    let err = |reason: &str| ParseRationalError {
        input: input.to_string(),
        reason: reason.to_string(),
    };
    let s = input.trim();
    if s.is_empty() {
        return Err(err("empty string"));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| err("bad numerator"))?;
        let d = BigInt::from_str(d.trim()).map_err(|_| err("bad denominator"))?;
        if d.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(Q::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i64 = s[pos + 1..].parse().map_err(|_| err("bad exponent"))?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err("no digits"));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err("unexpected character"));
    }
    let all = format!("{int_part}{frac_part}");
    let num = BigInt::from_str(if all.is_empty() { "0" } else { &all }).map_err(|_| err("bad digits"))?;
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let mut v = if scale >= 0 {
        Q::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Q::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        v = -v;
    }
    Ok(v)
}

/// Exact text form: `"5"`, `"-1/3"`.
pub fn fmt_q(v: &Q) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

pub fn to_f64(v: &Q) -> f64 {
    match v.to_f64() {
        Some(x) if x.is_finite() => x,
        _ => {
            // huge numerators and denominators: scale both down first
            let shift = v.numer().bits().max(v.denom().bits()).saturating_sub(900);
            let n: BigInt = v.numer() >> shift;
            let d: BigInt = v.denom() >> shift;
            n.to_f64().unwrap_or(0.0) / d.to_f64().unwrap_or(1.0)
        }
    }
}

/// The exact binary value of a finite f64.
pub fn from_f64(x: f64) -> Q {
    Q::from_float(x).expect("finite float")
}

/// Ordering by cross-multiplication. Faster than `Ord` on large terms and
/// valid for unreduced values.
pub fn cmp_q(a: &Q, b: &Q) -> std::cmp::Ordering {
    (a.numer() * b.denom()).cmp(&(b.numer() * a.denom()))
}

pub fn min_q<'a>(a: &'a Q, b: &'a Q) -> &'a Q {
    if a <= b {
        a
    } else {
        b
    }
}

pub fn max_q<'a>(a: &'a Q, b: &'a Q) -> &'a Q {
    if a >= b {
        a
    } else {
        b
    }
}

pub fn lcm_denominators<'a>(values: impl IntoIterator<Item = &'a Q>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// floor(log2 v) for v > 0.
pub fn log2_floor(v: &Q) -> i64 {
    assert!(v.is_positive(), "log2 of a non-positive value");
    let (n, d) = (v.numer(), v.denom());
    let e = n.bits() as i64 - d.bits() as i64;
    let below = if e >= 0 { *n < (d << e as usize) } else { (n << (-e) as usize) < *d };
    if below {
        e - 1
    } else {
        e
    }
}

pub fn abs_q(v: &Q) -> Q {
    v.abs()
}

/// Serde adapter writing rationals as exact strings.
pub mod qstr {
    use super::{fmt_q, parse_q, Q};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).map_err(serde::de::Error::custom)
    }
}

pub mod qstr_map {
    use super::{fmt_q, parse_q, Q};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer>(v: &BTreeMap<String, Q>, s: S) -> Result<S::Ok, S::Error> {
        let m: BTreeMap<&String, String> = v.iter().map(|(k, x)| (k, fmt_q(x))).collect();
        m.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, Q>, D::Error> {
        let m = BTreeMap::<String, String>::deserialize(d)?;
        m.into_iter()
            .map(|(k, s)| parse_q(&s).map(|x| (k, x)).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_q("1/3").unwrap(), qf(1, 3));
        assert_eq!(parse_q("-2/4").unwrap(), qf(-1, 2));
        assert_eq!(parse_q("0.55").unwrap(), qf(11, 20));
        assert_eq!(parse_q("-.5").unwrap(), qf(-1, 2));
        assert_eq!(parse_q("7").unwrap(), q(7));
        assert_eq!(parse_q("1e-3").unwrap(), qf(1, 1000));
        assert_eq!(parse_q("2.5E2").unwrap(), q(250));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("abc").is_err());
        assert!(parse_q("").is_err());
    }

    #[test]
    fn log2_floor_values() {
        assert_eq!(log2_floor(&q(1)), 0);
        assert_eq!(log2_floor(&q(8)), 3);
        assert_eq!(log2_floor(&q(9)), 3);
        assert_eq!(log2_floor(&qf(1, 3)), -2);
        assert_eq!(log2_floor(&qf(1, 4)), -2);
        assert_eq!(log2_floor(&qf(3, 4)), -1);
    }

    #[test]
    fn formats_round_trip() {
        for s in ["0", "5", "-1/3", "22/7"] {
            assert_eq!(fmt_q(&parse_q(s).unwrap()), s);
        }
    }

    #[test]
    fn float_conversion_handles_large_parts() {
        let big = Q::new(BigInt::from(3) << 2000, BigInt::from(1) << 2001);
        assert!((to_f64(&big) - 1.5).abs() < 1e-12);
    }
}
