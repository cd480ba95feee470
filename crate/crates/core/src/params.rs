//! Dynamics parameters: failure probability, carrier capacity, ball count.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Failure probability of a pickup attempt, kept as an exact rational.
///
/// Monte Carlo code draws coins against an integer threshold derived from the
/// rational value, so the same `Epsilon` gives bit-identical coin streams on
/// every platform. The algebra (kernels, reflection vectors, certificates)
/// works on [`Epsilon::exact`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Epsilon(Rational64);

impl Epsilon {
    pub fn new(value: Rational64) -> Result<Self> {
        if value < Rational64::zero() || value > Rational64::one() {
            return Err(Error::InvalidParams(format!("epsilon {value} not in [0,1]")));
        }
        Ok(Self(value))
    }

    pub fn from_ratio(numer: i64, denom: i64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::InvalidParams("epsilon denominator is zero".into()));
        }
        Self::new(Rational64::new(numer, denom))
    }

    /// Builds from an `f64` through its shortest decimal representation, so
    /// `0.3` becomes exactly `3/10`.
    pub fn from_f64(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidParams(format!("epsilon {value} is not finite")));
        }
        format!("{value}").parse()
    }

    pub fn ratio(&self) -> Rational64 {
        self.0
    }

    pub fn exact(&self) -> BigRational {
        BigRational::new(BigInt::from(*self.0.numer()), BigInt::from(*self.0.denom()))
    }

    pub fn value(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    /// Threshold `t` such that a uniform `u64` below `t` is a successful
    /// pickup, i.e. `t = floor((1 - eps) * 2^64)`. Only meaningful for
    /// `0 < eps < 1`.
    pub(crate) fn success_threshold(&self) -> u64 {
        let num = *self.0.numer() as u128;
        let den = *self.0.denom() as u128;
        // (den - num) / den * 2^64, computed without overflow for den < 2^63.
        let q = ((den - num) << 64) / den;
        q.min(u64::MAX as u128) as u64
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Epsilon {
    type Err = Error;

    /// Accepts `p/q` or a plain decimal such as `0.25` or `1e-3`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| Error::Parse(format!("bad epsilon {s:?}")))?;
            let d: i64 = d.trim().parse().map_err(|_| Error::Parse(format!("bad epsilon {s:?}")))?;
            return Self::from_ratio(n, d);
        }
        parse_decimal(s).and_then(Self::new)
    }
}

impl Serialize for Epsilon {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Epsilon {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(f64),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Number(x) => Epsilon::from_f64(x).map_err(serde::de::Error::custom),
        }
    }
}

fn parse_decimal(s: &str) -> Result<Rational64> {
    let bad = || Error::Parse(format!("bad decimal {s:?}"));
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    if !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let mut numer: i64 = digits.trim_start_matches('0').parse().unwrap_or(0);
    let scale = exponent - frac_part.len() as i32;
    let mut denom: i64 = 1;
    let pow10 = |k: u32| 10i64.checked_pow(k).ok_or_else(bad);
    if scale >= 0 {
        numer = numer.checked_mul(pow10(scale as u32)?).ok_or_else(bad)?;
    } else {
        denom = pow10((-scale) as u32)?;
    }
    if negative {
        numer = -numer;
    }
    Ok(Rational64::new(numer, denom))
}

/// Carrier capacity. `Unbounded` compares as +infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Capacity {
    Finite(u32),
    Unbounded,
}

impl Capacity {
    pub fn finite(c: u32) -> Result<Self> {
        if c == 0 {
            return Err(Error::InvalidParams("capacity must be at least 1".into()));
        }
        Ok(Capacity::Finite(c))
    }

    /// Maximum load as an integer, `u32::MAX` standing in for infinity.
    pub fn limit(&self) -> u32 {
        match self {
            Capacity::Finite(c) => *c,
            Capacity::Unbounded => u32::MAX,
        }
    }

    /// Whether the carrier can never be full in a system of `d` balls.
    pub fn never_binds(&self, d: usize) -> bool {
        self.limit() as u64 >= d as u64
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, Capacity::Finite(1))
    }
}

impl PartialOrd for Capacity {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Capacity {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self, other) {
            (Capacity::Unbounded, Capacity::Unbounded) => std::cmp::Ordering::Equal,
            (Capacity::Unbounded, _) => std::cmp::Ordering::Greater,
            (_, Capacity::Unbounded) => std::cmp::Ordering::Less,
            (Capacity::Finite(a), Capacity::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::Finite(c) => write!(f, "{c}"),
            Capacity::Unbounded => write!(f, "inf"),
        }
    }
}

impl FromStr for Capacity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "unbounded" => Ok(Capacity::Unbounded),
            other => {
                let c: u32 = other
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad capacity {s:?}")))?;
                Capacity::finite(c)
            }
        }
    }
}

impl Serialize for Capacity {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Capacity {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(u32),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Number(c) => Capacity::finite(c).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicsParams {
    pub epsilon: Epsilon,
    pub capacity: Capacity,
    pub d: usize,
}

impl DynamicsParams {
    pub fn new(epsilon: Epsilon, capacity: Capacity, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParams("ball count d must be at least 1".into()));
        }
        Ok(Self { epsilon, capacity, d })
    }
}

/// Exact rational type used by the algebraic modules.
pub type Q = BigRational;

pub fn q_int(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

pub fn q_ratio(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Formats as `p/q`, or `p` for integers.
pub fn q_to_string(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn q_parse(s: &str) -> Result<Q> {
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

pub fn q_to_f64(q: &Q) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Huge numerators/denominators: fall back to a scaled division.
        let sign = if q.is_negative() { -1.0 } else { 1.0 };
        let n = q.numer().abs().to_string();
        let d = q.denom().to_string();
        sign * n.parse::<f64>().unwrap_or(f64::NAN) / d.parse::<f64>().unwrap_or(f64::NAN)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_parsing_is_exact() {
        assert_eq!("0.3".parse::<Epsilon>().unwrap().ratio(), Rational64::new(3, 10));
        assert_eq!("1e-3".parse::<Epsilon>().unwrap().ratio(), Rational64::new(1, 1000));
        assert_eq!("0.999".parse::<Epsilon>().unwrap().ratio(), Rational64::new(999, 1000));
        assert_eq!("1/3".parse::<Epsilon>().unwrap().ratio(), Rational64::new(1, 3));
        assert_eq!("1".parse::<Epsilon>().unwrap().ratio(), Rational64::one());
        assert_eq!(Epsilon::from_f64(0.2).unwrap().ratio(), Rational64::new(1, 5));
        assert!("1.5".parse::<Epsilon>().is_err());
        assert!("-0.1".parse::<Epsilon>().is_err());
        assert!("abc".parse::<Epsilon>().is_err());
    }

    #[test]
    fn threshold_matches_probability() {
        let half: Epsilon = "0.5".parse().unwrap();
        assert_eq!(half.success_threshold(), 1u64 << 63);
        let tenth: Epsilon = "0.1".parse().unwrap();
        let t = tenth.success_threshold() as f64 / 2f64.powi(64);
        assert!((t - 0.9).abs() < 1e-15);
    }

    #[test]
    fn capacity_order_and_parse() {
        assert!(Capacity::Unbounded > Capacity::Finite(1_000_000));
        assert!(Capacity::Finite(2) > Capacity::Finite(1));
        assert_eq!("inf".parse::<Capacity>().unwrap(), Capacity::Unbounded);
        assert_eq!("3".parse::<Capacity>().unwrap(), Capacity::Finite(3));
        assert!("0".parse::<Capacity>().is_err());
        assert!(Capacity::Finite(3).never_binds(3));
        assert!(!Capacity::Finite(2).never_binds(3));
    }

    #[test]
    fn rational_round_trip() {
        let q = q_ratio(-6, 4);
        assert_eq!(q_to_string(&q), "-3/2");
        assert_eq!(q_parse("-3/2").unwrap(), q);
        assert_eq!(q_parse("7").unwrap(), q_int(7));
    }
}
