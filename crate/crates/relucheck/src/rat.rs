//! Exact rational scalars and vectors.
//!
//! Every quantity that enters a decision procedure lives here: weights,
//! biases, specification coefficients, witnesses. There is no floating
//! point anywhere on a decision path. Values are kept in canonical form
//! (reduced, positive denominator) after every operation, so equality is
//! structural.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::Error;

/// An exact rational number with arbitrary-precision numerator and
/// positive denominator, always reduced.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// Builds `n/d`. Fails on d = 0; the sign is normalized onto the numerator.
    pub fn new(n: i64, d: i64) -> Result<Self, Error> {
        if d == 0 {
            return Err(Error::ZeroDenominator);
        }
        Ok(Rational(BigRational::new(BigInt::from(n), BigInt::from(d))))
    }

    pub fn from_big(n: BigInt, d: BigInt) -> Result<Self, Error> {
        if d.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Rational(BigRational::new(n, d)))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self, Error> {
        if self.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

}

/// Parses `"p"`, `"p/q"` or an exact decimal like `"-2.625"`.
///
/// Decimals convert exactly as digits over a power of ten; binary floating
/// point is never involved.
pub fn parse_rational(text: &str) -> Result<Rational, Error> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::MalformedRational(text.to_string()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = parse_signed_int(num).ok_or_else(|| Error::MalformedRational(text.to_string()))?;
        // The denominator is a plain positive integer; a sign here is malformed.
        let d = parse_unsigned_int(den)
            .ok_or_else(|| Error::MalformedRational(text.to_string()))?;
        if d.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        return Rational::from_big(n, d);
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let (neg, int_digits) = split_sign(int_part);
        if !int_digits.chars().all(|c| c.is_ascii_digit())
            || frac_part.is_empty()
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return Err(Error::MalformedRational(text.to_string()));
        }
        let digits = format!("{}{}", int_digits, frac_part);
        let n = BigInt::from_str(&digits)
            .map_err(|_| Error::MalformedRational(text.to_string()))?;
        let d = num::pow::pow(BigInt::from(10), frac_part.len());
        let n = if neg { -n } else { n };
        return Rational::from_big(n, d);
    }
    let n = parse_signed_int(s).ok_or_else(|| Error::MalformedRational(text.to_string()))?;
    Ok(Rational(BigRational::from_integer(n)))
}

fn split_sign(s: &str) -> (bool, &str) {
    if let Some(rest) = s.strip_prefix('-') {
        (true, rest)
    } else if let Some(rest) = s.strip_prefix('+') {
        (false, rest)
    } else {
        (false, s)
    }
}

fn parse_signed_int(s: &str) -> Option<BigInt> {
    let (neg, digits) = split_sign(s);
    let v = parse_unsigned_int(digits)?;
    Some(if neg { -v } else { v })
}

fn parse_unsigned_int(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    BigInt::from_str(s).ok()
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_rational(s)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((self.0).$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero rational");
        Rational(self.0 / rhs.0)
    }
}

impl<'a> Div<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn div(self, rhs: &'a Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero rational");
        Rational(&self.0 / &rhs.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

/// A rational extended with positive infinity, used for radii where the
/// whole space is a legal ball (`eps = inf`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtRational {
    Finite(Rational),
    Infinity,
}

impl ExtRational {
    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtRational::Infinity)
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtRational::Finite(r) => Some(r),
            ExtRational::Infinity => None,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            ExtRational::Finite(r) => r.is_negative(),
            ExtRational::Infinity => false,
        }
    }

    /// True when a finite distance `d` satisfies `d <= self`.
    pub fn at_least(&self, d: &Rational) -> bool {
        match self {
            ExtRational::Finite(r) => d <= r,
            ExtRational::Infinity => true,
        }
    }
}

impl PartialOrd for ExtRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtRational::Infinity, ExtRational::Infinity) => Some(Ordering::Equal),
            (ExtRational::Infinity, _) => Some(Ordering::Greater),
            (_, ExtRational::Infinity) => Some(Ordering::Less),
            (ExtRational::Finite(a), ExtRational::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::Finite(r) => write!(f, "{}", r),
            ExtRational::Infinity => write!(f, "inf"),
        }
    }
}

pub fn parse_ext_rational(text: &str) -> Result<ExtRational, Error> {
    let s = text.trim();
    if s.eq_ignore_ascii_case("inf") || s == "∞" {
        return Ok(ExtRational::Infinity);
    }
    Ok(ExtRational::Finite(parse_rational(s)?))
}

impl FromStr for ExtRational {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_ext_rational(s)
    }
}

impl Serialize for ExtRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_ext_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// An ordered vector of exact rationals.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RatVector(Vec<Rational>);

impl RatVector {
    pub fn new(entries: Vec<Rational>) -> Self {
        RatVector(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        RatVector(vec![Rational::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Rational> {
        self.0
    }

    pub fn push(&mut self, r: Rational) {
        self.0.push(r);
    }

    pub fn concat(&self, other: &RatVector) -> RatVector {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        RatVector(v)
    }

    /// The first `k` coordinates as a fresh vector.
    pub fn take(&self, k: usize) -> RatVector {
        RatVector(self.0[..k].to_vec())
    }

    /// Coordinates `k..` as a fresh vector.
    pub fn skip(&self, k: usize) -> RatVector {
        RatVector(self.0[k..].to_vec())
    }
}

impl Index<usize> for RatVector {
    type Output = Rational;
    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

impl fmt::Debug for RatVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", r)?;
        }
        write!(f, ")")
    }
}

impl FromIterator<Rational> for RatVector {
    fn from_iter<T: IntoIterator<Item = Rational>>(iter: T) -> Self {
        RatVector(iter.into_iter().collect())
    }
}

/// The two metrics under which balls stay semi-linear.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "l1")]
    L1,
    #[serde(rename = "linf")]
    Linf,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::L1 => write!(f, "l1"),
            Metric::Linf => write!(f, "linf"),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "l1" | "1" | "d1" => Ok(Metric::L1),
            "linf" | "inf" | "dinf" => Ok(Metric::Linf),
            other => Err(Error::Malformed(format!("unknown metric '{}'", other))),
        }
    }
}

/// Distance between two vectors of equal dimension:
/// sum of coordinate gaps for L1, largest gap for Linf.
pub fn dist(metric: Metric, x: &RatVector, y: &RatVector) -> Result<Rational, Error> {
    if x.dim() != y.dim() {
        return Err(Error::DimMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    let mut acc = Rational::zero();
    for (a, b) in x.iter().zip(y.iter()) {
        let gap = (a - b).abs();
        match metric {
            Metric::L1 => acc += &gap,
            Metric::Linf => acc = acc.max(gap),
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn parse_canonicalizes() {
        assert_eq!(q("2/4"), q("1/2"));
        assert_eq!(q("2/4").to_string(), "1/2");
        assert_eq!(q("-0.25"), q("-1/4"));
        assert_eq!(q("6/3").to_string(), "2");
        assert_eq!(q("+3"), q("3"));
        assert_eq!(q("0.50"), q("1/2"));
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert!(matches!(parse_rational("3/0"), Err(Error::ZeroDenominator)));
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1/-2").is_err());
        assert!(parse_rational("a.b").is_err());
        assert!(parse_rational("1.").is_err());
        assert!(parse_rational("1e3").is_err());
    }

    #[test]
    fn display_roundtrip() {
        for s in ["0", "-7", "22/7", "-3/8", "1000000000000000000000/7"] {
            let r = q(s);
            assert_eq!(parse_rational(&r.to_string()).unwrap(), r);
        }
    }

    #[test]
    fn dist_examples() {
        let a = RatVector::new(vec![q("1"), q("2")]);
        assert_eq!(dist(Metric::L1, &a, &a).unwrap(), q("0"));
        let o = RatVector::zeros(2);
        let b = RatVector::new(vec![q("1"), q("-2")]);
        assert_eq!(dist(Metric::L1, &o, &b).unwrap(), q("3"));
        assert_eq!(dist(Metric::Linf, &o, &b).unwrap(), q("2"));
        let c = RatVector::zeros(3);
        assert!(dist(Metric::L1, &o, &c).is_err());
    }

    #[test]
    fn ext_rational_ordering() {
        let e = parse_ext_rational("inf").unwrap();
        assert!(e.is_infinite());
        assert!(e > ExtRational::Finite(q("1000000")));
        assert!(e.at_least(&q("123456789")));
        assert!(ExtRational::Finite(q("1/2")).at_least(&q("1/2")));
        assert!(!ExtRational::Finite(q("1/2")).at_least(&q("2/3")));
    }

    #[test]
    fn serde_as_strings() {
        let r = q("-5/3");
        let j = serde_json::to_string(&r).unwrap();
        assert_eq!(j, "\"-5/3\"");
        let back: Rational = serde_json::from_str(&j).unwrap();
        assert_eq!(back, r);
        let e: ExtRational = serde_json::from_str("\"inf\"").unwrap();
        assert!(e.is_infinite());
    }
}
