//! Exact fractions and their JSON representation.
//!
//! Every probability and game value in the crate is a [`Rational`]. On the
//! wire a fraction is always an object `{"num": .., "den": ..}` with integer
//! members; decimal members are rejected on input.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

/// Arbitrary precision fraction, always in lowest terms with positive denominator.
pub type Rational = BigRational;

/// Builds `num / den` from machine integers.
///
/// Panics if `den` is zero.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_int<T: Into<BigInt>>(value: T) -> Rational {
    Rational::from_integer(value.into())
}

/// Fraction from two big integers.
pub fn big_ratio(num: BigInt, den: BigInt) -> Rational {
    Rational::new(num, den)
}

pub fn is_probability(p: &Rational) -> bool {
    !p.is_negative() && *p <= Rational::one()
}

pub fn to_f64(p: &Rational) -> f64 {
    p.to_f64().unwrap_or(f64::NAN)
}

/// Least common multiple of the denominators of `values`.
pub fn common_denominator<'a, I: IntoIterator<Item = &'a Rational>>(values: I) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Serde adapter that writes a [`Rational`] as `{"num": .., "den": ..}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fraction(pub Rational);

impl From<Rational> for Fraction {
    fn from(value: Rational) -> Self {
        Fraction(value)
    }
}

impl From<Fraction> for Rational {
    fn from(value: Fraction) -> Self {
        value.0
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

fn int_to_json(value: &BigInt) -> serde_json::Value {
    match value.to_i64() {
        Some(v) => serde_json::Value::from(v),
        // Integers beyond i64 travel as decimal digit strings.
        None => serde_json::Value::from(value.to_string()),
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Fraction", 2)?;
        s.serialize_field("num", &int_to_json(self.0.numer()))?;
        s.serialize_field("den", &int_to_json(self.0.denom()))?;
        s.end()
    }
}

struct IntVisitor;

impl<'de> Visitor<'de> for IntVisitor {
    type Value = BigInt;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an integer or a string of decimal digits")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<BigInt, E> {
        Ok(BigInt::from(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<BigInt, E> {
        Ok(BigInt::from(v))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<BigInt, E> {
        Err(E::custom(format!(
            "decimal value {v} not accepted, use an exact integer"
        )))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<BigInt, E> {
        v.parse::<BigInt>()
            .map_err(|_| E::custom(format!("`{v}` is not an integer")))
    }
}

struct BigIntField(BigInt);

impl<'de> Deserialize<'de> for BigIntField {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(IntVisitor).map(BigIntField)
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            num: BigIntField,
            den: BigIntField,
        }
        let raw = Raw::deserialize(deserializer)?;
        if raw.den.0.is_zero() {
            return Err(de::Error::custom("zero denominator"));
        }
        Ok(Fraction(Rational::new(raw.num.0, raw.den.0)))
    }
}

/// `#[serde(with = "frac")]` for `Rational` fields.
pub mod frac {
    use super::{Fraction, Rational};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        Fraction(value.clone()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        Fraction::deserialize(d).map(|f| f.0)
    }
}

/// `#[serde(with = "opt_frac")]` for `Option<Rational>` fields.
pub mod opt_frac {
    use super::{Fraction, Rational};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(value: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        value.clone().map(Fraction).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        Ok(Option::<Fraction>::deserialize(d)?.map(|f| f.0))
    }
}
