//! Exact complex rationals (elements of Q + iQ).

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::ParseError;

/// An exact rational number.
pub type Rational = BigRational;

/// Builds a rational from a machine fraction. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"p/q"`, `"p"` or `"-p/q"`.
pub fn parse_rational(s: &str) -> Result<Rational, ParseError> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| ParseError::Rational(s.to_string()))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| ParseError::Rational(s.to_string()))?;
    if den.is_zero() {
        return Err(ParseError::Rational(s.to_string()));
    }
    Ok(Rational::new(num, den))
}

/// Canonical `"p/q"` text; integers print as `"p"`.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// A complex number with exact rational real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Scalar {
    pub re: Rational,
    pub im: Rational,
}

impl Scalar {
    pub fn new(re: Rational, im: Rational) -> Self {
        Scalar { re, im }
    }

    pub fn real(re: Rational) -> Self {
        Scalar {
            re,
            im: Rational::zero(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::real(Rational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Scalar::default()
    }

    pub fn one() -> Self {
        Scalar::from_int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// |z|^2, exact.
    pub fn norm_sqr(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn scale_real(&self, q: &Rational) -> Scalar {
        Scalar::new(&self.re * q, &self.im * q)
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(Scalar::new(&self.re / &n, -&self.im / &n))
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        Scalar::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, o: Scalar) -> Scalar {
        &self + &o
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, o: &Scalar) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        Scalar::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        Scalar::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, o: Scalar) -> Scalar {
        &self * &o
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::new(-&self.re, -&self.im)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl From<Rational> for Scalar {
    fn from(q: Rational) -> Self {
        Scalar::real(q)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", format_rational(&self.re))
        } else if self.re.is_zero() {
            write!(f, "{}i", format_rational(&self.im))
        } else {
            write!(
                f,
                "{}{}{}i",
                format_rational(&self.re),
                if self.im.is_negative() { "" } else { "+" },
                format_rational(&self.im)
            )
        }
    }
}

impl FromStr for Scalar {
    type Err = ParseError;

    /// Accepts a bare rational, or `"re,im"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(',') {
            Some((re, im)) => Ok(Scalar::new(parse_rational(re)?, parse_rational(im)?)),
            None => Ok(Scalar::real(parse_rational(s)?)),
        }
    }
}

/// Serde helpers storing rationals as `"p/q"` strings.
pub mod serde_rational {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

impl serde::Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeTuple;
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&format_rational(&self.re))?;
        t.serialize_element(&format_rational(&self.im))?;
        t.end()
    }
}

impl<'de> serde::Deserialize<'de> for Scalar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (re, im): (String, String) = serde::Deserialize::deserialize(d)?;
        Ok(Scalar::new(
            parse_rational(&re).map_err(serde::de::Error::custom)?,
            parse_rational(&im).map_err(serde::de::Error::custom)?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("6/4").unwrap(), rat(3, 2));
        assert_eq!(parse_rational("-3").unwrap(), rat(-3, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&rat(-3, 6)), "-1/2");
        assert_eq!(format_rational(&rat(4, 2)), "2");
    }

    #[test]
    fn complex_arithmetic() {
        let i = Scalar::new(rat(0, 1), rat(1, 1));
        assert_eq!(&i * &i, Scalar::from_int(-1));
        let z = Scalar::new(rat(1, 2), rat(-3, 4));
        assert_eq!(&z * &z.inv().unwrap(), Scalar::one());
        assert!(Scalar::zero().inv().is_none());
        assert_eq!(z.norm_sqr(), rat(13, 16));
    }

    #[test]
    fn serde_round_trip() {
        let z = Scalar::new(rat(-7, 3), rat(2, 5));
        let js = serde_json::to_string(&z).unwrap();
        assert_eq!(js, r#"["-7/3","2/5"]"#);
        let back: Scalar = serde_json::from_str(&js).unwrap();
        assert_eq!(back, z);
    }
}
