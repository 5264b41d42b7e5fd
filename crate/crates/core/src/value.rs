//! Exact values of catalog sequences at a single index.
//!
//! A [`Value`] is a finite `Q(i)`-linear combination of real positive atoms:
//! the unit, products of prime radicals `Π p^e` with `0 < e < 1`,
//! reciprocal binary logarithms, and powers or reciprocals whose exponent or
//! argument is too large to expand. Radical atoms are in canonical form, so
//! combinations of the unit and radicals are zero exactly when every
//! coefficient is zero (linear independence of prime radicals over `Q`).
//! Mixtures involving the other atoms fall back to certified enclosures.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::certified::{
    log2_enclose, pow_enclose, pow_lower_small_base, pow_upper_small_base,
    sqrt_enclose, two_pow_neg, CertifiedReal, PRECISION_FLOOR,
};
use crate::error::{Error, ParseError};
use crate::families::Index;
use crate::scalar::{format_rational, parse_rational, Rational, Scalar};

/// Largest number of bits a power `base^n` may have before it is kept symbolic.
const EXPAND_BITS: u64 = 1 << 14;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Atom {
    One,
    /// `Π p^e` over distinct primes in increasing order, each `0 < e < 1`.
    Radical(Vec<(u64, Rational)>),
    /// `1 / log2(r)` with `r` not a perfect power and not a power of two.
    InvLog2(BigUint),
    /// `base^exponent` with an exponent too large to expand.
    Geom { base: Rational, exponent: Index },
    /// `1 / n` for `n` too large to expand.
    InvIndex(Index),
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Value {
    terms: BTreeMap<Atom, Scalar>,
}

fn factorize(mut m: u64) -> Vec<(u64, u32)> {
    let mut out = vec![];
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            let mut k = 0;
            while m % p == 0 {
                m /= p;
                k += 1;
            }
            out.push((p, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

fn pow_u(q: &Rational, e: u64) -> Rational {
    Rational::new(
        num_traits::pow(q.numer().clone(), e as usize),
        num_traits::pow(q.denom().clone(), e as usize),
    )
}

/// Smallest `s` and largest `e` with `s^e = r`.
fn perfect_power(r: &BigUint) -> (BigUint, u32) {
    for e in (2..=r.bits() as u32).rev() {
        let s = r.nth_root(e);
        if num_traits::pow(s.clone(), e as usize) == *r {
            return (s, e);
        }
    }
    (r.clone(), 1)
}

impl Value {
    pub fn zero() -> Self {
        Value::default()
    }

    pub fn scalar(c: Scalar) -> Self {
        Value::atom(Atom::One, c)
    }

    pub fn rational(q: Rational) -> Self {
        Value::scalar(Scalar::real(q))
    }

    pub fn one() -> Self {
        Value::rational(Rational::one())
    }

    fn atom(a: Atom, c: Scalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(a, c);
        }
        Value { terms }
    }

    /// `m^(-alpha)` for an integer `m >= 1`, in canonical radical form.
    pub fn inverse_power(m: u64, alpha: &Rational) -> Self {
        assert!(m >= 1, "inverse power of zero");
        let mut coeff = Rational::one();
        let mut radical = vec![];
        for (p, k) in factorize(m) {
            let e = alpha * Rational::from_integer(BigInt::from(k));
            let whole = e.ceil();
            let frac = &whole - &e;
            let whole = whole.to_integer().to_i64().expect("exponent too large");
            let pq = Rational::from_integer(BigInt::from(p));
            coeff *= if whole >= 0 {
                pow_u(&pq, whole as u64).recip()
            } else {
                pow_u(&pq, whole.unsigned_abs())
            };
            if !frac.is_zero() {
                radical.push((p, frac));
            }
        }
        if radical.is_empty() {
            Value::rational(coeff)
        } else {
            Value::atom(Atom::Radical(radical), Scalar::real(coeff))
        }
    }

    /// `1 / log2(r)` for an integer `r >= 2`.
    pub fn inverse_log2(r: &BigUint) -> Self {
        assert!(*r >= BigUint::from(2u32), "log2 argument below 2");
        let (s, e) = perfect_power(r);
        let scale = Rational::new(BigInt::one(), BigInt::from(e));
        if s.count_ones() == 1 {
            let k = s.bits() - 1;
            return Value::rational(scale / Rational::from_integer(BigInt::from(k)));
        }
        Value::atom(Atom::InvLog2(s), Scalar::real(scale))
    }

    /// `base^n` for a positive rational base.
    pub fn power(base: &Rational, n: &Index) -> Self {
        assert!(base.is_positive(), "power of a non-positive base");
        if base.is_one() {
            return Value::one();
        }
        let width = base.numer().bits().max(base.denom().bits());
        if let Some(e) = n.to_u64() {
            if e.saturating_mul(width) <= EXPAND_BITS {
                return Value::rational(pow_u(base, e));
            }
        }
        Value::atom(
            Atom::Geom {
                base: base.clone(),
                exponent: n.clone(),
            },
            Scalar::one(),
        )
    }

    /// `1 / n` for `n >= 1`.
    pub fn reciprocal(n: &Index) -> Self {
        assert!(!n.is_zero(), "reciprocal of zero");
        if n.depth() < EXPAND_BITS {
            let v = BigInt::from(n.to_biguint());
            return Value::rational(Rational::new(BigInt::one(), v));
        }
        Value::atom(Atom::InvIndex(n.clone()), Scalar::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Atom, &Scalar)> {
        self.terms.iter()
    }

    /// The value as an exact complex rational, when it is one.
    pub fn as_scalar(&self) -> Option<Scalar> {
        match self.terms.len() {
            0 => Some(Scalar::zero()),
            1 => self.terms.get(&Atom::One).cloned(),
            _ => None,
        }
    }

    /// Decides `self != 0`. Exact for single atoms and for combinations of
    /// the unit and radicals; otherwise by enclosure refinement down to the
    /// precision floor.
    pub fn is_nonzero(&self) -> Result<bool, Error> {
        if self.terms.is_empty() {
            return Ok(false);
        }
        if self.terms.len() == 1
            || self
                .terms
                .keys()
                .all(|a| matches!(a, Atom::One | Atom::Radical(_)))
        {
            return Ok(true);
        }
        let mut prec = 16;
        while prec <= PRECISION_FLOOR {
            let (re, im) = self.enclose(prec)?;
            if re.excludes_zero() || im.excludes_zero() {
                return Ok(true);
            }
            prec *= 2;
        }
        Err(Error::Undecided(format!("zero test for {self}")))
    }

    pub fn scale(&self, c: &Scalar) -> Value {
        let mut out = Value::zero();
        if c.is_zero() {
            return out;
        }
        for (a, k) in &self.terms {
            out.terms.insert(a.clone(), k * c);
        }
        out
    }

    fn add_term(&mut self, a: &Atom, c: &Scalar) {
        let entry = self.terms.entry(a.clone()).or_default();
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(a);
        }
    }

    /// Enclosures of the real and imaginary parts, each of width at most
    /// `2^-prec` unless exact.
    pub fn enclose(&self, prec: u32) -> Result<(CertifiedReal, CertifiedReal), Error> {
        let mut re = CertifiedReal::zero();
        let mut im = CertifiedReal::zero();
        let guard = 2 + (self.terms.len() as u64).next_power_of_two().trailing_zeros();
        for (a, c) in &self.terms {
            let mag = c.re.abs().max(c.im.abs()).ceil().to_integer();
            let extra = mag.bits() as u32;
            let e = a.enclose(prec + guard + extra)?;
            re = &re + &e.scale(&c.re);
            im = &im + &e.scale(&c.im);
        }
        Ok((tidy(re, prec), tidy(im, prec)))
    }

    /// Enclosure of `|self|`, width about `2^-prec` away from zero.
    pub fn abs_enclose(&self, prec: u32) -> Result<CertifiedReal, Error> {
        let (re, im) = self.enclose(prec + 2)?;
        if im.is_exact() && im.lo().is_zero() {
            return Ok(abs_interval(&re));
        }
        let (a, b) = (abs_interval(&re), abs_interval(&im));
        let lo = a.lo() * a.lo() + b.lo() * b.lo();
        let hi = a.hi() * a.hi() + b.hi() * b.hi();
        Ok(CertifiedReal::new(
            sqrt_enclose(&lo, prec + 2).lo().clone(),
            sqrt_enclose(&hi, prec + 2).hi().clone(),
        ))
    }
}

fn tidy(x: CertifiedReal, prec: u32) -> CertifiedReal {
    if x.is_exact() {
        x
    } else {
        x.round(prec + 2)
    }
}

/// `{|t| : t in x}`.
pub fn abs_interval(x: &CertifiedReal) -> CertifiedReal {
    if !x.lo().is_negative() {
        x.clone()
    } else if !x.hi().is_positive() {
        -x
    } else {
        CertifiedReal::new(Rational::zero(), x.hi().clone().max(-x.lo().clone()))
    }
}

impl Atom {
    /// Enclosure of the atom, width at most `2^-prec`.
    pub fn enclose(&self, prec: u32) -> Result<CertifiedReal, Error> {
        match self {
            Atom::One => Ok(CertifiedReal::exact(Rational::one())),
            Atom::Radical(factors) => {
                let d = factors
                    .iter()
                    .fold(BigInt::one(), |acc, (_, e)| acc.lcm(e.denom()));
                let d32 = d.to_u32().expect("radical degree too large");
                let mut m = Rational::one();
                for (p, e) in factors {
                    let k = (e * Rational::from_integer(d.clone())).to_integer();
                    m *= pow_u(
                        &Rational::from_integer(BigInt::from(*p)),
                        k.to_u64().expect("radical exponent"),
                    );
                }
                Ok(pow_enclose(&m, &Rational::new(BigInt::one(), BigInt::from(d32)), prec))
            }
            Atom::InvLog2(r) => {
                // log2(r) > 1, so 1/x loses no absolute precision.
                let l = log2_enclose(r, prec + 1);
                Ok(l.recip_pos().expect("positive log").round(prec + 1))
            }
            Atom::Geom { base, exponent } => {
                if base > &Rational::one() {
                    return Err(Error::Overflow(format!(
                        "{}^{}",
                        format_rational(base),
                        exponent
                    )));
                }
                let n = exponent.clamp_u64(u64::MAX);
                let hi = pow_upper_small_base(base, n, prec + 4);
                let lo = if hi <= two_pow_neg(prec + 1) || exponent.to_u64().is_none() {
                    Rational::zero()
                } else {
                    pow_lower_small_base(base, n, prec + 4)
                };
                Ok(CertifiedReal::new(lo, hi))
            }
            Atom::InvIndex(n) => {
                let d = n.depth();
                if d > prec as u64 + 1 {
                    // n >= 2^d, so 2^-(prec+1) is a valid (and cheap) upper bound.
                    Ok(CertifiedReal::new(Rational::zero(), two_pow_neg(prec + 1)))
                } else {
                    let v = BigInt::from(n.to_biguint());
                    Ok(CertifiedReal::exact(Rational::new(BigInt::one(), v)))
                }
            }
        }
    }
}

impl Add for &Value {
    type Output = Value;

    fn add(self, other: &Value) -> Value {
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.add_term(a, c);
        }
        out
    }
}

impl Add for Value {
    type Output = Value;

    fn add(self, other: Value) -> Value {
        &self + &other
    }
}

impl Neg for &Value {
    type Output = Value;

    fn neg(self) -> Value {
        self.scale(&-Scalar::one())
    }
}

impl Sub for &Value {
    type Output = Value;

    fn sub(self, other: &Value) -> Value {
        self + &-other
    }
}

impl Mul<&Scalar> for &Value {
    type Output = Value;

    fn mul(self, c: &Scalar) -> Value {
        self.scale(c)
    }
}

impl From<Scalar> for Value {
    fn from(c: Scalar) -> Self {
        Value::scalar(c)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::One => write!(f, "1"),
            Atom::Radical(factors) => {
                write!(f, "rad(")?;
                for (i, (p, e)) in factors.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}^{}", format_rational(e))?;
                }
                write!(f, ")")
            }
            Atom::InvLog2(r) => write!(f, "invlog2({r})"),
            Atom::Geom { base, exponent } => {
                write!(f, "pow({},{exponent})", format_rational(base))
            }
            Atom::InvIndex(n) => write!(f, "inv({n})"),
        }
    }
}

impl FromStr for Atom {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseError::Sequence(format!("bad atom `{s}`"));
        let s = s.trim();
        if s == "1" {
            return Ok(Atom::One);
        }
        let (head, inner) = s
            .split_once('(')
            .and_then(|(h, r)| r.strip_suffix(')').map(|r| (h, r)))
            .ok_or_else(err)?;
        match head {
            "rad" => {
                let mut factors = vec![];
                for part in inner.split(',') {
                    let (p, e) = part.split_once('^').ok_or_else(err)?;
                    let p: u64 = p.parse().map_err(|_| err())?;
                    let e = parse_rational(e)?;
                    if e <= Rational::zero() || e >= Rational::one() {
                        return Err(err());
                    }
                    factors.push((p, e));
                }
                if factors.is_empty() || !factors.windows(2).all(|w| w[0].0 < w[1].0) {
                    return Err(err());
                }
                Ok(Atom::Radical(factors))
            }
            "invlog2" => Ok(Atom::InvLog2(inner.parse().map_err(|_| err())?)),
            "pow" => {
                let (b, e) = inner.split_once(',').ok_or_else(err)?;
                Ok(Atom::Geom {
                    base: parse_rational(b)?,
                    exponent: e.parse()?,
                })
            }
            "inv" => Ok(Atom::InvIndex(inner.parse()?)),
            _ => Err(err()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (a, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match a {
                Atom::One => write!(f, "({c})")?,
                _ => write!(f, "({c})*{a}")?,
            }
        }
        Ok(())
    }
}

/// Serialized as a list of `[atom, re, im]` triples.
impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.terms.len()))?;
        for (a, c) in &self.terms {
            seq.serialize_element(&(a.to_string(), format_rational(&c.re), format_rational(&c.im)))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw: Vec<(String, String, String)> = Vec::deserialize(d)?;
        let mut v = Value::zero();
        for (a, re, im) in raw {
            let atom: Atom = a.parse().map_err(D::Error::custom)?;
            let c = Scalar::new(
                parse_rational(&re).map_err(D::Error::custom)?,
                parse_rational(&im).map_err(D::Error::custom)?,
            );
            v.add_term(&atom, &c);
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn radicals_are_canonical() {
        // 12^(-1/2) = 2^-1 * 3^(-1/2) = (1/6) * 3^(1/2)
        let v = Value::inverse_power(12, &rat(1, 2));
        let w = Value::inverse_power(3, &rat(1, 2)).scale(&Scalar::real(rat(1, 2)));
        assert_eq!(v, w);
        assert_eq!(Value::inverse_power(4, &rat(1, 2)), Value::rational(rat(1, 2)));
        assert_eq!(Value::inverse_power(9, &rat(3, 2)), Value::rational(rat(1, 27)));
        assert!(Value::inverse_power(6, &rat(1, 3)).as_scalar().is_none());
    }

    #[test]
    fn radical_enclosure_matches_float() {
        let v = Value::inverse_power(3, &rat(1, 2));
        let (re, im) = v.enclose(40).unwrap();
        assert!(im.is_exact());
        assert!(re.width() <= two_pow_neg(40));
        assert!((re.approx() - 3f64.powf(-0.5)).abs() < 1e-10);
    }

    #[test]
    fn logs_and_powers() {
        assert_eq!(Value::inverse_log2(&BigUint::from(8u32)), Value::rational(rat(1, 3)));
        // log2(9) = 2 log2(3)
        assert_eq!(
            Value::inverse_log2(&BigUint::from(9u32)),
            Value::inverse_log2(&BigUint::from(3u32)).scale(&Scalar::real(rat(1, 2)))
        );
        assert_eq!(Value::power(&rat(1, 2), &Index::from(3)), Value::rational(rat(1, 8)));
        let huge = Index::from_big(BigUint::one() << 200u32);
        let g = Value::power(&rat(1, 2), &huge);
        assert!(g.is_nonzero().unwrap());
        let (re, _) = g.enclose(30).unwrap();
        assert!(re.hi() <= &two_pow_neg(30));
        assert!(Value::power(&rat(2, 1), &huge).enclose(10).is_err());
    }

    #[test]
    fn cancellation_is_exact() {
        let a = Value::inverse_power(5, &rat(2, 3));
        let b = &a - &a;
        assert!(b.is_zero());
        let c = &a + &Value::one();
        assert!(c.is_nonzero().unwrap());
        let l = &Value::inverse_log2(&BigUint::from(3u32)) - &Value::inverse_log2(&BigUint::from(5u32));
        assert!(l.is_nonzero().unwrap());
    }

    #[test]
    fn text_round_trip() {
        let v = &(&Value::inverse_power(6, &rat(1, 3)) + &Value::inverse_log2(&BigUint::from(10u32)))
            + &Value::power(&rat(1, 3), &Index::from_big(BigUint::one() << 70u32));
        let s = serde_json::to_string(&v).unwrap();
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
