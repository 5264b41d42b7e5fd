//! The eleven sequence spaces of the chain
//! `c00 ⊊ A^∞ ⊊ cap(0) ⊊ ℓ^a ⊊ cap(a) ⊊ ℓ^b ⊊ cap(b) ⊊ c0 ⊊ ℓ^∞ ⊊ H ⊊ ℂ^ℕ₀`,
//! where `cap(p) = ⋂_{q>p} ℓ^q`.

mod membership;
mod metric;

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, ParseError};
use crate::scalar::{format_rational, parse_rational, Rational};

pub use membership::{LimitKind, MembershipVerdict, Reason, Rule, TailFact, Verdict};
pub use metric::{cap_distance, lp_distance, metric, metric_description, pointwise_modulus};

/// Which chain parameter an `ℓ^p` or `cap(p)` refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Param {
    A,
    B,
}

/// A space of the chain, named relative to the chain parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpaceId {
    C00,
    AInf,
    Cap0,
    Lp(Param),
    Cap(Param),
    C0,
    Linf,
    H,
    Full,
}

/// A space with its exponent resolved to a number. `Lp` and `Cap` accept any
/// exponent, which is convenient beyond the chain itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Space {
    C00,
    AInf,
    /// `⋂_{q>p} ℓ^q`, for `p >= 0`.
    Cap(Rational),
    /// `ℓ^p`, for `p > 0`.
    Lp(Rational),
    C0,
    Linf,
    H,
    Full,
}

/// Chain parameters `0 < a < b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainParams {
    a: Rational,
    b: Rational,
}

impl SpaceId {
    /// All eleven spaces in chain order.
    pub const ALL: [SpaceId; 11] = [
        SpaceId::C00,
        SpaceId::AInf,
        SpaceId::Cap0,
        SpaceId::Lp(Param::A),
        SpaceId::Cap(Param::A),
        SpaceId::Lp(Param::B),
        SpaceId::Cap(Param::B),
        SpaceId::C0,
        SpaceId::Linf,
        SpaceId::H,
        SpaceId::Full,
    ];

    /// Position in the chain, starting at 0 for `c00`.
    pub fn position(self) -> usize {
        SpaceId::ALL.iter().position(|s| *s == self).expect("listed")
    }

    /// The next larger space, if any.
    pub fn succ(self) -> Option<SpaceId> {
        SpaceId::ALL.get(self.position() + 1).copied()
    }

    pub fn pairs() -> impl Iterator<Item = (SpaceId, SpaceId)> {
        SpaceId::ALL
            .into_iter()
            .flat_map(|y| SpaceId::ALL.into_iter().map(move |x| (y, x)))
            .filter(|(y, x)| chain_lt(*y, *x))
    }
}

/// Strict chain order.
pub fn chain_lt(y: SpaceId, x: SpaceId) -> bool {
    y.position() < x.position()
}

impl fmt::Display for SpaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = |p: &Param| if *p == Param::A { "a" } else { "b" };
        match self {
            SpaceId::C00 => write!(f, "c00"),
            SpaceId::AInf => write!(f, "Ainf"),
            SpaceId::Cap0 => write!(f, "cap0"),
            SpaceId::Lp(q) => write!(f, "l({})", p(q)),
            SpaceId::Cap(q) => write!(f, "cap({})", p(q)),
            SpaceId::C0 => write!(f, "c0"),
            SpaceId::Linf => write!(f, "linf"),
            SpaceId::H => write!(f, "H"),
            SpaceId::Full => write!(f, "full"),
        }
    }
}

impl FromStr for SpaceId {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, ParseError> {
        SpaceId::ALL
            .into_iter()
            .find(|id| id.to_string() == s.trim())
            .ok_or_else(|| ParseError::Space(s.to_string()))
    }
}

impl Serialize for SpaceId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SpaceId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::C00 => write!(f, "c00"),
            Space::AInf => write!(f, "Ainf"),
            Space::Cap(p) if p.is_zero() => write!(f, "cap0"),
            Space::Cap(p) => write!(f, "cap({})", format_rational(p)),
            Space::Lp(p) => write!(f, "l({})", format_rational(p)),
            Space::C0 => write!(f, "c0"),
            Space::Linf => write!(f, "linf"),
            Space::H => write!(f, "H"),
            Space::Full => write!(f, "full"),
        }
    }
}

impl ChainParams {
    pub fn new(a: Rational, b: Rational) -> Result<Self, Error> {
        if !a.is_positive() || a >= b {
            return Err(Error::Precondition(format!(
                "chain parameters need 0 < a < b, got a = {}, b = {}",
                format_rational(&a),
                format_rational(&b)
            )));
        }
        Ok(ChainParams { a, b })
    }

    pub fn parse(a: &str, b: &str) -> Result<Self, Error> {
        ChainParams::new(parse_rational(a)?, parse_rational(b)?)
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn value(&self, p: Param) -> &Rational {
        match p {
            Param::A => &self.a,
            Param::B => &self.b,
        }
    }

    pub fn resolve(&self, id: SpaceId) -> Space {
        match id {
            SpaceId::C00 => Space::C00,
            SpaceId::AInf => Space::AInf,
            SpaceId::Cap0 => Space::Cap(Rational::zero()),
            SpaceId::Lp(p) => Space::Lp(self.value(p).clone()),
            SpaceId::Cap(p) => Space::Cap(self.value(p).clone()),
            SpaceId::C0 => Space::C0,
            SpaceId::Linf => Space::Linf,
            SpaceId::H => Space::H,
            SpaceId::Full => Space::Full,
        }
    }
}

impl Default for ChainParams {
    /// `(a, b) = (1, 2)`.
    fn default() -> Self {
        ChainParams::new(Rational::from_integer(1.into()), Rational::from_integer(2.into()))
            .expect("1 < 2")
    }
}

#[derive(Serialize, Deserialize)]
struct ChainRepr {
    a: String,
    b: String,
}

impl Serialize for ChainParams {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ChainRepr {
            a: format_rational(&self.a),
            b: format_rational(&self.b),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ChainParams {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = ChainRepr::deserialize(d)?;
        ChainParams::parse(&r.a, &r.b).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests;
