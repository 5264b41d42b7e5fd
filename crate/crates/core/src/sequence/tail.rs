use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Signed};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, ParseError};
use crate::families::{Index, IndexSet};
use crate::scalar::{format_rational, parse_rational, Rational, Scalar};
use crate::value::Value;

/// The closed catalog of tail shapes. With `n_j` the rank-`j` element of
/// the support, the unit-coefficient values are `rho^{n_j}`,
/// `(j+1)^{-alpha}`, `1/n_j`, `1/log2(j+2)`, `1`, `j+1` and `rho^{n_j}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TailClass {
    GeomInPosition { rho: Rational },
    PowerInRank { alpha: Rational },
    ReciprocalPosition,
    LogReciprocalRank,
    Constant,
    LinearRank,
    GeomInPositionGrowth { rho: Rational },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailTerm {
    pub class: TailClass,
    pub coeff: Scalar,
}

/// A tail term on `support`, masked to `[from, ∞)`, minus the finitely many
/// `exclude` points, intersected with every set in `within`. Ranks are
/// always taken in `support`, so masking never changes values.
#[derive(Clone, Debug, PartialEq)]
pub struct Tail {
    pub(crate) support: IndexSet,
    pub(crate) from: Option<Index>,
    pub(crate) exclude: Vec<Index>,
    pub(crate) within: Vec<IndexSet>,
    pub(crate) term: TailTerm,
}

impl TailClass {
    pub fn name(&self) -> &'static str {
        match self {
            TailClass::GeomInPosition { .. } => "GeomInPosition",
            TailClass::PowerInRank { .. } => "PowerInRank",
            TailClass::ReciprocalPosition => "ReciprocalPosition",
            TailClass::LogReciprocalRank => "LogReciprocalRank",
            TailClass::Constant => "Constant",
            TailClass::LinearRank => "LinearRank",
            TailClass::GeomInPositionGrowth { .. } => "GeomInPositionGrowth",
        }
    }

    pub fn params(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        match self {
            TailClass::GeomInPosition { rho } | TailClass::GeomInPositionGrowth { rho } => {
                m.insert("rho".to_string(), format_rational(rho));
            }
            TailClass::PowerInRank { alpha } => {
                m.insert("alpha".to_string(), format_rational(alpha));
            }
            _ => {}
        }
        m
    }

    pub fn from_parts(name: &str, params: &BTreeMap<String, String>) -> Result<Self, ParseError> {
        let get = |k: &str| {
            params
                .get(k)
                .ok_or_else(|| ParseError::Sequence(format!("{name} needs parameter {k}")))
                .and_then(|s| parse_rational(s))
        };
        let class = match name {
            "GeomInPosition" => TailClass::GeomInPosition { rho: get("rho")? },
            "PowerInRank" => TailClass::PowerInRank { alpha: get("alpha")? },
            "ReciprocalPosition" => TailClass::ReciprocalPosition,
            "LogReciprocalRank" => TailClass::LogReciprocalRank,
            "Constant" => TailClass::Constant,
            "LinearRank" => TailClass::LinearRank,
            "GeomInPositionGrowth" => TailClass::GeomInPositionGrowth { rho: get("rho")? },
            _ => return Err(ParseError::Sequence(format!("unknown tail class {name}"))),
        };
        Ok(class)
    }

    fn validate(&self) -> Result<(), Error> {
        let ok = match self {
            TailClass::GeomInPosition { rho } => rho.is_positive() && rho < &Rational::one(),
            TailClass::PowerInRank { alpha } => alpha.is_positive(),
            TailClass::GeomInPositionGrowth { rho } => rho > &Rational::one(),
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidTail(format!("{} {:?}", self.name(), self.params())))
        }
    }

    /// Whether values depend on the rank rather than the position.
    pub fn uses_rank(&self) -> bool {
        matches!(
            self,
            TailClass::PowerInRank { .. } | TailClass::LogReciprocalRank | TailClass::LinearRank
        )
    }

    /// Value with unit coefficient at rank `j`, position `n`.
    pub fn unit_value(&self, j: u64, n: &Index) -> Value {
        match self {
            TailClass::GeomInPosition { rho } | TailClass::GeomInPositionGrowth { rho } => {
                Value::power(rho, n)
            }
            TailClass::PowerInRank { alpha } => Value::inverse_power(j + 1, alpha),
            TailClass::ReciprocalPosition => Value::reciprocal(n),
            TailClass::LogReciprocalRank => Value::inverse_log2(&(BigUint::from(j) + 2u32)),
            TailClass::Constant => Value::one(),
            TailClass::LinearRank => Value::rational(Rational::from_integer((j + 1).into())),
        }
    }
}

impl TailTerm {
    pub fn new(class: TailClass, coeff: Scalar) -> Self {
        TailTerm { class, coeff }
    }

    pub fn unit(class: TailClass) -> Self {
        TailTerm::new(class, Scalar::one())
    }
}

impl Tail {
    pub(crate) fn new(support: IndexSet, term: TailTerm) -> Result<Self, Error> {
        term.class.validate()?;
        if term.class == TailClass::ReciprocalPosition {
            let fine = if support.is_infinite() {
                support.exp_growth()
            } else {
                !support.contains(&Index::zero())
            };
            if !fine {
                return Err(Error::InvalidTail(format!(
                    "ReciprocalPosition needs a support with n_j >= 2^j, got {support}"
                )));
            }
        }
        Ok(Tail {
            support,
            from: None,
            exclude: vec![],
            within: vec![],
            term,
        })
    }

    pub fn support(&self) -> &IndexSet {
        &self.support
    }

    pub fn from(&self) -> Option<&Index> {
        self.from.as_ref()
    }

    pub fn excluded(&self) -> &[Index] {
        &self.exclude
    }

    pub fn within(&self) -> &[IndexSet] {
        &self.within
    }

    pub fn term(&self) -> &TailTerm {
        &self.term
    }

    pub fn class(&self) -> &TailClass {
        &self.term.class
    }

    pub fn coeff(&self) -> &Scalar {
        &self.term.coeff
    }

    /// The support and every filter set.
    pub(crate) fn filters(&self) -> impl Iterator<Item = &IndexSet> {
        std::iter::once(&self.support).chain(self.within.iter())
    }

    /// Whether the effective support is the support minus finitely many
    /// points, so that membership depends only on the class.
    pub fn is_cofinite(&self) -> bool {
        self.within.is_empty()
    }

    /// Rank of `n` in the support, if `n` is in the effective support.
    pub fn rank_at(&self, n: &Index) -> Option<u64> {
        if self.from.as_ref().is_some_and(|f| n < f) || self.exclude.binary_search(n).is_ok() {
            return None;
        }
        if !self.within.iter().all(|w| w.contains(n)) {
            return None;
        }
        self.support.rank_of(n)
    }

    pub fn contains(&self, n: &Index) -> bool {
        self.rank_at(n).is_some()
    }

    pub fn value_at(&self, n: &Index) -> Option<Value> {
        let j = self.rank_at(n)?;
        Some(self.term.class.unit_value(j, n).scale(&self.term.coeff))
    }

    /// Value at an element already known to lie in the effective support.
    pub fn value_at_rank(&self, j: u64, n: &Index) -> Value {
        self.term.class.unit_value(j, n).scale(&self.term.coeff)
    }

    /// First rank of the support at or beyond `from`.
    pub fn start_rank(&self) -> u64 {
        self.from.as_ref().map_or(0, |f| self.support.count_below(f))
    }

    /// Effective points `(rank, index)` in increasing order.
    pub fn points(&self) -> impl Iterator<Item = (u64, Index)> + '_ {
        let r0 = self.start_rank();
        self.support
            .iter_from(r0)
            .zip(r0..)
            .map(|(n, j)| (j, n))
            .filter(|(_, n)| {
                self.exclude.binary_search(n).is_err() && self.within.iter().all(|w| w.contains(n))
            })
    }

    pub(crate) fn exclude_point(&mut self, n: Index) {
        if let Err(pos) = self.exclude.binary_search(&n) {
            self.exclude.insert(pos, n);
        }
    }

    pub(crate) fn same_shape_up_to_exclusions(&self, other: &Tail) -> bool {
        self.support == other.support
            && self.from == other.from
            && self.within == other.within
            && self.term.class == other.term.class
    }

    /// `self · 1_A` for an infinite `A`, or `None` when provably empty.
    pub(crate) fn restricted(&self, a: &IndexSet) -> Option<Tail> {
        if self.filters().any(|f| f.subset_of(a)) {
            return Some(self.clone());
        }
        if self.filters().any(|f| f.provably_disjoint(a)) {
            return None;
        }
        let mut t = self.clone();
        match a {
            IndexSet::Ray { start } => t.raise_floor(start.clone()),
            IndexSet::Cut { parent, from } if self.filters().any(|f| f.subset_of(parent)) => {
                t.raise_floor(from.clone())
            }
            _ => {
                if !t.within.contains(a) {
                    t.within.push(a.clone());
                }
            }
        }
        Some(t)
    }

    fn raise_floor(&mut self, n: Index) {
        if self.from.as_ref().is_some_and(|f| f >= &n) {
            return;
        }
        self.exclude.retain(|e| e >= &n);
        self.from = if n.is_zero() { None } else { Some(n) };
    }
}

#[derive(Serialize, Deserialize)]
struct TailRepr {
    support: IndexSet,
    class: String,
    params: BTreeMap<String, String>,
    coeff: Scalar,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    from: Option<Index>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    exclude: Vec<Index>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    within: Vec<IndexSet>,
}

impl Serialize for Tail {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        TailRepr {
            support: self.support.clone(),
            class: self.term.class.name().to_string(),
            params: self.term.class.params(),
            coeff: self.term.coeff.clone(),
            from: self.from.clone(),
            exclude: self.exclude.clone(),
            within: self.within.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Tail {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = TailRepr::deserialize(d)?;
        let class = TailClass::from_parts(&r.class, &r.params).map_err(D::Error::custom)?;
        if r.coeff.is_zero() {
            return Err(D::Error::custom("tail coefficient is zero"));
        }
        let mut t = Tail::new(r.support, TailTerm::new(class, r.coeff)).map_err(D::Error::custom)?;
        t.from = r.from;
        let mut ex = r.exclude;
        ex.sort();
        ex.dedup();
        t.exclude = ex;
        t.within = r.within;
        Ok(t)
    }
}
