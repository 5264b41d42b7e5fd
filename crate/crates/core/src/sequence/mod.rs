//! Structured infinite sequences: a finite modification plus tail terms from
//! a closed catalog, each living on a structured index set.

mod bounds;
mod tail;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::certified::{bits_for_tolerance, CertifiedReal};
use crate::error::Error;
use crate::families::{branch_intersection, Index, IndexSet};
use crate::scalar::{Rational, Scalar};
use crate::value::Value;

pub use bounds::{DivergenceSchedule, ScheduleKind, SeriesVerdict};
pub(crate) use bounds::coeff_pow;
pub use tail::{Tail, TailClass, TailTerm};

/// `finite + Σ tails + Σ lazy`. Tail supports are pairwise disjoint and
/// disjoint from the keys of `finite`; `lazy` is non-empty only for sums
/// whose tails could not be merged symbolically.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct SymbolicSequence {
    #[serde(with = "finite_serde")]
    finite: BTreeMap<Index, Value>,
    tails: Vec<Tail>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    lazy: Vec<SymbolicSequence>,
}

/// Result of [`SymbolicSequence::eval`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evaluation {
    Exact { value: Scalar },
    Enclosed { re: CertifiedReal, im: CertifiedReal },
}

enum Overlap {
    Disjoint,
    Finite(Vec<Index>),
    Unknown,
}

impl SymbolicSequence {
    pub fn zero() -> Self {
        SymbolicSequence::default()
    }

    /// The unit vector `e_n`.
    pub fn basis(n: impl Into<Index>) -> Self {
        SymbolicSequence::finite([(n.into(), Scalar::one())])
    }

    pub fn finite<I: IntoIterator<Item = (Index, Scalar)>>(entries: I) -> Self {
        let mut s = SymbolicSequence::zero();
        for (n, c) in entries {
            s.add_point(n, Value::scalar(c));
        }
        s
    }

    /// A single tail term on `support`.
    pub fn tail(support: IndexSet, term: TailTerm) -> Result<Self, Error> {
        let t = Tail::new(support, term)?;
        Ok(SymbolicSequence {
            tails: if t.term.coeff.is_zero() { vec![] } else { vec![t] },
            ..Default::default()
        })
    }

    pub fn finite_part(&self) -> &BTreeMap<Index, Value> {
        &self.finite
    }

    pub fn tails(&self) -> &[Tail] {
        &self.tails
    }

    /// Whether every tail is available for class introspection.
    pub fn is_introspectable(&self) -> bool {
        self.lazy.is_empty()
    }

    pub fn lazy_parts(&self) -> &[SymbolicSequence] {
        &self.lazy
    }

    /// The structured head of a lazy sum.
    pub fn without_lazy(&self) -> SymbolicSequence {
        SymbolicSequence {
            finite: self.finite.clone(),
            tails: self.tails.clone(),
            lazy: vec![],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.finite.is_empty() && self.tails.is_empty() && self.lazy.iter().all(|s| s.is_zero())
    }

    /// Exact symbolic value `x(n)`.
    pub fn value_at(&self, n: &Index) -> Value {
        let mut v = self.finite.get(n).cloned().unwrap_or_default();
        for t in &self.tails {
            if let Some(tv) = t.value_at(n) {
                v = &v + &tv;
            }
        }
        for part in &self.lazy {
            v = &v + &part.value_at(n);
        }
        v
    }

    /// `x(n)` as an exact scalar when rational, otherwise as enclosures of
    /// width at most `tol`.
    pub fn eval(&self, n: &Index, tol: &Rational) -> Result<Evaluation, Error> {
        let v = self.value_at(n);
        if let Some(value) = v.as_scalar() {
            return Ok(Evaluation::Exact { value });
        }
        let (re, im) = v.enclose(bits_for_tolerance(tol))?;
        Ok(Evaluation::Enclosed { re, im })
    }

    pub fn scale(&self, c: &Scalar) -> SymbolicSequence {
        if c.is_zero() {
            return SymbolicSequence::zero();
        }
        SymbolicSequence {
            finite: self.finite.iter().map(|(n, v)| (n.clone(), v.scale(c))).collect(),
            tails: self
                .tails
                .iter()
                .map(|t| {
                    let mut t = t.clone();
                    t.term.coeff = &t.term.coeff * c;
                    t
                })
                .collect(),
            lazy: self.lazy.iter().map(|s| s.scale(c)).collect(),
        }
    }

    pub fn neg(&self) -> SymbolicSequence {
        self.scale(&-Scalar::one())
    }

    pub fn sub(&self, other: &SymbolicSequence) -> SymbolicSequence {
        self.add(&other.neg())
    }

    /// Pointwise sum. Falls back to a lazy sum when two tails overlap on an
    /// infinite set in a way the catalog cannot merge.
    pub fn add(&self, other: &SymbolicSequence) -> SymbolicSequence {
        if self.lazy.is_empty() && other.lazy.is_empty() {
            let mut out = self.clone();
            let merged = other.tails.iter().try_for_each(|t| out.insert_tail(t.clone()));
            if merged.is_ok() {
                for (n, v) in &other.finite {
                    out.add_point(n.clone(), v.clone());
                }
                return out;
            }
        }
        let mut lazy = vec![];
        for s in [self, other] {
            if s.lazy.is_empty() {
                lazy.push(s.clone());
            } else {
                let mut head = s.clone();
                let rest = std::mem::take(&mut head.lazy);
                lazy.push(head);
                lazy.extend(rest);
            }
        }
        SymbolicSequence {
            lazy,
            ..Default::default()
        }
    }

    /// `x · 1_A`.
    pub fn restrict(&self, a: &IndexSet) -> SymbolicSequence {
        let mut out = SymbolicSequence {
            finite: self
                .finite
                .iter()
                .filter(|(n, _)| a.contains(n))
                .map(|(n, v)| (n.clone(), v.clone()))
                .collect(),
            tails: vec![],
            lazy: self.lazy.iter().map(|s| s.restrict(a)).collect(),
        };
        for t in &self.tails {
            if let IndexSet::Explicit { elements } = a {
                for n in elements {
                    if let Some(v) = t.value_at(n) {
                        out.finite.insert(n.clone(), v);
                    }
                }
                continue;
            }
            if let Some(t) = t.restricted(a) {
                out.tails.push(t);
            }
        }
        out
    }

    /// Finite support (when every tail is finite).
    pub fn has_finite_support(&self) -> bool {
        self.tails.iter().all(|t| !t.support.is_infinite())
            && self.lazy.iter().all(|s| s.has_finite_support())
    }

    /// Largest index of the finite part, if any.
    pub fn finite_max(&self) -> Option<&Index> {
        self.finite.keys().next_back()
    }

    fn add_point(&mut self, n: Index, v: Value) {
        let mut total = v;
        for t in &mut self.tails {
            if let Some(tv) = t.value_at(&n) {
                total = &total + &tv;
                t.exclude_point(n.clone());
                break;
            }
        }
        if let Some(old) = self.finite.remove(&n) {
            total = &total + &old;
        }
        if !total.is_zero() {
            self.finite.insert(n, total);
        }
    }

    fn insert_tail(&mut self, mut t: Tail) -> Result<(), Error> {
        if let Some(pos) = self.tails.iter().position(|e| e.same_shape_up_to_exclusions(&t)) {
            // Points excluded from only one side move to the finite part.
            let mut moved = vec![];
            let e = &mut self.tails[pos];
            for n in t.excluded().to_vec() {
                if let Some(v) = e.value_at(&n) {
                    e.exclude_point(n.clone());
                    moved.push((n, v));
                }
            }
            for n in e.excluded().to_vec() {
                if let Some(v) = t.value_at(&n) {
                    t.exclude_point(n.clone());
                    moved.push((n, v));
                }
            }
            for (n, v) in moved {
                let total = match self.finite.remove(&n) {
                    Some(old) => &old + &v,
                    None => v,
                };
                if !total.is_zero() {
                    self.finite.insert(n, total);
                }
            }
            let e = &mut self.tails[pos];
            e.term.coeff = &e.term.coeff + &t.term.coeff;
            if e.term.coeff.is_zero() {
                self.tails.remove(pos);
            }
            return Ok(());
        }
        let mut shared = vec![];
        for (i, e) in self.tails.iter().enumerate() {
            match overlap(e, &t) {
                Overlap::Disjoint => {}
                Overlap::Finite(points) => shared.extend(points.into_iter().map(|n| (i, n))),
                Overlap::Unknown => {
                    return Err(Error::Precondition("tails overlap on an infinite set".into()))
                }
            }
        }
        for (i, n) in shared {
            let e = &mut self.tails[i];
            let mut v = e.value_at(&n).expect("shared point");
            v = &v + &t.value_at(&n).expect("shared point");
            e.exclude_point(n.clone());
            t.exclude_point(n.clone());
            if let Some(old) = self.finite.remove(&n) {
                v = &v + &old;
            }
            if !v.is_zero() {
                self.finite.insert(n, v);
            }
        }
        let keys: Vec<Index> = self.finite.keys().filter(|n| t.contains(n)).cloned().collect();
        for n in keys {
            let v = &self.finite[&n] + &t.value_at(&n).expect("member");
            t.exclude_point(n.clone());
            if v.is_zero() {
                self.finite.remove(&n);
            } else {
                self.finite.insert(n, v);
            }
        }
        self.tails.push(t);
        Ok(())
    }
}

fn overlap(e: &Tail, t: &Tail) -> Overlap {
    let candidates = |pts: &[Index]| {
        Overlap::Finite(
            pts.iter()
                .filter(|n| e.contains(n) && t.contains(n))
                .cloned()
                .collect(),
        )
    };
    if let IndexSet::Explicit { elements } = &e.support {
        return candidates(elements);
    }
    if let IndexSet::Explicit { elements } = &t.support {
        return candidates(elements);
    }
    for a in e.filters() {
        for b in t.filters() {
            if a.provably_disjoint(b) {
                return Overlap::Disjoint;
            }
        }
    }
    if let (Some(ka), Some(kb)) = (e.support.branch_ancestor(), t.support.branch_ancestor()) {
        if let Ok(common) = branch_intersection(ka, kb) {
            let pts: Vec<Index> = common.into_iter().map(Index::from).collect();
            return candidates(&pts);
        }
    }
    Overlap::Unknown
}

mod finite_serde {
    use super::*;
    use crate::scalar::{format_rational, parse_rational};
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Entry {
        Rational(Index, String, String),
        Symbolic(Index, Value),
    }

    pub fn serialize<S: Serializer>(m: &BTreeMap<Index, Value>, s: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<Entry> = m
            .iter()
            .map(|(n, v)| match v.as_scalar() {
                Some(c) => Entry::Rational(n.clone(), format_rational(&c.re), format_rational(&c.im)),
                None => Entry::Symbolic(n.clone(), v.clone()),
            })
            .collect();
        entries.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<Index, Value>, D::Error> {
        use serde::de::Error as _;
        let entries: Vec<Entry> = Vec::deserialize(d)?;
        let mut m = BTreeMap::new();
        for e in entries {
            let (n, v) = match e {
                Entry::Rational(n, re, im) => {
                    let c = Scalar::new(
                        parse_rational(&re).map_err(D::Error::custom)?,
                        parse_rational(&im).map_err(D::Error::custom)?,
                    );
                    (n, Value::scalar(c))
                }
                Entry::Symbolic(n, v) => (n, v),
            };
            if v.is_zero() {
                return Err(D::Error::custom("finite part stores a zero"));
            }
            if m.insert(n, v).is_some() {
                return Err(D::Error::custom("duplicate finite index"));
            }
        }
        Ok(m)
    }
}
