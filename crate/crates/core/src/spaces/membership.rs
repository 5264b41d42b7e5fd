use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::Space;
use crate::error::Error;
use crate::families::Index;
use crate::scalar::{rat, serde_rational, Rational};
use crate::sequence::{SeriesVerdict, SymbolicSequence, Tail, TailClass};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    In,
    Out,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    Zero,
    NonzeroBounded,
    Unbounded,
}

/// The defining condition of a space, evaluated for one tail class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Rule {
    FiniteSupport,
    InfiniteSupport,
    /// `n^k x(n) -> 0` for every `k`, or the first `k` where it fails.
    Decay { fails_at: Option<u64> },
    Limit { kind: LimitKind },
    RootLimsup {
        #[serde(with = "serde_rational")]
        value: Rational,
    },
    /// The class lies in `ℓ^q` exactly for `q > exponent`; `None` means
    /// for no `q`.
    Critical {
        #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_rational")]
        exponent: Option<Rational>,
    },
    Always,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailFact {
    pub tail: usize,
    pub class: String,
    #[serde(flatten)]
    pub rule: Rule,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reason {
    /// `ℓ^p`: a tail bound or a divergence schedule for the whole sequence.
    Series {
        #[serde(with = "serde_rational")]
        p: Rational,
        verdict: SeriesVerdict,
    },
    /// Membership: every tail satisfies the condition. Non-membership: the
    /// listed tail fails it.
    Tails { facts: Vec<TailFact> },
    /// Non-membership in `cap(p)`: divergence in `ℓ^q` for some `q > p`.
    CapDivergence {
        #[serde(with = "serde_rational")]
        q: Rational,
        fact: TailFact,
        verdict: SeriesVerdict,
    },
    /// A lazy sum whose parts all lie in the space.
    Parts { parts: Vec<MembershipVerdict> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MembershipVerdict {
    pub space: String,
    pub verdict: Verdict,
    pub reason: Reason,
}

impl MembershipVerdict {
    pub fn is_in(&self) -> bool {
        self.verdict == Verdict::In
    }
}

mod opt_rational {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match q {
            Some(q) => serde_rational::serialize(q, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        serde_rational::deserialize(d).map(Some)
    }
}

/// `(In?, rule)` for a tail on an infinite support.
fn class_rule(class: &TailClass, space: &Space) -> (bool, Rule) {
    use TailClass::*;
    match space {
        Space::C00 => (false, Rule::InfiniteSupport),
        Space::AInf => match class {
            GeomInPosition { .. } => (true, Rule::Decay { fails_at: None }),
            PowerInRank { alpha } => {
                let k = alpha.floor().to_integer().to_u64().unwrap_or(u64::MAX - 1) + 1;
                (false, Rule::Decay { fails_at: Some(k) })
            }
            ReciprocalPosition => (false, Rule::Decay { fails_at: Some(1) }),
            _ => (false, Rule::Decay { fails_at: Some(0) }),
        },
        Space::Cap(p) => {
            let exponent = critical_exponent(class);
            let ok = exponent.as_ref().is_some_and(|e| p >= e);
            (ok, Rule::Critical { exponent })
        }
        Space::C0 | Space::Linf => {
            let kind = limit_kind(class);
            let ok = match space {
                Space::C0 => kind == LimitKind::Zero,
                _ => kind != LimitKind::Unbounded,
            };
            (ok, Rule::Limit { kind })
        }
        Space::H => match class {
            GeomInPosition { rho } => (true, Rule::RootLimsup { value: rho.clone() }),
            GeomInPositionGrowth { rho } => (false, Rule::RootLimsup { value: rho.clone() }),
            _ => (true, Rule::RootLimsup { value: rat(1, 1) }),
        },
        Space::Full => (true, Rule::Always),
        Space::Lp(_) => unreachable!("ℓ^p membership goes through series bounds"),
    }
}

/// The class lies in `ℓ^q` exactly when `q` exceeds this exponent.
pub(crate) fn critical_exponent(class: &TailClass) -> Option<Rational> {
    match class {
        TailClass::GeomInPosition { .. } | TailClass::ReciprocalPosition => Some(Rational::zero()),
        TailClass::PowerInRank { alpha } => Some(alpha.recip()),
        _ => None,
    }
}

pub(crate) fn limit_kind(class: &TailClass) -> LimitKind {
    match class {
        TailClass::Constant => LimitKind::NonzeroBounded,
        TailClass::LinearRank | TailClass::GeomInPositionGrowth { .. } => LimitKind::Unbounded,
        _ => LimitKind::Zero,
    }
}

/// An exponent `q > p` in which the class diverges.
fn divergence_exponent(class: &TailClass, p: &Rational) -> Rational {
    match class {
        TailClass::PowerInRank { alpha } => alpha.recip(),
        _ => p + rat(1, 8),
    }
}

fn tail_fact(i: usize, t: &Tail, space: &Space) -> (bool, TailFact) {
    let (ok, rule) = if t.support().is_infinite() {
        class_rule(t.class(), space)
    } else {
        (true, Rule::FiniteSupport)
    };
    let fact = TailFact {
        tail: i,
        class: t.class().name().to_string(),
        rule,
    };
    (ok, fact)
}

impl Space {
    /// Decides `x ∈ self` with a checkable justification.
    pub fn member(&self, x: &SymbolicSequence) -> Result<MembershipVerdict, Error> {
        let name = self.to_string();
        let verdict = |v, reason| MembershipVerdict {
            space: name.clone(),
            verdict: v,
            reason,
        };
        if let Space::Lp(p) = self {
            let sv = x
                .series_tail_bound(p, &Index::zero())
                .map_err(|e| Error::Undecidable(format!("{name}: {e}")))?;
            let v = match sv {
                SeriesVerdict::ConvergentWithBound { .. } => Verdict::In,
                SeriesVerdict::Divergent { .. } => Verdict::Out,
            };
            return Ok(verdict(v, Reason::Series { p: p.clone(), verdict: sv }));
        }
        if !x.is_introspectable() {
            let mut parts = vec![self.member(&x.without_lazy())?];
            for part in x.lazy_parts() {
                parts.push(self.member(part)?);
            }
            if parts.iter().all(|v| v.is_in()) {
                return Ok(verdict(Verdict::In, Reason::Parts { parts }));
            }
            return Err(Error::Undecidable(format!("{name}: lazy sum with a part outside")));
        }
        let mut facts = vec![];
        for (i, t) in x.tails().iter().enumerate() {
            let (ok, fact) = tail_fact(i, t, self);
            if ok {
                facts.push(fact);
                continue;
            }
            if !t.is_cofinite() {
                return Err(Error::Undecidable(format!(
                    "{name}: {} on a filtered support",
                    t.class().name()
                )));
            }
            if let Space::Cap(p) = self {
                let q = divergence_exponent(t.class(), p);
                let sv = x.series_tail_bound(&q, &Index::zero())?;
                if !matches!(sv, SeriesVerdict::Divergent { .. }) {
                    return Err(Error::Undecidable(format!("{name}: no divergence in ℓ^{q}")));
                }
                return Ok(verdict(Verdict::Out, Reason::CapDivergence { q, fact, verdict: sv }));
            }
            return Ok(verdict(Verdict::Out, Reason::Tails { facts: vec![fact] }));
        }
        Ok(verdict(Verdict::In, Reason::Tails { facts }))
    }
}
