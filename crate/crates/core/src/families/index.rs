//! Natural-number indices, with a compact form for tree vertices lying on a
//! known branch.
//!
//! Partition cells of branch sets live deep in the tree: the `j`-th cell of a
//! branch starts at depth `π(1, j)`, and its `i`-th element sits at depth
//! `π(i, j)`. Such vertices are stored as `(branch, depth)` so that
//! comparisons and branch membership never materialize their bits.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ParseError;
use crate::families::branch::BranchId;

/// Depth at which branch vertices switch to the compact representation.
const NODE_DEPTH: u64 = 96;

#[derive(Clone, Debug)]
enum Repr {
    Nat(BigUint),
    Node { branch: Arc<BranchId>, depth: u64 },
}

/// A natural number `n ∈ ℕ₀`. Equality and ordering are numeric.
#[derive(Clone, Debug)]
pub struct Index(Repr);

impl Index {
    pub fn zero() -> Self {
        Index(Repr::Nat(BigUint::zero()))
    }

    pub fn from_big(n: BigUint) -> Self {
        Index(Repr::Nat(n))
    }

    /// The vertex at `depth` on `branch`.
    pub fn on_branch(branch: &Arc<BranchId>, depth: u64) -> Self {
        if depth < NODE_DEPTH {
            let mut v = BigUint::one();
            for i in 0..depth {
                v <<= 1u32;
                if branch.bit(i) {
                    v += 1u32;
                }
            }
            Index(Repr::Nat(v - 1u32))
        } else {
            Index(Repr::Node {
                branch: branch.clone(),
                depth,
            })
        }
    }

    /// Depth of `n` as a vertex of the heap-coded binary tree.
    pub fn depth(&self) -> u64 {
        match &self.0 {
            Repr::Nat(n) => (n + 1u32).bits() - 1,
            Repr::Node { depth, .. } => *depth,
        }
    }

    /// Step `i < depth` of the path from the root to `n`.
    pub fn path_bit(&self, i: u64) -> bool {
        match &self.0 {
            Repr::Nat(n) => {
                let v = n + 1u32;
                let d = v.bits() - 1;
                v.bit(d - 1 - i)
            }
            Repr::Node { branch, .. } => branch.bit(i),
        }
    }

    /// Whether vertex `n` lies on `branch`.
    pub fn lies_on(&self, branch: &BranchId) -> bool {
        match &self.0 {
            Repr::Node { branch: own, depth } => match own.lcp(branch) {
                None => true,
                Some(l) => l >= *depth,
            },
            Repr::Nat(_) => {
                let d = self.depth();
                (0..d).all(|i| self.path_bit(i) == branch.bit(i))
            }
        }
    }

    pub fn to_biguint(&self) -> BigUint {
        match &self.0 {
            Repr::Nat(n) => n.clone(),
            Repr::Node { branch, depth } => {
                let mut v = BigUint::one() << *depth;
                for i in (0..*depth).filter(|&i| branch.bit(i)) {
                    v.set_bit(depth - 1 - i, true);
                }
                v - 1u32
            }
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        match &self.0 {
            Repr::Nat(n) => n.to_u64(),
            Repr::Node { .. } => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.0, Repr::Nat(n) if n.is_zero())
    }

    pub fn add_u64(&self, k: u64) -> Index {
        if k == 0 {
            return self.clone();
        }
        Index::from_big(self.to_biguint() + k)
    }

    /// `self - other`, saturating at zero.
    pub fn saturating_sub(&self, other: &Index) -> BigUint {
        if self <= other {
            BigUint::zero()
        } else {
            self.to_biguint() - other.to_biguint()
        }
    }

    /// Upper bound on `min(n, cap)` that never materializes huge values.
    pub fn clamp_u64(&self, cap: u64) -> u64 {
        if self.depth() >= 64 {
            return cap;
        }
        self.to_u64().map_or(cap, |v| v.min(cap))
    }
}

impl From<u64> for Index {
    fn from(n: u64) -> Self {
        Index(Repr::Nat(BigUint::from(n)))
    }
}

impl From<BigUint> for Index {
    fn from(n: BigUint) -> Self {
        Index(Repr::Nat(n))
    }
}

impl Ord for Index {
    fn cmp(&self, other: &Self) -> Ordering {
        if let (Repr::Nat(a), Repr::Nat(b)) = (&self.0, &other.0) {
            return a.cmp(b);
        }
        let (da, db) = (self.depth(), other.depth());
        if da != db {
            return da.cmp(&db);
        }
        let first_diff = match (&self.0, &other.0) {
            (Repr::Node { branch: a, .. }, Repr::Node { branch: b, .. }) => match a.lcp(b) {
                None => return Ordering::Equal,
                Some(l) if l >= da => return Ordering::Equal,
                Some(l) => l,
            },
            _ => return self.to_biguint().cmp(&other.to_biguint()),
        };
        self.path_bit(first_diff).cmp(&other.path_bit(first_diff))
    }
}

impl PartialOrd for Index {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Index {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Index {}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Nat(n) => write!(f, "{n}"),
            Repr::Node { branch, depth } => write!(f, "node({branch}@{depth})"),
        }
    }
}

impl FromStr for Index {
    type Err = ParseError;

    /// Decimal, or `node(<branch>@<depth>)` for a vertex on a branch.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix("node(").and_then(|r| r.strip_suffix(')')) {
            let (b, d) = inner
                .rsplit_once('@')
                .ok_or_else(|| ParseError::Index(s.to_string()))?;
            let branch: BranchId = b.parse()?;
            let depth: u64 = d.parse().map_err(|_| ParseError::Index(s.to_string()))?;
            return Ok(Index::on_branch(&Arc::new(branch), depth));
        }
        s.parse::<BigUint>()
            .map(Index::from_big)
            .map_err(|_| ParseError::Index(s.to_string()))
    }
}

impl Serialize for Index {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Index {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
