//! Structured subsets of ℕ₀ with decidable membership and ranked enumeration.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError};
use crate::families::branch::{branch_intersection, BranchId};
use crate::families::index::Index;
use crate::families::pairing::{pair, unpair};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IndexSet {
    /// A finite set, sorted and without duplicates.
    Explicit { elements: Vec<Index> },
    /// `[start, ∞)`.
    Ray { start: Index },
    /// `{start + step·i : i ∈ ℕ₀}`.
    Progression { start: u64, step: u64 },
    /// Heap codes of the vertices on a branch.
    Branch { branch: Arc<BranchId> },
    /// `{a_{π(i, cell)} : i ∈ ℕ}` where `a_m` is the rank-`m` element of `parent`.
    Cell { parent: Arc<IndexSet>, cell: u64 },
    /// Rank `m` is the first element of `parent` that is `>= 2^m` and
    /// beyond rank `m - 1`.
    Sparsified { parent: Arc<IndexSet> },
    /// `parent ∩ [from, ∞)`.
    Cut { parent: Arc<IndexSet>, from: Index },
}

impl IndexSet {
    pub fn explicit<I: IntoIterator<Item = Index>>(elements: I) -> Self {
        let mut v: Vec<Index> = elements.into_iter().collect();
        v.sort();
        v.dedup();
        IndexSet::Explicit { elements: v }
    }

    pub fn naturals() -> Self {
        IndexSet::Ray {
            start: Index::zero(),
        }
    }

    pub fn ray(start: impl Into<Index>) -> Self {
        IndexSet::Ray {
            start: start.into(),
        }
    }

    pub fn evens() -> Self {
        IndexSet::Progression { start: 0, step: 2 }
    }

    pub fn branch(branch: BranchId) -> Self {
        IndexSet::Branch {
            branch: Arc::new(branch),
        }
    }

    /// The `cell`-th block of the partition of an infinite set.
    pub fn cell(parent: &IndexSet, cell: u64) -> Result<Self, Error> {
        if cell == 0 {
            return Err(Error::Precondition("partition cells are numbered from 1".into()));
        }
        parent.require_infinite()?;
        Ok(IndexSet::Cell {
            parent: Arc::new(parent.clone()),
            cell,
        })
    }

    pub fn sparsified(parent: &IndexSet) -> Result<Self, Error> {
        parent.require_infinite()?;
        Ok(IndexSet::Sparsified {
            parent: Arc::new(parent.clone()),
        })
    }

    pub fn cut(parent: &IndexSet, from: Index) -> Self {
        IndexSet::Cut {
            parent: Arc::new(parent.clone()),
            from,
        }
    }

    pub fn is_infinite(&self) -> bool {
        match self {
            IndexSet::Explicit { .. } => false,
            IndexSet::Ray { .. } | IndexSet::Progression { .. } | IndexSet::Branch { .. } => true,
            IndexSet::Cell { parent, .. }
            | IndexSet::Sparsified { parent }
            | IndexSet::Cut { parent, .. } => parent.is_infinite(),
        }
    }

    pub fn require_infinite(&self) -> Result<(), Error> {
        if self.is_infinite() {
            Ok(())
        } else {
            Err(Error::FiniteSet(self.to_string()))
        }
    }

    pub fn parent(&self) -> Option<&IndexSet> {
        match self {
            IndexSet::Cell { parent, .. }
            | IndexSet::Sparsified { parent }
            | IndexSet::Cut { parent, .. } => Some(parent),
            _ => None,
        }
    }

    /// Self followed by its parents, innermost first.
    pub fn ancestors(&self) -> impl Iterator<Item = &IndexSet> {
        std::iter::successors(Some(self), |s| s.parent())
    }

    /// Whether the rank-`j` element is guaranteed `>= 2^j`.
    pub fn exp_growth(&self) -> bool {
        match self {
            IndexSet::Sparsified { .. } => true,
            IndexSet::Cell { parent, .. } | IndexSet::Cut { parent, .. } => parent.exp_growth(),
            _ => false,
        }
    }

    /// The branch this set is contained in, if any.
    pub fn branch_ancestor(&self) -> Option<&Arc<BranchId>> {
        self.ancestors().find_map(|s| match s {
            IndexSet::Branch { branch } => Some(branch),
            _ => None,
        })
    }

    /// Largest lower cut `N` such that the set lies in `[N, ∞)` by construction.
    pub fn floor(&self) -> Index {
        self.ancestors()
            .filter_map(|s| match s {
                IndexSet::Cut { from, .. } => Some(from.clone()),
                IndexSet::Ray { start } => Some(start.clone()),
                _ => None,
            })
            .max()
            .unwrap_or_else(Index::zero)
    }

    pub fn len(&self) -> Option<usize> {
        match self {
            IndexSet::Explicit { elements } => Some(elements.len()),
            _ => None,
        }
    }

    pub fn contains(&self, n: &Index) -> bool {
        match self {
            IndexSet::Explicit { elements } => elements.binary_search(n).is_ok(),
            IndexSet::Ray { start } => n >= start,
            IndexSet::Progression { start, step } => {
                let s = Index::from(*start);
                n >= &s && (n.to_biguint() - BigUint::from(*start)) % *step == BigUint::zero()
            }
            IndexSet::Branch { branch } => n.lies_on(branch),
            IndexSet::Cut { parent, from } => n >= from && parent.contains(n),
            _ => self.rank_of(n).is_some(),
        }
    }

    /// Rank of `n` within the set, if it is a member.
    pub fn rank_of(&self, n: &Index) -> Option<u64> {
        match self {
            IndexSet::Explicit { elements } => elements.binary_search(n).ok().map(|r| r as u64),
            IndexSet::Ray { start } => {
                if n < start {
                    None
                } else {
                    n.saturating_sub(start).to_u64()
                }
            }
            IndexSet::Progression { start, step } => {
                if !self.contains(n) {
                    return None;
                }
                ((n.to_biguint() - BigUint::from(*start)) / *step).to_u64()
            }
            IndexSet::Branch { branch } => n.lies_on(branch).then(|| n.depth()),
            IndexSet::Cell { parent, cell } => {
                let (i, j) = unpair(parent.rank_of(n)?);
                (j == *cell).then_some(i - 1)
            }
            IndexSet::Sparsified { parent } => {
                if !parent.contains(n) {
                    return None;
                }
                let mut walk = SparseWalk::new(parent);
                loop {
                    let (m, e) = walk.next_element()?;
                    if &e >= n {
                        return (&e == n).then_some(m);
                    }
                }
            }
            IndexSet::Cut { parent, from } => {
                if n < from {
                    return None;
                }
                let r = parent.rank_of(n)?;
                Some(r - parent.count_below(from))
            }
        }
    }

    /// The rank-`r` element, `None` past the end of a finite set.
    pub fn nth(&self, r: u64) -> Option<Index> {
        match self {
            IndexSet::Explicit { elements } => elements.get(r as usize).cloned(),
            IndexSet::Ray { start } => Some(start.add_u64(r)),
            IndexSet::Progression { start, step } => Some(Index::from_big(
                BigUint::from(*start) + BigUint::from(*step) * r,
            )),
            IndexSet::Branch { branch } => Some(Index::on_branch(branch, r)),
            IndexSet::Cell { parent, cell } => parent.nth(pair(r + 1, *cell)),
            IndexSet::Sparsified { parent } => {
                let mut walk = SparseWalk::new(parent);
                for _ in 0..r {
                    walk.next_element()?;
                }
                walk.next_element().map(|(_, e)| e)
            }
            IndexSet::Cut { parent, from } => parent.nth(parent.count_below(from) + r),
        }
    }

    /// Number of elements strictly below `bound`.
    pub fn count_below(&self, bound: &Index) -> u64 {
        match self {
            IndexSet::Ray { start } => bound.saturating_sub(start).to_u64().unwrap_or(u64::MAX),
            _ => self.checked_count_below(bound).expect("rank overflow"),
        }
    }

    /// `count_below`, or `None` when the count does not fit in `u64`.
    fn checked_count_below(&self, bound: &Index) -> Option<u64> {
        match self {
            IndexSet::Explicit { elements } => Some(elements.partition_point(|e| e < bound) as u64),
            IndexSet::Ray { start } => bound.saturating_sub(start).to_u64(),
            IndexSet::Branch { branch } => {
                let d = bound.depth();
                Some(d + u64::from(&Index::on_branch(branch, d) < bound))
            }
            IndexSet::Sparsified { parent } => {
                let mut walk = SparseWalk::new(parent);
                let mut count = 0;
                while let Some((_, e)) = walk.next_element() {
                    if &e >= bound {
                        break;
                    }
                    count += 1;
                }
                Some(count)
            }
            _ => {
                // Exponential then binary search on the monotone enumeration.
                let below = |r: u64| self.nth(r).is_some_and(|e| &e < bound);
                if !below(0) {
                    return Some(0);
                }
                let mut hi = 1u64;
                while below(hi) {
                    hi = hi.checked_mul(2)?;
                }
                let mut lo = hi / 2;
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if below(mid) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Some(hi)
            }
        }
    }

    /// First element `>= bound` together with its rank.
    pub fn first_at_least(&self, bound: &Index) -> Option<(u64, Index)> {
        let r = self.count_below(bound);
        self.nth(r).map(|e| (r, e))
    }

    /// Least element `>= bound`, computed from the structure where possible
    /// so that dense parents never need ranks beyond `u64`.
    pub fn least_at_least(&self, bound: &Index) -> Option<Index> {
        match self {
            IndexSet::Explicit { elements } => {
                elements.get(elements.partition_point(|e| e < bound)).cloned()
            }
            IndexSet::Ray { start } => Some(start.clone().max(bound.clone())),
            IndexSet::Progression { start, step } => {
                let s = BigUint::from(*start);
                let b = bound.to_biguint();
                if b <= s {
                    return Some(Index::from_big(s));
                }
                let k = (b - &s + BigUint::from(step - 1)) / *step;
                Some(Index::from_big(s + k * *step))
            }
            IndexSet::Cut { parent, from } => parent.least_at_least(bound.max(from)),
            IndexSet::Sparsified { parent } => {
                let mut walk = SparseWalk::new(parent);
                loop {
                    let (_, e) = walk.next_element()?;
                    if &e >= bound {
                        return Some(e);
                    }
                }
            }
            _ => self.first_at_least(bound).map(|(_, e)| e),
        }
    }

    /// Ranked enumeration.
    pub fn iter(&self) -> SetIter<'_> {
        self.iter_from(0)
    }

    /// Ranked enumeration starting at rank `rank`.
    pub fn iter_from(&self, rank: u64) -> SetIter<'_> {
        let sparse = match self {
            IndexSet::Sparsified { parent } => {
                let mut walk = SparseWalk::new(parent);
                for _ in 0..rank {
                    walk.next_element();
                }
                Some(walk)
            }
            _ => None,
        };
        SetIter {
            set: self,
            rank,
            sparse,
        }
    }

    /// Whether `self ⊆ other` follows from the construction tree.
    pub fn subset_of(&self, other: &IndexSet) -> bool {
        if let IndexSet::Ray { start } = other {
            return &self.floor() >= start;
        }
        if let IndexSet::Cut { parent, from } = other {
            return &self.floor() >= from && self.subset_of(parent);
        }
        self.ancestors().any(|a| a == other)
    }

    /// Whether `self ∩ other = ∅` follows from the construction tree:
    /// sibling partition cells, finite sets, or distinct branches whose
    /// common vertices are all excluded.
    pub fn provably_disjoint(&self, other: &IndexSet) -> bool {
        if let IndexSet::Explicit { elements } = self {
            return elements.iter().all(|e| !other.contains(e));
        }
        if let IndexSet::Explicit { elements } = other {
            return elements.iter().all(|e| !self.contains(e));
        }
        for a in self.ancestors() {
            for b in other.ancestors() {
                if let (
                    IndexSet::Cell { parent: pa, cell: ca },
                    IndexSet::Cell { parent: pb, cell: cb },
                ) = (a, b)
                {
                    if pa == pb && ca != cb {
                        return true;
                    }
                }
            }
        }
        if let (Some(ka), Some(kb)) = (self.branch_ancestor(), other.branch_ancestor()) {
            if let Ok(common) = branch_intersection(ka, kb) {
                return common.into_iter().map(Index::from).all(|e| {
                    !(self.contains(&e) && other.contains(&e))
                });
            }
        }
        false
    }
}

/// Walks the elements selected by sparsification: step `m` takes the
/// least parent element that is `>= 2^m` and beyond the previous one.
struct SparseWalk<'a> {
    parent: &'a IndexSet,
    m: u64,
    prev: Option<Index>,
    /// Parent rank of `prev` plus one, while ranks fit in `u64`.
    next_rank: Option<u64>,
}

impl<'a> SparseWalk<'a> {
    fn new(parent: &'a IndexSet) -> Self {
        SparseWalk {
            parent,
            m: 0,
            prev: None,
            next_rank: Some(0),
        }
    }

    /// Least parent element `>= 2^m` beyond the previous one. Ranks are
    /// tracked so deep branch vertices are never incremented; dense parents
    /// whose ranks overflow fall back to searching above `prev + 1`.
    fn next_element(&mut self) -> Option<(u64, Index)> {
        let bound = Index::from_big(BigUint::from(1u32) << self.m);
        let (rank, e) = match self.next_rank {
            Some(r) => match self.parent.nth(r) {
                Some(e) if e >= bound => (Some(r), e),
                Some(_) => match self.parent.checked_count_below(&bound) {
                    Some(r) => (Some(r), self.parent.nth(r)?),
                    None => (None, self.search(bound)?),
                },
                None => return None,
            },
            None => (None, self.search(bound)?),
        };
        let m = self.m;
        self.prev = Some(e.clone());
        self.next_rank = rank.map(|r| r + 1);
        self.m += 1;
        Some((m, e))
    }

    fn search(&self, mut bound: Index) -> Option<Index> {
        if let Some(p) = &self.prev {
            let after = p.add_u64(1);
            if after > bound {
                bound = after;
            }
        }
        self.parent.least_at_least(&bound)
    }
}

pub struct SetIter<'a> {
    set: &'a IndexSet,
    rank: u64,
    sparse: Option<SparseWalk<'a>>,
}

impl Iterator for SetIter<'_> {
    type Item = Index;

    fn next(&mut self) -> Option<Index> {
        let out = match (&mut self.sparse, self.set) {
            (Some(walk), IndexSet::Sparsified { .. }) => walk.next_element().map(|(_, e)| e),
            _ => self.set.nth(self.rank),
        };
        self.rank += 1;
        out
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexSet::Explicit { elements } => {
                write!(f, "{{")?;
                for (i, e) in elements.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, "}}")
            }
            IndexSet::Ray { start } if start.is_zero() => write!(f, "naturals"),
            IndexSet::Ray { start } => write!(f, "ray({start})"),
            IndexSet::Progression { start: 0, step: 2 } => write!(f, "evens"),
            IndexSet::Progression { start, step } => write!(f, "prog({start},{step})"),
            IndexSet::Branch { branch } => write!(f, "branch({branch})"),
            IndexSet::Cell { parent, cell } => write!(f, "cell({parent},{cell})"),
            IndexSet::Sparsified { parent } => write!(f, "sparse({parent})"),
            IndexSet::Cut { parent, from } => write!(f, "cut({parent},{from})"),
        }
    }
}

impl FromStr for IndexSet {
    type Err = ParseError;

    /// Text form: `evens`, `naturals`, `ray(N)`, `prog(s,d)`, `branch(p|q)`,
    /// `cell(<set>,j)`, `sparse(<set>)`, `cut(<set>,N)`, `{n1,n2,…}`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseError::IndexSet(s.to_string());
        let s = s.trim();
        if s == "evens" {
            return Ok(IndexSet::evens());
        }
        if s == "naturals" {
            return Ok(IndexSet::naturals());
        }
        if let Some(body) = s.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
            let elements = body
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<Index>())
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(IndexSet::explicit(elements));
        }
        let (head, body) = s.split_once('(').ok_or_else(err)?;
        let body = body.strip_suffix(')').ok_or_else(err)?;
        let split_last = |b: &str| -> Result<(String, String), ParseError> {
            let (l, r) = split_top_level_last_comma(b).ok_or_else(err)?;
            Ok((l.to_string(), r.to_string()))
        };
        match head.trim() {
            "ray" => Ok(IndexSet::Ray {
                start: body.parse()?,
            }),
            "prog" => {
                let (a, b) = body.split_once(',').ok_or_else(err)?;
                let start = a.trim().parse().map_err(|_| err())?;
                let step: u64 = b.trim().parse().map_err(|_| err())?;
                if step == 0 {
                    return Err(err());
                }
                Ok(IndexSet::Progression { start, step })
            }
            "branch" => Ok(IndexSet::branch(body.parse()?)),
            "cell" => {
                let (p, j) = split_last(body)?;
                let parent: IndexSet = p.parse()?;
                let cell: u64 = j.trim().parse().map_err(|_| err())?;
                IndexSet::cell(&parent, cell).map_err(|_| err())
            }
            "sparse" => {
                let parent: IndexSet = body.parse()?;
                IndexSet::sparsified(&parent).map_err(|_| err())
            }
            "cut" => {
                let (p, n) = split_last(body)?;
                Ok(IndexSet::cut(&p.parse()?, n.parse()?))
            }
            _ => Err(err()),
        }
    }
}

fn split_top_level_last_comma(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    let mut last = None;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '{' => depth += 1,
            ')' | '}' => depth -= 1,
            ',' if depth == 0 => last = Some(i),
            _ => {}
        }
    }
    last.map(|i| (&s[..i], &s[i + 1..]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(s: &str) -> IndexSet {
        s.parse().unwrap()
    }

    fn first(s: &IndexSet, k: usize) -> Vec<u64> {
        s.iter().take(k).map(|i| i.to_u64().unwrap()).collect()
    }

    #[test]
    fn branch_set_examples() {
        assert_eq!(first(&set("branch(|0)"), 5), vec![0, 1, 3, 7, 15]);
        assert_eq!(first(&set("branch(|1)"), 5), vec![0, 2, 6, 14, 30]);
        assert_eq!(first(&set("branch(1|0)"), 4), vec![0, 2, 5, 11]);
    }

    #[test]
    fn partition_cell_of_naturals() {
        assert_eq!(first(&set("cell(naturals,1)"), 4), vec![0, 2, 5, 9]);
        let c1 = set("cell(naturals,1)");
        let c2 = set("cell(naturals,2)");
        for n in 0..1000u64 {
            assert!(!(c1.contains(&n.into()) && c2.contains(&n.into())));
        }
        assert!(c1.provably_disjoint(&c2));
    }

    #[test]
    fn ranks_invert_enumeration() {
        for s in [
            "evens",
            "ray(5)",
            "branch(01|10)",
            "cell(branch(|1),3)",
            "sparse(naturals)",
            "sparse(cell(evens,2))",
            "cut(cell(naturals,2),40)",
            "{3,9,27}",
        ] {
            let a = set(s);
            for (r, e) in a.iter().take(40).enumerate() {
                assert_eq!(a.rank_of(&e), Some(r as u64), "{s}");
                assert!(a.contains(&e));
            }
        }
        assert_eq!(set("sparse(naturals)").nth(5).unwrap(), Index::from(32u64));
    }

    /// Least element `>= 2^m` beyond the previous one, by linear scan.
    fn sparse_by_scan(parent: &IndexSet, k: usize) -> Vec<Index> {
        let mut out: Vec<Index> = vec![];
        let mut it = parent.iter();
        for m in 0..k as u32 {
            let bound = Index::from_big(BigUint::from(1u32) << m);
            let e = it.by_ref().find(|e| e >= &bound).unwrap();
            out.push(e);
        }
        out
    }

    #[test]
    fn sparse_walk_matches_scan() {
        for s in ["naturals", "evens", "ray(5)", "branch(01|10)", "cell(branch(|1),2)", "cell(naturals,3)"] {
            let parent = set(s);
            let walk: Vec<Index> = IndexSet::sparsified(&parent).unwrap().iter().take(12).collect();
            assert_eq!(walk, sparse_by_scan(&parent, 12), "{s}");
        }
        // Ranks of dense parents overflow u64 past 2^64.
        let e = set("sparse(evens)").nth(70).unwrap();
        assert_eq!(e.to_biguint(), BigUint::from(1u32) << 70u32);
        let deep: Vec<Index> = set("sparse(cell(branch(|01),2))").iter().take(2000).collect();
        assert!(deep.windows(2).all(|w| w[0] < w[1]));
        assert!(deep.iter().enumerate().all(|(m, e)| e.depth() >= m as u64));
    }

    #[test]
    fn count_below_and_cuts() {
        let b = set("branch(|0)");
        assert_eq!(b.count_below(&Index::from(7u64)), 3);
        assert_eq!(b.count_below(&Index::from(8u64)), 4);
        let c = set("cut(evens,11)");
        assert_eq!(first(&c, 3), vec![12, 14, 16]);
        assert!(c.subset_of(&set("evens")));
        assert!(c.subset_of(&set("ray(10)")));
        assert!(!set("evens").subset_of(&set("ray(1)")));
    }

    #[test]
    fn branch_disjointness_beyond_root() {
        let a = set("cell(branch(|0),1)");
        let b = set("cell(branch(1|0),1)");
        // Both cells contain the root.
        assert!(!a.provably_disjoint(&b));
        assert!(set("cut(cell(branch(|0),1),1)").provably_disjoint(&b));
    }

    #[test]
    fn text_round_trip() {
        for s in ["evens", "ray(3)", "cell(sparse(branch(01|10)),4)", "cut(cell(naturals,2),40)", "{1,4}"] {
            assert_eq!(set(s).to_string(), s);
        }
        assert!("cell(naturals,0)".parse::<IndexSet>().is_err());
        assert!("cell({1,2},1)".parse::<IndexSet>().is_err());
        assert!("prog(1,0)".parse::<IndexSet>().is_err());
    }
}
