//! Eventually periodic branches of the complete binary tree and the heap
//! coding of its vertices.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, ParseError};

/// An infinite branch `prefix · period · period · …`, kept in canonical form
/// (primitive period, then shortest prefix), so structural equality is
/// equality of branches.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BranchId {
    prefix: Vec<bool>,
    period: Vec<bool>,
}

impl BranchId {
    pub fn new(prefix: Vec<bool>, period: Vec<bool>) -> Result<Self, ParseError> {
        if period.is_empty() {
            return Err(ParseError::Branch(format!(
                "{}|",
                bits_to_string(&prefix)
            )));
        }
        let mut b = BranchId { prefix, period };
        b.normalize();
        Ok(b)
    }

    /// The constant branch `bit^∞`.
    pub fn constant(bit: bool) -> Self {
        BranchId {
            prefix: vec![],
            period: vec![bit],
        }
    }

    fn normalize(&mut self) {
        let n = self.period.len();
        for d in 1..=n {
            if n % d == 0 && (0..n).all(|i| self.period[i] == self.period[i % d]) {
                self.period.truncate(d);
                break;
            }
        }
        while let Some(&last) = self.prefix.last() {
            if last != *self.period.last().unwrap() {
                break;
            }
            self.prefix.pop();
            self.period.rotate_right(1);
        }
    }

    pub fn prefix(&self) -> &[bool] {
        &self.prefix
    }

    pub fn period(&self) -> &[bool] {
        &self.period
    }

    /// The `i`-th step of the branch (`false` = left child).
    pub fn bit(&self, i: u64) -> bool {
        let p = self.prefix.len() as u64;
        if i < p {
            self.prefix[i as usize]
        } else {
            self.period[((i - p) % self.period.len() as u64) as usize]
        }
    }

    /// Length of the longest common prefix, `None` when the branches agree.
    pub fn lcp(&self, other: &BranchId) -> Option<u64> {
        if self == other {
            return None;
        }
        let bound = self.prefix.len().max(other.prefix.len()) as u64
            + (self.period.len() as u64).lcm(&(other.period.len() as u64));
        (0..bound).find(|&i| self.bit(i) != other.bit(i))
    }

    /// First `len` steps of the branch.
    pub fn steps(&self, len: u64) -> Vec<bool> {
        (0..len).map(|i| self.bit(i)).collect()
    }
}

fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn parse_bits(s: &str, whole: &str) -> Result<Vec<bool>, ParseError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(ParseError::Branch(whole.to_string())),
        })
        .collect()
}

impl fmt::Display for BranchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}|{}",
            bits_to_string(&self.prefix),
            bits_to_string(&self.period)
        )
    }
}

impl FromStr for BranchId {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (pre, per) = s
            .trim()
            .split_once('|')
            .ok_or_else(|| ParseError::Branch(s.to_string()))?;
        BranchId::new(parse_bits(pre, s)?, parse_bits(per, s)?)
    }
}

impl Serialize for BranchId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BranchId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Heap code of a vertex: `code(ε) = 0`, `code(s0) = 2 code(s) + 1`,
/// `code(s1) = 2 code(s) + 2`. Closed form: `2^|s| - 1 + binary(s)`.
pub fn tree_code(path: &[bool]) -> BigUint {
    let mut v = BigUint::one();
    for &b in path {
        v <<= 1u32;
        if b {
            v += 1u32;
        }
    }
    v - 1u32
}

/// Inverse of [`tree_code`].
pub fn tree_path(code: &BigUint) -> Vec<bool> {
    let v = code + 1u32;
    let depth = v.bits() - 1;
    (0..depth).rev().map(|i| v.bit(i)).collect()
}

/// The branch `path(n) · 0^∞`, which passes through vertex `n`.
pub fn node_to_branch(n: &BigUint) -> BranchId {
    BranchId::new(tree_path(n), vec![false]).expect("nonempty period")
}

/// Vertex codes shared by two distinct branches: the prefixes of their
/// longest common prefix, `lcp + 1` codes in increasing order.
pub fn branch_intersection(k: &BranchId, other: &BranchId) -> Result<Vec<BigUint>, Error> {
    let l = k
        .lcp(other)
        .ok_or_else(|| Error::SameBranch(k.to_string()))?;
    let steps = k.steps(l);
    Ok((0..=l as usize).map(|m| tree_code(&steps[..m])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(s: &str) -> BranchId {
        s.parse().unwrap()
    }

    fn code(s: &str) -> u64 {
        let bits: Vec<bool> = s.chars().map(|c| c == '1').collect();
        tree_code(&bits).try_into().unwrap()
    }

    /// Recursion oracle: unroll code(s·0)=2c+1, code(s·1)=2c+2.
    fn code_by_recursion(s: &str) -> u64 {
        s.chars()
            .fold(0, |c, ch| if ch == '0' { 2 * c + 1 } else { 2 * c + 2 })
    }

    #[test]
    fn tree_code_examples() {
        assert_eq!(code(""), 0);
        assert_eq!(code("0"), 1);
        assert_eq!(code("1"), 2);
        assert_eq!(code("01"), 4);
    }

    #[test]
    fn tree_code_is_a_bijection_on_small_depths() {
        let mut seen = std::collections::BTreeSet::new();
        for depth in 0..=10u32 {
            for v in 0..(1u64 << depth) {
                let s: String = (0..depth)
                    .rev()
                    .map(|i| if v >> i & 1 == 1 { '1' } else { '0' })
                    .collect();
                let c = code(&s);
                assert_eq!(c, code_by_recursion(&s));
                assert!(seen.insert(c));
                assert_eq!(tree_path(&BigUint::from(c)).len() as u32, depth);
            }
        }
        // Surjective onto [0, 2^11 - 1).
        assert_eq!(seen.len() as u64, (1 << 11) - 1);
        assert_eq!(*seen.iter().last().unwrap(), (1 << 11) - 2);
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(b("0|00"), b("|0"));
        assert_eq!(b("00|0"), b("|0"));
        assert_eq!(b("1|01"), b("|10"));
        assert_eq!(b("01|10").to_string(), "01|10");
        assert_eq!(b("0|10").to_string(), "|01");
        assert_eq!(b("|0101").to_string(), "|01");
        assert!("01|".parse::<BranchId>().is_err());
        assert!("2|0".parse::<BranchId>().is_err());
    }

    #[test]
    fn intersection_examples() {
        let zero = b("|0");
        let codes = |a: &BranchId, c: &BranchId| -> Vec<u64> {
            branch_intersection(a, c)
                .unwrap()
                .into_iter()
                .map(|x| x.try_into().unwrap())
                .collect()
        };
        assert_eq!(codes(&zero, &b("1|0")), vec![0]);
        assert_eq!(codes(&zero, &b("01|0")), vec![0, 1]);
        assert!(matches!(
            branch_intersection(&zero, &b("00|0")),
            Err(Error::SameBranch(_))
        ));
    }

    #[test]
    fn node_to_branch_examples() {
        assert_eq!(node_to_branch(&BigUint::from(0u32)), b("|0"));
        assert_eq!(node_to_branch(&BigUint::from(5u32)), b("10|0"));
        assert_eq!(node_to_branch(&BigUint::from(2u32)), b("1|0"));
    }
}
