//! A bijection between `ℕ = {1, 2, …}` and the finitely supported sequences
//! with values in `ℚ + iℚ`.
//!
//! Rationals are coded through the Calkin–Wilf order with sign folding
//! (`0 ↦ 0`, `q_k ↦ 2k − 1`, `−q_k ↦ 2k`); a complex coordinate is the
//! Cantor pair of its two rational codes. A sequence of length `L >= 1`
//! (last coordinate nonzero) is coded as `2 + π₀(L − 1, tuple(c_0, …, c_{L−1} − 1))`,
//! and `1` codes the zero sequence.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;
use crate::families::pairing::{pair0, tuple, unpair0, untuple};
use crate::families::Index;
use crate::scalar::{Rational, Scalar};
use crate::sequence::SymbolicSequence;

/// Calkin–Wilf position (from 1) of a positive rational.
fn calkin_wilf_index(q: &Rational) -> BigUint {
    let mut a = q.numer().magnitude().clone();
    let mut b = q.denom().magnitude().clone();
    // Bits from the least significant end, as (bit, run length).
    let mut runs: Vec<(bool, BigUint)> = vec![];
    let one = BigUint::one();
    while !(a.is_one() && b.is_one()) {
        if a < b {
            let steps = (&b - &one) / &a;
            b -= &a * &steps;
            runs.push((false, steps));
        } else {
            let steps = (&a - &one) / &b;
            a -= &b * &steps;
            runs.push((true, steps));
        }
    }
    let mut k = BigUint::one();
    for (bit, len) in runs.iter().rev() {
        let len = len.to_usize().expect("run length fits in memory");
        k <<= len;
        if *bit {
            k += (BigUint::one() << len) - 1u32;
        }
    }
    k
}

fn calkin_wilf_value(k: &BigUint) -> Rational {
    let mut a = BigUint::one();
    let mut b = BigUint::one();
    let bits = k.bits();
    for i in (0..bits - 1).rev() {
        if k.bit(i) {
            a += &b;
        } else {
            b += &a;
        }
    }
    Rational::new(BigInt::from(a), BigInt::from(b))
}

pub fn rational_code(q: &Rational) -> BigUint {
    if q.is_zero() {
        return BigUint::zero();
    }
    let k = calkin_wilf_index(&q.abs());
    if q.is_positive() {
        (k << 1u32) - 1u32
    } else {
        k << 1u32
    }
}

pub fn rational_from_code(c: &BigUint) -> Rational {
    if c.is_zero() {
        return Rational::zero();
    }
    let (k, odd) = ((c + 1u32) >> 1u32, c.is_odd());
    let q = calkin_wilf_value(&k);
    if odd {
        q
    } else {
        -q
    }
}

pub fn scalar_code(s: &Scalar) -> BigUint {
    pair0(&rational_code(&s.re), &rational_code(&s.im))
}

pub fn scalar_from_code(c: &BigUint) -> Scalar {
    let (re, im) = unpair0(c);
    Scalar::new(rational_from_code(&re), rational_from_code(&im))
}

/// The `j`-th finite sequence, as coordinates `0..L`.
pub fn decode_coordinates(j: &BigUint) -> Result<Vec<Scalar>, Error> {
    if j.is_zero() {
        return Err(Error::Precondition("enumeration starts at 1".into()));
    }
    if j.is_one() {
        return Ok(vec![]);
    }
    let (len_minus_one, payload) = unpair0(&(j - 2u32));
    let len = len_minus_one
        .to_usize()
        .filter(|l| *l < 1 << 20)
        .ok_or_else(|| Error::Overflow(format!("sequence length for code {j}")))?
        + 1;
    let mut codes = untuple(&payload, len);
    *codes.last_mut().expect("len >= 1") += 1u32;
    Ok(codes.iter().map(scalar_from_code).collect())
}

/// Code of a finite coordinate list; trailing zeros are ignored.
pub fn encode_coordinates(coords: &[Scalar]) -> BigUint {
    let len = coords.iter().rposition(|c| !c.is_zero()).map_or(0, |i| i + 1);
    if len == 0 {
        return BigUint::one();
    }
    let mut codes: Vec<BigUint> = coords[..len].iter().map(scalar_code).collect();
    *codes.last_mut().expect("len >= 1") -= 1u32;
    pair0(&BigUint::from(len - 1), &tuple(&codes)) + 2u32
}

/// `x_j` for `j >= 1`.
pub fn enumerate_rational_c00(j: u64) -> Result<SymbolicSequence, Error> {
    let coords = decode_coordinates(&BigUint::from(j))?;
    Ok(SymbolicSequence::finite(
        coords
            .into_iter()
            .enumerate()
            .map(|(n, c)| (Index::from(n as u64), c)),
    ))
}

/// Inverse of [`enumerate_rational_c00`], for sequences with finitely many
/// rational values.
pub fn encode_rational_c00(x: &SymbolicSequence) -> Result<BigUint, Error> {
    if !x.has_finite_support() || !x.tails().is_empty() || !x.is_introspectable() {
        return Err(Error::Precondition("not a finite-part sequence".into()));
    }
    let Some(last) = x.finite_max() else {
        return Ok(BigUint::one());
    };
    let len = last
        .to_u64()
        .filter(|l| *l < 1 << 20)
        .ok_or_else(|| Error::Overflow(format!("support reaches {last}")))? as usize
        + 1;
    let mut coords = vec![Scalar::zero(); len];
    for (n, v) in x.finite_part() {
        let c = v
            .as_scalar()
            .ok_or_else(|| Error::Precondition(format!("irrational value at {n}")))?;
        coords[n.to_u64().expect("below last") as usize] = c;
    }
    Ok(encode_coordinates(&coords))
}
