//! Cantor pairing, one-based on `N × N` (for partitions) and zero-based on
//! big naturals (for enumerations).

use num_bigint::BigUint;

/// `π(i, j) = (i+j-2)(i+j-1)/2 + (i-1)` for `i, j >= 1`.
pub fn pair(i: u64, j: u64) -> u64 {
    assert!(i >= 1 && j >= 1, "pairing is defined on N x N");
    let d = (i + j - 2) as u128;
    let r = d * (d + 1) / 2 + (i - 1) as u128;
    u64::try_from(r).expect("pairing overflow")
}

/// Inverse of [`pair`].
pub fn unpair(r: u64) -> (u64, u64) {
    let r = r as u128;
    let w = ((8 * r + 1).isqrt() - 1) / 2;
    let t = r - w * (w + 1) / 2;
    ((t + 1) as u64, (w - t + 1) as u64)
}

/// Zero-based pairing `ℕ₀ × ℕ₀ → ℕ₀` on big naturals.
pub fn pair0(a: &BigUint, b: &BigUint) -> BigUint {
    let d = a + b;
    (&d * (&d + 1u32) >> 1u32) + a
}

/// Inverse of [`pair0`].
pub fn unpair0(r: &BigUint) -> (BigUint, BigUint) {
    let eight_r1: BigUint = (r << 3u32) + 1u32;
    let w = (eight_r1.sqrt() - 1u32) >> 1u32;
    let tri = &w * (&w + 1u32) >> 1u32;
    let a = r - tri;
    let b = &w - &a;
    (a, b)
}

/// Bijection `ℕ₀ → ℕ₀^len` by nested pairing; `len >= 1`.
pub fn untuple(code: &BigUint, len: usize) -> Vec<BigUint> {
    assert!(len >= 1);
    let mut out = Vec::with_capacity(len);
    let mut rest = code.clone();
    for _ in 1..len {
        let (a, b) = unpair0(&rest);
        out.push(a);
        rest = b;
    }
    out.push(rest);
    out
}

/// Inverse of [`untuple`].
pub fn tuple(codes: &[BigUint]) -> BigUint {
    assert!(!codes.is_empty());
    let mut acc = codes.last().unwrap().clone();
    for c in codes[..codes.len() - 1].iter().rev() {
        acc = pair0(c, &acc);
    }
    acc
}
