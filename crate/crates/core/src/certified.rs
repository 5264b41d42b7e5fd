//! Certified real enclosures with dyadic endpoints.
//!
//! Every `CertifiedReal` is a closed interval `[lo, hi]` guaranteed to contain
//! the value it stands for. Transcendental and algebraic operations round
//! outward onto the grid `2^-prec`, so precision is absolute, not relative.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::scalar::{format_rational, serde_rational, Rational};

/// Working precision floor used by comparisons that must be decided.
pub const PRECISION_FLOOR: u32 = 64;

/// Largest value of `x * 2^prec` rounded down.
pub fn floor_dyadic(q: &Rational, prec: u32) -> Rational {
    let scaled = q * Rational::from_integer(BigInt::one() << prec);
    Rational::new(scaled.floor().to_integer(), BigInt::one() << prec)
}

pub fn ceil_dyadic(q: &Rational, prec: u32) -> Rational {
    let scaled = q * Rational::from_integer(BigInt::one() << prec);
    Rational::new(scaled.ceil().to_integer(), BigInt::one() << prec)
}

/// `2^-k` as a rational.
pub fn two_pow_neg(k: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k)
}

fn is_dyadic_small(q: &Rational, prec: u32) -> bool {
    let d = q.denom();
    d.bits() <= prec as u64 + 1 && (d & (d - BigInt::one())).is_zero()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifiedReal {
    #[serde(with = "serde_rational")]
    lo: Rational,
    #[serde(with = "serde_rational")]
    hi: Rational,
}

impl CertifiedReal {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "empty enclosure");
        CertifiedReal { lo, hi }
    }

    pub fn exact(q: Rational) -> Self {
        CertifiedReal {
            lo: q.clone(),
            hi: q,
        }
    }

    pub fn zero() -> Self {
        CertifiedReal::exact(Rational::zero())
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, q: &Rational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    pub fn overlaps(&self, other: &CertifiedReal) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Encloses a set known to be non-negative.
    pub fn clamp_nonneg(self) -> Self {
        let lo = if self.lo.is_negative() {
            Rational::zero()
        } else {
            self.lo
        };
        let hi = if self.hi.is_negative() {
            Rational::zero()
        } else {
            self.hi
        };
        CertifiedReal { lo, hi }
    }

    /// Outward rounding onto the dyadic grid of step `2^-prec`.
    pub fn round(&self, prec: u32) -> Self {
        let lo = if is_dyadic_small(&self.lo, prec) {
            self.lo.clone()
        } else {
            floor_dyadic(&self.lo, prec)
        };
        let hi = if is_dyadic_small(&self.hi, prec) {
            self.hi.clone()
        } else {
            ceil_dyadic(&self.hi, prec)
        };
        CertifiedReal { lo, hi }
    }

    /// Strict sign decision: `Some(Greater)` if every point exceeds `q`.
    pub fn cmp_rational(&self, q: &Rational) -> Option<Ordering> {
        if &self.lo > q {
            Some(Ordering::Greater)
        } else if &self.hi < q {
            Some(Ordering::Less)
        } else if self.is_exact() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn certainly_lt(&self, q: &Rational) -> bool {
        &self.hi < q
    }

    pub fn certainly_gt(&self, q: &Rational) -> bool {
        &self.lo > q
    }

    pub fn excludes_zero(&self) -> bool {
        self.lo.is_positive() || self.hi.is_negative()
    }

    pub fn scale(&self, q: &Rational) -> Self {
        if q.is_negative() {
            CertifiedReal {
                lo: &self.hi * q,
                hi: &self.lo * q,
            }
        } else {
            CertifiedReal {
                lo: &self.lo * q,
                hi: &self.hi * q,
            }
        }
    }

    /// `1/x` for an interval bounded away from zero on the positive side.
    pub fn recip_pos(&self) -> Option<Self> {
        if !self.lo.is_positive() {
            return None;
        }
        Some(CertifiedReal {
            lo: self.hi.recip(),
            hi: self.lo.recip(),
        })
    }

    /// Interval hull of a max over two enclosures.
    pub fn max(&self, other: &Self) -> Self {
        CertifiedReal {
            lo: self.lo.clone().max(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    pub fn min(&self, other: &Self) -> Self {
        CertifiedReal {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().min(other.hi.clone()),
        }
    }

    /// `t / (1 + t)` for non-negative `t`; monotone increasing.
    pub fn saturate(&self) -> Self {
        let f = |t: &Rational| t / (Rational::one() + t);
        let c = self.clone().clamp_nonneg();
        CertifiedReal {
            lo: f(&c.lo),
            hi: f(&c.hi),
        }
    }

    /// `x^e` for a non-negative enclosure and rational exponent.
    pub fn pow(&self, e: &Rational, prec: u32) -> Self {
        let c = self.clone().clamp_nonneg();
        if e.is_zero() {
            return CertifiedReal::exact(Rational::one());
        }
        let a = pow_enclose(&c.lo, e, prec);
        let b = pow_enclose(&c.hi, e, prec);
        if e.is_positive() {
            CertifiedReal {
                lo: a.lo,
                hi: b.hi,
            }
        } else {
            CertifiedReal {
                lo: b.lo,
                hi: a.hi,
            }
        }
    }

    /// Approximate midpoint as f64, for display only.
    pub fn approx(&self) -> f64 {
        let m = (&self.lo + &self.hi) / Rational::from_integer(2.into());
        m.to_f64().unwrap_or(f64::NAN)
    }
}

impl Add for &CertifiedReal {
    type Output = CertifiedReal;
    fn add(self, o: &CertifiedReal) -> CertifiedReal {
        CertifiedReal {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
        }
    }
}

impl Sub for &CertifiedReal {
    type Output = CertifiedReal;
    fn sub(self, o: &CertifiedReal) -> CertifiedReal {
        CertifiedReal {
            lo: &self.lo - &o.hi,
            hi: &self.hi - &o.lo,
        }
    }
}

impl Neg for &CertifiedReal {
    type Output = CertifiedReal;
    fn neg(self) -> CertifiedReal {
        CertifiedReal {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }
}

impl Mul for &CertifiedReal {
    type Output = CertifiedReal;
    fn mul(self, o: &CertifiedReal) -> CertifiedReal {
        let c = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        CertifiedReal { lo, hi }
    }
}

impl fmt::Display for CertifiedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{}", format_rational(&self.lo))
        } else {
            write!(f, "[{:.12e}, {:.12e}]", self.lo.to_f64().unwrap_or(f64::NAN), self.hi.to_f64().unwrap_or(f64::NAN))
        }
    }
}

fn pow_big(q: &Rational, e: u32) -> Rational {
    Rational::new(
        num_traits::pow(q.numer().clone(), e as usize),
        num_traits::pow(q.denom().clone(), e as usize),
    )
}

/// Encloses `x^e` for `x >= 0` and rational `e`, width at most `2^-prec`
/// unless the value is an exact rational.
///
/// Panics for `x = 0` with a negative exponent.
pub fn pow_enclose(x: &Rational, e: &Rational, prec: u32) -> CertifiedReal {
    assert!(!x.is_negative(), "pow of a negative base");
    if x.is_zero() {
        assert!(e.is_positive(), "0 raised to a non-positive power");
        return CertifiedReal::zero();
    }
    if x.is_one() {
        return CertifiedReal::exact(Rational::one());
    }
    let u = e.numer().abs().to_u32().expect("exponent numerator too large");
    let v = e.denom().to_u32().expect("exponent denominator too large");
    let base = if e.is_negative() { x.recip() } else { x.clone() };
    let powered = pow_big(&base, u);
    if v == 1 {
        return CertifiedReal::exact(powered);
    }
    // Perfect v-th power: exact answer.
    if let (Some(rn), Some(rd)) = (
        exact_root(&powered.numer().to_biguint().unwrap(), v),
        exact_root(&powered.denom().to_biguint().unwrap(), v),
    ) {
        return CertifiedReal::exact(Rational::new(BigInt::from(rn), BigInt::from(rd)));
    }
    let p = prec + 2;
    let scaled: BigUint = ((powered.numer().to_biguint().unwrap()) << (v as u64 * p as u64))
        / powered.denom().to_biguint().unwrap();
    let r = scaled.nth_root(v);
    let den = BigInt::one() << p;
    CertifiedReal {
        lo: Rational::new(BigInt::from_biguint(Sign::Plus, r.clone()), den.clone()),
        hi: Rational::new(BigInt::from_biguint(Sign::Plus, r + 1u32), den),
    }
}

fn exact_root(n: &BigUint, v: u32) -> Option<BigUint> {
    let r = n.nth_root(v);
    if num_traits::pow(r.clone(), v as usize) == *n {
        Some(r)
    } else {
        None
    }
}

/// Encloses `log2(m)` for an integer `m >= 1`, width at most `2^-prec`.
pub fn log2_enclose(m: &BigUint, prec: u32) -> CertifiedReal {
    assert!(!m.is_zero(), "log2 of zero");
    let k = m.bits() - 1;
    let int_part = Rational::from_integer(BigInt::from(k));
    if m.count_ones() == 1 {
        return CertifiedReal::exact(int_part);
    }
    // Fixed point with W fractional bits; y = m / 2^k in (1, 2).
    let w = 2 * prec as u64 + 48;
    let one = BigUint::one() << w;
    let two = &one << 1u32;
    let mut ylo: BigUint = if k <= w {
        m << (w - k)
    } else {
        m >> (k - w)
    };
    let mut yhi: BigUint = if k <= w {
        ylo.clone()
    } else {
        &ylo + 1u32
    };
    let mut bits = BigUint::zero();
    let mut decided = 0u32;
    let target = prec + 1;
    while decided < target {
        ylo = (&ylo * &ylo) >> w;
        yhi = ((&yhi * &yhi) >> w) + 1u32;
        if ylo >= two {
            bits = (bits << 1u32) + 1u32;
            ylo >>= 1u32;
            yhi = (yhi + 1u32) >> 1u32;
        } else if yhi < two {
            bits <<= 1u32;
        } else {
            break;
        }
        decided += 1;
    }
    let den = BigInt::one() << decided;
    let lo = Rational::new(BigInt::from(bits.clone()), den.clone());
    let hi = Rational::new(BigInt::from(bits + 1u32), den);
    CertifiedReal {
        lo: &int_part + lo,
        hi: &int_part + hi,
    }
}

/// Encloses `sqrt(q)` for `q >= 0`.
pub fn sqrt_enclose(q: &Rational, prec: u32) -> CertifiedReal {
    pow_enclose(q, &Rational::new(1.into(), 2.into()), prec)
}

/// Upper bound on `r^n` for `0 <= r < 1`; exact rational computation for
/// small `n`, repeated squaring with upward rounding otherwise.
pub fn pow_upper_small_base(r: &Rational, n: u64, prec: u32) -> Rational {
    if n == 0 {
        return Rational::one();
    }
    if r.is_zero() {
        return Rational::zero();
    }
    let cap = two_pow_neg(prec + 8);
    let mut result = Rational::one();
    let mut base = ceil_dyadic(r, prec + 16);
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = ceil_dyadic(&(&result * &base), prec + 16);
            if result <= cap {
                return result;
            }
        }
        e >>= 1;
        if e > 0 {
            base = ceil_dyadic(&(&base * &base), prec + 16);
        }
    }
    result
}

/// Lower bound on `r^n` for `0 <= r < 1`.
pub fn pow_lower_small_base(r: &Rational, n: u64, prec: u32) -> Rational {
    let mut result = Rational::one();
    let mut base = floor_dyadic(r, prec + 16);
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = floor_dyadic(&(&result * &base), prec + 16);
        }
        e >>= 1;
        if e > 0 {
            base = floor_dyadic(&(&base * &base), prec + 16);
        }
        if result.is_zero() {
            break;
        }
    }
    result
}

/// Number of bits `prec` such that `2^-prec <= tol`.
pub fn bits_for_tolerance(tol: &Rational) -> u32 {
    assert!(tol.is_positive(), "tolerance must be positive");
    let mut k = 0u32;
    let mut t = Rational::one();
    while &t > tol {
        t /= Rational::from_integer(2.into());
        k += 1;
    }
    k
}
