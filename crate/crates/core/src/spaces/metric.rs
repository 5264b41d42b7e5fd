use num_traits::{One, Zero};

use super::Space;
use crate::certified::{
    bits_for_tolerance, pow_enclose, pow_lower_small_base, pow_upper_small_base, two_pow_neg,
    CertifiedReal,
};
use crate::error::Error;
use crate::families::Index;
use crate::scalar::{rat, Rational};
use crate::sequence::{coeff_pow, SymbolicSequence, Tail, TailClass};

/// Support points scanned before giving up on a filtered tail.
const SCAN_LIMIT: u64 = 1 << 16;

/// Certified distance between `x` and `y` in `space`, of width at most `tol`.
pub fn metric(
    space: &Space,
    x: &SymbolicSequence,
    y: &SymbolicSequence,
    tol: &Rational,
) -> Result<CertifiedReal, Error> {
    for s in [x, y] {
        let v = space.member(s)?;
        if !v.is_in() {
            return Err(Error::NotInSpace {
                space: space.to_string(),
                reason: serde_json::to_string(&v).expect("verdict serializes"),
            });
        }
    }
    let w = x.sub(y);
    let prec = bits_for_tolerance(tol);
    match space {
        Space::Lp(p) => lp_distance(p, &w, prec),
        Space::Cap(p) => cap_distance(p, &w, prec),
        Space::C00 | Space::C0 | Space::Linf => sup_abs(&w, prec),
        Space::AInf | Space::Full => product_distance(&w, prec),
        Space::H => majorant_distance(&w, prec),
    }
}

/// `d^p(w, 0)`: `(Σ|w|^p)^(1/p)` for `p >= 1`, `Σ|w|^p` below.
pub fn lp_distance(p: &Rational, w: &SymbolicSequence, prec: u32) -> Result<CertifiedReal, Error> {
    if p < &Rational::one() {
        return w.power_sum(p, prec + 1);
    }
    // |a^(1/p) - b^(1/p)| <= |a - b|^(1/p).
    let inner = (p * Rational::from_integer((prec + 2).into())).ceil().to_integer();
    let inner = u32::try_from(inner).map_err(|_| Error::Overflow("precision".into()))?;
    let s = w.power_sum(p, inner + 2)?;
    Ok(s.pow(&p.recip(), prec + 4).round(prec + 3))
}

/// `δ^p(w, 0) = Σ_k 2^-k d^(p_k)/(1 + d^(p_k))` with `p_k = p + 1/k`.
pub fn cap_distance(p: &Rational, w: &SymbolicSequence, prec: u32) -> Result<CertifiedReal, Error> {
    let terms = prec + 2;
    let mut acc = CertifiedReal::zero();
    for k in 1..=terms {
        let pk = p + rat(1, k as i64);
        let d = lp_distance(&pk, w, term_precision(prec, k))?;
        acc = &acc + &d.saturate().scale(&two_pow_neg(k));
    }
    Ok((&acc + &CertifiedReal::new(Rational::zero(), two_pow_neg(terms))).round(prec + 3))
}

/// Precision for the `k`-th term of a `Σ_k 2^-k (...)` series evaluated to
/// `2^-prec`: the weight absorbs `k` bits, and the `prec + 2` terms share
/// the remaining `2^-(prec+2)` budget.
fn term_precision(prec: u32, k: u32) -> u32 {
    let share = 32 - (prec + 2).leading_zeros();
    (prec + 2 + share).saturating_sub(k).max(1)
}

/// Effective points of `t` in increasing order, with index at most `last`.
fn points_upto<'a>(t: &'a Tail, last: &'a Index) -> impl Iterator<Item = (u64, Index)> + 'a {
    let r0 = t.start_rank();
    t.support()
        .iter_from(r0)
        .zip(r0..)
        .take_while(move |(n, _)| n <= last)
        .filter(|(n, _)| {
            t.excluded().binary_search(n).is_err() && t.within().iter().all(|s| s.contains(n))
        })
        .map(|(n, j)| (j, n))
}

fn first_point(t: &Tail) -> Result<Option<(u64, Index)>, Error> {
    let r0 = t.start_rank();
    let mut scanned = 0;
    for (n, j) in t.support().iter_from(r0).zip(r0..) {
        if t.excluded().binary_search(&n).is_err() && t.within().iter().all(|s| s.contains(&n)) {
            return Ok(Some((j, n)));
        }
        scanned += 1;
        if scanned > SCAN_LIMIT {
            return Err(Error::Undecidable(format!("no point found in {}", t.support())));
        }
    }
    Ok(None)
}

fn unbounded(t: &Tail, space: &str) -> Error {
    Error::NotInSpace {
        space: space.to_string(),
        reason: format!("{} tail is unbounded", t.class().name()),
    }
}

/// `sup_n |w(n)|`.
pub(crate) fn sup_abs(w: &SymbolicSequence, prec: u32) -> Result<CertifiedReal, Error> {
    if !w.is_introspectable() {
        return Err(Error::UnknownConvergence("supremum of a lazy sum".into()));
    }
    let mut best = CertifiedReal::zero();
    for v in w.finite_part().values() {
        best = best.max(&v.abs_enclose(prec + 2)?);
    }
    for t in w.tails() {
        let sup = match t.class() {
            TailClass::Constant => coeff_pow(t.coeff(), &Rational::one(), prec + 2),
            TailClass::LinearRank | TailClass::GeomInPositionGrowth { .. } => {
                return Err(unbounded(t, "linf"))
            }
            _ if !t.support().is_infinite() => {
                let mut m = CertifiedReal::zero();
                for (j, n) in t.points() {
                    m = m.max(&t.term_power(j, &n, &Rational::one(), prec + 2)?);
                }
                m
            }
            // The remaining classes decrease along the support.
            _ => match first_point(t)? {
                Some((j, n)) => t.term_power(j, &n, &Rational::one(), prec + 2)?,
                None => CertifiedReal::zero(),
            },
        };
        best = best.max(&sup);
    }
    Ok(best)
}

/// `Σ_n 2^-n |w(n)|/(1 + |w(n)|)`.
fn product_distance(w: &SymbolicSequence, prec: u32) -> Result<CertifiedReal, Error> {
    let cutoff = prec + 3;
    let mut acc = CertifiedReal::zero();
    for n in 0..cutoff {
        let v = w.value_at(&Index::from(n as u64)).abs_enclose(prec + 4)?;
        acc = &acc + &v.saturate().scale(&two_pow_neg(n));
    }
    Ok(&acc + &CertifiedReal::new(Rational::zero(), two_pow_neg(cutoff - 1)))
}

/// `r^n` for `0 < r < 1`.
fn small_power(r: &Rational, n: &Index, prec: u32) -> CertifiedReal {
    match n.to_u64() {
        Some(k) => CertifiedReal::new(
            pow_lower_small_base(r, k, prec),
            pow_upper_small_base(r, k, prec),
        ),
        None => CertifiedReal::new(Rational::zero(), two_pow_neg(prec)),
    }
}

/// Upper bound on `Σ_{n > last} |t(n)| r^n` over the whole support.
fn majorant_remainder(t: &Tail, r: &Rational, last: u64) -> Result<Rational, Error> {
    let c = coeff_pow(t.coeff(), &Rational::one(), 64).hi().clone();
    let one = Rational::one();
    let m = last + 1;
    Ok(match t.class() {
        TailClass::GeomInPosition { rho } => {
            let q = rho * r;
            c * pow_upper_small_base(&q, m, 64) / (&one - &q)
        }
        TailClass::LinearRank => {
            let gap = &one - r;
            let rm = pow_upper_small_base(r, m, 64);
            c * rm * (Rational::from_integer((m + 1).into()) / &gap + r / (&gap * &gap))
        }
        TailClass::GeomInPositionGrowth { .. } => return Err(unbounded(t, "H")),
        // Unit values at most 1.
        _ => c * pow_upper_small_base(r, m, 64) / (&one - r),
    })
}

/// `Σ_n |w(n)| r^n`, stopping early once the sum certainly exceeds 1.
fn majorant_sum(w: &SymbolicSequence, r: &Rational, prec: u32) -> Result<CertifiedReal, Error> {
    if !w.is_introspectable() {
        return Err(Error::UnknownConvergence("majorant of a lazy sum".into()));
    }
    let target = two_pow_neg(prec + 3);
    let one = Rational::one();
    let mut acc = CertifiedReal::zero();
    for (n, v) in w.finite_part() {
        let term = &v.abs_enclose(prec + 8)? * &small_power(r, n, prec + 8);
        acc = &acc + &term;
    }
    for t in w.tails() {
        if !t.support().is_infinite() {
            for (j, n) in t.points() {
                let term = &t.term_power(j, &n, &one, prec + 8)? * &small_power(r, &n, prec + 8);
                acc = &acc + &term;
            }
            continue;
        }
        let mut last = 16u64;
        let rest = loop {
            let rest = majorant_remainder(t, r, last)?;
            if rest <= target {
                break rest;
            }
            if last > 1 << 40 {
                return Err(Error::Undecided("majorant series converges too slowly".into()));
            }
            last *= 2;
        };
        let last_index = Index::from(last);
        let guard = prec + 8 + (64 - last.leading_zeros());
        for (j, n) in points_upto(t, &last_index) {
            let term = &t.term_power(j, &n, &one, guard)? * &small_power(r, &n, guard);
            acc = &acc + &term;
            if acc.lo() > &one {
                return Ok(acc);
            }
        }
        acc = &acc + &CertifiedReal::new(Rational::zero(), rest);
    }
    Ok(acc)
}

/// `Σ_k 2^-k min(1, Σ_n |w(n)| r_k^n)` with `r_k = k/(k+1)`.
fn majorant_distance(w: &SymbolicSequence, prec: u32) -> Result<CertifiedReal, Error> {
    let terms = prec + 2;
    let one = CertifiedReal::exact(Rational::one());
    let mut acc = CertifiedReal::zero();
    for k in 1..=terms {
        let r = rat(k as i64, k as i64 + 1);
        let m = majorant_sum(w, &r, term_precision(prec, k))?.min(&one);
        acc = &acc + &m.scale(&two_pow_neg(k));
    }
    Ok((&acc + &CertifiedReal::new(Rational::zero(), two_pow_neg(terms))).round(prec + 3))
}

/// Upper bound on `|x(n) - y(n)|` whenever the distance in `space` is at
/// most `d.hi()`.
pub fn pointwise_modulus(space: &Space, n: &Index, d: &CertifiedReal) -> Result<CertifiedReal, Error> {
    let dh = d.hi().clone().max(Rational::zero());
    let one = Rational::one();
    let coarse = || Error::TooCoarse(n.to_string());
    Ok(match space {
        Space::Lp(p) if p < &one => pow_enclose(&dh, &p.recip(), 64),
        Space::Lp(_) | Space::C00 | Space::C0 | Space::Linf => CertifiedReal::exact(dh),
        Space::Cap(_) => {
            // The k = 1 term of δ^p bounds d^(p+1), which dominates each coordinate.
            let t = &dh * Rational::from_integer(2.into());
            if t >= one {
                return Err(coarse());
            }
            CertifiedReal::exact(&t / (&one - &t))
        }
        Space::AInf | Space::Full => {
            let k = n.to_u64().filter(|k| *k < 1 << 16).ok_or_else(coarse)?;
            let t = &dh * Rational::from_integer(num_bigint::BigInt::one() << k);
            if t >= one {
                return Err(coarse());
            }
            CertifiedReal::exact(&t / (&one - &t))
        }
        Space::H => {
            let m = n.to_u64().filter(|k| *k < 1 << 16).ok_or_else(coarse)?;
            let mut best: Option<Rational> = None;
            for k in 1..=256u32 {
                let t = &dh * Rational::from_integer(num_bigint::BigInt::one() << k);
                if t >= one {
                    break;
                }
                let growth = pow_upper_small_base(&rat(k as i64 + 1, k as i64), m, 64);
                let b = t * growth;
                if best.as_ref().map_or(true, |x| &b < x) {
                    best = Some(b);
                }
            }
            CertifiedReal::exact(best.ok_or_else(coarse)?)
        }
    })
}

/// Human-readable form of the metric `metric` uses on `space`.
pub fn metric_description(space: &Space) -> String {
    match space {
        Space::Lp(p) if p < &Rational::one() => "d(x,y) = Σ|x(n)-y(n)|^p".into(),
        Space::Lp(_) => "d(x,y) = (Σ|x(n)-y(n)|^p)^(1/p)".into(),
        Space::Cap(_) => {
            "δ(x,y) = Σ_k 2^-k d_k/(1+d_k), d_k the ℓ^(p+1/k) distance".into()
        }
        Space::C00 | Space::C0 | Space::Linf => "d(x,y) = sup|x(n)-y(n)|".into(),
        Space::AInf | Space::Full => {
            "d(x,y) = Σ_n 2^-n |x(n)-y(n)|/(1+|x(n)-y(n)|) (product metric)".into()
        }
        Space::H => "d(x,y) = Σ_k 2^-k min(1, Σ_n |x(n)-y(n)| (k/(k+1))^n)".into(),
    }
}
