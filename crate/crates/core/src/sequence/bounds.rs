//! Certified bounds on power series `Σ |x(n)|^p`: tail bounds by integral
//! and geometric comparison, divergence schedules, and enclosures of the
//! full sums used by the metrics.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::sync::{Mutex, OnceLock};

use super::tail::{Tail, TailClass};
use super::SymbolicSequence;
use crate::certified::{
    log2_enclose, pow_enclose, pow_lower_small_base, pow_upper_small_base, two_pow_neg,
    CertifiedReal,
};
use crate::error::Error;
use crate::families::{Index, IndexSet};
use crate::scalar::{serde_rational, Rational, Scalar};

/// Outcome of [`SymbolicSequence::series_tail_bound`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeriesVerdict {
    /// `Σ_{n >= N} |x(n)|^p <= bound.hi()`.
    ConvergentWithBound { bound: CertifiedReal },
    Divergent { schedule: DivergenceSchedule },
}

/// A monotone lower-bound schedule for the partial sums of one tail: for
/// every `M`, the effective terms of that tail with ranks in
/// `start_rank..=rank_for(M)` sum to more than `M`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivergenceSchedule {
    pub tail: usize,
    #[serde(with = "serde_rational")]
    pub p: Rational,
    pub start_rank: u64,
    /// Excluded points at or above `start_rank`.
    pub excluded: u64,
    pub kind: ScheduleKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleKind {
    /// The rank-`j` term is at least `scale / (j + 1)`.
    Harmonic {
        #[serde(with = "serde_rational")]
        scale: Rational,
    },
    /// Every term is at least `term`.
    Constant {
        #[serde(with = "serde_rational")]
        term: Rational,
    },
    /// The rank-`j` term is at least `scale / log2(j + 2)^p`, decreasing in `j`.
    LogPower {
        #[serde(with = "serde_rational")]
        scale: Rational,
    },
}

impl DivergenceSchedule {
    /// The last rank `J` of the promised partial sum exceeding `m`.
    pub fn rank_for(&self, m: &Rational) -> Result<u64, Error> {
        let overflow = || Error::Overflow(format!("divergence schedule rank for M = {m}"));
        let r0 = self.start_rank;
        let e = self.excluded;
        let floor_u64 = |q: Rational| q.floor().to_integer().to_u64().ok_or_else(overflow);
        match &self.kind {
            ScheduleKind::Constant { term } => {
                let need = floor_u64(m / term)?;
                r0.checked_add(e)
                    .and_then(|x| x.checked_add(need))
                    .ok_or_else(overflow)
            }
            ScheduleKind::Harmonic { scale } => {
                // Drop the `e` largest terms, then sum 1/m over m >= a.
                let a = r0.checked_add(e).and_then(|x| x.checked_add(1)).ok_or_else(overflow)?;
                let ratio = m / scale;
                if a == 1 {
                    // Σ_{m=1}^{2^k} 1/m >= 1 + k/2.
                    let k = if ratio < Rational::one() {
                        0
                    } else {
                        floor_u64((ratio - Rational::one()) * Rational::from_integer(2.into()))? + 1
                    };
                    if k >= 64 {
                        return Err(overflow());
                    }
                    Ok((1u64 << k) - 1)
                } else {
                    // Σ_{m=a}^{a·2^k - 1} 1/m >= k/2.
                    let k = floor_u64(ratio * Rational::from_integer(2.into()))? + 1;
                    if k >= 64 {
                        return Err(overflow());
                    }
                    a.checked_mul(1u64 << k)
                        .map(|x| x - 2)
                        .ok_or_else(overflow)
                }
            }
            ScheduleKind::LogPower { scale } => {
                for k in 1..63u32 {
                    let last = (1u64 << k) - 1;
                    if last < r0 + e {
                        continue;
                    }
                    let count = last - r0 + 1 - e;
                    let denom = pow_enclose(&Rational::from_integer((k + 1).into()), &self.p, 32);
                    let lower = scale * Rational::from_integer(count.into()) / denom.hi();
                    if &lower > m {
                        return Ok(last);
                    }
                }
                Err(overflow())
            }
        }
    }

    /// Certified sum of the promised terms for `m`; exceeds `m` when the
    /// schedule is honest.
    pub fn partial_sum(&self, x: &SymbolicSequence, m: &Rational, prec: u32) -> Result<CertifiedReal, Error> {
        let last = self.rank_for(m)?;
        let t = x
            .tails
            .get(self.tail)
            .ok_or_else(|| Error::Precondition(format!("no tail {}", self.tail)))?;
        t.power_sum_ranks(&self.p, self.start_rank, last, prec)
    }
}

/// `|c|^p`.
pub(crate) fn coeff_pow(c: &Scalar, p: &Rational, prec: u32) -> CertifiedReal {
    if c.im.is_zero() {
        pow_enclose(&c.re.abs(), p, prec)
    } else {
        pow_enclose(&c.norm_sqr(), &(p / Rational::from_integer(2.into())), prec)
    }
}

/// Retries `f` at growing working precision until the enclosure is at most
/// `2^-prec` wide.
pub(crate) fn refine<F>(prec: u32, f: F) -> Result<CertifiedReal, Error>
where
    F: Fn(u32) -> Result<CertifiedReal, Error>,
{
    let target = two_pow_neg(prec);
    let mut work = prec + 8;
    let mut last = None;
    for _ in 0..6 {
        let r = f(work)?;
        if r.width() <= target {
            return Ok(r);
        }
        last = Some(r);
        work += 24;
    }
    Err(Error::Undecided(format!(
        "enclosure width {} above 2^-{prec}",
        last.map(|r| r.width().to_string()).unwrap_or_default()
    )))
}

fn big(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Enclosure of `rho^(p n)` for `0 < rho`, using `u = rho^p`.
fn geom_power(rho: &Rational, p: &Rational, n: &Index, prec: u32) -> Result<CertifiedReal, Error> {
    if let Some(k) = n.to_u64() {
        let e = p * big(k);
        let small = e.numer().bits() <= 32 && e.denom().bits() <= 32;
        let width = rho.numer().bits().max(rho.denom().bits()) * e.numer().to_u64().unwrap_or(u64::MAX);
        if small && width <= 1 << 16 {
            return Ok(pow_enclose(rho, &e, prec));
        }
    }
    if rho > &Rational::one() {
        return Err(Error::Overflow(format!("{rho}^({p}·{n})")));
    }
    let u = pow_enclose(rho, p, prec + 24);
    let k = n.clamp_u64(u64::MAX);
    let hi = pow_upper_small_base(u.hi(), k, prec + 4);
    let lo = if n.to_u64().is_some() && hi > two_pow_neg(prec + 2) {
        pow_lower_small_base(u.lo(), k, prec + 4)
    } else {
        Rational::zero()
    };
    Ok(CertifiedReal::new(lo, hi))
}

/// First element and common difference of `set` from rank `r` on, when
/// the set is an arithmetic progression of machine-sized indices.
fn arithmetic_from(set: &IndexSet, r: u64) -> Option<(u64, u64)> {
    match set {
        IndexSet::Ray { start } => Some((start.to_u64()?.checked_add(r)?, 1)),
        IndexSet::Progression { start, step } => Some((step.checked_mul(r)?.checked_add(*start)?, *step)),
        IndexSet::Cut { parent, from } => arithmetic_from(parent, parent.count_below(from).checked_add(r)?),
        _ => None,
    }
}

/// Enclosure of `n^-p` for `n >= 1`.
fn recip_power(n: &Index, p: &Rational, prec: u32) -> CertifiedReal {
    let d = n.depth();
    if d < 4096 {
        let v = Rational::from_integer(BigInt::from(n.to_biguint()));
        return pow_enclose(&v, &-p, prec);
    }
    // n >= 2^(d-1), so n^-p <= 2^(-p(d-1)).
    let e = (p * big(d - 1)).floor().to_integer().to_u32().unwrap_or(u32::MAX);
    CertifiedReal::new(Rational::zero(), two_pow_neg(e.min(1 << 20)))
}

impl TailClass {
    /// Enclosure of `|unit value|^p` at rank `j`, position `n`.
    pub fn unit_power(&self, j: u64, n: &Index, p: &Rational, prec: u32) -> Result<CertifiedReal, Error> {
        Ok(match self {
            TailClass::GeomInPosition { rho } | TailClass::GeomInPositionGrowth { rho } => {
                geom_power(rho, p, n, prec)?
            }
            TailClass::PowerInRank { alpha } => pow_enclose(&big(j + 1), &-(alpha * p), prec),
            TailClass::ReciprocalPosition => recip_power(n, p, prec),
            TailClass::LogReciprocalRank => {
                let l = log2_enclose(&(BigUint::from(j) + 2u32), prec + 4);
                l.recip_pos().expect("log2 >= 1").pow(p, prec + 2)
            }
            TailClass::Constant => CertifiedReal::exact(Rational::one()),
            TailClass::LinearRank => pow_enclose(&big(j + 1), p, prec),
        })
    }
}

/// Even Bernoulli numbers `B_0, B_2, …, B_{2k}`, computed once and cached.
fn bernoulli_even(k: usize) -> Vec<Rational> {
    static CACHE: OnceLock<Mutex<Vec<Rational>>> = OnceLock::new();
    let mut cache = CACHE.get_or_init(Default::default).lock().expect("not poisoned");
    if cache.len() <= k {
        // Akiyama–Tanigawa.
        let n = 2 * k.max(8) + 1;
        let mut row: Vec<Rational> = Vec::with_capacity(n + 1);
        let mut all = Vec::with_capacity(n + 1);
        for m in 0..=n {
            row.push(Rational::new(1.into(), big(m as u64 + 1).to_integer()));
            for i in (1..=m).rev() {
                row[i - 1] = big(i as u64) * (&row[i - 1] - &row[i]);
            }
            all.push(row[0].clone());
        }
        *cache = all.into_iter().step_by(2).collect();
    }
    cache[..=k].to_vec()
}

/// `Σ_{m >= a} m^-s` for `s > 1`, by Euler–Maclaurin at a cutoff `J`
/// proportional to the precision, adding Bernoulli corrections until the
/// first omitted one (a bound on the remainder for completely monotone
/// terms) is small enough.
pub(crate) fn zeta_tail(s: &Rational, a: u64, prec: u32) -> CertifiedReal {
    assert!(s > &Rational::one() && a >= 1);
    let target = two_pow_neg(prec + 4);
    let j = a.max(16).max(u64::from(prec / 4));
    let jr = big(j);
    let j2 = &jr * &jr;
    // Multiplier of J^-s; every correction term is rational.
    let mut factor = &jr / (s - Rational::one()) + Rational::new(1.into(), 2.into());
    let mut rising = s.clone();
    let mut fact = big(2);
    let mut jpow = jr.clone();
    let mut k = 1usize;
    let err = loop {
        let b = bernoulli_even(k + 1);
        let term = &b[k] * &rising / (&fact * &jpow);
        factor += term;
        let two_k = big(2 * k as u64);
        rising = rising * (s + &two_k - Rational::one()) * (s + &two_k);
        fact = fact * (&two_k + Rational::one()) * (&two_k + big(2));
        jpow = &jpow * &j2;
        let next = (&b[k + 1] * &rising / (&fact * &jpow)).abs();
        if next <= target || k >= 512 {
            break next;
        }
        k += 1;
    };
    let extra = factor.abs().ceil().to_integer().bits() as u32;
    let f = pow_enclose(&jr, &-s, prec + 16 + extra);
    let main = f.scale(&factor);
    // J^-s <= 1.
    let tail = &main + &CertifiedReal::new(-err.clone(), err);
    let mut head = CertifiedReal::zero();
    for m in a..j {
        head = &head + &pow_enclose(&big(m), &-s, prec + 16);
    }
    (&head + &tail).round(prec + 4)
}

impl Tail {
    /// `|c|^p · |unit|^p` at rank `j`, position `n`.
    pub fn term_power(&self, j: u64, n: &Index, p: &Rational, prec: u32) -> Result<CertifiedReal, Error> {
        let c = coeff_pow(&self.term.coeff, p, prec + 4);
        let u = self.term.class.unit_power(j, n, p, prec + 4 + c.hi().to_integer().bits() as u32)?;
        Ok((&c * &u).round(prec + 2))
    }

    /// Sum of `|x(n)|^p` over effective points with ranks in `first..=last`.
    pub fn power_sum_ranks(&self, p: &Rational, first: u64, last: u64, prec: u32) -> Result<CertifiedReal, Error> {
        let count = last.saturating_sub(first) + 1;
        let work = prec + 66 - count.leading_zeros();
        let r0 = first.max(self.start_rank());
        let mut acc = CertifiedReal::zero();
        for (j, n) in self.points_from_rank(r0) {
            if j > last {
                break;
            }
            acc = &acc + &self.term_power(j, &n, p, work)?;
        }
        Ok(acc)
    }

    /// Effective points at ranks `>= r`.
    pub(crate) fn points_from_rank(&self, r: u64) -> impl Iterator<Item = (u64, Index)> + '_ {
        let r0 = r.max(self.start_rank());
        self.support
            .iter_from(r0)
            .zip(r0..)
            .map(|(n, j)| (j, n))
            .filter(|(_, n)| {
                self.exclude.binary_search(n).is_err() && self.within.iter().all(|w| w.contains(n))
            })
    }

    /// `Σ u^n` over the effective points from rank `r0`, in closed form
    /// `u^first / (1 - u^step)` when they form an arithmetic progression.
    fn arithmetic_geom_sum(
        &self,
        rho: &Rational,
        p: &Rational,
        u: &CertifiedReal,
        r0: u64,
        guard: u32,
    ) -> Option<CertifiedReal> {
        let (first, step) = arithmetic_from(&self.support, r0)?;
        let one = Rational::one();
        if !u.lo().is_positive() || u.hi() >= &one {
            return None;
        }
        let bound = |v: &Rational, upper: bool| {
            let (head, period) = if upper {
                (pow_upper_small_base(v, first, guard + 8), pow_upper_small_base(v, step, guard + 8))
            } else {
                (pow_lower_small_base(v, first, guard + 8), pow_lower_small_base(v, step, guard + 8))
            };
            head / (&one - period)
        };
        let (mut lo, mut hi) = (bound(u.lo(), false), bound(u.hi(), true));
        let first = Index::from(first);
        for e in self.exclude.iter().filter(|e| **e >= first) {
            let t = geom_power(rho, p, e, guard + 8).ok()?;
            lo -= t.hi();
            hi -= t.lo();
        }
        Some(CertifiedReal::new(lo.max(Rational::zero()), hi))
    }

    fn excluded_from(&self, start: &Index) -> u64 {
        self.exclude.iter().filter(|e| *e >= start).count() as u64
    }

    /// Tail bound or divergence schedule for `Σ_{n >= start} |x(n)|^p`.
    fn series_verdict(&self, index: usize, p: &Rational, n: &Index) -> Result<SeriesVerdict, Error> {
        let start = match &self.from {
            Some(f) if f > n => f.clone(),
            _ => n.clone(),
        };
        let r = self.support.count_below(&start);
        let prec = 64;
        let c = coeff_pow(&self.term.coeff, p, prec);
        if !self.support.is_infinite() {
            let mut acc = CertifiedReal::zero();
            for (j, m) in self.points_from_rank(r) {
                acc = &acc + &self.term_power(j, &m, p, prec)?;
            }
            return Ok(SeriesVerdict::ConvergentWithBound { bound: acc });
        }
        let divergent = |kind: ScheduleKind| {
            if !self.is_cofinite() {
                return Err(Error::UnknownConvergence(format!(
                    "divergent class {} under a filtered support",
                    self.term.class.name()
                )));
            }
            Ok(SeriesVerdict::Divergent {
                schedule: DivergenceSchedule {
                    tail: index,
                    p: p.clone(),
                    start_rank: r,
                    excluded: self.excluded_from(&start),
                    kind,
                },
            })
        };
        let bound = match &self.term.class {
            TailClass::GeomInPosition { rho } => {
                let u = pow_enclose(rho, p, prec).hi().clone();
                if u >= Rational::one() {
                    return Err(Error::Undecided(format!("{rho}^{p} against 1")));
                }
                let first = self.support.nth(r).expect("infinite support");
                let lead = pow_upper_small_base(&u, first.clamp_u64(u64::MAX), prec);
                c.scale(&(lead / (Rational::one() - u)))
            }
            TailClass::PowerInRank { alpha } => {
                let s = alpha * p;
                if s <= Rational::one() {
                    return divergent(ScheduleKind::Harmonic { scale: c.lo().clone() });
                }
                // Σ_{m >= m0} m^-s <= m0^-s + m0^(1-s)/(s-1).
                let m0 = big(r + 1);
                let f = pow_enclose(&m0, &-&s, prec);
                let integral = f.scale(&(&m0 / (&s - Rational::one())));
                &c * &(&f + &integral)
            }
            TailClass::ReciprocalPosition => {
                // n_j >= 2^j.
                let q = pow_enclose(&Rational::new(1.into(), 2.into()), p, prec);
                let lead = pow_enclose(&Rational::new(1.into(), 2.into()), &(p * big(r)), prec);
                let denom = Rational::one() - q.hi();
                c.scale(&(lead.hi() / denom))
            }
            TailClass::LogReciprocalRank => {
                return divergent(ScheduleKind::LogPower { scale: c.lo().clone() })
            }
            TailClass::Constant | TailClass::LinearRank | TailClass::GeomInPositionGrowth { .. } => {
                return divergent(ScheduleKind::Constant { term: c.lo().clone() })
            }
        };
        Ok(SeriesVerdict::ConvergentWithBound { bound })
    }

    /// Enclosure of `Σ |x(n)|^p` over the effective support, width at most
    /// `2^-prec`.
    pub fn power_sum(&self, p: &Rational, prec: u32) -> Result<CertifiedReal, Error> {
        refine(prec, |work| self.power_sum_at(p, work))
    }

    fn power_sum_at(&self, p: &Rational, prec: u32) -> Result<CertifiedReal, Error> {
        if !self.is_cofinite() {
            return Err(Error::UnknownConvergence(format!(
                "sum over a filtered support of {}",
                self.support
            )));
        }
        let r0 = self.start_rank();
        if !self.support.is_infinite() {
            let mut acc = CertifiedReal::zero();
            for (j, n) in self.points_from_rank(r0) {
                acc = &acc + &self.term_power(j, &n, p, prec + 8)?;
            }
            return Ok(acc);
        }
        let c = coeff_pow(&self.term.coeff, p, prec + 8);
        let guard = prec + 8 + c.hi().to_integer().bits() as u32;
        let small = two_pow_neg(guard + 2);
        let unit_sum = match &self.term.class {
            TailClass::PowerInRank { alpha } => {
                let s = alpha * p;
                if s <= Rational::one() {
                    return Err(Error::UnknownConvergence(format!("Σ (j+1)^-{s} diverges")));
                }
                let mut total = zeta_tail(&s, r0 + 1, guard);
                for e in &self.exclude {
                    let j = self.support.rank_of(e).expect("excluded points lie in the support");
                    let t = pow_enclose(&big(j + 1), &-&s, guard + 8);
                    total = &total - &t;
                }
                total
            }
            TailClass::GeomInPosition { rho } => {
                let u = pow_enclose(rho, p, guard + 24);
                if let Some(sum) = self.arithmetic_geom_sum(rho, p, &u, r0, guard) {
                    return Ok((&c * &sum.clamp_nonneg()).round(prec + 2));
                }
                let one_minus = Rational::one() - u.hi();
                let mut acc = CertifiedReal::zero();
                let mut rest = None;
                for (j, n) in self.points_from_rank(r0) {
                    acc = &acc + &self.term.class.unit_power(j, &n, p, guard + 8)?;
                    let next = n.add_u64(1).clamp_u64(u64::MAX);
                    let r = pow_upper_small_base(u.hi(), next, guard + 8) / &one_minus;
                    if r <= small {
                        rest = Some(r);
                        break;
                    }
                }
                &acc + &CertifiedReal::new(Rational::zero(), rest.unwrap_or_default())
            }
            TailClass::ReciprocalPosition => {
                let half = Rational::new(1.into(), 2.into());
                let q = pow_enclose(&half, p, guard + 8);
                let one_minus = Rational::one() - q.hi();
                let mut acc = CertifiedReal::zero();
                let mut rest = None;
                for (j, n) in self.points_from_rank(r0) {
                    acc = &acc + &recip_power(&n, p, guard + 8);
                    let lead = pow_enclose(&half, &(p * big(j + 1)), guard + 8);
                    let r = lead.hi() / &one_minus;
                    if r <= small {
                        rest = Some(r);
                        break;
                    }
                }
                &acc + &CertifiedReal::new(Rational::zero(), rest.unwrap_or_default())
            }
            _ => {
                return Err(Error::UnknownConvergence(format!(
                    "Σ |x|^{p} diverges for {}",
                    self.term.class.name()
                )))
            }
        };
        Ok((&c * &unit_sum.clamp_nonneg()).round(prec + 2))
    }
}

impl SymbolicSequence {
    /// Bound on `Σ_{n >= start} |x(n)|^p`, or a divergence schedule.
    pub fn series_tail_bound(&self, p: &Rational, start: &Index) -> Result<SeriesVerdict, Error> {
        assert!(p.is_positive(), "exponent must be positive");
        if !self.lazy.is_empty() {
            let mut head = self.clone();
            let parts = std::mem::take(&mut head.lazy);
            let mut bounds = vec![];
            for part in std::iter::once(&head).chain(parts.iter()) {
                match part.series_tail_bound(p, start)? {
                    SeriesVerdict::ConvergentWithBound { bound } => bounds.push(bound),
                    SeriesVerdict::Divergent { .. } => {
                        return Err(Error::UnknownConvergence(
                            "divergent summand inside a lazy sum".into(),
                        ))
                    }
                }
            }
            return Ok(SeriesVerdict::ConvergentWithBound {
                bound: minkowski(&bounds, p),
            });
        }
        let mut total = CertifiedReal::zero();
        for (i, t) in self.tails.iter().enumerate() {
            match t.series_verdict(i, p, start)? {
                SeriesVerdict::ConvergentWithBound { bound } => total = &total + &bound,
                d => return Ok(d),
            }
        }
        for (n, v) in self.finite.range(start.clone()..) {
            let _ = n;
            total = &total + &v.abs_enclose(64)?.pow(p, 64);
        }
        Ok(SeriesVerdict::ConvergentWithBound { bound: total })
    }

    /// Enclosure of `Σ_n |x(n)|^p`, width at most `2^-prec`.
    pub fn power_sum(&self, p: &Rational, prec: u32) -> Result<CertifiedReal, Error> {
        if !self.lazy.is_empty() {
            return Err(Error::UnknownConvergence("power sum of a lazy sum".into()));
        }
        let parts = self.tails.len() as u32 + 1;
        let share = prec + 2 + (32 - parts.leading_zeros());
        let mut total = CertifiedReal::zero();
        for t in &self.tails {
            total = &total + &t.power_sum(p, share)?;
        }
        // Runs of equal values are summed as count × term.
        let mut runs: Vec<(&crate::value::Value, u64)> = vec![];
        for v in self.finite.values() {
            match runs.last_mut() {
                Some((last, k)) if *last == v => *k += 1,
                _ => runs.push((v, 1)),
            }
        }
        for (v, k) in runs {
            let extra = 64 - k.leading_zeros();
            let one = refine(share + extra, |w| Ok(v.abs_enclose(w)?.pow(p, w)))?;
            total = &total + &one.scale(&big(k));
        }
        Ok(total)
    }

    /// Sum of `|x(n)|^p` over the first `count` support points `>= from`.
    pub fn partial_power_sum(
        &self,
        p: &Rational,
        from: &Index,
        count: usize,
        prec: u32,
    ) -> Result<CertifiedReal, Error> {
        let mut points: Vec<(Index, Option<(usize, u64)>)> = self
            .finite
            .range(from.clone()..)
            .take(count)
            .map(|(n, _)| (n.clone(), None))
            .collect();
        for (i, t) in self.tails.iter().enumerate() {
            let r = t.support.count_below(from);
            points.extend(t.points_from_rank(r).take(count).map(|(j, n)| (n, Some((i, j)))));
        }
        points.sort_by(|a, b| a.0.cmp(&b.0));
        points.truncate(count);
        let work = prec + 66 - (count as u64).leading_zeros();
        let mut acc = CertifiedReal::zero();
        for (n, src) in points {
            let term = match src {
                Some((i, j)) => self.tails[i].term_power(j, &n, p, work)?,
                None => self.finite[&n].abs_enclose(work)?.pow(p, work),
            };
            acc = &acc + &term;
        }
        for part in &self.lazy {
            acc = &acc + &part.partial_power_sum(p, from, count, prec)?;
        }
        Ok(acc)
    }
}

/// Bound on `Σ |Σ_i x_i|^p` from bounds `B_i` on `Σ |x_i|^p`.
fn minkowski(bounds: &[CertifiedReal], p: &Rational) -> CertifiedReal {
    if p < &Rational::one() {
        return bounds.iter().fold(CertifiedReal::zero(), |a, b| &a + b);
    }
    let inv = p.recip();
    let sum = bounds
        .iter()
        .fold(CertifiedReal::zero(), |a, b| &a + &b.pow(&inv, 64));
    sum.pow(p, 64)
}
