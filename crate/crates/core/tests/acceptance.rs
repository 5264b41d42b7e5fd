//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero on any failure that is not a documented unattainable clause.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use common::{branches, surviving_mutations, tol};
use lineable::certificate::Item;
use lineable::certified::{pow_enclose, two_pow_neg};
use lineable::enumeration::{encode_rational_c00, enumerate_rational_c00};
use lineable::families::{branch_intersection, node_to_branch};
use lineable::genericity::{
    build_dense_family, certify_density, certify_independence, certify_union_span, not_in_y_certificate,
    DenseFamilySpec, SpanElement,
};
use lineable::recheck::{recheck, recheck_json};
use lineable::sampling::rng;
use lineable::sequence::SeriesVerdict;
use lineable::spaceability::{
    build_closed_family, combo_not_in_y_certificate, cross_independence_certificate, ClosedFamilySpec, ComboElement,
};
use lineable::spaces::{metric, pointwise_modulus, ChainParams, Param, Reason, Space, SpaceId, Verdict};
use lineable::witnesses::{witness, witness_report};
use lineable::{BranchId, Certificate, Index, IndexSet, Rational, Scalar, SymbolicSequence, Value};

const BRANCHES: [&str; 8] = ["|0", "|1", "0|1", "1|0", "|01", "00|1", "11|0", "|001"];
const DEPTH: u64 = 32;

struct Outcome {
    passed: bool,
    detail: String,
    /// A failing clause the ledger analyses as unattainable.
    known_red: bool,
}

type Check<T = ()> = Result<T, String>;

fn rat(p: i64, q: i64) -> Rational {
    Rational::new(p.into(), q.into())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: Result<T, lineable::Error>) -> Check<T> {
    r.map_err(|e| e.to_string())
}

fn outcome(r: Check<String>) -> Outcome {
    match r {
        Ok(detail) => Outcome { passed: true, detail, known_red: false },
        Err(detail) => Outcome { passed: false, detail, known_red: false },
    }
}

// ---------------------------------------------------------------------------
// 1. Combinatorial core

fn random_bits(r: &mut ChaCha8Rng, len: usize) -> Vec<bool> {
    (0..len).map(|_| r.gen_bool(0.5)).collect()
}

/// The first `len` steps of `prefix · period^∞`, straight from the raw bits.
fn unroll(prefix: &[bool], period: &[bool], len: usize) -> Vec<bool> {
    prefix.iter().chain(period.iter().cycle()).take(len).copied().collect()
}

/// Heap numbering by its recursion: root 0, children `2c + 1` and `2c + 2`.
fn vertex_codes(steps: &[bool]) -> Vec<BigUint> {
    let mut c = BigUint::zero();
    let mut out = vec![c.clone()];
    for &b in steps {
        c = c * 2u32 + if b { 2u32 } else { 1u32 };
        out.push(c.clone());
    }
    out
}

fn branch_pairs() -> Check<String> {
    let mut r = rng(101);
    let mut done = 0;
    while done < 64 {
        let raw: Vec<(Vec<bool>, Vec<bool>)> = (0..2)
            .map(|_| {
                let p = r.gen_range(0..=16);
                let q = r.gen_range(1..=6);
                (random_bits(&mut r, p), random_bits(&mut r, q))
            })
            .collect();
        // Agreement over 16 + 2·lcm(q, q') <= 136 steps means equal branches.
        let s0 = unroll(&raw[0].0, &raw[0].1, 200);
        let s1 = unroll(&raw[1].0, &raw[1].1, 200);
        let Some(lcp) = s0.iter().zip(&s1).position(|(a, b)| a != b) else { continue };
        let k = BranchId::new(raw[0].0.clone(), raw[0].1.clone()).map_err(|e| e.to_string())?;
        let l = BranchId::new(raw[1].0.clone(), raw[1].1.clone()).map_err(|e| e.to_string())?;
        let closed = lib(branch_intersection(&k, &l))?;
        ensure(closed.len() == lcp + 1, || format!("{k} ∩ {l}: {} vertices, lcp + 1 = {}", closed.len(), lcp + 1))?;
        let a: BTreeSet<BigUint> = vertex_codes(&s0[..20]).into_iter().collect();
        let b: BTreeSet<BigUint> = vertex_codes(&s1[..20]).into_iter().collect();
        let enumerated: Vec<BigUint> = a.intersection(&b).cloned().collect();
        let shallow: Vec<BigUint> = closed.iter().take(21).cloned().collect();
        ensure(enumerated == shallow, || format!("{k} ∩ {l}: closed form and depth-20 enumeration differ"))?;
        done += 1;
    }
    Ok("64 pairs".into())
}

fn random_infinite_set(r: &mut ChaCha8Rng) -> IndexSet {
    let branch = |r: &mut ChaCha8Rng| {
        let p = r.gen_range(0..=6);
        let q = r.gen_range(1..=3);
        IndexSet::branch(BranchId::new(random_bits(r, p), random_bits(r, q)).unwrap())
    };
    match r.gen_range(0..6) {
        0 => IndexSet::ray(r.gen_range(0..50u64)),
        1 => IndexSet::Progression { start: r.gen_range(0..10), step: r.gen_range(1..6) },
        2 => branch(r),
        3 => IndexSet::sparsified(&IndexSet::ray(r.gen_range(0..10u64))).unwrap(),
        4 => IndexSet::cell(&branch(r), r.gen_range(1..4)).unwrap(),
        _ => IndexSet::evens(),
    }
}

fn partitions() -> Check<String> {
    let mut r = rng(102);
    for _ in 0..10 {
        let parent = random_infinite_set(&mut r);
        let cells: Vec<IndexSet> = (1..=201).map(|j| IndexSet::cell(&parent, j).unwrap()).collect();
        for rank in 0..200u64 {
            let e = parent.nth(rank).ok_or_else(|| format!("{parent} has no rank {rank}"))?;
            let owners = cells.iter().filter(|c| c.contains(&e)).count();
            ensure(owners == 1, || format!("{e} (rank {rank} of {parent}) lies in {owners} cells"))?;
        }
        for c in cells.iter().take(5) {
            for i in 0..20 {
                let e = c.nth(i).ok_or_else(|| format!("{c} is finite"))?;
                ensure(parent.contains(&e), || format!("{e} in {c} but not in {parent}"))?;
            }
        }
    }
    Ok("10 sets, 200 ranks".into())
}

fn node_coverage() -> Check<String> {
    for n in 0..=10_000u64 {
        let k = node_to_branch(&BigUint::from(n));
        ensure(IndexSet::branch(k.clone()).contains(&Index::from(n)), || format!("{n} not on {k}"))?;
    }
    Ok("n <= 10^4".into())
}

fn criterion_1() -> Outcome {
    outcome((|| Ok(format!("{}; {}; {}", branch_pairs()?, partitions()?, node_coverage()?)))())
}

// ---------------------------------------------------------------------------
// 2. Witness table

fn supports() -> Vec<IndexSet> {
    let branch = IndexSet::branch("0|10".parse::<BranchId>().unwrap());
    vec![
        IndexSet::evens(),
        IndexSet::ray(5u64),
        branch.clone(),
        IndexSet::cell(&branch, 2).unwrap(),
        IndexSet::sparsified(&IndexSet::evens()).unwrap(),
    ]
}

/// Lower bound of `|v|^p`, rounded down to a multiple of `2^-80` so long
/// sums keep small denominators.
fn power_lower(v: &Value, p: &Rational) -> Check<Rational> {
    let e = lib(v.abs_enclose(64))?;
    // |v| <= 2^-ceil(80/p) floors to zero without taking the power.
    let cutoff = (rat(80, 1) / p).ceil().to_integer().to_u32().unwrap_or(u32::MAX);
    if e.hi() <= &two_pow_neg(cutoff) {
        return Ok(Rational::zero());
    }
    let a = e.lo().clone();
    if a.is_zero() {
        return Ok(a);
    }
    let exact = if p.is_integer() {
        num_traits::pow(a, p.to_integer().to_usize().unwrap())
    } else {
        pow_enclose(&a, p, 64).lo().clone()
    };
    let unit = two_pow_neg(80);
    Ok((exact / &unit).floor() * unit)
}

#[derive(Default)]
struct SeriesTally {
    schedules: usize,
    bounds: usize,
}

fn check_series(x: &SymbolicSequence, reason: &Reason, tally: &mut SeriesTally) -> Check {
    let verdicts: Vec<(&Rational, &SeriesVerdict)> = match reason {
        Reason::Series { p, verdict } => vec![(p, verdict)],
        Reason::CapDivergence { q, verdict, .. } => vec![(q, verdict)],
        Reason::Parts { parts } => {
            for (part, seq) in parts.iter().zip(x.lazy_parts()) {
                check_series(seq, &part.reason, tally)?;
            }
            vec![]
        }
        Reason::Tails { .. } => vec![],
    };
    for (p, v) in verdicts {
        match v {
            SeriesVerdict::Divergent { schedule } => {
                let tail = &x.tails()[schedule.tail];
                for m in [1i64, 3] {
                    let m = rat(m, 1);
                    let last = lib(schedule.rank_for(&m))?;
                    let mut sum = Rational::zero();
                    for (j, n) in tail.points() {
                        if j > last {
                            break;
                        }
                        if j >= schedule.start_rank {
                            sum += power_lower(&tail.value_at_rank(j, &n), &schedule.p)?;
                        }
                    }
                    ensure(sum > m, || format!("schedule promises > {m} by rank {last}, partial sum {sum}"))?;
                }
                tally.schedules += 1;
            }
            SeriesVerdict::ConvergentWithBound { bound } => {
                let mut sum = Rational::zero();
                for v in x.finite_part().values() {
                    sum += power_lower(v, p)?;
                }
                for t in x.tails() {
                    for (j, n) in t.points().take(10_000) {
                        sum += power_lower(&t.value_at_rank(j, &n), p)?;
                    }
                }
                ensure(&sum <= bound.hi(), || format!("partial sum {sum} exceeds bound {}", bound.hi()))?;
                tally.bounds += 1;
            }
        }
    }
    Ok(())
}

fn criterion_2() -> Outcome {
    outcome((|| {
        let mut tally = SeriesTally::default();
        let mut witnesses = 0;
        for chain in [ChainParams::default(), ChainParams::parse("1/2", "3").unwrap()] {
            for (y, x) in SpaceId::pairs() {
                for a in supports() {
                    let at = || format!("({y}, {x}) on {a}");
                    let r = lib(witness_report(&chain, y, x, &a))?;
                    ensure(r.in_x.verdict == Verdict::In, || format!("{}: not in X", at()))?;
                    ensure(r.in_y.verdict == Verdict::Out, || format!("{}: not out of Y", at()))?;
                    ensure(r.support.subset_of(&a), || format!("{}: support not inside A", at()))?;
                    let seq = &r.sequence;
                    ensure(seq.finite_part().keys().all(|n| a.contains(n)), || format!("{}: finite part outside A", at()))?;
                    for t in seq.tails() {
                        ensure(t.points().take(200).all(|(_, n)| a.contains(&n)), || format!("{}: tail leaves A", at()))?;
                    }
                    check_series(seq, &r.in_x.reason, &mut tally).map_err(|e| format!("{}: {e}", at()))?;
                    check_series(seq, &r.in_y.reason, &mut tally).map_err(|e| format!("{}: {e}", at()))?;
                    witnesses += 1;
                }
            }
        }
        Ok(format!(
            "{witnesses} witnesses, {} divergence schedules at M = 1, 3, {} convergence bounds",
            tally.schedules, tally.bounds
        ))
    })())
}

// ---------------------------------------------------------------------------
// 3. Dense construction

fn dense_pairs() -> Vec<(SpaceId, SpaceId)> {
    vec![
        (SpaceId::Lp(Param::A), SpaceId::Lp(Param::B)),
        (SpaceId::C00, SpaceId::AInf),
        (SpaceId::Cap(Param::A), SpaceId::Lp(Param::B)),
        (SpaceId::Lp(Param::B), SpaceId::C0),
        (SpaceId::C0, SpaceId::H),
    ]
}

fn closed_pairs() -> Vec<(SpaceId, SpaceId)> {
    let mut v = dense_pairs();
    v.extend([(SpaceId::C0, SpaceId::Linf), (SpaceId::Linf, SpaceId::H)]);
    v
}

/// `v(n)`, summed generator by generator.
fn span_value(f: &DenseFamilySpec, v: &SpanElement, n: &Index) -> Check<Value> {
    let mut acc = Value::zero();
    for t in v.terms() {
        acc = &acc + &(&lib(f.generator(t.branch, t.j))?.generator.value_at(n) * &t.coeff);
    }
    Ok(acc)
}

fn check_separation_item(f: &DenseFamilySpec, item: &lineable::genericity::SeparationTrace) -> Check {
    ensure(item.holds, || "separation fails".into())?;
    ensure(lib(item.value.is_nonzero())?, || "v(n0) is zero".into())?;
    ensure(span_value(f, &item.element, &item.n0)? == item.value, || "recorded v(n0) differs from the direct sum".into())?;
    let g = lib(f.generator(item.designated, item.leading_j))?;
    ensure(g.cell.contains(&item.n0), || "n0 outside the leading cell".into())
}

fn check_not_in_y_item(f: &DenseFamilySpec, t: &lineable::genericity::NotInYTrace) -> Check {
    let s = &t.separation;
    check_separation_item(f, s)?;
    ensure(t.holds && t.checked == 1000, || format!("restriction identity: holds {}, checked {}", t.holds, t.checked))?;
    ensure(t.witness_in_y.verdict == Verdict::Out, || "witness not out of Y".into())?;
    let g = lib(f.generator(s.designated, s.leading_j))?;
    let lead = s.element.leading(s.designated).ok_or("no leading term")?;
    let factor = &lead.coeff * &g.scale;
    for i in 0..20 {
        let n = t.b.nth(i).ok_or("B is finite")?;
        let expected = &g.witness.value_at(&n) * &factor;
        ensure(span_value(f, &s.element, &n)? == expected, || format!("v differs from t·c·y at rank {i} of B"))?;
    }
    Ok(())
}

#[derive(Default)]
struct Emitted {
    certificates: Vec<Certificate>,
}

fn dense_family(chain: &ChainParams, y: SpaceId, x: SpaceId) -> Check<DenseFamilySpec> {
    lib(build_dense_family(chain, y, x, &branches(&BRANCHES), DEPTH))
}

fn criterion_3(families: &[DenseFamilySpec], out: &mut Emitted) -> Outcome {
    outcome((|| {
        let t = tol();
        for f in families {
            let pair = format!("({}, {})", f.y, f.x);
            let density = lib(certify_density(f, DEPTH, &t))?;
            ensure(density.passed && density.items.len() == 256, || format!("{pair}: density"))?;
            for item in &density.items {
                let Item::Density(d) = item else { return Err(format!("{pair}: density step expected")) };
                ensure(d.to_x.hi() < &rat(1, d.j as i64), || format!("{pair}: d(f, x_{}) not below 1/{}", d.j, d.j))?;
            }
            let indep = lib(certify_independence(f, 200, 31, &t))?;
            let nots = lib(not_in_y_certificate(f, 200, 31, &t))?;
            ensure(indep.passed && nots.passed, || format!("{pair}: certificate failed"))?;
            for (a, b) in indep.items.iter().zip(&nots.items) {
                let (Item::Separation(s), Item::NotInY(n)) = (a, b) else { return Err(format!("{pair}: wrong steps")) };
                check_separation_item(f, s).map_err(|e| format!("{pair}: {e}"))?;
                check_not_in_y_item(f, n).map_err(|e| format!("{pair}: {e}"))?;
            }
            ensure(indep.items.len() == 200 && nots.items.len() == 200, || format!("{pair}: item count"))?;
            out.certificates.extend([density, indep, nots]);
        }
        Ok(format!("{} pairs: 256 generators d < 1/j; 200 independence + 200 not-in-Y each", families.len()))
    })())
}

// ---------------------------------------------------------------------------
// 4. Union span

fn criterion_4(families: &[DenseFamilySpec], out: &mut Emitted) -> Outcome {
    outcome((|| {
        let f = &families[0];
        let cert = lib(certify_union_span(f, 100, 41, &tol()))?;
        ensure(cert.passed && cert.items.len() == 100, || "union span certificate failed".into())?;
        for item in &cert.items {
            let Item::NotInY(t) = item else { return Err("not-in-Y step expected".into()) };
            ensure(t.separation.element.branches().len() >= 2, || "sample within one branch".into())?;
            check_not_in_y_item(f, t)?;
        }
        ensure(cert.notes.iter().any(|n| n.contains("dimension c")), || "dimension corollary missing".into())?;
        out.certificates.push(cert);
        Ok(format!("100 cross-branch elements in ({}, {}) not in Y", f.y, f.x))
    })())
}

// ---------------------------------------------------------------------------
// 5. Closed construction

fn combo_value(f: &ClosedFamilySpec, c: &ComboElement, n: &Index) -> Check<Value> {
    let mut acc = Value::zero();
    for t in c.terms() {
        acc = &acc + &(&lib(f.witness(c.branch, t.j))?.witness.value_at(n) * &t.coeff);
    }
    Ok(acc)
}

fn criterion_5(chain: &ChainParams, out: &mut Emitted) -> Outcome {
    outcome((|| {
        let t = tol();
        for (y, x) in closed_pairs() {
            let pair = format!("({y}, {x})");
            let f = lib(build_closed_family(chain, y, x, &branches(&BRANCHES), DEPTH))?;
            let combos = lib(combo_not_in_y_certificate(&f, 100, 51, &t))?;
            ensure(combos.passed && combos.items.len() == 100, || format!("{pair}: combo certificate"))?;
            for item in &combos.items {
                let Item::ComboNotInY(c) = item else { return Err(format!("{pair}: wrong step")) };
                let e = &c.extract;
                ensure(c.holds && e.holds && c.witness_in_y.verdict == Verdict::Out, || format!("{pair}: combo fails"))?;
                let w = lib(f.witness(e.combo.branch, e.j0))?;
                let coeff = e.combo.coeff(e.j0).ok_or("j0 has no coefficient")?;
                for i in 0..20 {
                    let n = w.cell.nth(i).ok_or("finite cell")?;
                    let direct = combo_value(&f, &e.combo, &n)?;
                    ensure(direct == &w.witness.value_at(&n) * coeff, || format!("{pair}: extraction differs at rank {i}"))?;
                }
            }
            let cross = lib(cross_independence_certificate(&f, 50, 52, &t))?;
            ensure(cross.passed && cross.items.len() == 50, || format!("{pair}: cross certificate"))?;
            for item in &cross.items {
                let Item::CrossIndependence(c) = item else { return Err(format!("{pair}: wrong step")) };
                let mut sum = Value::zero();
                for (i, combo) in c.combos.iter().enumerate() {
                    let v = combo_value(&f, combo, &c.n0)?;
                    if c.outside.contains(&combo.branch) {
                        ensure(v.is_zero(), || format!("{pair}: combo {i} on branch {} does not vanish at n0", combo.branch))?;
                    }
                    sum = &sum + &v;
                }
                ensure(sum == c.sum_value && lib(sum.is_nonzero())?, || format!("{pair}: sum at n0"))?;
            }
            out.certificates.extend([combos, cross]);
        }
        Ok("7 pairs: 100 combinations extracted and not in Y, 50 cross-branch tuples independent".into())
    })())
}

// ---------------------------------------------------------------------------
// 6. Metric layer

fn random_scalar(r: &mut ChaCha8Rng) -> Scalar {
    Scalar::new(rat(r.gen_range(-8..=8), r.gen_range(1..=8)), rat(r.gen_range(-2..=2), r.gen_range(1..=4)))
}

/// Tail shape shared by the three members of a triple: a witness of a lower
/// space on one of a few supports. Sharing it keeps every difference inside
/// the catalog instead of falling back to a lazy sum.
fn random_shape(r: &mut ChaCha8Rng, chain: &ChainParams, id: SpaceId) -> Option<SymbolicSequence> {
    let position = id.position();
    if position == 0 {
        return None;
    }
    let lower = SpaceId::ALL[r.gen_range(0..position)];
    let supports = [IndexSet::evens(), IndexSet::ray(3u64), IndexSet::sparsified(&IndexSet::ray(2u64)).unwrap()];
    let a = &supports[r.gen_range(0..supports.len())];
    Some(witness(chain, lower, id, a).expect("witness"))
}

fn random_element(r: &mut ChaCha8Rng, shape: Option<&SymbolicSequence>) -> SymbolicSequence {
    let finite = SymbolicSequence::finite((0..r.gen_range(0..5)).map(|_| (Index::from(r.gen_range(0..12u64)), random_scalar(r))));
    match shape {
        Some(w) => finite.add(&w.scale(&random_scalar(r))),
        None => finite,
    }
}

fn axioms(chain: &ChainParams, id: SpaceId, r: &mut ChaCha8Rng) -> Check<usize> {
    let space = chain.resolve(id);
    let t = rat(1, 1 << 24);
    let d = |x: &SymbolicSequence, y: &SymbolicSequence| lib(metric(&space, x, y, &t)).map_err(|e| format!("{id}: {e}"));
    let mut vacuous = 0;
    for _ in 0..100 {
        let shape = random_shape(r, chain, id);
        let [x, y, z] = [0; 3].map(|_| random_element(r, shape.as_ref()));
        for s in [&x, &y, &z] {
            ensure(s.is_introspectable(), || format!("{id}: sample is a lazy sum"))?;
        }
        let (dxy, dyx, dyz, dxz) = (d(&x, &y)?, d(&y, &x)?, d(&y, &z)?, d(&x, &z)?);
        ensure(dxy.overlaps(&dyx), || format!("{id}: asymmetric"))?;
        let dxx = d(&x, &x)?;
        ensure(dxx.lo().is_zero() && dxx.hi() <= &t, || format!("{id}: d(x, x) = [{}, {}]", dxx.lo(), dxx.hi()))?;
        if !x.sub(&y).is_zero() {
            ensure(dxy.lo() > &Rational::zero(), || format!("{id}: d(x, y) not certified positive"))?;
        }
        ensure(dxz.lo() <= &(dxy.hi() + dyz.hi()), || format!("{id}: triangle inequality fails"))?;
        let shifted = d(&x.add(&z), &y.add(&z))?;
        ensure(shifted.overlaps(&dxy), || format!("{id}: not translation invariant"))?;
        for n in 0..=50u64 {
            let idx = Index::from(n);
            let diff = lib((&x.value_at(&idx) - &y.value_at(&idx)).abs_enclose(40))?;
            match pointwise_modulus(&space, &idx, &dxy) {
                Ok(bound) => ensure(diff.lo() <= bound.hi(), || format!("{id}: modulus unsound at n = {n}"))?,
                Err(lineable::Error::TooCoarse(_)) => vacuous += 1,
                Err(e) => return Err(e.to_string()),
            }
        }
    }
    Ok(vacuous)
}

/// `δ^1(x_m, 0)` for `x_m = (1/m) 1_[0, m)` from `d^{p_k}(x_m, 0) = m^{1/p_k - 1}`:
/// a certified lower bound from the first `terms` summands.
fn cap_one_block_lower(m: u64, terms: u32) -> Rational {
    let mut acc = Rational::zero();
    for k in 1..=terms {
        let pk = rat(1, 1) + rat(1, k as i64);
        let t = pow_enclose(&Rational::from_integer(m.into()), &(pk.recip() - rat(1, 1)), 64).lo().clone();
        acc += &t / (rat(1, 1) + &t) * two_pow_neg(k);
    }
    acc
}

fn block(m: u64) -> SymbolicSequence {
    SymbolicSequence::finite((0..m).map(|n| (Index::from(n), Scalar::real(rat(1, m as i64)))))
}

/// Returns the certified lower bound of `δ^1(x_{2^20}, 0)`.
fn shrinking_blocks() -> Check<Rational> {
    let t = rat(1, 1 << 16);
    let zero = SymbolicSequence::zero();
    let cap1 = Space::Cap(rat(1, 1));
    let mut previous: Option<Rational> = None;
    for e in [2u32, 4, 6, 8, 10] {
        let m = 1u64 << e;
        let x = block(m);
        let d1 = lib(metric(&Space::Lp(rat(1, 1)), &x, &zero, &t))?;
        ensure(d1.is_exact() && d1.lo() == &rat(1, 1), || format!("d^1(x_{m}, 0) is not exactly 1"))?;
        for q in [rat(3, 2), rat(2, 1), rat(3, 1)] {
            let dq = lib(metric(&Space::Lp(q.clone()), &x, &zero, &t))?;
            let closed = pow_enclose(&Rational::from_integer(m.into()), &((rat(1, 1) - &q) / &q), 64);
            ensure(dq.overlaps(&closed), || format!("d^{q}(x_{m}, 0) differs from m^((1-q)/q)"))?;
        }
        let delta = lib(metric(&cap1, &x, &zero, &t))?;
        let lower = cap_one_block_lower(m, 40);
        ensure(delta.hi() >= &lower, || format!("δ^1(x_{m}, 0) below the closed-form lower bound"))?;
        if let Some(p) = &previous {
            ensure(delta.hi() < p, || format!("δ^1(x_m, 0) not decreasing at m = {m}"))?;
        }
        previous = Some(delta.lo().clone());
    }
    Ok(cap_one_block_lower(1 << 20, 40))
}

fn criterion_6(chain: &ChainParams) -> Outcome {
    let mut r = rng(61);
    let mut vacuous = 0;
    for id in SpaceId::ALL {
        match axioms(chain, id, &mut r) {
            Ok(v) => vacuous += v,
            Err(detail) => return Outcome { passed: false, detail, known_red: false },
        }
    }
    let lower = match shrinking_blocks() {
        Ok(l) => l,
        Err(detail) => return Outcome { passed: false, detail, known_red: false },
    };
    let axioms = format!(
        "axioms, translation invariance and modulus soundness hold on 11 spaces ({vacuous} vacuous modulus checks); \
         d^1(x_m, 0) = 1 exactly, d^q and δ^1 decrease for m <= 2^10"
    );
    if lower < rat(1, 100) {
        return Outcome { passed: true, detail: axioms, known_red: false };
    }
    Outcome {
        passed: false,
        detail: format!(
            "shrinking-block clause unattainable: certified δ^1(x_m, 0) >= {:.4} > 1/100 for every m <= 2^20 \
             (δ^1 decreases in m; bound at m = 2^20); {axioms}",
            lower.to_f64().unwrap()
        ),
        known_red: true,
    }
}

// ---------------------------------------------------------------------------
// 7. Enumeration

fn criterion_7() -> Outcome {
    outcome((|| {
        let mut seen = BTreeSet::new();
        for j in 1..=10_000u64 {
            let x = lib(enumerate_rational_c00(j))?;
            ensure(lib(encode_rational_c00(&x))? == BigUint::from(j), || format!("round trip fails at {j}"))?;
            let key = serde_json::to_string(&x).unwrap();
            ensure(seen.insert(key), || format!("code {j} repeats an earlier sequence"))?;
        }
        Ok("codes 1 to 10^4 round-trip, all distinct".into())
    })())
}

// ---------------------------------------------------------------------------
// 8. Certificate integrity

fn criterion_8(out: &Emitted) -> Outcome {
    outcome((|| {
        for cert in &out.certificates {
            recheck(cert).map_err(|e| format!("fresh {} certificate rejected: {e}", cert.claim))?;
        }
        let mut r = rng(81);
        let mut rejected = 0;
        let mut survivors = vec![];
        for i in 0..50 {
            let cert = &out.certificates[i % out.certificates.len()];
            let s = surviving_mutations(&cert.to_json(), 1, &mut r, |t| recheck_json(t).is_ok());
            if s.is_empty() {
                rejected += 1;
            }
            survivors.extend(s.into_iter().map(|p| format!("{}:{p}", cert.claim)));
        }
        ensure(survivors.is_empty(), || format!("accepted mutations: {survivors:?}"))?;
        Ok(format!("{} fresh certificates accepted; {rejected}/50 mutations rejected", out.certificates.len()))
    })())
}

// ---------------------------------------------------------------------------

fn main() -> ExitCode {
    let chain = ChainParams::default();
    let mut emitted = Emitted::default();
    let mut unexpected = 0;
    // Optional criterion numbers on the command line select a subset.
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let selected = |n: u32| only.is_empty() || only.contains(&n);
    let mut report = |n: u32, name: &str, start: Instant, o: Outcome| {
        let status = if o.passed { "PASS" } else { "FAIL" };
        println!("criterion {n} [{name}]: {status} ({:.1}s) {}", start.elapsed().as_secs_f64(), o.detail);
        if !o.passed && !o.known_red {
            unexpected += 1;
        }
    };

    let s = Instant::now();
    if selected(1) {
        report(1, "combinatorial core", s, criterion_1());
    }
    let s = Instant::now();
    if selected(2) {
        report(2, "witness table", s, criterion_2());
    }

    let s = Instant::now();
    if selected(3) || selected(4) || selected(8) {
        let families: Check<Vec<DenseFamilySpec>> =
            dense_pairs().into_iter().map(|(y, x)| dense_family(&chain, y, x)).collect();
        match families {
            Ok(families) => {
                report(3, "dense construction", s, criterion_3(&families, &mut emitted));
                let s = Instant::now();
                report(4, "union span", s, criterion_4(&families, &mut emitted));
            }
            Err(e) => {
                report(3, "dense construction", s, outcome(Err(e.clone())));
                report(4, "union span", s, outcome(Err(e)));
            }
        }
    }
    let s = Instant::now();
    if selected(5) || selected(8) {
        report(5, "closed construction", s, criterion_5(&chain, &mut emitted));
    }
    let s = Instant::now();
    if selected(6) {
        report(6, "metric layer", s, criterion_6(&chain));
    }
    let s = Instant::now();
    if selected(7) {
        report(7, "enumeration", s, criterion_7());
    }
    let s = Instant::now();
    if selected(8) {
        report(8, "certificate integrity", s, criterion_8(&emitted));
    }

    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
