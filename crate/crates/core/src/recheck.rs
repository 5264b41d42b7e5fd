//! Independent re-verification of certificates. Every recorded field is
//! recomputed from the embedded family with the symbolic core, index-set
//! operations, membership and metrics, and must match exactly. The family
//! builders, witness recipes and index searches are not used.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::certificate::{canonical_notes, Certificate, ClaimKind, Family, Item, SCHEMA};
use crate::certified::{bits_for_tolerance, two_pow_neg};
use crate::enumeration::encode_rational_c00;
use crate::families::{BranchId, Index, IndexSet};
use crate::genericity::{
    density_tolerance, sample_span_elements, scaling_tolerance, DenseFamilySpec, DensityTrace, NotInYTrace,
    SeparationTrace, SpanElement, RESTRICTION_POINTS,
};
use crate::scalar::{Rational, Scalar};
use crate::sequence::SymbolicSequence;
use crate::spaceability::{
    pointwise_tolerance, sample_combos, sample_pairs, sample_tuples, ClosedFamilySpec, ComboElement,
    ComboNotInYTrace, CrossTrace, ExtractTrace, PointwiseTrace, POINTWISE_RANGE,
};
use crate::spaces::{chain_lt, metric, pointwise_modulus, SpaceId};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{location}: {message}")]
pub struct RecheckFailure {
    pub location: String,
    pub message: String,
}

type Check<T = ()> = Result<T, RecheckFailure>;

fn fail<T>(location: impl Into<String>, message: impl Into<String>) -> Check<T> {
    Err(RecheckFailure {
        location: location.into(),
        message: message.into(),
    })
}

fn ensure(cond: bool, location: &str, message: &str) -> Check {
    if cond {
        Ok(())
    } else {
        fail(location, message)
    }
}

/// Converts construction-side errors raised while recomputing.
fn at<T>(location: &str, r: Result<T, crate::error::Error>) -> Check<T> {
    r.or_else(|e| fail(location, e.to_string()))
}

/// Parses and rechecks a certificate file's contents.
pub fn recheck_json(text: &str) -> Check<Certificate> {
    let cert = at("parse", Certificate::from_json(text))?;
    recheck(&cert)?;
    Ok(cert)
}

/// Verifies that every trace is consistent. Whether the certified claim
/// holds is `cert.passed`, itself checked against the traces.
pub fn recheck(cert: &Certificate) -> Check {
    ensure(cert.schema == SCHEMA, "schema", "unsupported schema")?;
    match &cert.tol {
        Some(t) => ensure(cert.claim.uses_tolerance() && t > &Rational::zero(), "tol", "unexpected or nonpositive tolerance")?,
        None => ensure(!cert.claim.uses_tolerance(), "tol", "missing tolerance")?,
    }
    ensure(cert.family_digest == cert.family.digest(), "family_digest", "digest differs from the embedded family")?;
    ensure(
        cert.notes == canonical_notes(cert.claim, &cert.family),
        "notes",
        "prose differs from the canonical text",
    )?;
    match (&cert.family, cert.claim) {
        (
            Family::Dense(f),
            ClaimKind::Independence | ClaimKind::NotInY | ClaimKind::Density | ClaimKind::Maximality,
        ) => {
            check_dense_family(f)?;
            check_dense_items(cert, f)?;
        }
        (
            Family::Closed(f),
            ClaimKind::Extract | ClaimKind::ComboNotInY | ClaimKind::CrossIndependence | ClaimKind::Pointwise,
        ) => {
            check_closed_family(f)?;
            check_closed_items(cert, f)?;
        }
        _ => return fail("claim", "claim does not match the family mode"),
    }
    ensure(
        cert.passed == cert.items.iter().all(Item::holds),
        "passed",
        "summary disagrees with the items",
    )
}

fn check_branches(branches: &[BranchId], depth: u64, count: usize) -> Check {
    ensure(!branches.is_empty() && depth >= 1, "family", "empty family")?;
    for (i, k) in branches.iter().enumerate() {
        ensure(!branches[..i].contains(k), "family.branches", "duplicate branch")?;
    }
    ensure(
        count as u64 == branches.len() as u64 * depth,
        "family",
        "wrong number of generators",
    )
}

fn single_tail(seq: &SymbolicSequence, loc: &str) -> Check<IndexSet> {
    match seq.tails() {
        [t] if seq.finite_part().is_empty() && seq.lazy_parts().is_empty() => Ok(t.support().clone()),
        _ => fail(loc, "witness is not a single tail"),
    }
}

fn check_dense_family(f: &DenseFamilySpec) -> Check {
    ensure(chain_lt(f.y, f.x), "family", "not a chain pair")?;
    ensure(f.x != SpaceId::Linf, "family", "dense mode excludes X = linf")?;
    check_branches(&f.branches, f.depth, f.generators.len())?;
    let (sy, sx) = (f.chain.resolve(f.y), f.chain.resolve(f.x));
    for (i, g) in f.generators.iter().enumerate() {
        let loc = format!("family.generators[{i}]");
        let loc = loc.as_str();
        let (k, j) = (i / f.depth as usize, i as u64 % f.depth + 1);
        ensure((g.branch, g.j) == (k, j), loc, "out of order")?;
        let cell = at(loc, IndexSet::cell(&IndexSet::branch(f.branches[k].clone()), j))?;
        ensure(g.cell == cell, loc, "cell differs from the branch partition")?;
        ensure(
            at(loc, encode_rational_c00(&g.x))? == BigUint::from(j),
            loc,
            "x is not the enumerated sequence",
        )?;
        let support = single_tail(&g.witness, loc)?;
        ensure(support.subset_of(&g.cell), loc, "witness leaves its cell")?;
        ensure(at(loc, sx.member(&g.witness))?.is_in(), loc, "witness not in X")?;
        ensure(!at(loc, sy.member(&g.witness))?.is_in(), loc, "witness in Y")?;
        let c = &g.scale;
        let dyadic = c.im.is_zero() && c.re.numer().is_one() && c.re.denom().magnitude().count_ones() == 1;
        ensure(dyadic, loc, "scaling constant is not a power of 1/2")?;
        let d = at(loc, metric(&sx, &g.witness.scale(c), &SymbolicSequence::zero(), &scaling_tolerance(j)))?;
        ensure(d == g.distance, loc, "distance differs from recomputation")?;
        ensure(d.hi() < &Rational::new(1.into(), j.into()), loc, "distance not below 1/j")?;
        ensure(g.generator == g.x.add(&g.witness.scale(c)), loc, "f != x + c y")?;
        let xs = g.x.finite_part().keys().cloned();
        for n in xs.chain(support.iter().take(64)) {
            let direct = &g.x.value_at(&n) + &g.witness.value_at(&n).scale(c);
            ensure(g.generator.value_at(&n) == direct, loc, "f(n) != x(n) + c y(n)")?;
        }
    }
    Ok(())
}

fn check_closed_family(f: &ClosedFamilySpec) -> Check {
    ensure(chain_lt(f.y, f.x), "family", "not a chain pair")?;
    check_branches(&f.branches, f.depth, f.witnesses.len())?;
    let (sy, sx) = (f.chain.resolve(f.y), f.chain.resolve(f.x));
    for (i, w) in f.witnesses.iter().enumerate() {
        let loc = format!("family.witnesses[{i}]");
        let loc = loc.as_str();
        let (k, j) = (i / f.depth as usize, i as u64 % f.depth + 1);
        ensure((w.branch, w.j) == (k, j), loc, "out of order")?;
        let cell = at(loc, IndexSet::cell(&IndexSet::branch(f.branches[k].clone()), j))?;
        ensure(w.cell == cell, loc, "cell differs from the branch partition")?;
        ensure(single_tail(&w.witness, loc)?.subset_of(&w.cell), loc, "witness leaves its cell")?;
        let in_x = at(loc, sx.member(&w.witness))?;
        let in_y = at(loc, sy.member(&w.witness))?;
        ensure(in_x == w.in_x && in_y == w.in_y, loc, "verdicts differ from recomputation")?;
        ensure(in_x.is_in() && !in_y.is_in(), loc, "witness not in X minus Y")?;
        for (i2, other) in f.witnesses.iter().enumerate().skip(i + 1) {
            if other.branch == w.branch {
                ensure(
                    w.cell.provably_disjoint(&other.cell),
                    loc,
                    &format!("cell overlaps witnesses[{i2}]"),
                )?;
            }
        }
    }
    Ok(())
}

/// `items[i] (step)`, naming the step the failure was found in.
fn item_loc(i: usize, item: &Item) -> String {
    format!("items[{i}] ({})", item.step())
}

fn count(cert: &Certificate, expected: u64) -> Check {
    ensure(cert.items.len() as u64 == expected, "items", "item count disagrees with trials")
}

fn check_dense_items(cert: &Certificate, f: &DenseFamilySpec) -> Check {
    if cert.claim == ClaimKind::Density {
        ensure(cert.seed == 0, "seed", "density is not sampled")?;
        ensure(cert.trials <= f.depth, "trials", "depth beyond the family")?;
        count(cert, f.branches.len() as u64 * cert.trials)?;
        let gens = f.generators.iter().filter(|g| g.j <= cert.trials);
        for (i, (item, g)) in cert.items.iter().zip(gens).enumerate() {
            let loc = item_loc(i, item);
            match item {
                Item::Density(t) if (t.branch, t.j) == (g.branch, g.j) => check_density(f, cert, t, &loc)?,
                _ => return fail(loc, "expected the density trace of the next generator"),
            }
        }
        return Ok(());
    }
    count(cert, cert.trials)?;
    let cross = cert.claim == ClaimKind::Maximality;
    let samples = sample_span_elements(f, cert.trials, cert.seed, cross);
    for (i, (item, (v, k0))) in cert.items.iter().zip(&samples).enumerate() {
        let loc = item_loc(i, item);
        let sep = match (cert.claim, item) {
            (ClaimKind::Independence, Item::Separation(t)) => t,
            (ClaimKind::NotInY | ClaimKind::Maximality, Item::NotInY(t)) => &t.separation,
            _ => return fail(loc, "step does not match the claim"),
        };
        ensure(&sep.element == v && sep.designated == *k0, &loc, "sample differs from the seed")?;
        check_separation(f, sep, &loc)?;
        if let Item::NotInY(t) = item {
            check_not_in_y(f, t, &loc)?;
        }
    }
    Ok(())
}

/// `1 + ` the deepest vertex shared by two distinct branches, found by
/// walking both paths.
fn shared_bound(a: &BranchId, b: &BranchId) -> Check<Index> {
    let limit = (a.prefix().len() + b.prefix().len() + a.period().len() * b.period().len() + 1) as u64;
    let mut code = BigUint::zero();
    for i in 0..=limit {
        if a.bit(i) != b.bit(i) {
            return Ok(Index::from_big(code + 1u32));
        }
        code = code * 2u32 + 1u32 + u32::from(a.bit(i));
    }
    fail("branches", format!("{a} and {b} do not separate"))
}

fn pairwise_bound(branches: &[&BranchId]) -> Check<Index> {
    let mut n = Index::zero();
    for (i, a) in branches.iter().enumerate() {
        for b in &branches[i + 1..] {
            n = n.max(shared_bound(a, b)?);
        }
    }
    Ok(n)
}

fn span_value(f: &DenseFamilySpec, v: &SpanElement, n: &Index, loc: &str) -> Check<Value> {
    let mut total = Value::zero();
    for t in v.terms() {
        let g = at(loc, f.generator(t.branch, t.j))?;
        total = &total + &g.generator.value_at(n).scale(&t.coeff);
    }
    Ok(total)
}

fn check_separation(f: &DenseFamilySpec, t: &SeparationTrace, loc: &str) -> Check {
    let v = &t.element;
    ensure(&SpanElement::new(v.terms().to_vec()) == v, loc, "element not in normal form")?;
    ensure(
        v.terms().iter().all(|s| s.branch < f.branches.len() && (1..=f.depth).contains(&s.j)),
        loc,
        "term outside the family",
    )?;
    let lead = v
        .terms()
        .iter()
        .filter(|s| s.branch == t.designated)
        .last()
        .ok_or_else(|| RecheckFailure {
            location: loc.into(),
            message: "designated branch has no term".into(),
        })?;
    ensure(lead.j == t.leading_j, loc, "leading j differs")?;
    let max_j = v.terms().iter().map(|s| s.j).max().unwrap_or(0);
    let mut n1 = Index::zero();
    for j in 1..=max_j {
        if let Some(last) = at(loc, f.generator(0, j))?.x.finite_max() {
            n1 = n1.max(last.add_u64(1));
        }
    }
    ensure(n1 == t.n1, loc, "N1 differs")?;
    let mut used: Vec<usize> = v.terms().iter().map(|s| s.branch).collect();
    used.dedup();
    let ids: Vec<&BranchId> = used.iter().map(|k| &f.branches[*k]).collect();
    ensure(pairwise_bound(&ids)? == t.n2, loc, "N2 differs")?;
    let g = at(loc, f.generator(t.designated, t.leading_j))?;
    let cutoff = t.n1.clone().max(t.n2.clone());
    let support = single_tail(&g.witness, loc)?;
    ensure(t.n0 >= cutoff, loc, "n0 below max(N1, N2)")?;
    ensure(g.cell.contains(&t.n0) && support.contains(&t.n0), loc, "n0 outside the witness support")?;
    ensure(
        support.least_at_least(&cutoff).as_ref() == Some(&t.n0),
        loc,
        "n0 is not the first support point past the cutoff",
    )?;
    ensure(span_value(f, v, &t.n0, loc)? == t.value, loc, "v(n0) differs")?;
    let surviving = g.witness.value_at(&t.n0).scale(&(&lead.coeff * &g.scale));
    ensure(surviving == t.surviving, loc, "surviving term differs")?;
    let nonzero = at(loc, surviving.is_nonzero())?;
    ensure(t.holds == (t.value == surviving && nonzero), loc, "holds flag differs")
}

fn check_not_in_y(f: &DenseFamilySpec, t: &NotInYTrace, loc: &str) -> Check {
    let sep = &t.separation;
    let g = at(loc, f.generator(sep.designated, sep.leading_j))?;
    let lead = sep.element.terms().iter().filter(|s| s.branch == sep.designated).last().expect("checked");
    let cutoff = sep.n1.clone().max(sep.n2.clone());
    ensure(t.b == IndexSet::cut(&g.cell, cutoff.clone()), loc, "B differs")?;
    let mut v = SymbolicSequence::zero();
    for s in sep.element.terms() {
        v = v.add(&at(loc, f.generator(s.branch, s.j))?.generator.scale(&s.coeff));
    }
    ensure(t.restricted == v.restrict(&t.b), loc, "restricted side differs")?;
    let expected = g.witness.restrict(&IndexSet::ray(cutoff)).scale(&(&lead.coeff * &g.scale));
    ensure(t.expected == expected, loc, "expected side differs")?;
    ensure(t.checked == RESTRICTION_POINTS as u64, loc, "wrong number of checked points")?;
    let mut agree = t.restricted == t.expected;
    for n in t.b.iter().take(RESTRICTION_POINTS) {
        let direct = span_value(f, &sep.element, &n, loc)?;
        agree &= t.restricted.value_at(&n) == direct && t.expected.value_at(&n) == direct;
    }
    let verdict = at(loc, f.chain.resolve(f.y).member(&g.witness))?;
    ensure(verdict == t.witness_in_y, loc, "verdict in Y differs")?;
    ensure(
        t.holds == (sep.holds && agree && !verdict.is_in()),
        loc,
        "holds flag differs",
    )
}

fn check_density(f: &DenseFamilySpec, cert: &Certificate, t: &DensityTrace, loc: &str) -> Check {
    let g = at(loc, f.generator(t.branch, t.j))?;
    let space = f.chain.resolve(f.x);
    let tol = density_tolerance(t.j, cert.tol.as_ref().expect("checked"));
    ensure(tol == t.tolerance, loc, "tolerance differs")?;
    let to_x = at(loc, metric(&space, &g.generator, &g.x, &tol))?;
    let scaled = at(loc, metric(&space, &g.witness.scale(&g.scale), &SymbolicSequence::zero(), &tol))?;
    ensure(to_x == t.to_x && scaled == t.scaled_witness, loc, "distances differ")?;
    let bound = Rational::new(1.into(), t.j.into());
    ensure(bound == t.bound, loc, "bound is not 1/j")?;
    let holds = to_x.overlaps(&scaled) && to_x.hi() < &bound && scaled.hi() < &bound;
    ensure(t.holds == holds, loc, "holds flag differs")
}

fn check_closed_items(cert: &Certificate, f: &ClosedFamilySpec) -> Check {
    count(cert, cert.trials)?;
    let mismatch = |i: usize, item: &Item| fail(item_loc(i, item), "sample differs from the seed");
    match cert.claim {
        ClaimKind::Extract | ClaimKind::ComboNotInY => {
            for (i, (item, (c, j0))) in cert.items.iter().zip(sample_combos(f, cert.trials, cert.seed)).enumerate() {
                let loc = item_loc(i, item);
                match (cert.claim, item) {
                    (ClaimKind::Extract, Item::Extract(t)) if t.combo == c && t.j0 == j0 => check_extract(f, t, &loc)?,
                    (ClaimKind::ComboNotInY, Item::ComboNotInY(t)) if t.extract.combo == c => check_combo(f, t, &loc)?,
                    _ => return mismatch(i, item),
                }
            }
        }
        ClaimKind::CrossIndependence => {
            for (i, (item, combos)) in cert.items.iter().zip(sample_tuples(f, cert.trials, cert.seed)).enumerate() {
                match item {
                    Item::CrossIndependence(t) if t.combos == combos && t.designated == 0 => {
                        check_cross(f, t, &item_loc(i, item))?
                    }
                    _ => return mismatch(i, item),
                }
            }
        }
        _ => {
            for (i, (item, (b, p, e))) in cert.items.iter().zip(sample_pairs(f, cert.trials, cert.seed)).enumerate() {
                match item {
                    Item::Pointwise(t) if t.base == b && t.perturbation == p && t.exponent == e => {
                        check_pointwise(f, cert, t, &item_loc(i, item))?
                    }
                    _ => return mismatch(i, item),
                }
            }
        }
    }
    Ok(())
}

fn combo_sequence(f: &ClosedFamilySpec, c: &ComboElement, loc: &str) -> Check<SymbolicSequence> {
    ensure(
        &ComboElement::new(c.branch, c.terms().iter().map(|t| (t.j, t.coeff.clone()))) == c,
        loc,
        "combination not in normal form",
    )?;
    let mut s = SymbolicSequence::zero();
    for t in c.terms() {
        s = s.add(&at(loc, f.witness(c.branch, t.j))?.witness.scale(&t.coeff));
    }
    Ok(s)
}

fn combo_value(f: &ClosedFamilySpec, c: &ComboElement, n: &Index, loc: &str) -> Check<Value> {
    let mut total = Value::zero();
    for t in c.terms() {
        total = &total + &at(loc, f.witness(c.branch, t.j))?.witness.value_at(n).scale(&t.coeff);
    }
    Ok(total)
}

fn check_extract(f: &ClosedFamilySpec, t: &ExtractTrace, loc: &str) -> Check {
    let seq = combo_sequence(f, &t.combo, loc)?;
    let c = t
        .combo
        .terms()
        .iter()
        .find(|s| s.j == t.j0)
        .map(|s| s.coeff.clone())
        .ok_or_else(|| RecheckFailure {
            location: loc.into(),
            message: "j0 has no coefficient".into(),
        })?;
    let w = at(loc, f.witness(t.combo.branch, t.j0))?;
    ensure(t.restricted == seq.restrict(&w.cell), loc, "restricted side differs")?;
    ensure(t.expected == w.witness.scale(&c), loc, "expected side differs")?;
    ensure(t.checked == RESTRICTION_POINTS as u64, loc, "wrong number of checked points")?;
    let mut agree = t.restricted == t.expected;
    for n in single_tail(&w.witness, loc)?.iter().take(RESTRICTION_POINTS) {
        let direct = combo_value(f, &t.combo, &n, loc)?;
        agree &= t.restricted.value_at(&n) == direct && t.expected.value_at(&n) == direct;
    }
    ensure(t.holds == agree, loc, "holds flag differs")
}

fn check_combo(f: &ClosedFamilySpec, t: &ComboNotInYTrace, loc: &str) -> Check {
    let first = t.extract.combo.terms().first().map(|s| s.j);
    ensure(first == Some(t.extract.j0), loc, "j0 is not the least nonzero index")?;
    check_extract(f, &t.extract, loc)?;
    let w = at(loc, f.witness(t.extract.combo.branch, t.extract.j0))?;
    let verdict = at(loc, f.chain.resolve(f.y).member(&w.witness))?;
    ensure(verdict == t.witness_in_y, loc, "verdict in Y differs")?;
    ensure(t.holds == (t.extract.holds && !verdict.is_in()), loc, "holds flag differs")
}

fn check_cross(f: &ClosedFamilySpec, t: &CrossTrace, loc: &str) -> Check {
    let mut used: Vec<usize> = t.combos.iter().map(|c| c.branch).collect();
    used.sort_unstable();
    used.dedup();
    ensure(used.len() == t.combos.len(), loc, "two combinations on one branch")?;
    ensure(used.iter().all(|k| *k < f.branches.len()), loc, "unknown branch")?;
    let ids: Vec<&BranchId> = used.iter().map(|k| &f.branches[*k]).collect();
    ensure(pairwise_bound(&ids)? == t.n, loc, "N differs")?;
    let lead = t.combos.get(t.designated).ok_or_else(|| RecheckFailure {
        location: loc.into(),
        message: "designated index out of range".into(),
    })?;
    ensure(lead.terms().first().map(|s| s.j) == Some(t.j0), loc, "j0 is not the least nonzero index")?;
    let w = at(loc, f.witness(lead.branch, t.j0))?;
    ensure(
        single_tail(&w.witness, loc)?.least_at_least(&t.n).as_ref() == Some(&t.n0),
        loc,
        "n0 is not the first support point past N",
    )?;
    let others: Vec<usize> = used.iter().copied().filter(|k| *k != lead.branch).collect();
    ensure(others == t.outside, loc, "excluded branches differ")?;
    let mut clear = true;
    for k in &others {
        clear &= !IndexSet::branch(f.branches[*k].clone()).contains(&t.n0);
    }
    let mut sum = Value::zero();
    for c in &t.combos {
        combo_sequence(f, c, loc)?;
        sum = &sum + &combo_value(f, c, &t.n0, loc)?;
    }
    let own = combo_value(f, lead, &t.n0, loc)?;
    ensure(sum == t.sum_value && own == t.designated_value, loc, "values at n0 differ")?;
    let nonzero = at(loc, own.is_nonzero())?;
    ensure(t.holds == (clear && sum == own && nonzero), loc, "holds flag differs")
}

fn check_pointwise(f: &ClosedFamilySpec, cert: &Certificate, t: &PointwiseTrace, loc: &str) -> Check {
    ensure(t.base.branch == t.perturbation.branch, loc, "pair spans two branches")?;
    let x = combo_sequence(f, &t.base, loc)?;
    let eps = Scalar::real(two_pow_neg(t.exponent));
    let y = x.add(&combo_sequence(f, &t.perturbation, loc)?.scale(&eps));
    let space = f.chain.resolve(f.x);
    let tol = pointwise_tolerance(t.exponent, cert.tol.as_ref().expect("checked"));
    ensure(tol == t.tolerance, loc, "tolerance differs")?;
    let d = at(loc, metric(&space, &x, &y, &tol))?;
    ensure(d == t.distance, loc, "distance differs")?;
    ensure(t.checks.len() as u64 == POINTWISE_RANGE + 1, loc, "wrong number of checks")?;
    let prec = bits_for_tolerance(&tol) + 16;
    let mut holds = true;
    for (n, c) in t.checks.iter().enumerate() {
        let idx = Index::from(n as u64);
        ensure(c.n == n as u64, loc, "checks out of order")?;
        let diff = at(loc, (&x.value_at(&idx) - &y.value_at(&idx)).abs_enclose(prec))?;
        ensure(diff == c.diff, loc, &format!("|x(n) - y(n)| differs at n = {n}"))?;
        let bound = match pointwise_modulus(&space, &idx, &d) {
            Ok(b) => Some(b),
            Err(crate::error::Error::TooCoarse(_)) => None,
            Err(e) => return fail(loc, e.to_string()),
        };
        ensure(bound == c.bound, loc, &format!("modulus differs at n = {n}"))?;
        if let Some(b) = &bound {
            holds &= diff.hi() <= b.lo();
        }
    }
    ensure(t.holds == holds, loc, "holds flag differs")
}
