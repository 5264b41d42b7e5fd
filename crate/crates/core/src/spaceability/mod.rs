//! Closed families `F^k = cl span{y_j^k : j >= 1}`, one per branch, with
//! verifiers for finite combinations: component extraction, avoidance of
//! `Y`, independence across branches, and the pointwise-convergence audit.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, ClaimKind, Family, Item};
use crate::certified::{bits_for_tolerance, two_pow_neg, CertifiedReal};
use crate::error::Error;
use crate::families::{BranchId, Index, IndexSet};
use crate::genericity::{check_branches, intersection_bound, RESTRICTION_POINTS};
use crate::sampling::{branch_terms, distinct, rng};
use crate::scalar::{serde_rational, Rational, Scalar};
use crate::sequence::SymbolicSequence;
use crate::spaces::{chain_lt, metric, pointwise_modulus, ChainParams, MembershipVerdict, SpaceId};
use crate::value::Value;
use crate::witnesses::WitnessRecipe;

/// Coordinates `0..=POINTWISE_RANGE` checked by the pointwise audit.
pub const POINTWISE_RANGE: u64 = 50;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedWitness {
    pub branch: usize,
    pub j: u64,
    /// `A_j^k`.
    pub cell: IndexSet,
    /// `y_j^k`.
    pub witness: SymbolicSequence,
    pub in_x: MembershipVerdict,
    pub in_y: MembershipVerdict,
}

impl ClosedWitness {
    pub fn support(&self) -> Result<&IndexSet, Error> {
        match self.witness.tails() {
            [t] if self.witness.finite_part().is_empty() => Ok(t.support()),
            _ => Err(Error::Precondition(format!(
                "witness ({}, {}) is not a single tail",
                self.branch, self.j
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFamilySpec {
    pub chain: ChainParams,
    pub y: SpaceId,
    pub x: SpaceId,
    pub branches: Vec<BranchId>,
    pub depth: u64,
    /// Ordered by branch, then by `j`.
    pub witnesses: Vec<ClosedWitness>,
}

pub fn build_closed_family(
    chain: &ChainParams,
    y: SpaceId,
    x: SpaceId,
    branches: &[BranchId],
    depth: u64,
) -> Result<ClosedFamilySpec, Error> {
    if !chain_lt(y, x) {
        return Err(Error::NotAChainPair {
            y: y.to_string(),
            x: x.to_string(),
        });
    }
    check_branches(branches)?;
    if depth == 0 {
        return Err(Error::Precondition("depth must be at least 1".into()));
    }
    let recipe = WitnessRecipe::for_pair(chain, y, x)?;
    let (space_y, space_x) = (chain.resolve(y), chain.resolve(x));
    let cells: Vec<(usize, u64)> = (0..branches.len())
        .flat_map(|k| (1..=depth).map(move |j| (k, j)))
        .collect();
    let witnesses = cells
        .par_iter()
        .map(|&(k, j)| {
            let cell = IndexSet::cell(&IndexSet::branch(branches[k].clone()), j)?;
            let witness = recipe.build(&cell)?;
            let w = ClosedWitness {
                branch: k,
                j,
                in_x: space_x.member(&witness)?,
                in_y: space_y.member(&witness)?,
                cell,
                witness,
            };
            if !w.support()?.subset_of(&w.cell) || !w.in_x.is_in() || w.in_y.is_in() {
                return Err(Error::Precondition(format!("witness ({k}, {j}) fails its invariants")));
            }
            Ok(w)
        })
        .collect::<Result<Vec<_>, Error>>()?;
    for (i, a) in witnesses.iter().enumerate() {
        for b in &witnesses[i + 1..] {
            if a.branch == b.branch && !a.cell.provably_disjoint(&b.cell) {
                return Err(Error::Precondition(format!("cells {} and {} overlap", a.j, b.j)));
            }
        }
    }
    Ok(ClosedFamilySpec {
        chain: chain.clone(),
        y,
        x,
        branches: branches.to_vec(),
        depth,
        witnesses,
    })
}

impl ClosedFamilySpec {
    pub fn witness(&self, k: usize, j: u64) -> Result<&ClosedWitness, Error> {
        let missing = || Error::Precondition(format!("no witness ({k}, {j})"));
        if k >= self.branches.len() || j == 0 || j > self.depth {
            return Err(missing());
        }
        self.witnesses
            .get(k * self.depth as usize + (j - 1) as usize)
            .filter(|w| (w.branch, w.j) == (k, j))
            .ok_or_else(missing)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComboTerm {
    pub j: u64,
    pub coeff: Scalar,
}

/// `f = Σ_j c_j y_j^k` on one branch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComboElement {
    pub branch: usize,
    terms: Vec<ComboTerm>,
}

impl ComboElement {
    /// Sums repeated `j` and drops zero coefficients.
    pub fn new(branch: usize, terms: impl IntoIterator<Item = (u64, Scalar)>) -> Self {
        let mut merged: std::collections::BTreeMap<u64, Scalar> = Default::default();
        for (j, c) in terms {
            let e = merged.entry(j).or_insert_with(Scalar::zero);
            *e = &*e + &c;
        }
        ComboElement {
            branch,
            terms: merged
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(j, coeff)| ComboTerm { j, coeff })
                .collect(),
        }
    }

    pub fn terms(&self) -> &[ComboTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, j: u64) -> Option<&Scalar> {
        self.terms.iter().find(|t| t.j == j).map(|t| &t.coeff)
    }

    pub fn sequence(&self, family: &ClosedFamilySpec) -> Result<SymbolicSequence, Error> {
        let mut f = SymbolicSequence::zero();
        for t in &self.terms {
            f = f.add(&family.witness(self.branch, t.j)?.witness.scale(&t.coeff));
        }
        Ok(f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractTrace {
    pub combo: ComboElement,
    pub j0: u64,
    /// `restrict(f, A_j0^k)`.
    pub restricted: SymbolicSequence,
    /// `c_j0 · y_j0^k`.
    pub expected: SymbolicSequence,
    /// Support elements of `y_j0^k` at which both sides and `f` were compared.
    pub checked: u64,
    pub holds: bool,
}

pub fn extract_component(family: &ClosedFamilySpec, f: &ComboElement, j0: u64) -> Result<ExtractTrace, Error> {
    let c = f.coeff(j0).ok_or(Error::ZeroCoefficient(j0))?;
    let w = family.witness(f.branch, j0)?;
    let seq = f.sequence(family)?;
    let restricted = seq.restrict(&w.cell);
    let expected = w.witness.scale(c);
    let mut agree = restricted == expected;
    let mut checked = 0;
    for n in w.support()?.iter().take(RESTRICTION_POINTS) {
        let lhs = restricted.value_at(&n);
        agree &= lhs == expected.value_at(&n) && lhs == seq.value_at(&n);
        checked += 1;
    }
    Ok(ExtractTrace {
        combo: f.clone(),
        j0,
        restricted,
        expected,
        checked,
        holds: agree,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComboNotInYTrace {
    pub extract: ExtractTrace,
    pub witness_in_y: MembershipVerdict,
    pub holds: bool,
}

/// Extracts the least `j` with `c_j != 0` and uses its witness verdict.
pub fn certify_combo_not_in_y(family: &ClosedFamilySpec, f: &ComboElement) -> Result<ComboNotInYTrace, Error> {
    let j0 = f.terms().first().ok_or(Error::ZeroElement)?.j;
    let extract = extract_component(family, f, j0)?;
    let w = family.witness(f.branch, j0)?;
    let witness_in_y = family.chain.resolve(family.y).member(&w.witness)?;
    let holds = extract.holds && !witness_in_y.is_in();
    Ok(ComboNotInYTrace {
        extract,
        witness_in_y,
        holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossTrace {
    /// One combination per branch, on distinct branches.
    pub combos: Vec<ComboElement>,
    /// Position of `v_k₀` in `combos`.
    pub designated: usize,
    /// `N`, beyond every pairwise branch intersection.
    pub n: Index,
    /// `j` of the witness of `v_k₀` supplying `n₀`.
    pub j0: u64,
    pub n0: Index,
    /// Branches other than `k₀` checked not to contain `n₀`.
    pub outside: Vec<usize>,
    /// `Σ_k v_k(n₀)`.
    pub sum_value: Value,
    /// `v_k₀(n₀)`.
    pub designated_value: Value,
    pub holds: bool,
}

pub fn certify_cross_branch_independence(
    family: &ClosedFamilySpec,
    combos: &[ComboElement],
    designated: usize,
) -> Result<CrossTrace, Error> {
    let lead = combos.get(designated).ok_or(Error::ZeroDesignated)?;
    let j0 = lead.terms().first().ok_or(Error::ZeroDesignated)?.j;
    let mut used: Vec<usize> = combos.iter().map(|c| c.branch).collect();
    used.sort_unstable();
    used.dedup();
    if used.len() != combos.len() {
        return Err(Error::Precondition("one combination per branch".into()));
    }
    let ids: Vec<&BranchId> = used.iter().map(|k| &family.branches[*k]).collect();
    let n = intersection_bound(&ids)?;
    let n0 = family
        .witness(lead.branch, j0)?
        .support()?
        .least_at_least(&n)
        .ok_or_else(|| Error::SearchLimit(format!("witness support beyond {n}")))?;
    let outside: Vec<usize> = used.iter().copied().filter(|k| *k != lead.branch).collect();
    let mut clear = true;
    for k in &outside {
        clear &= !IndexSet::branch(family.branches[*k].clone()).contains(&n0);
    }
    let mut sum_value = Value::zero();
    for c in combos {
        sum_value = &sum_value + &c.sequence(family)?.value_at(&n0);
    }
    let designated_value = lead.sequence(family)?.value_at(&n0);
    let holds = clear && sum_value == designated_value && designated_value.is_nonzero()?;
    Ok(CrossTrace {
        combos: combos.to_vec(),
        designated,
        n,
        j0,
        n0,
        outside,
        sum_value,
        designated_value,
        holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCheck {
    pub n: u64,
    /// `|x(n) - y(n)|`.
    pub diff: CertifiedReal,
    /// The pointwise modulus, absent when vacuous at this distance.
    pub bound: Option<CertifiedReal>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointwiseTrace {
    /// `x`.
    pub base: ComboElement,
    /// `y = x + 2^-exponent · perturbation`.
    pub perturbation: ComboElement,
    pub exponent: u32,
    /// Width requested of the distance enclosure.
    #[serde(with = "serde_rational")]
    pub tolerance: Rational,
    /// `d_X(x, y)`.
    pub distance: CertifiedReal,
    pub checks: Vec<PointCheck>,
    pub holds: bool,
}

/// Tolerance of the distance in a pointwise trace, relative to the
/// perturbation size.
pub fn pointwise_tolerance(exponent: u32, tol: &Rational) -> Rational {
    two_pow_neg(exponent + 8) * tol
}

pub fn pointwise_trace(
    family: &ClosedFamilySpec,
    base: &ComboElement,
    perturbation: &ComboElement,
    exponent: u32,
    tol: &Rational,
) -> Result<PointwiseTrace, Error> {
    let space = family.chain.resolve(family.x);
    let x = base.sequence(family)?;
    let y = x.add(&perturbation.sequence(family)?.scale(&Scalar::real(two_pow_neg(exponent))));
    let tol = pointwise_tolerance(exponent, tol);
    let distance = metric(&space, &x, &y, &tol)?;
    let prec = bits_for_tolerance(&tol) + 16;
    let mut checks = vec![];
    let mut holds = true;
    for n in 0..=POINTWISE_RANGE {
        let idx = Index::from(n);
        let diff = (&x.value_at(&idx) - &y.value_at(&idx)).abs_enclose(prec)?;
        let bound = match pointwise_modulus(&space, &idx, &distance) {
            Ok(b) => Some(b),
            Err(Error::TooCoarse(_)) => None,
            Err(e) => return Err(e),
        };
        if let Some(b) = &bound {
            holds &= diff.hi() <= b.lo();
        }
        checks.push(PointCheck { n, diff, bound });
    }
    Ok(PointwiseTrace {
        base: base.clone(),
        perturbation: perturbation.clone(),
        exponent,
        tolerance: tol,
        distance,
        checks,
        holds,
    })
}

fn random_combo(rng: &mut rand_chacha::ChaCha8Rng, branch: usize, depth: u64) -> ComboElement {
    ComboElement::new(branch, branch_terms(rng, depth))
}

/// Random combinations, each with a chosen `j₀` among its nonzero terms.
pub fn sample_combos(family: &ClosedFamilySpec, trials: u64, seed: u64) -> Vec<(ComboElement, u64)> {
    let mut rng = rng(seed);
    (0..trials)
        .map(|_| {
            let k = rng.gen_range(0..family.branches.len());
            let f = random_combo(&mut rng, k, family.depth);
            let j0 = f.terms()[rng.gen_range(0..f.terms().len())].j;
            (f, j0)
        })
        .collect()
}

/// Random tuples on distinct branches; the first entry is designated and
/// nonzero, the others are zero a quarter of the time.
pub fn sample_tuples(family: &ClosedFamilySpec, trials: u64, seed: u64) -> Vec<Vec<ComboElement>> {
    let mut rng = rng(seed);
    let width = family.branches.len();
    (0..trials)
        .map(|_| {
            let count = rng.gen_range(2.min(width)..=4.min(width));
            distinct(&mut rng, width, count)
                .into_iter()
                .enumerate()
                .map(|(i, k)| {
                    if i > 0 && rng.gen_bool(0.25) {
                        ComboElement::new(k, [])
                    } else {
                        random_combo(&mut rng, k, family.depth)
                    }
                })
                .collect()
        })
        .collect()
}

/// Random `(base, perturbation, exponent)` on a common branch.
pub fn sample_pairs(family: &ClosedFamilySpec, trials: u64, seed: u64) -> Vec<(ComboElement, ComboElement, u32)> {
    let mut rng = rng(seed);
    (0..trials)
        .map(|_| {
            let k = rng.gen_range(0..family.branches.len());
            let base = random_combo(&mut rng, k, family.depth);
            let pert = random_combo(&mut rng, k, family.depth);
            (base, pert, rng.gen_range(4..=64))
        })
        .collect()
}

fn certificate(family: &ClosedFamilySpec, claim: ClaimKind, seed: u64, trials: u64, tol: &Rational, items: Vec<Item>) -> Certificate {
    Certificate::new(claim, seed, trials, tol, Family::Closed(family.clone()), items)
}

pub fn extract_certificate(family: &ClosedFamilySpec, trials: u64, seed: u64, tol: &Rational) -> Result<Certificate, Error> {
    let items = sample_combos(family, trials, seed)
        .par_iter()
        .map(|(f, j0)| extract_component(family, f, *j0).map(|t| Item::Extract(Box::new(t))))
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(certificate(family, ClaimKind::Extract, seed, trials, tol, items))
}

pub fn combo_not_in_y_certificate(family: &ClosedFamilySpec, trials: u64, seed: u64, tol: &Rational) -> Result<Certificate, Error> {
    let items = sample_combos(family, trials, seed)
        .par_iter()
        .map(|(f, _)| certify_combo_not_in_y(family, f).map(|t| Item::ComboNotInY(Box::new(t))))
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(certificate(family, ClaimKind::ComboNotInY, seed, trials, tol, items))
}

pub fn cross_independence_certificate(family: &ClosedFamilySpec, trials: u64, seed: u64, tol: &Rational) -> Result<Certificate, Error> {
    let items = sample_tuples(family, trials, seed)
        .par_iter()
        .map(|combos| certify_cross_branch_independence(family, combos, 0).map(Item::CrossIndependence))
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(certificate(family, ClaimKind::CrossIndependence, seed, trials, tol, items))
}

pub fn pointwise_convergence_audit(family: &ClosedFamilySpec, trials: u64, seed: u64, tol: &Rational) -> Result<Certificate, Error> {
    let items = sample_pairs(family, trials, seed)
        .par_iter()
        .map(|(base, pert, e)| pointwise_trace(family, base, pert, *e, tol).map(Item::Pointwise))
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(certificate(family, ClaimKind::Pointwise, seed, trials, tol, items))
}

#[cfg(test)]
mod tests;
