//! Dense families `F^k = span{f_j^k : j >= 1}` with `f_j^k = x_j + c_j^k y_j^k`,
//! one per branch `k`, and the certifiers showing that they are independent,
//! dense in `X`, and that their union spans nothing in `Y` but `0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, ClaimKind, Family, Item};
use crate::certified::{two_pow_neg, CertifiedReal};
use crate::enumeration::enumerate_rational_c00;
use crate::error::Error;
use crate::families::{branch_intersection, BranchId, Index, IndexSet};
use crate::sampling::{branch_terms, distinct, rng};
use crate::scalar::{serde_rational, Rational, Scalar};
use crate::sequence::SymbolicSequence;
use crate::spaces::{chain_lt, metric, ChainParams, MembershipVerdict, Space, SpaceId};
use crate::value::Value;
use crate::witnesses::WitnessRecipe;

/// Elements of `B` compared pointwise in the restriction identity.
pub const RESTRICTION_POINTS: usize = 1000;

pub const LINF_DENSE_NOTE: &str = "dense mode needs X != linf: maximal algebraic genericity \
     in linf rests on a separate construction that is not reproduced here";

/// `c = 2^-exponent` together with the certified `d_X(c·y, 0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Scaling {
    pub c: Scalar,
    pub exponent: u32,
    pub distance: CertifiedReal,
}

/// Metric tolerance used when certifying `d < 1/j`.
pub fn scaling_tolerance(j: u64) -> Rational {
    two_pow_neg(64 - j.leading_zeros() + 4)
}

/// Largest `c = 2^-m` (least `m`) with certified `d_X(c·y, 0) < 1/j`.
pub fn scaling_constant(y: &SymbolicSequence, space: &Space, j: u64) -> Result<Scaling, Error> {
    if j == 0 {
        return Err(Error::Precondition("j starts at 1".into()));
    }
    let bound = Rational::new(1.into(), j.into());
    let tol = scaling_tolerance(j);
    let zero = SymbolicSequence::zero();
    let attempt = |m: u32| -> Result<Option<CertifiedReal>, Error> {
        let c = Scalar::real(two_pow_neg(m));
        let d = metric(space, &y.scale(&c), &zero, &tol)?;
        Ok((d.hi() < &bound).then_some(d))
    };
    let done = |m: u32, distance: CertifiedReal| Scaling {
        c: Scalar::real(two_pow_neg(m)),
        exponent: m,
        distance,
    };
    if let Some(d) = attempt(0)? {
        return Ok(done(0, d));
    }
    // Gallop to a passing exponent, then bisect down to the least one.
    let (mut lo, mut hi) = (0u32, 1u32);
    let mut best = loop {
        if let Some(d) = attempt(hi)? {
            break d;
        }
        if hi >= 1 << 12 {
            return Err(Error::SearchLimit(format!("no scaling 2^-m below 1/{j} for m <= {hi}")));
        }
        lo = hi;
        hi *= 2;
    };
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        match attempt(mid)? {
            Some(d) => {
                hi = mid;
                best = d;
            }
            None => lo = mid,
        }
    }
    Ok(done(hi, best))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub branch: usize,
    pub j: u64,
    /// `A_j^k`.
    pub cell: IndexSet,
    /// `x_j`.
    pub x: SymbolicSequence,
    /// `y_j^k`.
    pub witness: SymbolicSequence,
    /// `c_j^k`.
    pub scale: Scalar,
    /// `d_X(c_j^k y_j^k, 0)`.
    pub distance: CertifiedReal,
    /// `f_j^k`.
    pub generator: SymbolicSequence,
}

impl Generator {
    /// Support of the witness (its single tail).
    pub fn witness_support(&self) -> Result<&IndexSet, Error> {
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
pub struct DenseFamilySpec {
    pub chain: ChainParams,
    pub y: SpaceId,
    pub x: SpaceId,
    pub branches: Vec<BranchId>,
    pub depth: u64,
    /// Ordered by branch, then by `j`.
    pub generators: Vec<Generator>,
}

pub(crate) fn check_branches(branches: &[BranchId]) -> Result<(), Error> {
    if branches.is_empty() {
        return Err(Error::Precondition("no branches".into()));
    }
    for (i, k) in branches.iter().enumerate() {
        if branches[..i].contains(k) {
            return Err(Error::DuplicateBranch(k.to_string()));
        }
    }
    Ok(())
}

pub fn build_dense_family(
    chain: &ChainParams,
    y: SpaceId,
    x: SpaceId,
    branches: &[BranchId],
    depth: u64,
) -> Result<DenseFamilySpec, Error> {
    if !chain_lt(y, x) {
        return Err(Error::NotAChainPair {
            y: y.to_string(),
            x: x.to_string(),
        });
    }
    if x == SpaceId::Linf {
        return Err(Error::Precondition(LINF_DENSE_NOTE.into()));
    }
    check_branches(branches)?;
    if depth == 0 {
        return Err(Error::Precondition("depth must be at least 1".into()));
    }
    let recipe = WitnessRecipe::for_pair(chain, y, x)?;
    let space = chain.resolve(x);
    let cells: Vec<(usize, u64)> = (0..branches.len())
        .flat_map(|k| (1..=depth).map(move |j| (k, j)))
        .collect();
    let generators = cells
        .par_iter()
        .map(|&(k, j)| {
            let cell = IndexSet::cell(&IndexSet::branch(branches[k].clone()), j)?;
            let witness = recipe.build(&cell)?;
            let support = recipe.support(&cell)?;
            if !support.subset_of(&cell) {
                return Err(Error::Precondition(format!("witness ({k}, {j}) leaves its cell")));
            }
            let scaling = scaling_constant(&witness, &space, j)?;
            let xj = enumerate_rational_c00(j)?;
            let generator = xj.add(&witness.scale(&scaling.c));
            Ok(Generator {
                branch: k,
                j,
                cell,
                x: xj,
                witness,
                scale: scaling.c,
                distance: scaling.distance,
                generator,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(DenseFamilySpec {
        chain: chain.clone(),
        y,
        x,
        branches: branches.to_vec(),
        depth,
        generators,
    })
}

impl DenseFamilySpec {
    pub fn generator(&self, k: usize, j: u64) -> Result<&Generator, Error> {
        let missing = || Error::Precondition(format!("no generator ({k}, {j})"));
        if k >= self.branches.len() || j == 0 || j > self.depth {
            return Err(missing());
        }
        self.generators
            .get(k * self.depth as usize + (j - 1) as usize)
            .filter(|g| (g.branch, g.j) == (k, j))
            .ok_or_else(missing)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanTerm {
    pub branch: usize,
    pub j: u64,
    pub coeff: Scalar,
}

/// A finite combination `Σ t_j^k f_j^k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanElement {
    terms: Vec<SpanTerm>,
}

impl SpanElement {
    /// Sums repeated `(k, j)` and drops zero coefficients.
    pub fn new(terms: impl IntoIterator<Item = SpanTerm>) -> Self {
        let mut merged: std::collections::BTreeMap<(usize, u64), Scalar> = Default::default();
        for t in terms {
            let e = merged.entry((t.branch, t.j)).or_insert_with(Scalar::zero);
            *e = &*e + &t.coeff;
        }
        SpanElement {
            terms: merged
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|((branch, j), coeff)| SpanTerm { branch, j, coeff })
                .collect(),
        }
    }

    pub fn terms(&self) -> &[SpanTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Branches with a nonzero coefficient, increasing.
    pub fn branches(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.terms.iter().map(|t| t.branch).collect();
        out.dedup();
        out
    }

    /// The term `t^k_{M(k)}`.
    pub fn leading(&self, k: usize) -> Option<&SpanTerm> {
        self.terms.iter().filter(|t| t.branch == k).last()
    }

    /// `max_k M(k)`.
    pub fn max_j(&self) -> u64 {
        self.terms.iter().map(|t| t.j).max().unwrap_or(0)
    }

    pub fn sequence(&self, family: &DenseFamilySpec) -> Result<SymbolicSequence, Error> {
        let mut v = SymbolicSequence::zero();
        for t in &self.terms {
            v = v.add(&family.generator(t.branch, t.j)?.generator.scale(&t.coeff));
        }
        Ok(v)
    }
}

/// `1 + max supp x_j` over `j <= m`, or `0` when all those `x_j` vanish.
pub fn enumeration_bound(family: &DenseFamilySpec, m: u64) -> Result<Index, Error> {
    let mut n1 = Index::zero();
    for j in 1..=m {
        if let Some(last) = family.generator(0, j)?.x.finite_max() {
            n1 = n1.max(last.add_u64(1));
        }
    }
    Ok(n1)
}

/// `1 + max(A^k ∩ A^k')` over distinct pairs, or `0` for a single branch.
pub fn intersection_bound(branches: &[&BranchId]) -> Result<Index, Error> {
    let mut n2 = Index::zero();
    for (i, k) in branches.iter().enumerate() {
        for other in &branches[i + 1..] {
            if let Some(last) = branch_intersection(k, other)?.into_iter().max() {
                n2 = n2.max(Index::from_big(last).add_u64(1));
            }
        }
    }
    Ok(n2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationTrace {
    pub element: SpanElement,
    pub designated: usize,
    /// `M(k₀)`.
    pub leading_j: u64,
    pub n1: Index,
    pub n2: Index,
    pub n0: Index,
    /// `v(n₀)`.
    pub value: Value,
    /// `t·c·y(n₀)`, evaluated on its own.
    pub surviving: Value,
    pub holds: bool,
}

impl SeparationTrace {
    pub fn cutoff(&self) -> Index {
        self.n1.clone().max(self.n2.clone())
    }
}

pub fn separating_index(
    family: &DenseFamilySpec,
    v: &SpanElement,
    k0: usize,
) -> Result<SeparationTrace, Error> {
    let lead = v.leading(k0).ok_or(Error::LeadingCoefficientZero)?;
    let g = family.generator(k0, lead.j)?;
    let n1 = enumeration_bound(family, v.max_j())?;
    let used: Vec<&BranchId> = v.branches().iter().map(|k| &family.branches[*k]).collect();
    let n2 = intersection_bound(&used)?;
    let cutoff = n1.clone().max(n2.clone());
    let n0 = g
        .witness_support()?
        .least_at_least(&cutoff)
        .ok_or_else(|| Error::SearchLimit(format!("witness support beyond {cutoff}")))?;
    let value = v.sequence(family)?.value_at(&n0);
    let surviving = g.witness.value_at(&n0).scale(&(&lead.coeff * &g.scale));
    let holds = value == surviving && surviving.is_nonzero()?;
    Ok(SeparationTrace {
        element: v.clone(),
        designated: k0,
        leading_j: lead.j,
        n1,
        n2,
        n0,
        value,
        surviving,
        holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NotInYTrace {
    pub separation: SeparationTrace,
    /// `B = A^{k₀}_{M(k₀)} ∩ [N, ∞)` with `N = max(N₁, N₂)`.
    pub b: IndexSet,
    /// `restrict(v, B)`.
    pub restricted: SymbolicSequence,
    /// `t·c·restrict(y, [N, ∞))`.
    pub expected: SymbolicSequence,
    /// Elements of `B` at which both sides and `v` were compared.
    pub checked: u64,
    pub witness_in_y: MembershipVerdict,
    pub holds: bool,
}

pub fn certify_not_in_y(
    family: &DenseFamilySpec,
    v: &SpanElement,
    k0: usize,
) -> Result<NotInYTrace, Error> {
    if v.is_zero() {
        return Err(Error::ZeroElement);
    }
    let separation = separating_index(family, v, k0)?;
    let g = family.generator(k0, separation.leading_j)?;
    let t = &v.leading(k0).expect("separated").coeff;
    let cutoff = separation.cutoff();
    let b = IndexSet::cut(&g.cell, cutoff.clone());
    let seq = v.sequence(family)?;
    let restricted = seq.restrict(&b);
    let expected = g
        .witness
        .restrict(&IndexSet::ray(cutoff))
        .scale(&(t * &g.scale));
    let mut agree = restricted == expected;
    let mut checked = 0;
    for n in b.iter().take(RESTRICTION_POINTS) {
        let lhs = restricted.value_at(&n);
        agree &= lhs == expected.value_at(&n) && lhs == seq.value_at(&n);
        checked += 1;
    }
    let witness_in_y = family.chain.resolve(family.y).member(&g.witness)?;
    let holds = separation.holds && agree && !witness_in_y.is_in();
    Ok(NotInYTrace {
        separation,
        b,
        restricted,
        expected,
        checked,
        witness_in_y,
        holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityTrace {
    pub branch: usize,
    pub j: u64,
    #[serde(with = "serde_rational")]
    pub bound: Rational,
    /// Width requested of the metric enclosures.
    #[serde(with = "serde_rational")]
    pub tolerance: Rational,
    /// `d_X(f_j^k, x_j)`.
    pub to_x: CertifiedReal,
    /// `d_X(c_j^k y_j^k, 0)`.
    pub scaled_witness: CertifiedReal,
    pub holds: bool,
}

/// The metric tolerance for a `d < 1/j` check: the global tolerance
/// scaled down to the resolution of the scaling search.
pub fn density_tolerance(j: u64, tol: &Rational) -> Rational {
    scaling_tolerance(j) * tol
}

pub fn density_trace(family: &DenseFamilySpec, g: &Generator, tol: &Rational) -> Result<DensityTrace, Error> {
    let space = family.chain.resolve(family.x);
    let tol = density_tolerance(g.j, tol);
    let to_x = metric(&space, &g.generator, &g.x, &tol)?;
    let scaled = metric(&space, &g.witness.scale(&g.scale), &SymbolicSequence::zero(), &tol)?;
    let bound = Rational::new(1.into(), g.j.into());
    let holds = to_x.overlaps(&scaled) && to_x.hi() < &bound && scaled.hi() < &bound;
    Ok(DensityTrace {
        branch: g.branch,
        j: g.j,
        bound,
        tolerance: tol,
        to_x,
        scaled_witness: scaled,
        holds,
    })
}

/// Random span elements; `cross` asks for at least two branches when the
/// family has them.
pub fn sample_span_elements(
    family: &DenseFamilySpec,
    trials: u64,
    seed: u64,
    cross: bool,
) -> Vec<(SpanElement, usize)> {
    let mut rng = rng(seed);
    let width = family.branches.len();
    (0..trials)
        .map(|_| {
            let lo = if cross { 2.min(width) } else { 1 };
            let count = rand::Rng::gen_range(&mut rng, lo..=3.min(width).max(lo));
            let ks = distinct(&mut rng, width, count);
            let mut terms = vec![];
            for &k in &ks {
                for (j, coeff) in branch_terms(&mut rng, family.depth) {
                    terms.push(SpanTerm { branch: k, j, coeff });
                }
            }
            (SpanElement::new(terms), ks[0])
        })
        .collect()
}

pub fn certify_independence(family: &DenseFamilySpec, trials: u64, seed: u64, tol: &Rational) -> Result<Certificate, Error> {
    let items = sample_span_elements(family, trials, seed, false)
        .par_iter()
        .map(|(v, k0)| separating_index(family, v, *k0).map(Item::Separation))
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(Certificate::new(ClaimKind::Independence, seed, trials, tol, Family::Dense(family.clone()), items))
}

fn not_in_y_items(family: &DenseFamilySpec, trials: u64, seed: u64, cross: bool) -> Result<Vec<Item>, Error> {
    sample_span_elements(family, trials, seed, cross)
        .par_iter()
        .map(|(v, k0)| certify_not_in_y(family, v, *k0).map(|t| Item::NotInY(Box::new(t))))
        .collect()
}

pub fn not_in_y_certificate(family: &DenseFamilySpec, trials: u64, seed: u64, tol: &Rational) -> Result<Certificate, Error> {
    let items = not_in_y_items(family, trials, seed, false)?;
    Ok(Certificate::new(ClaimKind::NotInY, seed, trials, tol, Family::Dense(family.clone()), items))
}

/// Density checks for every generator with `j <= depth`.
pub fn certify_density(family: &DenseFamilySpec, depth: u64, tol: &Rational) -> Result<Certificate, Error> {
    if depth > family.depth {
        return Err(Error::Precondition(format!(
            "density depth {depth} exceeds family depth {}",
            family.depth
        )));
    }
    let items = family
        .generators
        .par_iter()
        .filter(|g| g.j <= depth)
        .map(|g| density_trace(family, g, tol).map(Item::Density))
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(Certificate::new(ClaimKind::Density, 0, depth, tol, Family::Dense(family.clone()), items))
}

pub fn certify_union_span(family: &DenseFamilySpec, trials: u64, seed: u64, tol: &Rational) -> Result<Certificate, Error> {
    let items = not_in_y_items(family, trials, seed, true)?;
    Ok(Certificate::new(ClaimKind::Maximality, seed, trials, tol, Family::Dense(family.clone()), items))
}
