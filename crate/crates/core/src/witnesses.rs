//! For every strict chain pair `Y ⊊ X` and infinite `A ⊆ ℕ₀`, a sequence
//! `y ∈ X \ Y` supported in `A`.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::families::IndexSet;
use crate::scalar::{rat, Rational};
use crate::sequence::{SymbolicSequence, TailClass, TailTerm};
use crate::spaces::{chain_lt, ChainParams, MembershipVerdict, Param, SpaceId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportPolicy {
    UseAll,
    /// Thin the support so that its rank-`j` element is at least `2^j`.
    Sparsify,
}

/// The recipe for an adjacent pair `(y, succ y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessRecipe {
    pub y: SpaceId,
    pub x: SpaceId,
    pub policy: SupportPolicy,
    pub class: TailClass,
}

impl WitnessRecipe {
    /// The recipe used for `(y, x)`: the one for `(y, succ y)`.
    pub fn for_pair(chain: &ChainParams, y: SpaceId, x: SpaceId) -> Result<Self, Error> {
        if !chain_lt(y, x) {
            return Err(Error::NotAChainPair {
                y: y.to_string(),
                x: x.to_string(),
            });
        }
        let next = y.succ().expect("y precedes x");
        let a = chain.a();
        let b = chain.b();
        let power = |alpha: Rational| TailClass::PowerInRank { alpha };
        let (policy, class) = match y {
            SpaceId::C00 => (SupportPolicy::UseAll, TailClass::GeomInPosition { rho: rat(1, 2) }),
            SpaceId::AInf => (SupportPolicy::Sparsify, TailClass::ReciprocalPosition),
            // Diverges in ℓ^(a/2), converges in ℓ^a.
            SpaceId::Cap0 => (SupportPolicy::UseAll, power(rat(2, 1) / a)),
            SpaceId::Lp(Param::A) => (SupportPolicy::UseAll, power(a.recip())),
            // Diverges in ℓ^((a+b)/2), converges in ℓ^b.
            SpaceId::Cap(Param::A) => (SupportPolicy::UseAll, power(rat(2, 1) / (a + b))),
            SpaceId::Lp(Param::B) => (SupportPolicy::UseAll, power(b.recip())),
            SpaceId::Cap(Param::B) => (SupportPolicy::UseAll, TailClass::LogReciprocalRank),
            SpaceId::C0 => (SupportPolicy::UseAll, TailClass::Constant),
            SpaceId::Linf => (SupportPolicy::UseAll, TailClass::LinearRank),
            SpaceId::H => (SupportPolicy::UseAll, TailClass::GeomInPositionGrowth { rho: rat(2, 1) }),
            SpaceId::Full => unreachable!("full space has no successor"),
        };
        Ok(WitnessRecipe { y, x: next, policy, class })
    }

    pub fn support(&self, a: &IndexSet) -> Result<IndexSet, Error> {
        a.require_infinite()?;
        match self.policy {
            SupportPolicy::Sparsify if !a.exp_growth() => IndexSet::sparsified(a),
            _ => Ok(a.clone()),
        }
    }

    pub fn build(&self, a: &IndexSet) -> Result<SymbolicSequence, Error> {
        SymbolicSequence::tail(self.support(a)?, TailTerm::unit(self.class.clone()))
    }
}

/// `y ∈ X \ Y` supported in `a`.
pub fn witness(chain: &ChainParams, y: SpaceId, x: SpaceId, a: &IndexSet) -> Result<SymbolicSequence, Error> {
    WitnessRecipe::for_pair(chain, y, x)?.build(a)
}

/// A witness together with both membership verdicts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub y: SpaceId,
    pub x: SpaceId,
    /// The adjacent pair whose recipe was used.
    pub recipe_pair: (SpaceId, SpaceId),
    pub policy: SupportPolicy,
    pub support: IndexSet,
    pub sequence: SymbolicSequence,
    pub in_x: MembershipVerdict,
    pub in_y: MembershipVerdict,
}

pub fn witness_report(chain: &ChainParams, y: SpaceId, x: SpaceId, a: &IndexSet) -> Result<WitnessReport, Error> {
    let recipe = WitnessRecipe::for_pair(chain, y, x)?;
    let support = recipe.support(a)?;
    let sequence = recipe.build(a)?;
    let in_x = chain.resolve(x).member(&sequence)?;
    let in_y = chain.resolve(y).member(&sequence)?;
    Ok(WitnessReport {
        y,
        x,
        recipe_pair: (recipe.y, recipe.x),
        policy: recipe.policy,
        support,
        sequence,
        in_x,
        in_y,
    })
}
