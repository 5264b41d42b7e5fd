//! Seeded random choices shared by the certifiers and by `recheck`, which
//! regenerates every sample from the recorded seed.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::{Rational, Scalar};

pub const DEFAULT_SEED: u64 = 0x5eed_1ead;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_rational<R: Rng>(rng: &mut R) -> Rational {
    Rational::new(rng.gen_range(-9i64..=9).into(), rng.gen_range(1i64..=9).into())
}

/// A nonzero complex rational with small numerators and denominators.
pub fn nonzero_scalar<R: Rng>(rng: &mut R) -> Scalar {
    loop {
        let re = small_rational(rng);
        let im = if rng.gen_bool(0.5) {
            small_rational(rng)
        } else {
            Rational::from_integer(0.into())
        };
        let s = Scalar::new(re, im);
        if !s.is_zero() {
            return s;
        }
    }
}

/// `count` distinct indices below `n`, in sampling order.
pub fn distinct(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<usize> {
    sample(rng, n, count.min(n)).into_vec()
}

/// Coefficients for one branch: a nonzero leading term at a random
/// `M in 1..=depth` plus up to three lower terms.
pub fn branch_terms(rng: &mut ChaCha8Rng, depth: u64) -> Vec<(u64, Scalar)> {
    let top = rng.gen_range(1..=depth);
    let mut terms = vec![(top, nonzero_scalar(rng))];
    if top > 1 {
        for _ in 0..rng.gen_range(0..=3u32) {
            terms.push((rng.gen_range(1..top), nonzero_scalar(rng)));
        }
    }
    terms
}
