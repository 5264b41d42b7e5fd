use super::*;
use crate::certified::CertifiedReal;
use crate::families::{BranchId, Index, IndexSet};
use crate::scalar::{rat, Scalar};
use crate::sequence::{SeriesVerdict, SymbolicSequence, TailClass, TailTerm};
use num_traits::One;
use proptest::prelude::*;

fn unit(class: TailClass, support: IndexSet) -> SymbolicSequence {
    SymbolicSequence::tail(support, TailTerm::unit(class)).unwrap()
}

fn chain() -> ChainParams {
    ChainParams::default()
}

fn is_in(space: &Space, x: &SymbolicSequence) -> bool {
    space.member(x).unwrap().is_in()
}

#[test]
fn chain_order_and_text() {
    let la = SpaceId::Lp(Param::A);
    let lb = SpaceId::Lp(Param::B);
    assert!(chain_lt(SpaceId::C00, la));
    assert!(!chain_lt(lb, la));
    assert!(!chain_lt(la, la));
    assert_eq!(SpaceId::pairs().count(), 55);
    for id in SpaceId::ALL {
        assert_eq!(id.to_string().parse::<SpaceId>().unwrap(), id);
    }
    assert_eq!(SpaceId::Cap0.succ(), Some(la));
    assert_eq!(SpaceId::Full.succ(), None);
    assert!("l(c)".parse::<SpaceId>().is_err());
    assert!(ChainParams::parse("2", "1").is_err());
    assert_eq!(chain().resolve(SpaceId::Cap(Param::B)), Space::Cap(rat(2, 1)));
}

#[test]
fn geometric_lies_in_smooth_space() {
    let g = unit(TailClass::GeomInPosition { rho: rat(1, 2) }, IndexSet::naturals());
    assert!(is_in(&Space::AInf, &g));
    assert!(!is_in(&Space::C00, &g));
    // Spot check: n^3 2^-n < 1 for n >= 10.
    for n in 10u64..60 {
        let v = g.value_at(&n.into()).as_scalar().unwrap().re;
        assert!(v * rat((n * n * n) as i64, 1) < rat(1, 1));
    }
}

#[test]
fn constant_and_growth() {
    let one = unit(TailClass::Constant, IndexSet::naturals());
    assert!(is_in(&Space::Linf, &one));
    assert!(!is_in(&Space::C0, &one));
    let g = unit(TailClass::GeomInPositionGrowth { rho: rat(2, 1) }, IndexSet::naturals());
    assert!(!is_in(&Space::H, &g));
    assert!(is_in(&Space::Full, &g));
    for n in 0u64..20 {
        let v = g.value_at(&n.into()).as_scalar().unwrap().re;
        assert_eq!(v, Rational::from_integer(num_bigint::BigInt::from(1u64 << n)));
    }
}

#[test]
fn harmonic_on_evens() {
    let x = unit(TailClass::PowerInRank { alpha: Rational::one() }, IndexSet::evens());
    let v = Space::Lp(rat(1, 1)).member(&x).unwrap();
    assert!(!v.is_in());
    let Reason::Series { verdict: SeriesVerdict::Divergent { schedule }, .. } = &v.reason else {
        panic!("{v:?}")
    };
    for m in [rat(1, 1), rat(3, 1)] {
        assert!(schedule.partial_sum(&x, &m, 32).unwrap().certainly_gt(&m));
    }
    assert!(is_in(&Space::Lp(rat(2, 1)), &x));
    assert!(is_in(&Space::Cap(rat(1, 1)), &x));
    assert!(!is_in(&Space::Cap(rat(1, 2)), &x));
}

#[test]
fn cap_exclusion_carries_a_schedule() {
    let x = unit(TailClass::LogReciprocalRank, IndexSet::naturals());
    let v = Space::Cap(rat(2, 1)).member(&x).unwrap();
    let Reason::CapDivergence { q, verdict: SeriesVerdict::Divergent { schedule }, .. } = &v.reason else {
        panic!("{v:?}")
    };
    assert!(q > &rat(2, 1));
    for m in [rat(1, 1), rat(3, 1)] {
        assert!(schedule.partial_sum(&x, &m, 32).unwrap().certainly_gt(&m));
    }
}

#[test]
fn critical_exponents_match_series_bounds() {
    let classes = [
        TailClass::GeomInPosition { rho: rat(2, 3) },
        TailClass::PowerInRank { alpha: rat(1, 2) },
        TailClass::PowerInRank { alpha: rat(3, 1) },
        TailClass::ReciprocalPosition,
        TailClass::LogReciprocalRank,
        TailClass::Constant,
    ];
    let support = IndexSet::sparsified(&IndexSet::naturals()).unwrap();
    for class in classes {
        let x = unit(class.clone(), support.clone());
        let crit = membership::critical_exponent(&class);
        for q in [rat(1, 5), rat(1, 3), rat(1, 2), rat(1, 1), rat(2, 1), rat(5, 2), rat(4, 1)] {
            let converges = matches!(
                x.series_tail_bound(&q, &Index::zero()).unwrap(),
                SeriesVerdict::ConvergentWithBound { .. }
            );
            let predicted = crit.as_ref().is_some_and(|c| &q > c);
            assert_eq!(converges, predicted, "{class:?} at q = {q}");
        }
    }
}

#[test]
fn metric_examples() {
    let tol = rat(1, 1 << 20);
    let e0 = SymbolicSequence::basis(0u64);
    let zero = SymbolicSequence::zero();
    let d = metric(&Space::Lp(rat(2, 1)), &e0, &zero, &tol).unwrap();
    assert!(d.contains(&rat(1, 1)) && d.width() <= tol);

    let x = SymbolicSequence::finite([(Index::from(0u64), Scalar::real(rat(1, 4))), (1u64.into(), Scalar::real(rat(1, 4)))]);
    let d = metric(&Space::Lp(rat(1, 2)), &x, &zero, &tol).unwrap();
    assert!(d.contains(&rat(1, 1)) && d.width() <= tol);

    let d = metric(&Space::Cap(rat(1, 1)), &e0, &zero, &tol).unwrap();
    assert!(d.contains(&rat(1, 2)) && d.width() <= tol, "{d}");
}

#[test]
fn metric_rejects_non_members() {
    let one = unit(TailClass::Constant, IndexSet::naturals());
    let err = metric(&Space::C0, &one, &SymbolicSequence::zero(), &rat(1, 100)).unwrap_err();
    assert!(matches!(err, Error::NotInSpace { .. }));
}

#[test]
fn metrics_on_infinite_supports() {
    let tol = rat(1, 1 << 16);
    let g = unit(TailClass::GeomInPosition { rho: rat(1, 2) }, IndexSet::naturals());
    let zero = SymbolicSequence::zero();
    // ℓ^1: Σ 2^-n = 2.
    assert!(metric(&Space::Lp(rat(1, 1)), &g, &zero, &tol).unwrap().contains(&rat(2, 1)));
    assert!(metric(&Space::Linf, &g, &zero, &tol).unwrap().contains(&rat(1, 1)));
    // Product metric: Σ 2^-n · 2^-n/(1 + 2^-n), by floating point.
    let oracle: f64 = (0..60).map(|n| 0.5f64.powi(n) * 0.5f64.powi(n) / (1.0 + 0.5f64.powi(n))).sum();
    let d = metric(&Space::Full, &g, &zero, &tol).unwrap();
    assert!((d.approx() - oracle).abs() < 1e-4 && d.width() <= tol);
    // Majorant metric: Σ_k 2^-k min(1, 1/(1 - r_k/2)) = Σ 2^-k = 1.
    let d = metric(&Space::H, &g, &zero, &tol).unwrap();
    assert!(d.contains(&rat(1, 1)) && d.width() <= tol, "{d}");
    let small = g.scale(&Scalar::real(rat(1, 8)));
    let oracle: f64 = (1..60)
        .map(|k| {
            let r = k as f64 / (k as f64 + 1.0);
            0.5f64.powi(k) * (0.125 / (1.0 - r / 2.0)).min(1.0)
        })
        .sum();
    let d = metric(&Space::H, &small, &zero, &tol).unwrap();
    assert!((d.approx() - oracle).abs() < 1e-4 && d.width() <= tol, "{d} vs {oracle}");
}

#[test]
fn pointwise_examples() {
    let d = CertifiedReal::exact(rat(1, 100));
    let b = pointwise_modulus(&Space::Full, &3u64.into(), &d).unwrap();
    assert_eq!(b.hi(), &rat(2, 23));
    assert_eq!(pointwise_modulus(&Space::Linf, &7u64.into(), &d).unwrap().hi(), &rat(1, 100));
    let q = CertifiedReal::exact(rat(1, 4));
    assert!(pointwise_modulus(&Space::Lp(rat(1, 2)), &0u64.into(), &q).unwrap().contains(&rat(1, 16)));
    let big = CertifiedReal::exact(rat(1, 2));
    assert!(matches!(
        pointwise_modulus(&Space::Full, &3u64.into(), &big),
        Err(Error::TooCoarse(_))
    ));
}

#[test]
fn shrinking_blocks_in_cap_one() {
    // x_m = (1/m) 1_[0,m): d^1 = 1, d^q -> 0 for q > 1, δ^1 -> 0.
    let tol = rat(1, 1 << 12);
    let zero = SymbolicSequence::zero();
    let block = |m: u64| {
        SymbolicSequence::finite((0..m).map(|n| (Index::from(n), Scalar::real(rat(1, m as i64)))))
    };
    let cap1 = Space::Cap(rat(1, 1));
    let mut last = None;
    for m in [4u64, 64, 1024] {
        let x = block(m);
        assert!(metric(&Space::Lp(rat(1, 1)), &x, &zero, &tol).unwrap().contains(&rat(1, 1)));
        for q in [rat(3, 2), rat(2, 1), rat(3, 1)] {
            let d = metric(&Space::Lp(q.clone()), &x, &zero, &tol).unwrap();
            let expect = (m as f64).powf((1.0 - q_f64(&q)) / q_f64(&q));
            assert!((d.approx() - expect).abs() < 1e-3);
        }
        let d = metric(&cap1, &x, &zero, &tol).unwrap();
        if let Some(prev) = last {
            assert!(d.approx() < prev);
        }
        last = Some(d.approx());
    }
}

fn q_f64(q: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap()
}

fn catalog() -> impl Strategy<Value = SymbolicSequence> {
    let class = prop_oneof![
        (1i64..4).prop_map(|d| TailClass::GeomInPosition { rho: rat(1, d + 1) }),
        (1i64..9).prop_map(|n| TailClass::PowerInRank { alpha: rat(n, 4) }),
        Just(TailClass::ReciprocalPosition),
        Just(TailClass::LogReciprocalRank),
        Just(TailClass::Constant),
        Just(TailClass::LinearRank),
        (3i64..5).prop_map(|n| TailClass::GeomInPositionGrowth { rho: rat(n, 2) }),
    ];
    let support = prop_oneof![
        Just(IndexSet::naturals()),
        Just(IndexSet::evens()),
        Just(IndexSet::branch("|01".parse::<BranchId>().unwrap())),
        Just(IndexSet::sparsified(&IndexSet::ray(3u64)).unwrap()),
    ];
    let finite = prop::collection::vec((0u64..12, -4i64..=4), 0..3);
    (prop::option::of((class, support, 1i64..4)), finite).prop_map(|(t, f)| {
        let mut x = SymbolicSequence::finite(f.into_iter().map(|(n, c)| (Index::from(n), Scalar::from_int(c))));
        if let Some((class, support, c)) = t {
            let support = if class == TailClass::ReciprocalPosition {
                IndexSet::sparsified(&support).unwrap()
            } else {
                support
            };
            let t = SymbolicSequence::tail(support, TailTerm::new(class, Scalar::from_int(c))).unwrap();
            x = x.add(&t);
        }
        x
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn membership_is_upward_closed(x in catalog()) {
        let c = chain();
        let verdicts: Vec<bool> = SpaceId::ALL.iter().map(|id| is_in(&c.resolve(*id), &x)).collect();
        for i in 1..verdicts.len() {
            prop_assert!(!verdicts[i - 1] || verdicts[i], "{:?} at {}", verdicts, SpaceId::ALL[i]);
        }
        prop_assert!(verdicts[10]);
    }
}
