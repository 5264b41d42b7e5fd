use super::*;
use crate::scalar::rat;
use crate::sequence::TailClass;
use crate::spaces::{Param, Verdict};
use proptest::prelude::*;
use std::sync::OnceLock;

fn branch(s: &str) -> BranchId {
    s.parse().unwrap()
}

fn family(y: SpaceId, x: SpaceId, branches: &[&str], depth: u64) -> ClosedFamilySpec {
    let ks: Vec<BranchId> = branches.iter().map(|s| branch(s)).collect();
    build_closed_family(&ChainParams::default(), y, x, &ks, depth).unwrap()
}

fn l1_l2() -> &'static ClosedFamilySpec {
    static FAMILY: OnceLock<ClosedFamilySpec> = OnceLock::new();
    FAMILY.get_or_init(|| family(SpaceId::Lp(Param::A), SpaceId::Lp(Param::B), &["|0", "1|0"], 8))
}

fn s(n: i64) -> Scalar {
    Scalar::from_int(n)
}

#[test]
fn constant_witnesses_for_c0_in_linf() {
    let fam = family(SpaceId::C0, SpaceId::Linf, &["|0"], 4);
    assert_eq!(fam.witnesses.len(), 4);
    for w in &fam.witnesses {
        assert_eq!(w.witness.tails()[0].class(), &TailClass::Constant);
        assert!(w.in_x.is_in() && !w.in_y.is_in());
    }
}

#[test]
fn within_branch_supports_are_disjoint() {
    let fam = l1_l2();
    assert_eq!(fam.witnesses.len(), 16);
    for a in &fam.witnesses {
        for n in a.support().unwrap().iter().take(1000) {
            for b in &fam.witnesses {
                if b.branch == a.branch && b.j != a.j {
                    assert!(!b.cell.contains(&n));
                }
            }
        }
    }
    let e = build_closed_family(&ChainParams::default(), SpaceId::C0, SpaceId::Linf, &[branch("|0"), branch("|0")], 2);
    assert!(matches!(e, Err(Error::DuplicateBranch(_))));
}

#[test]
fn extraction_examples() {
    let fam = l1_l2();
    let f = ComboElement::new(0, [(1, s(2)), (2, s(3))]);
    let tr = extract_component(fam, &f, 2).unwrap();
    assert!(tr.holds);
    assert_eq!(tr.restricted, fam.witness(0, 2).unwrap().witness.scale(&s(3)));
    assert!(extract_component(fam, &ComboElement::new(1, [(1, s(1))]), 1).unwrap().holds);
    assert_eq!(extract_component(fam, &f, 3).unwrap_err(), Error::ZeroCoefficient(3));
}

#[test]
fn combo_not_in_y_examples() {
    let fam = l1_l2();
    let tr = certify_combo_not_in_y(fam, &ComboElement::new(0, [(1, s(1)), (2, s(-1))])).unwrap();
    assert!(tr.holds);
    assert_eq!(tr.witness_in_y.verdict, Verdict::Out);
    let seventh = ComboElement::new(1, [(3, Scalar::real(rat(1, 7)))]);
    assert!(certify_combo_not_in_y(fam, &seventh).unwrap().holds);
    assert_eq!(certify_combo_not_in_y(fam, &ComboElement::new(0, [])).unwrap_err(), Error::ZeroElement);
}

#[test]
fn cross_branch_examples() {
    let fam = l1_l2();
    let pair = [ComboElement::new(0, [(1, s(1))]), ComboElement::new(1, [(1, s(1))])];
    let tr = certify_cross_branch_independence(fam, &pair, 0).unwrap();
    assert!(tr.holds);
    assert_eq!(tr.n, Index::from(1u64));
    let alone = certify_cross_branch_independence(fam, &pair[1..], 0).unwrap();
    assert_eq!(alone.n0, fam.witness(1, 1).unwrap().cell.nth(0).unwrap());
    let zero = [ComboElement::new(0, []), pair[1].clone()];
    assert_eq!(certify_cross_branch_independence(fam, &zero, 0).unwrap_err(), Error::ZeroDesignated);
}

#[test]
fn randomized_certificates() {
    let fam = l1_l2();
    let tol = rat(1, 1 << 20);
    for cert in [
        extract_certificate(fam, 4, 1, &tol).unwrap(),
        combo_not_in_y_certificate(fam, 4, 1, &tol).unwrap(),
        cross_independence_certificate(fam, 4, 1, &tol).unwrap(),
        pointwise_convergence_audit(fam, 4, 1, &tol).unwrap(),
    ] {
        assert!(cert.passed, "{}", cert.claim);
        assert_eq!(cert.items.len(), 4);
    }
}

#[test]
fn pointwise_audit_in_three_spaces() {
    for (y, x) in [
        (SpaceId::C0, SpaceId::Linf),
        (SpaceId::Linf, SpaceId::H),
        (SpaceId::H, SpaceId::Full),
    ] {
        let fam = family(y, x, &["|0", "|1"], 4);
        let cert = pointwise_convergence_audit(&fam, 3, 5, &rat(1, 1 << 20)).unwrap();
        assert!(cert.passed, "{x}");
        let bounded = cert.items.iter().any(|i| match i {
            Item::Pointwise(t) => t.checks.iter().any(|c| c.bound.is_some()),
            _ => false,
        });
        assert!(bounded, "{x}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn nonzero_combos_avoid_y(seed in any::<u64>()) {
        let fam = l1_l2();
        for (f, j0) in sample_combos(fam, 3, seed) {
            prop_assert!(certify_combo_not_in_y(fam, &f).unwrap().holds);
            let tr = extract_component(fam, &f, j0).unwrap();
            prop_assert!(tr.holds);
            prop_assert_eq!(&tr.restricted, &tr.expected);
        }
    }
}
