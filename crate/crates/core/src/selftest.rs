//! Desk-scale invariant suite behind `lineable selftest`.

use num_bigint::BigUint;
use serde::Serialize;

use crate::certificate::{Certificate, Item};
use crate::enumeration::{encode_rational_c00, enumerate_rational_c00};
use crate::error::Error;
use crate::families::{branch_intersection, node_to_branch, pair, unpair, BranchId, Index, IndexSet};
use crate::genericity::{build_dense_family, certify_density, certify_independence, certify_union_span, not_in_y_certificate};
use crate::recheck::recheck;
use crate::scalar::Rational;
use crate::spaceability::{
    build_closed_family, combo_not_in_y_certificate, cross_independence_certificate, extract_certificate,
    pointwise_convergence_audit,
};
use crate::spaces::{ChainParams, Param, SpaceId};
use crate::witnesses::witness_report;

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelftestReport {
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
}

type Outcome = Result<String, String>;

fn err(e: Error) -> String {
    e.to_string()
}

fn branches(names: &[&str]) -> Vec<BranchId> {
    names.iter().map(|s| s.parse().expect("literal branch")).collect()
}

fn chain_order() -> Outcome {
    let pairs = SpaceId::pairs().count();
    if pairs != 55 {
        return Err(format!("{pairs} chain pairs, expected 55"));
    }
    Ok("11 spaces, 55 strict pairs".into())
}

fn pairing_round_trip() -> Outcome {
    for r in 0..10_000u64 {
        let (i, j) = unpair(r);
        if pair(i, j) != r {
            return Err(format!("pair(unpair({r})) = {}", pair(i, j)));
        }
    }
    Ok("ranks below 10^4".into())
}

fn branch_coverage() -> Outcome {
    for n in 0..2_000u64 {
        let k = node_to_branch(&BigUint::from(n));
        if !IndexSet::branch(k.clone()).contains(&Index::from(n)) {
            return Err(format!("vertex {n} not on its branch {k}"));
        }
    }
    let ks = branches(&["|0", "|1", "1|0", "0|01", "01|1"]);
    for (i, k) in ks.iter().enumerate() {
        for l in &ks[i + 1..] {
            let shared = branch_intersection(k, l).map_err(err)?;
            let expected = k.lcp(l).map_or(0, |d| d + 1);
            if shared.len() as u64 != expected {
                return Err(format!("{k} and {l} share {} vertices, expected {expected}", shared.len()));
            }
        }
    }
    Ok("vertices below 2000; 10 branch intersections".into())
}

fn enumeration_bijection() -> Outcome {
    for j in 1..=2_000u64 {
        let x = enumerate_rational_c00(j).map_err(err)?;
        let back = encode_rational_c00(&x).map_err(err)?;
        if back != BigUint::from(j) {
            return Err(format!("code {j} decodes and re-encodes to {back}"));
        }
    }
    Ok("codes 1 to 2000".into())
}

fn witnesses_separate(chain: &ChainParams) -> Outcome {
    let support = IndexSet::cell(&IndexSet::branch("|0".parse().expect("literal")), 1).map_err(err)?;
    for (y, x) in SpaceId::pairs() {
        let r = witness_report(chain, y, x, &support).map_err(err)?;
        if !r.in_x.is_in() || r.in_y.is_in() {
            return Err(format!("witness for ({y}, {x}) misclassified"));
        }
    }
    Ok("all 55 pairs".into())
}

fn rechecked(cert: Certificate) -> Result<(), String> {
    if !cert.passed {
        return Err(format!("{} certificate failed", cert.claim));
    }
    recheck(&cert).map_err(|e| format!("{}: {e}", cert.claim))
}

fn dense_certificates(chain: &ChainParams, tol: &Rational) -> Outcome {
    let (y, x) = (SpaceId::Lp(Param::A), SpaceId::Lp(Param::B));
    let fam = build_dense_family(chain, y, x, &branches(&["|0", "1|0", "|1"]), 4).map_err(err)?;
    rechecked(certify_density(&fam, 4, tol).map_err(err)?)?;
    rechecked(certify_independence(&fam, 10, 1, tol).map_err(err)?)?;
    rechecked(not_in_y_certificate(&fam, 10, 2, tol).map_err(err)?)?;
    rechecked(certify_union_span(&fam, 10, 3, tol).map_err(err)?)?;
    Ok("(l(a), l(b)), 3 branches, depth 4".into())
}

fn closed_certificates(chain: &ChainParams, tol: &Rational) -> Outcome {
    let fam = build_closed_family(chain, SpaceId::C0, SpaceId::Linf, &branches(&["|0", "|1", "0|01"]), 4).map_err(err)?;
    rechecked(extract_certificate(&fam, 10, 4, tol).map_err(err)?)?;
    rechecked(combo_not_in_y_certificate(&fam, 10, 5, tol).map_err(err)?)?;
    rechecked(cross_independence_certificate(&fam, 10, 6, tol).map_err(err)?)?;
    rechecked(pointwise_convergence_audit(&fam, 10, 7, tol).map_err(err)?)?;
    Ok("(c0, linf), 3 branches, depth 4".into())
}

fn recheck_rejects_tampering(chain: &ChainParams, tol: &Rational) -> Outcome {
    let fam = build_dense_family(chain, SpaceId::C00, SpaceId::AInf, &branches(&["|0", "|1"]), 3).map_err(err)?;
    let mut cert = certify_independence(&fam, 2, 8, tol).map_err(err)?;
    let Some(Item::Separation(t)) = cert.items.first_mut() else {
        return Err("no separation step".into());
    };
    t.n0 = t.n0.add_u64(1);
    match recheck(&cert) {
        Err(e) => Ok(format!("altered n0 rejected at {}", e.location)),
        Ok(()) => Err("altered n0 accepted".into()),
    }
}

/// Runs every check; a failing check does not stop the others.
pub fn run(chain: &ChainParams, tol: &Rational) -> SelftestReport {
    let suite: Vec<(&'static str, Box<dyn Fn() -> Outcome>)> = vec![
        ("chain-order", Box::new(chain_order)),
        ("pairing", Box::new(pairing_round_trip)),
        ("branches", Box::new(branch_coverage)),
        ("enumeration", Box::new(enumeration_bijection)),
        ("witnesses", Box::new(|| witnesses_separate(chain))),
        ("dense-certificates", Box::new(|| dense_certificates(chain, tol))),
        ("closed-certificates", Box::new(|| closed_certificates(chain, tol))),
        ("recheck-tampering", Box::new(|| recheck_rejects_tampering(chain, tol))),
    ];
    let checks: Vec<CheckOutcome> = suite
        .into_iter()
        .map(|(name, f)| match f() {
            Ok(detail) => CheckOutcome { name, passed: true, detail },
            Err(detail) => CheckOutcome { name, passed: false, detail },
        })
        .collect();
    let passed = checks.iter().all(|c| c.passed);
    SelftestReport { checks, passed }
}
