#![allow(dead_code)]

use lineable::spaces::{ChainParams, SpaceId};
use lineable::{BranchId, Rational};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value as Json;

pub fn branches(names: &[&str]) -> Vec<BranchId> {
    names.iter().map(|s| s.parse().unwrap()).collect()
}

pub fn tol() -> Rational {
    Rational::new(1.into(), (1u64 << 20).into())
}

pub fn chain() -> ChainParams {
    ChainParams::default()
}

pub fn space(s: &str) -> SpaceId {
    s.parse().unwrap()
}

/// JSON pointers to every scalar leaf.
pub fn leaves(v: &Json) -> Vec<String> {
    fn walk(v: &Json, path: String, out: &mut Vec<String>) {
        match v {
            Json::Object(m) => {
                for (k, x) in m {
                    walk(x, format!("{path}/{}", k.replace('~', "~0").replace('/', "~1")), out);
                }
            }
            Json::Array(a) => {
                for (i, x) in a.iter().enumerate() {
                    walk(x, format!("{path}/{i}"), out);
                }
            }
            _ => out.push(path),
        }
    }
    let mut out = vec![];
    walk(v, String::new(), &mut out);
    out
}

fn bump_string(s: &str) -> String {
    if let Ok(n) = s.parse::<i128>() {
        return (n + 1).to_string();
    }
    if let Some((p, q)) = s.split_once('/') {
        if let (Ok(p), Ok(_)) = (p.parse::<i128>(), q.parse::<u128>()) {
            return format!("{}/{q}", p + 1);
        }
    }
    if let Some(i) = s.rfind(|c: char| c.is_ascii_digit()) {
        let d = s.as_bytes()[i] - b'0';
        let mut t = s.to_string();
        t.replace_range(i..=i, &((d + 1) % 10).to_string());
        return t;
    }
    format!("{s}x")
}

/// Changes the leaf at `pointer`: numbers and numeric strings are
/// incremented, booleans flipped, other strings altered.
pub fn mutate(doc: &mut Json, pointer: &str) {
    let leaf = doc.pointer_mut(pointer).expect("leaf exists");
    *leaf = match leaf.clone() {
        Json::Bool(b) => Json::Bool(!b),
        Json::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => Json::from(u.wrapping_add(1)),
            (_, Some(i)) => Json::from(i + 1),
            _ => Json::from(n.as_f64().unwrap() + 1.0),
        },
        Json::String(s) => Json::String(bump_string(&s)),
        Json::Null => Json::from(1),
        _ => unreachable!("leaves are scalars"),
    };
}

/// Applies `count` independent single-leaf mutations to `text` and
/// returns the pointers whose mutation `accepts` still accepted.
pub fn surviving_mutations(
    text: &str,
    count: usize,
    rng: &mut ChaCha8Rng,
    accepts: impl Fn(&str) -> bool,
) -> Vec<String> {
    let doc: Json = serde_json::from_str(text).unwrap();
    let all = leaves(&doc);
    let mut survivors = vec![];
    for _ in 0..count {
        let p = &all[rng.gen_range(0..all.len())];
        let mut d = doc.clone();
        mutate(&mut d, p);
        if accepts(&serde_json::to_string_pretty(&d).unwrap()) {
            survivors.push(p.clone());
        }
    }
    survivors
}
