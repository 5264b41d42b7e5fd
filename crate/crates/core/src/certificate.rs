//! The `cert-v1` certificate format and deterministic, atomic file output.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::genericity::{DenseFamilySpec, DensityTrace, NotInYTrace, SeparationTrace};
use crate::scalar::{format_rational, parse_rational, Rational};
use crate::spaceability::{ClosedFamilySpec, ComboNotInYTrace, CrossTrace, ExtractTrace, PointwiseTrace};
use crate::spaces::{metric_description, ChainParams, SpaceId};

pub const SCHEMA: &str = "cert-v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClaimKind {
    Independence,
    NotInY,
    Density,
    Maximality,
    Extract,
    ComboNotInY,
    CrossIndependence,
    Pointwise,
}

impl ClaimKind {
    pub fn uses_tolerance(self) -> bool {
        matches!(self, ClaimKind::Density | ClaimKind::Pointwise)
    }
}

impl fmt::Display for ClaimKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string tag"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Family {
    Dense(DenseFamilySpec),
    Closed(ClosedFamilySpec),
}

impl Family {
    pub fn chain(&self) -> &ChainParams {
        match self {
            Family::Dense(f) => &f.chain,
            Family::Closed(f) => &f.chain,
        }
    }

    pub fn digest(&self) -> String {
        let compact = serde_json::to_vec(self).expect("serializable");
        let hash = Sha256::digest(&compact);
        let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
        format!("sha256:{hex}")
    }

    pub fn pair(&self) -> (SpaceId, SpaceId) {
        match self {
            Family::Dense(f) => (f.y, f.x),
            Family::Closed(f) => (f.y, f.x),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum Item {
    Separation(SeparationTrace),
    NotInY(Box<NotInYTrace>),
    Density(DensityTrace),
    Extract(Box<ExtractTrace>),
    ComboNotInY(Box<ComboNotInYTrace>),
    CrossIndependence(CrossTrace),
    Pointwise(PointwiseTrace),
}

impl Item {
    /// The `step` tag.
    pub fn step(&self) -> &'static str {
        match self {
            Item::Separation(_) => "separation",
            Item::NotInY(_) => "not_in_y",
            Item::Density(_) => "density",
            Item::Extract(_) => "extract",
            Item::ComboNotInY(_) => "combo_not_in_y",
            Item::CrossIndependence(_) => "cross_independence",
            Item::Pointwise(_) => "pointwise",
        }
    }

    pub fn holds(&self) -> bool {
        match self {
            Item::Separation(t) => t.holds,
            Item::NotInY(t) => t.holds,
            Item::Density(t) => t.holds,
            Item::Extract(t) => t.holds,
            Item::ComboNotInY(t) => t.holds,
            Item::CrossIndependence(t) => t.holds,
            Item::Pointwise(t) => t.holds,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: String,
    pub claim: ClaimKind,
    pub seed: u64,
    pub trials: u64,
    /// Metric tolerance, for the claims that compute distances.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_rational")]
    pub tol: Option<Rational>,
    pub family: Family,
    /// SHA-256 of the compact JSON of `family`, binding fields no trace reads.
    pub family_digest: String,
    pub notes: Vec<String>,
    pub items: Vec<Item>,
    pub passed: bool,
}

impl Certificate {
    pub fn new(claim: ClaimKind, seed: u64, trials: u64, tol: &Rational, family: Family, items: Vec<Item>) -> Self {
        let notes = canonical_notes(claim, &family);
        let passed = items.iter().all(Item::holds);
        let family_digest = family.digest();
        Certificate {
            schema: SCHEMA.into(),
            claim,
            seed,
            trials,
            tol: claim.uses_tolerance().then(|| tol.clone()),
            family,
            family_digest,
            notes,
            items,
            passed,
        }
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    /// Parses a certificate, rejecting other schema versions before
    /// looking at the body.
    pub fn from_json(text: &str) -> Result<Self, Error> {
        let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
        match raw.get("schema").and_then(|s| s.as_str()) {
            Some(SCHEMA) => {}
            Some(other) => return Err(Error::Schema(other.into())),
            None => return Err(Error::Schema("<missing>".into())),
        }
        serde_json::from_value(raw).map_err(|e| Error::Json(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self, Error> {
        Certificate::from_json(&read_text(path)?)
    }
}

/// The fixed prose a certificate carries for its claim.
pub fn canonical_notes(claim: ClaimKind, family: &Family) -> Vec<String> {
    let chain = family.chain();
    let (y, x) = family.pair();
    let mut notes = vec![];
    for (role, id) in [("X", x), ("Y", y)] {
        let space = chain.resolve(id);
        notes.push(format!("{role} = {space}: {}", metric_description(&space)));
    }
    let prose: &[&str] = match claim {
        ClaimKind::Independence => &[
            "At n0 every term but the leading one of branch k0 vanishes: enumerated \
             sequences end before N1 and other branches leave the cell before N2.",
        ],
        ClaimKind::NotInY | ClaimKind::Maximality => &[
            "If v were in Y then so would be v restricted to B, since c00 is contained in Y \
             and Y is a vector space; by the restriction identity that is a nonzero multiple \
             of the witness tail beyond N, whose verdict in Y is Out.",
        ],
        ClaimKind::Density => &[
            "d_X(f_j^k, x_j) < 1/j for all j, and x_j runs through the finitely supported \
             sequences with rational coordinates, a dense subset of X; each F^k is therefore \
             dense. Topological density is a corollary, not a finite check.",
        ],
        ClaimKind::Extract | ClaimKind::ComboNotInY | ClaimKind::CrossIndependence => &[
            "Claims cover finite combinations of the witnesses. Closure points are reached \
             through convergence in X, which implies pointwise convergence, so each \
             extracted coefficient passes to the limit.",
        ],
        ClaimKind::Pointwise => &[
            "Each check bounds |x(n) - y(n)| by the pointwise modulus of X at the \
             certified distance; entries without a bound are vacuous at that distance.",
        ],
    };
    notes.extend(prose.iter().map(|s| s.to_string()));
    if claim == ClaimKind::Maximality {
        notes.push(
            "Maximality: the branches of the binary tree form a continuum of almost disjoint \
             sets, so the independent family spans a subspace of dimension c = dim X. \
             Recorded as a corollary, not checked at runtime."
                .into(),
        );
    }
    if claim == ClaimKind::ComboNotInY {
        notes.push(
            "f restricted to A_j0^k equals c_j0 y_j0^k; Y is closed under scalar \
             multiplication and the witness is Out of Y, so f is Out of Y."
                .into(),
        );
    }
    notes
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn read_text(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Error> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::Json(format!("{}: {e}", path.display())))
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), Error> {
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::Io(format!("{}: not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(contents.as_bytes()).map_err(io)?;
    f.sync_all().map_err(io)?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io(e)
    })
}

mod opt_rational {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match q {
            Some(q) => s.serialize_some(&format_rational(q)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|t| parse_rational(&t).map_err(serde::de::Error::custom))
            .transpose()
    }
}
