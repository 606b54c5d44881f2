//! System descriptions read from JSON.
//!
//! ```json
//! {
//!   "generators": ["s", "t", "u"],
//!   "commuting": [["s", "u"]],
//!   "q": {"s": 2, "t": 3, "u": 3},
//!   "caps": {"radius": 4, "chambers": 100000}
//! }
//! ```
//!
//! Pairs absent from `commuting` have `m = ∞`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::building::{Building, DEFAULT_CHAMBER_CAP};
use crate::coxeter::{CoxeterSystem, Gen};
use crate::error::{Error, Result};
use crate::graphprod::GraphProduct;

pub const DEFAULT_RADIUS_CAP: usize = 6;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    generators: Vec<String>,
    #[serde(default)]
    commuting: Vec<(String, String)>,
    q: BTreeMap<String, u32>,
    #[serde(default)]
    caps: RawCaps,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawCaps {
    radius: Option<usize>,
    chambers: Option<usize>,
}

/// A validated system description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub generators: Vec<String>,
    /// Index pairs `(a, b)` with `a < b`, sorted.
    pub commuting: Vec<(Gen, Gen)>,
    /// `q_s` in generator order.
    pub q: Vec<u32>,
    pub radius_cap: usize,
    pub chamber_cap: usize,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

/// Position of the `nth` occurrence of `"name"` at or after `from`.
fn locate(text: &str, name: &str, from: usize, nth: usize) -> (usize, usize) {
    let needle = format!("\"{name}\"");
    let mut at = from.min(text.len());
    for _ in 0..nth {
        match text[at..].find(&needle) {
            Some(i) => at += i + needle.len(),
            None => return line_col(text, text.len()),
        }
    }
    match text[at..].find(&needle) {
        Some(i) => line_col(text, at + i),
        None => line_col(text, text.len()),
    }
}

fn section(text: &str, key: &str) -> usize {
    text.find(&format!("\"{key}\"")).unwrap_or(0)
}

fn at((line, col): (usize, usize), msg: String) -> Error {
    Error::Input(format!("line {line}, column {col}: {msg}"))
}

pub fn parse_config(text: &str) -> Result<SystemConfig> {
    let raw: RawConfig = serde_json::from_str(text)
        .map_err(|e| Error::Input(format!("line {}, column {}: {}", e.line(), e.column(), strip_position(&e.to_string()))))?;
    let gens_at = section(text, "generators");
    let mut index: BTreeMap<&str, Gen> = BTreeMap::new();
    for (i, g) in raw.generators.iter().enumerate() {
        if g.is_empty() {
            return Err(at(locate(text, g, gens_at, 0), "empty generator name".into()));
        }
        if index.insert(g, i).is_some() {
            return Err(at(locate(text, g, gens_at, 1), format!("duplicate generator {g:?}")));
        }
    }
    if raw.generators.is_empty() {
        return Err(at(line_col(text, gens_at), "no generators".into()));
    }
    let comm_at = section(text, "commuting");
    let mut pairs: BTreeSet<(Gen, Gen)> = BTreeSet::new();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let lookup = |name: &str, seen: &mut BTreeMap<String, usize>| -> Result<Gen> {
        let nth = seen.entry(name.to_string()).or_default();
        let pos = locate(text, name, comm_at, *nth);
        *nth += 1;
        index.get(name).copied().ok_or_else(|| at(pos, format!("unknown generator {name:?} in commuting pair")))
    };
    for (a, b) in &raw.commuting {
        let (x, y) = (lookup(a, &mut seen)?, lookup(b, &mut seen)?);
        if x == y {
            return Err(at(locate(text, a, comm_at, 0), format!("generator {a:?} paired with itself")));
        }
        if !pairs.insert((x.min(y), x.max(y))) {
            return Err(at(
                locate(text, a, comm_at, seen[a] - 1),
                format!("commuting pair ({a}, {b}) listed twice"),
            ));
        }
    }
    let q_at = section(text, "q");
    let mut q = Vec::with_capacity(raw.generators.len());
    for name in raw.q.keys() {
        if !index.contains_key(name.as_str()) {
            return Err(at(locate(text, name, q_at, 0), format!("parameter for unknown generator {name:?}")));
        }
    }
    for g in &raw.generators {
        let v = *raw.q.get(g).ok_or_else(|| at(line_col(text, q_at), format!("missing parameter for {g:?}")))?;
        if !(2..=255).contains(&v) {
            return Err(at(locate(text, g, q_at, 0), format!("parameter for {g:?} must lie in 2..=255, got {v}")));
        }
        q.push(v);
    }
    Ok(SystemConfig {
        generators: raw.generators,
        commuting: pairs.into_iter().collect(),
        q,
        radius_cap: raw.caps.radius.unwrap_or(DEFAULT_RADIUS_CAP),
        chamber_cap: raw.caps.chambers.unwrap_or(DEFAULT_CHAMBER_CAP),
    })
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

impl SystemConfig {
    pub fn system(&self) -> Result<CoxeterSystem> {
        CoxeterSystem::new(&self.generators, &self.commuting)
    }

    pub fn building(&self) -> Result<Building> {
        Ok(Building::new(GraphProduct::new(self.system()?, self.q.clone())?)?.with_cap(self.chamber_cap))
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}
