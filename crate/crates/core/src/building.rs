//! The regular right-angled building with parameters `q_s`, realized as a
//! chamber system whose chambers are graph-product elements.

use std::collections::{BTreeSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::clump::Clump;
use crate::coxeter::{CoxeterSystem, Gen, GenSet, WElement};
use crate::error::{Error, Result};
use crate::graphprod::{GraphProduct, ProductElement};

pub type Chamber = ProductElement;

/// Default cap on the number of chambers any enumeration may produce.
pub const DEFAULT_CHAMBER_CAP: usize = 200_000;

/// A spherical residue `rep · G_T`, keyed by its shortest element.
///
/// With `|T| = 1` this is a panel (mirror); with `T = ∅` it is a chamber,
/// viewed as the center vertex of that chamber.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Face {
    pub ty: GenSet,
    pub rep: ProductElement,
}

impl Face {
    /// Generator of a panel.
    pub fn panel_type(&self) -> Option<Gen> {
        (self.ty.len() == 1).then(|| self.ty.iter().next().unwrap())
    }
}

/// A sequence of pairwise adjacent chambers and the adjacency types used.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Gallery {
    pub chambers: Vec<Chamber>,
    pub type_word: Vec<Gen>,
}

/// A saved ball: its chambers in canonical order and the hash of the
/// configuration that produced it. The JSON form is byte-stable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallCache {
    pub config_sha256: String,
    pub radius: usize,
    pub chambers: Vec<Chamber>,
}

impl BallCache {
    pub fn build(b: &Building, radius: usize, config_sha256: &str) -> Result<Self> {
        let chambers = b.ball(radius)?.chambers().iter().cloned().collect();
        Ok(BallCache { config_sha256: config_sha256.to_string(), radius, chambers })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("ball caches serialize") + "\n"
    }

    /// Parses a cache and checks that it is sorted, free of duplicates,
    /// contains the base chamber, and holds only normal forms of `b`.
    pub fn from_json(b: &Building, text: &str) -> Result<Self> {
        let cache: BallCache =
            serde_json::from_str(text).map_err(|e| Error::Input(format!("ball cache: {e}")))?;
        if !cache.chambers.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Input("ball cache: chambers not in canonical order".into()));
        }
        if cache.chambers.first() != Some(&b.base()) {
            return Err(Error::Input("ball cache: base chamber missing".into()));
        }
        for c in &cache.chambers {
            let word: Vec<(Gen, u32)> = c.syllables().collect();
            if word.iter().any(|&(s, _)| s >= b.rank()) || b.gp.from_syllables(&word)? != *c {
                return Err(Error::Input(format!("ball cache: {} is not in normal form", b.gp.show(c))));
            }
        }
        Ok(cache)
    }

    pub fn clump(&self) -> Clump {
        Clump::new(self.chambers.iter().cloned().collect())
    }

    /// Reads `path` when it holds the ball of this radius for the same
    /// configuration; otherwise enumerates the ball and writes `path`.
    /// The flag reports whether the file was reused.
    pub fn load_or_build(b: &Building, radius: usize, config_sha256: &str, path: &Path) -> Result<(Self, bool)> {
        if let Ok(text) = std::fs::read_to_string(path) {
            let cache = BallCache::from_json(b, &text)?;
            if cache.config_sha256 == config_sha256 && cache.radius == radius {
                return Ok((cache, true));
            }
        }
        let cache = BallCache::build(b, radius, config_sha256)?;
        std::fs::write(path, cache.to_json()).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        Ok((cache, false))
    }
}

#[derive(Clone, Debug)]
pub struct Building {
    gp: GraphProduct,
    spherical: Vec<GenSet>,
    maximal: Vec<GenSet>,
    pub chamber_cap: usize,
}

impl Building {
    pub fn new(gp: GraphProduct) -> Result<Self> {
        let spherical = gp.sys().spherical_poset()?.subsets;
        let maximal = gp.sys().maximal_spherical();
        Ok(Building { gp, spherical, maximal, chamber_cap: DEFAULT_CHAMBER_CAP })
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.chamber_cap = cap;
        self
    }

    pub fn gp(&self) -> &GraphProduct {
        &self.gp
    }

    pub fn sys(&self) -> &CoxeterSystem {
        self.gp.sys()
    }

    pub fn rank(&self) -> usize {
        self.gp.rank()
    }

    pub fn q(&self, s: Gen) -> u32 {
        self.gp.q(s)
    }

    /// Every spherical subset including `∅`, ordered by size then bitmask.
    pub fn spherical_subsets(&self) -> &[GenSet] {
        &self.spherical
    }

    pub fn maximal_spherical(&self) -> &[GenSet] {
        &self.maximal
    }

    pub fn base(&self) -> Chamber {
        ProductElement::identity()
    }

    /// `δ(a, b) = π(a⁻¹ b)`.
    pub fn w_distance(&self, a: &Chamber, b: &Chamber) -> WElement {
        self.gp.projection_to_w(&self.gp.quotient(a, b))
    }

    pub fn s_adjacent(&self, a: &Chamber, b: &Chamber, s: Gen) -> bool {
        let x = self.gp.quotient(a, b);
        x.len() == 1 && x.syllables().next().unwrap().0 == s
    }

    /// The `q_s` chambers of the `s`-panel containing `a`.
    pub fn panel(&self, a: &Chamber, s: Gen) -> Vec<Chamber> {
        (0..self.q(s)).map(|e| self.gp.mul_gen(a, s, e)).collect()
    }

    /// Face of type `t` containing `a`; `t` must be spherical.
    pub fn face(&self, a: &Chamber, t: GenSet) -> Result<Face> {
        if !self.sys().is_spherical(t) {
            return Err(Error::Domain(format!("type {t:?} is not spherical")));
        }
        Ok(self.face_of(a, t))
    }

    /// Unchecked form of [`Building::face`].
    pub fn face_of(&self, a: &Chamber, t: GenSet) -> Face {
        Face { ty: t, rep: self.gp.strip_right(a, t) }
    }

    pub fn panel_of(&self, a: &Chamber, s: Gen) -> Face {
        self.face_of(a, GenSet::single(s))
    }

    /// All `∏_{t∈T} q_t` chambers of a face.
    pub fn face_chambers(&self, f: &Face) -> Vec<Chamber> {
        self.gp.subgroup_elements(f.ty).iter().map(|x| self.gp.multiply(&f.rep, x)).collect()
    }

    /// True iff the two chambers lie in a common spherical residue.
    pub fn intersects(&self, a: &Chamber, b: &Chamber) -> bool {
        self.sys().is_spherical(self.gp.support(&self.gp.quotient(a, b)))
    }

    /// `Y_0 = {1}`, and `Y_n` adds every chamber sharing a face with `Y_{n-1}`.
    pub fn ball(&self, n: usize) -> Result<Clump> {
        Ok(Clump::new(self.ball_layers(n)?.into_iter().flatten().collect()))
    }

    /// The chambers of `Y_k − Y_{k−1}` for `k = 0..=n`, each layer sorted.
    pub fn ball_layers(&self, n: usize) -> Result<Vec<Vec<Chamber>>> {
        let mut seen: BTreeSet<Chamber> = BTreeSet::from([self.base()]);
        let mut layers = vec![vec![self.base()]];
        for _ in 0..n {
            let mut next = BTreeSet::new();
            for psi in layers.last().unwrap() {
                for &t in &self.maximal {
                    for c in self.face_chambers(&self.face_of(psi, t)) {
                        if !seen.contains(&c) {
                            seen.insert(c.clone());
                            next.insert(c);
                            if seen.len() > self.chamber_cap {
                                return Err(Error::Size {
                                    what: "ball chambers".into(),
                                    cap: self.chamber_cap,
                                    reached: seen.len(),
                                });
                            }
                        }
                    }
                }
            }
            layers.push(next.into_iter().collect());
        }
        Ok(layers)
    }

    /// The gallery following the syllables of `a⁻¹ b`.
    pub fn minimal_gallery(&self, a: &Chamber, b: &Chamber) -> Gallery {
        let x = self.gp.quotient(a, b);
        let mut chambers = vec![a.clone()];
        let mut type_word = Vec::new();
        for (s, e) in x.syllables() {
            let next = self.gp.mul_gen(chambers.last().unwrap(), s, e);
            chambers.push(next);
            type_word.push(s);
        }
        Gallery { chambers, type_word }
    }

    /// Some shortest gallery inside `set`, found by breadth-first search.
    pub fn gallery_within(&self, set: &BTreeSet<Chamber>, a: &Chamber, b: &Chamber) -> Option<Gallery> {
        let mut prev: std::collections::HashMap<Chamber, (Chamber, Gen)> = Default::default();
        let mut queue = VecDeque::from([a.clone()]);
        let mut seen: BTreeSet<Chamber> = BTreeSet::from([a.clone()]);
        while let Some(c) = queue.pop_front() {
            if &c == b {
                let mut chambers = vec![c.clone()];
                let mut type_word = Vec::new();
                let mut cur = c;
                while let Some((p, s)) = prev.get(&cur) {
                    chambers.push(p.clone());
                    type_word.push(*s);
                    cur = p.clone();
                }
                chambers.reverse();
                type_word.reverse();
                return Some(Gallery { chambers, type_word });
            }
            for s in 0..self.rank() {
                for d in self.panel(&c, s) {
                    if set.contains(&d) && !seen.contains(&d) {
                        seen.insert(d.clone());
                        prev.insert(d.clone(), (c.clone(), s));
                        queue.push_back(d);
                    }
                }
            }
        }
        None
    }

    /// Order of the whole building when `W` is finite.
    pub fn finite_size(&self) -> Option<usize> {
        self.sys().is_finite().then(|| self.gp.order(self.sys().all()))
    }
}
