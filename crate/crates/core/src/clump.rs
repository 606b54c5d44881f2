//! Clumps: finite gallery-connected chamber sets, their boundary mirrors and
//! sides, unfoldings along sides, and the sheets an unfolding creates.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::building::{Building, Chamber, Face};
use crate::coxeter::{Gen, GenSet};
use crate::error::{Error, Result};

/// A finite set of chambers. Boundary data is derived on demand and cached.
///
/// The caches assume every query passes the same [`Building`].
#[derive(Clone, Debug, Default)]
pub struct Clump {
    chambers: BTreeSet<Chamber>,
    boundary: OnceLock<BTreeSet<Face>>,
    sides: OnceLock<Vec<Side>>,
}

impl PartialEq for Clump {
    fn eq(&self, other: &Self) -> bool {
        self.chambers == other.chambers
    }
}

impl Eq for Clump {}

/// What kind of object a chamber set is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClumpKind {
    /// Gallery-connected with at least one boundary mirror.
    Proper,
    /// The entire (finite) building: no boundary, so not a clump proper.
    WholeBuilding,
}

/// A maximal type-connected set of boundary mirrors of one type.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Side {
    pub ty: Gen,
    /// Sorted panels of type `{ty}`.
    pub mirrors: Vec<Face>,
}

/// The new chambers of an unfolding, split into sheets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheetPartition {
    pub ty: Gen,
    pub new_chambers: Vec<Chamber>,
    /// Each block sorted; blocks ordered by their least chamber.
    pub blocks: Vec<Vec<Chamber>>,
}

impl SheetPartition {
    pub fn sheet_of(&self, c: &Chamber) -> Option<usize> {
        self.blocks.iter().position(|b| b.binary_search(c).is_ok())
    }
}

impl Clump {
    pub fn new(chambers: BTreeSet<Chamber>) -> Self {
        Clump { chambers, ..Default::default() }
    }

    pub fn base() -> Self {
        Clump::new(BTreeSet::from([Chamber::identity()]))
    }

    pub fn chambers(&self) -> &BTreeSet<Chamber> {
        &self.chambers
    }

    pub fn contains(&self, c: &Chamber) -> bool {
        self.chambers.contains(c)
    }

    pub fn len(&self) -> usize {
        self.chambers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chambers.is_empty()
    }

    /// Panels containing exactly one chamber of the clump.
    pub fn boundary(&self, b: &Building) -> &BTreeSet<Face> {
        self.boundary.get_or_init(|| {
            let mut count: HashMap<Face, u32> = HashMap::new();
            for c in &self.chambers {
                for s in 0..b.rank() {
                    *count.entry(b.panel_of(c, s)).or_default() += 1;
                }
            }
            count.into_iter().filter(|&(_, n)| n == 1).map(|(f, _)| f).collect()
        })
    }

    /// Sides in canonical order: by type, then least mirror.
    pub fn sides(&self, b: &Building) -> &[Side] {
        self.sides.get_or_init(|| compute_sides(b, self.boundary(b)))
    }

    /// Chambers of the clump lying in a face.
    pub fn chambers_in(&self, b: &Building, f: &Face) -> Vec<Chamber> {
        b.face_chambers(f).into_iter().filter(|c| self.contains(c)).collect()
    }

    /// Checks gallery-connectedness and classifies the set.
    pub fn check(&self, b: &Building) -> Result<ClumpKind> {
        if self.is_empty() {
            return Err(Error::Domain("empty chamber set".into()));
        }
        let start = self.chambers.iter().next().unwrap();
        let mut seen: BTreeSet<&Chamber> = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start.clone()]);
        while let Some(c) = queue.pop_front() {
            for s in 0..b.rank() {
                for d in b.panel(&c, s) {
                    if let Some(d) = self.chambers.get(&d) {
                        if seen.insert(d) {
                            queue.push_back(d.clone());
                        }
                    }
                }
            }
        }
        if seen.len() != self.len() {
            return Err(Error::Domain("chamber set is not gallery-connected".into()));
        }
        if !self.boundary(b).is_empty() {
            Ok(ClumpKind::Proper)
        } else if b.finite_size() == Some(self.len()) {
            Ok(ClumpKind::WholeBuilding)
        } else {
            Err(Error::Domain("chamber set has no boundary mirror".into()))
        }
    }
}

fn compute_sides(b: &Building, boundary: &BTreeSet<Face>) -> Vec<Side> {
    let mirrors: Vec<&Face> = boundary.iter().collect();
    let mut uf = UnionFind::new(mirrors.len());
    let mut by_residue: HashMap<(Gen, Face), usize> = HashMap::new();
    for (i, m) in mirrors.iter().enumerate() {
        let u = m.panel_type().expect("boundary faces are panels");
        for s in b.sys().commuting_with(u).iter() {
            let key = (u, b.face_of(&m.rep, GenSet::single(u).with(s)));
            match by_residue.get(&key) {
                Some(&j) => uf.union(i, j),
                None => {
                    by_residue.insert(key, i);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<Face>> = BTreeMap::new();
    for (i, m) in mirrors.iter().enumerate() {
        groups.entry(uf.find(i)).or_default().push((*m).clone());
    }
    let mut sides: Vec<Side> = groups
        .into_values()
        .map(|mut ms| {
            ms.sort();
            Side { ty: ms[0].panel_type().unwrap(), mirrors: ms }
        })
        .collect();
    sides.sort_by(|a, b| (a.ty, &a.mirrors[0]).cmp(&(b.ty, &b.mirrors[0])));
    sides
}

/// Panels `g G_s` containing exactly one chamber of `c`.
pub fn boundary_mirrors(b: &Building, c: &Clump) -> BTreeSet<Face> {
    c.boundary(b).clone()
}

pub fn sides(b: &Building, c: &Clump) -> Vec<Side> {
    c.sides(b).to_vec()
}

fn incident(b: &Building, c: &Clump, sigma: &Face) -> Result<Vec<Chamber>> {
    let inside = c.chambers_in(b, sigma);
    if inside.is_empty() {
        return Err(Error::Domain(format!("face {sigma:?} meets no chamber of the clump")));
    }
    Ok(inside)
}

/// `{s ∈ type(σ) : some s-panel through σ of a clump chamber lies in ∂C}`.
pub fn boundary_type(b: &Building, c: &Clump, sigma: &Face) -> Result<GenSet> {
    let inside = incident(b, c, sigma)?;
    let bd = c.boundary(b);
    Ok(GenSet::from_gens(sigma.ty.iter().filter(|&s| inside.iter().any(|h| bd.contains(&b.panel_of(h, s))))))
}

/// `{s ∈ type(σ) : every s-panel through σ of a clump chamber lies in ∂C}`.
pub fn boundary_type_all(b: &Building, c: &Clump, sigma: &Face) -> Result<GenSet> {
    let inside = incident(b, c, sigma)?;
    let bd = c.boundary(b);
    Ok(GenSet::from_gens(sigma.ty.iter().filter(|&s| inside.iter().all(|h| bd.contains(&b.panel_of(h, s))))))
}

fn check_side(b: &Building, c: &Clump, k: &Side) -> Result<()> {
    if c.sides(b).iter().any(|s| s == k) {
        Ok(())
    } else {
        Err(Error::Domain(format!("not a side of the clump: type {} with {} mirrors", k.ty, k.mirrors.len())))
    }
}

/// `C ∪` every chamber of every panel in `k`.
pub fn unfold(b: &Building, c: &Clump, k: &Side) -> Result<Clump> {
    check_side(b, c, k)?;
    unfold_unchecked(b, c, k)
}

pub(crate) fn unfold_unchecked(b: &Building, c: &Clump, k: &Side) -> Result<Clump> {
    let mut set = c.chambers().clone();
    for m in &k.mirrors {
        set.extend(b.face_chambers(m));
    }
    if set.len() > b.chamber_cap {
        return Err(Error::Size { what: "clump chambers".into(), cap: b.chamber_cap, reached: set.len() });
    }
    Ok(Clump::new(set))
}

/// Partition of the chambers added by unfolding along `k` into classes of
/// `(S − {u})`-adjacency among the new chambers.
pub fn sheets(b: &Building, c: &Clump, k: &Side) -> Result<SheetPartition> {
    check_side(b, c, k)?;
    sheets_unchecked(b, c, k)
}

pub(crate) fn sheets_unchecked(b: &Building, c: &Clump, k: &Side) -> Result<SheetPartition> {
    let u = k.ty;
    let mut fresh: BTreeSet<Chamber> = BTreeSet::new();
    for m in &k.mirrors {
        fresh.extend(b.face_chambers(m).into_iter().filter(|x| !c.contains(x)));
    }
    let list: Vec<Chamber> = fresh.iter().cloned().collect();
    let index: HashMap<&Chamber, usize> = list.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let mut uf = UnionFind::new(list.len());
    for (i, x) in list.iter().enumerate() {
        for s in (0..b.rank()).filter(|&s| s != u) {
            for y in b.panel(x, s) {
                if let Some(&j) = index.get(&y) {
                    uf.union(i, j);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<Chamber>> = BTreeMap::new();
    for (i, x) in list.iter().enumerate() {
        groups.entry(uf.find(i)).or_default().push(x.clone());
    }
    let mut blocks: Vec<Vec<Chamber>> = groups.into_values().collect();
    blocks.sort_by(|a, b| a[0].cmp(&b[0]));
    Ok(SheetPartition { ty: u, new_chambers: list, blocks })
}

/// A run of unfoldings from `Y_0`: `clumps[i + 1]` is `clumps[i]` unfolded along `sides[i]`.
#[derive(Clone, Debug)]
pub struct UnfoldingSequence {
    pub clumps: Vec<Clump>,
    pub sides: Vec<Side>,
    /// `radius_index[r]` is the index in `clumps` at which `Y_r` is reached.
    pub radius_index: Vec<usize>,
}

impl UnfoldingSequence {
    pub fn last(&self) -> &Clump {
        self.clumps.last().unwrap()
    }
}

/// A clump together with the unfoldings that produced it from `Y_0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClumpRecord {
    pub config_sha256: String,
    pub chambers: Vec<Chamber>,
    pub steps: Vec<Side>,
}

impl ClumpRecord {
    pub fn from_sequence(seq: &UnfoldingSequence, config_sha256: &str) -> Self {
        ClumpRecord {
            config_sha256: config_sha256.to_string(),
            chambers: seq.last().chambers().iter().cloned().collect(),
            steps: seq.sides.clone(),
        }
    }

    /// Redoes the unfoldings and checks that they end at the recorded chambers.
    pub fn replay(&self, b: &Building) -> Result<Clump> {
        let mut c = Clump::base();
        for (i, k) in self.steps.iter().enumerate() {
            if !c.sides(b).contains(k) {
                return Err(Error::Verification(format!("recorded step {i} is not a side of the clump")));
            }
            c = unfold(b, &c, k)?;
        }
        if !c.chambers().iter().eq(self.chambers.iter()) {
            return Err(Error::Verification("replayed unfoldings end at a different clump".into()));
        }
        Ok(c)
    }
}

/// Builds `Y_n` from `Y_0` by unfoldings: at each radius, take the sides of
/// `Y_{r-1}` in canonical order and unfold along the side of the current
/// clump containing each one, skipping those that became interior.
pub fn ball_by_unfolding(b: &Building, n: usize) -> Result<(Clump, Vec<Side>)> {
    let seq = unfolding_sequence(b, n, None::<&mut rand_chacha::ChaCha8Rng>)?;
    Ok((seq.last().clone(), seq.sides))
}

/// As [`ball_by_unfolding`], keeping every intermediate clump. With `rng`, the
/// pending sides at each radius are processed in a random order.
pub fn unfolding_sequence<R: Rng>(b: &Building, n: usize, mut rng: Option<&mut R>) -> Result<UnfoldingSequence> {
    let mut seq = UnfoldingSequence { clumps: vec![Clump::base()], sides: Vec::new(), radius_index: vec![0] };
    for _ in 0..n {
        let mut pending: Vec<Vec<Face>> = seq.last().sides(b).iter().map(|s| s.mirrors.clone()).collect();
        if let Some(r) = rng.as_deref_mut() {
            pending.shuffle(r);
        }
        for p in pending {
            loop {
                let cur = seq.last();
                let bd = cur.boundary(b);
                let Some(first) = p.iter().find(|m| bd.contains(*m)) else { break };
                let side = cur
                    .sides(b)
                    .iter()
                    .find(|s| s.mirrors.binary_search(first).is_ok())
                    .cloned()
                    .ok_or_else(|| Error::Internal("boundary mirror outside every side".into()))?;
                let next = unfold_unchecked(b, cur, &side)?;
                seq.sides.push(side);
                seq.clumps.push(next);
            }
        }
        seq.radius_index.push(seq.clumps.len() - 1);
    }
    Ok(seq)
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}
