//! Symmetries of balls: type permutations and the actions they induce on
//! `G_X(Y_n)`, quotient complexes of groups, the discreteness trichotomy,
//! apartment fragments through the base chamber, and sheet swaps
//! assembled into strong-transitivity witnesses.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::building::{Building, Chamber, Face};
use crate::clump::{sheets, unfolding_sequence, Clump, Side};
use crate::cog::{canonical_cog, local_elements, show_face, ComplexOfGroups};
use crate::coxeter::{CoxeterSystem, Gen, GenSet, WElement};
use crate::error::{Error, Result};
use crate::groups::{
    compose_morphisms, verify_complex, verify_covering, verify_morphism, Amb, Ambient, CheckReport, CoveringCheck,
    GroupComplex, Morphism,
};

/// Default largest nerve handled by [`is_rigid`].
pub const RIGIDITY_CAP: usize = 10;

fn perm_compose(a: &[Gen], b: &[Gen]) -> Vec<Gen> {
    b.iter().map(|&t| a[t]).collect()
}

fn perm_inverse(a: &[Gen]) -> Vec<Gen> {
    let mut out = vec![0; a.len()];
    for (i, &x) in a.iter().enumerate() {
        out[x] = i;
    }
    out
}

fn perm_set(p: &[Gen], t: GenSet) -> GenSet {
    GenSet::from_gens(t.iter().map(|s| p[s]))
}

/// Backtracking search for permutations of `0..n` preserving `color` and
/// the symmetric relation `adj`, extending the partial assignment `fixed`.
/// Stops after `limit` results.
fn automorphisms(
    n: usize,
    adj: &dyn Fn(usize, usize) -> bool,
    color: &[u32],
    fixed: &[Option<usize>],
    limit: usize,
) -> Vec<Vec<usize>> {
    #[allow(clippy::too_many_arguments)]
    fn go(
        k: usize,
        n: usize,
        adj: &dyn Fn(usize, usize) -> bool,
        color: &[u32],
        fixed: &[Option<usize>],
        img: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
        limit: usize,
    ) {
        if out.len() >= limit {
            return;
        }
        if k == n {
            out.push(img.clone());
            return;
        }
        let candidates: Vec<usize> = match fixed[k] {
            Some(x) => vec![x],
            None => (0..n).collect(),
        };
        for x in candidates {
            if used[x] || color[x] != color[k] {
                continue;
            }
            if (0..k).any(|j| adj(j, k) != adj(img[j], x)) {
                continue;
            }
            used[x] = true;
            img.push(x);
            go(k + 1, n, adj, color, fixed, img, used, out, limit);
            img.pop();
            used[x] = false;
        }
    }
    let mut out = Vec::new();
    go(0, n, adj, color, fixed, &mut Vec::with_capacity(n), &mut vec![false; n], &mut out, limit);
    out
}

/// All permutations of `S` preserving `q` and `m`, sorted; the identity is first.
pub fn type_permutation_group(sys: &CoxeterSystem, q: &[u32]) -> Vec<Vec<Gen>> {
    let n = sys.rank();
    let adj = |a: usize, b: usize| a != b && sys.commutes(a, b);
    let mut out = automorphisms(n, &adj, q, &vec![None; n], usize::MAX);
    out.sort();
    out
}

/// A bijection of a finite chamber set realizing a type permutation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallAutomorphism {
    #[serde(with = "table")]
    pub map: BTreeMap<Chamber, Chamber>,
    pub perm: Vec<Gen>,
}

mod table {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<Chamber, Chamber>, s: S) -> std::result::Result<S::Ok, S::Error> {
        m.iter().collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<Chamber, Chamber>, D::Error> {
        Ok(Vec::<(Chamber, Chamber)>::deserialize(d)?.into_iter().collect())
    }
}

impl BallAutomorphism {
    pub fn identity(b: &Building, domain: &Clump) -> Self {
        BallAutomorphism {
            map: domain.chambers().iter().map(|c| (c.clone(), c.clone())).collect(),
            perm: (0..b.rank()).collect(),
        }
    }

    /// The graph-product automorphism permuting generators by `perm`.
    pub fn from_type_permutation(b: &Building, domain: &Clump, perm: &[Gen]) -> Self {
        BallAutomorphism {
            map: domain.chambers().iter().map(|c| (c.clone(), b.gp().apply_perm(c, perm))).collect(),
            perm: perm.to_vec(),
        }
    }

    pub fn apply(&self, c: &Chamber) -> Option<&Chamber> {
        self.map.get(c)
    }

    /// `self ∘ other`, on the domain of `other`.
    pub fn compose(&self, other: &BallAutomorphism) -> Result<BallAutomorphism> {
        let map = other
            .map
            .iter()
            .map(|(k, v)| {
                self.map
                    .get(v)
                    .map(|w| (k.clone(), w.clone()))
                    .ok_or_else(|| Error::Domain("composition leaves the domain".into()))
            })
            .collect::<Result<_>>()?;
        Ok(BallAutomorphism { map, perm: perm_compose(&self.perm, &other.perm) })
    }

    pub fn image_of(&self, set: &BTreeSet<Chamber>) -> Option<BTreeSet<Chamber>> {
        set.iter().map(|c| self.map.get(c).cloned()).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().all(|(k, v)| k == v) && self.perm.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// Image of a face meeting the domain.
    pub fn face_image(&self, b: &Building, domain: &Clump, f: &Face) -> Option<Face> {
        let c = domain.chambers_in(b, f).into_iter().next()?;
        Some(b.face_of(self.map.get(&c)?, perm_set(&self.perm, f.ty)))
    }

    /// Checks that the map is a bijection of `domain`, sends `s`-adjacent
    /// chambers to `π(s)`-adjacent ones, and sends sides to sides.
    pub fn verify(&self, b: &Building, domain: &Clump) -> CheckReport {
        let mut r = CheckReport::default();
        let keys: BTreeSet<&Chamber> = self.map.keys().collect();
        let vals: BTreeSet<&Chamber> = self.map.values().collect();
        let dom: BTreeSet<&Chamber> = domain.chambers().iter().collect();
        r.check(keys == dom, || "map is not defined exactly on the domain".into());
        r.check(vals == dom && vals.len() == self.map.len(), || "map is not a bijection of the domain".into());
        let perm_ok = {
            let mut p = self.perm.clone();
            p.sort();
            p == (0..b.rank()).collect::<Vec<_>>()
                && (0..b.rank()).all(|s| b.q(self.perm[s]) == b.q(s))
                && (0..b.rank()).all(|s| (0..b.rank()).all(|t| b.sys().commutes(s, t) == b.sys().commutes(self.perm[s], self.perm[t])))
        };
        r.check(perm_ok, || "type permutation does not preserve q and m".into());
        if !r.passed() {
            return r;
        }
        for (c, hc) in &self.map {
            for s in 0..b.rank() {
                for d in b.panel(c, s).into_iter().filter(|d| d != c && domain.contains(d)) {
                    let hd = &self.map[&d];
                    r.check(b.s_adjacent(hc, hd, self.perm[s]), || {
                        format!("adjacency of type {} not preserved at {}", b.sys().name(s), b.gp().show(c))
                    });
                }
            }
        }
        let sides = domain.sides(b);
        let side_sets: BTreeSet<BTreeSet<Face>> = sides.iter().map(|s| s.mirrors.iter().cloned().collect()).collect();
        for side in sides {
            let image: Option<BTreeSet<Face>> = side.mirrors.iter().map(|m| self.face_image(b, domain, m)).collect();
            r.check(image.is_some_and(|i| side_sets.contains(&i)), || {
                format!("side of type {} is not mapped to a side", b.sys().name(side.ty))
            });
        }
        r
    }
}

/// The simple morphism of `G_X(Y)` induced by a chamber automorphism of
/// `Y`: faces map along the chambers, local maps permute generators, and
/// every edge element is trivial.
pub fn extend_action(b: &Building, y: &Clump, h: &BallAutomorphism) -> Result<(GroupComplex, Morphism)> {
    let check = h.verify(b, y);
    if !check.passed() {
        let msg = check.failures.first().cloned().unwrap_or_default();
        return if msg.contains("side") {
            Err(Error::Internal(format!("automorphism does not take sides to sides: {msg}")))
        } else {
            Err(Error::Domain(format!("not an automorphism of the clump: {msg}")))
        };
    }
    let cog = canonical_cog(b, y)?;
    let (amb, gc) = cog.to_group_complex(b);
    let x = &cog.scwol;
    let mut vmap = Vec::with_capacity(x.vertices.len());
    for (v, f) in x.vertices.iter().enumerate() {
        let mut images = y.chambers_in(b, f).into_iter().map(|c| b.face_of(&h.map[&c], perm_set(&h.perm, f.ty)));
        let first = images.next().expect("every scwol vertex meets the clump");
        if images.any(|g| g != first) {
            return Err(Error::Internal(format!("face {} has several images", show_face(b, f))));
        }
        let w = x.vertex(&first).ok_or_else(|| Error::Internal("image face outside the clump".into()))?;
        if cog.local[w] != perm_set(&h.perm, cog.local[v]) {
            return Err(Error::Internal(format!("boundary type not preserved at {}", show_face(b, f))));
        }
        vmap.push(w);
    }
    let emap = x
        .edges
        .iter()
        .map(|&(i, t)| x.edge(vmap[i], vmap[t]).ok_or_else(|| Error::Internal("edge image missing".into())))
        .collect::<Result<Vec<_>>>()?;
    let m = Morphism {
        vmap,
        emap,
        local: vec![amb.from_perm(&h.perm); x.vertices.len()],
        elem: vec![amb.identity(); x.edges.len()],
    };
    let r = verify_morphism(&amb, &gc, &gc, &m);
    if !r.passed() {
        return Err(Error::Verification(r.failures.first().cloned().unwrap_or_default()));
    }
    Ok((gc, m))
}

/// Checks `Φ^h ∘ Φ^{h'} = Φ^{h h'}`.
pub fn check_action_composition(b: &Building, y: &Clump, h: &BallAutomorphism, h2: &BallAutomorphism) -> Result<bool> {
    let (gc, m1) = extend_action(b, y, h)?;
    let (_, m2) = extend_action(b, y, h2)?;
    let (_, m12) = extend_action(b, y, &h.compose(h2)?)?;
    let amb = Ambient::new(b.gp().params());
    let c = compose_morphisms(&amb, &m1, &m2, &gc);
    Ok(c.vmap == m12.vmap && c.emap == m12.emap && c.local == m12.local && c.elem == m12.elem)
}

/// `G_X(Y)` over the barycentric subdivision of its scwol: vertices are
/// chains of faces, edges go from a chain to each proper subchain, and the
/// local group at a chain is that of its smallest face.
#[derive(Clone, Debug)]
pub struct Subdivision {
    /// Chains as increasing lists of scwol vertex indices, sorted.
    pub chains: Vec<Vec<usize>>,
    pub complex: GroupComplex,
    index: HashMap<Vec<usize>, usize>,
    eindex: HashMap<(usize, usize), usize>,
}

pub fn subdivide(b: &Building, cog: &ComplexOfGroups) -> Subdivision {
    let x = &cog.scwol;
    let from = x.edges_from();
    let mut chains: Vec<Vec<usize>> = Vec::new();
    let mut stack: Vec<Vec<usize>> = (0..x.vertices.len()).map(|v| vec![v]).collect();
    while let Some(c) = stack.pop() {
        for &a in &from[*c.last().unwrap()] {
            let mut d = c.clone();
            d.push(x.terminal(a));
            stack.push(d);
        }
        chains.push(c);
    }
    chains.sort();
    let index: HashMap<Vec<usize>, usize> = chains.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
    let mut edges = Vec::new();
    let mut eindex = HashMap::new();
    for (i, c) in chains.iter().enumerate() {
        let n = c.len();
        for mask in 1..(1u32 << n) - 1 {
            let sub: Vec<usize> = (0..n).filter(|k| mask >> k & 1 == 1).map(|k| c[k]).collect();
            let j = index[&sub];
            eindex.insert((i, j), edges.len());
            edges.push((i, j));
        }
    }
    let mut compose = BTreeMap::new();
    let mut out_of: Vec<Vec<usize>> = vec![Vec::new(); chains.len()];
    for (a, &(i, _)) in edges.iter().enumerate() {
        out_of[i].push(a);
    }
    for (bb, &(i, t)) in edges.iter().enumerate() {
        for &a in &out_of[t] {
            let tt = edges[a].1;
            compose.insert((a, bb), eindex[&(i, tt)]);
        }
    }
    let amb = Ambient::new(b.gp().params());
    let complex = GroupComplex {
        labels: chains
            .iter()
            .map(|c| c.iter().map(|&v| show_face(b, &x.vertices[v])).collect::<Vec<_>>().join(" < "))
            .collect(),
        groups: chains.iter().map(|c| local_elements(b, &amb, cog.local[c[0]])).collect(),
        psi: vec![amb.identity(); edges.len()],
        edges,
        compose,
        twist: BTreeMap::new(),
    };
    Subdivision { chains, complex, index, eindex }
}

/// The quotient `H(Z)` of the subdivided `G_X(Y)` by a group of type
/// permutations, with the covering from the subdivision and its checks.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub subdivision: Subdivision,
    pub quotient: GroupComplex,
    pub morphism: Morphism,
    pub group_order: usize,
    pub complex_check: CheckReport,
    pub covering: CoveringCheck,
}

impl Quotient {
    pub fn passed(&self) -> bool {
        self.complex_check.passed() && self.covering.passed() && self.covering.sheets() == Some(self.group_order)
    }
}

fn check_group(b: &Building, h: &[Vec<Gen>]) -> Result<()> {
    let all = type_permutation_group(b.sys(), b.gp().params());
    let set: BTreeSet<&Vec<Gen>> = h.iter().collect();
    if !set.contains(&(0..b.rank()).collect::<Vec<_>>()) {
        return Err(Error::Domain("group lacks the identity".into()));
    }
    for p in h {
        if !all.contains(p) {
            return Err(Error::Domain(format!("{p:?} does not preserve q and m")));
        }
        for p2 in h {
            if !set.contains(&perm_compose(p, p2)) {
                return Err(Error::Domain("permutations are not closed under composition".into()));
            }
        }
    }
    Ok(())
}

/// Builds `H(Z)` for `Z = H \ sd(Y)` with canonical-least orbit
/// representatives, and checks both the complex-of-groups axioms and the
/// covering `G_X(Y) → H(Z)`.
pub fn quotient_cog(b: &Building, y: &Clump, h: &[Vec<Gen>]) -> Result<Quotient> {
    let mut h: Vec<Vec<Gen>> = h.to_vec();
    h.sort();
    h.dedup();
    check_group(b, &h)?;
    for p in &h {
        let img: BTreeSet<Chamber> = y.chambers().iter().map(|c| b.gp().apply_perm(c, p)).collect();
        if &img != y.chambers() {
            return Err(Error::Domain(format!("{p:?} does not preserve the clump")));
        }
    }
    let cog = canonical_cog(b, y)?;
    let x = &cog.scwol;
    let amb = Ambient::new(b.gp().params());
    // Vertex images under each permutation.
    let mut img: Vec<Vec<usize>> = Vec::with_capacity(h.len());
    for p in &h {
        let row = x
            .vertices
            .iter()
            .map(|f| {
                let g = Face { ty: perm_set(p, f.ty), rep: b.gp().apply_perm(&f.rep, p) };
                x.vertex(&b.face_of(&g.rep, g.ty)).ok_or_else(|| Error::Internal("face image outside the clump".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        for (v, &w) in row.iter().enumerate() {
            if cog.local[w] != perm_set(p, cog.local[v]) {
                return Err(Error::Internal("type permutation does not preserve boundary types".into()));
            }
        }
        img.push(row);
    }
    let sd = subdivide(b, &cog);
    let n = sd.chains.len();
    let act = |k: usize, c: usize| -> usize { sd.index[&sd.chains[c].iter().map(|&v| img[k][v]).collect::<Vec<_>>()] };
    let mut rep = vec![0; n];
    let mut kidx = vec![0; n];
    for c in 0..n {
        let (r, k) = (0..h.len()).map(|k| (act(k, c), k)).min().unwrap();
        rep[c] = r;
        kidx[c] = k;
    }
    let reps: Vec<usize> = (0..n).filter(|&c| rep[c] == c).collect();
    let zid: HashMap<usize, usize> = reps.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let stab: Vec<Vec<usize>> = reps.iter().map(|&r| (0..h.len()).filter(|&k| act(k, r) == r).collect()).collect();

    let mut zedges: Vec<(usize, usize)> = Vec::new();
    let mut zlift: Vec<usize> = Vec::new();
    let mut zedge_of: HashMap<usize, usize> = HashMap::new();
    for (a, &(i, t)) in sd.complex.edges.iter().enumerate() {
        if rep[i] == i {
            zedge_of.insert(a, zedges.len());
            zedges.push((zid[&i], zid[&rep[t]]));
            zlift.push(a);
        }
    }
    let hk = |a: usize| -> &Vec<Gen> { &h[kidx[sd.complex.edges[zlift[a]].1]] };
    let mut zinto: Vec<Vec<usize>> = vec![Vec::new(); reps.len()];
    let mut zfrom: Vec<Vec<usize>> = vec![Vec::new(); reps.len()];
    for (a, &(i, t)) in zedges.iter().enumerate() {
        zinto[t].push(a);
        zfrom[i].push(a);
    }
    let find_perm = |p: &Vec<Gen>| h.binary_search(p).expect("group is closed");
    let mut compose = BTreeMap::new();
    let mut twist = BTreeMap::new();
    for bz in 0..zedges.len() {
        let r0 = sd.complex.edges[zlift[bz]].0;
        let hb = hk(bz);
        let hb_inv = find_perm(&perm_inverse(hb));
        for &az in &zfrom[zedges[bz].1] {
            let c2 = sd.complex.edges[zlift[az]].1;
            let moved = act(hb_inv, c2);
            let lifted = *sd
                .eindex
                .get(&(r0, moved))
                .ok_or_else(|| Error::Internal("composite edge missing in the subdivision".into()))?;
            let abz = zedge_of[&lifted];
            compose.insert((az, bz), abz);
            let g = perm_compose(&perm_compose(hk(az), hb), &perm_inverse(hk(abz)));
            if g.iter().enumerate().any(|(i, &x)| i != x) {
                twist.insert((az, bz), amb.from_perm(&g));
            }
        }
    }
    let groups: Vec<Vec<Amb>> = reps
        .iter()
        .zip(&stab)
        .map(|(&r, st)| {
            let base = local_elements(b, &amb, cog.local[sd.chains[r][0]]);
            let mut g: Vec<Amb> =
                base.iter().flat_map(|x| st.iter().map(|&k| amb.mul(x, &amb.from_perm(&h[k])))).collect();
            g.sort();
            g.dedup();
            g
        })
        .collect();
    let quotient = GroupComplex {
        labels: reps.iter().map(|&r| sd.complex.labels[r].clone()).collect(),
        edges: zedges.clone(),
        compose,
        groups,
        psi: (0..zedges.len()).map(|a| amb.from_perm(hk(a))).collect(),
        twist,
    };
    let mut emap = Vec::with_capacity(sd.complex.edges.len());
    let mut elem = Vec::with_capacity(sd.complex.edges.len());
    for &(i, t) in &sd.complex.edges {
        let moved = (rep[i], act(kidx[i], t));
        let a = sd.eindex[&moved];
        let fa = zedge_of[&a];
        emap.push(fa);
        let p = perm_compose(&perm_compose(&h[kidx[t]], &perm_inverse(&h[kidx[i]])), &perm_inverse(hk(fa)));
        elem.push(amb.from_perm(&p));
    }
    let morphism = Morphism {
        vmap: rep.iter().map(|r| zid[r]).collect(),
        emap,
        local: kidx.iter().map(|&k| amb.from_perm(&h[k])).collect(),
        elem,
    };
    let complex_check = verify_complex(&amb, &quotient);
    let covering = verify_covering(&amb, &sd.complex, &quotient, &morphism);
    Ok(Quotient { subdivision: sd, quotient, morphism, group_order: h.len(), complex_check, covering })
}

/// Which case of the discreteness trichotomy applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscretenessCase {
    /// `W` is finite, so the building is finite.
    FiniteGroup,
    /// Some `q_s > 2` with `m(s,t) = ∞` for some `t`.
    ThickNoncommuting,
    /// Every `q_s = 2`.
    Thin,
    /// Some `q_s > 2`, and every such `s` commutes with all other generators.
    ThickCentral,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscretenessVerdict {
    pub case: DiscretenessCase,
    /// 1, 2 or 3 for infinite `W`.
    pub case_number: Option<u8>,
    /// Type-preserving automorphism group.
    pub g0_discrete: bool,
    /// Full automorphism group.
    pub g_discrete: bool,
    pub nerve_rigid: bool,
}

/// The three case predicates, evaluated independently of each other.
pub fn case_predicates(sys: &CoxeterSystem, q: &[u32]) -> [bool; 3] {
    let n = sys.rank();
    let thick_noncommuting = (0..n).any(|s| q[s] > 2 && (0..n).any(|t| t != s && !sys.commutes(s, t)));
    let thin = q.iter().all(|&x| x == 2);
    let thick_central =
        q.iter().any(|&x| x > 2) && (0..n).filter(|&s| q[s] > 2).all(|s| (0..n).all(|t| t == s || sys.commutes(s, t)));
    [thick_noncommuting, thin, thick_central]
}

pub fn classify_discreteness(sys: &CoxeterSystem, q: &[u32]) -> Result<DiscretenessVerdict> {
    let rigid = is_rigid(sys, RIGIDITY_CAP)?;
    if sys.is_finite() {
        return Ok(DiscretenessVerdict {
            case: DiscretenessCase::FiniteGroup,
            case_number: None,
            g0_discrete: true,
            g_discrete: true,
            nerve_rigid: rigid,
        });
    }
    let p = case_predicates(sys, q);
    let verdict = match p {
        [true, false, false] => DiscretenessVerdict {
            case: DiscretenessCase::ThickNoncommuting,
            case_number: Some(1),
            g0_discrete: false,
            g_discrete: false,
            nerve_rigid: rigid,
        },
        [false, true, false] => DiscretenessVerdict {
            case: DiscretenessCase::Thin,
            case_number: Some(2),
            g0_discrete: true,
            g_discrete: rigid,
            nerve_rigid: rigid,
        },
        [false, false, true] => DiscretenessVerdict {
            case: DiscretenessCase::ThickCentral,
            case_number: Some(3),
            g0_discrete: true,
            g_discrete: rigid,
            nerve_rigid: rigid,
        },
        _ => return Err(Error::Internal(format!("case predicates not exclusive: {p:?}"))),
    };
    Ok(verdict)
}

/// Whether every automorphism of the nerve fixing the closed star of some
/// vertex pointwise is the identity.
///
/// The nerve is the flag complex of the commutation graph, so its
/// automorphisms are the graph automorphisms.
pub fn is_rigid(sys: &CoxeterSystem, cap: usize) -> Result<bool> {
    let n = sys.rank();
    if n > cap {
        return Err(Error::Size { what: "nerve vertices for rigidity".into(), cap, reached: n });
    }
    let adj = |a: usize, b: usize| a != b && sys.commutes(a, b);
    let color = vec![0u32; n];
    for v in 0..n {
        let star = sys.commuting_with(v).with(v);
        let fixed: Vec<Option<usize>> = (0..n).map(|s| star.contains(s).then_some(s)).collect();
        let found = automorphisms(n, &adj, &color, &fixed, 2);
        if found.iter().any(|p| p.iter().enumerate().any(|(i, &x)| i != x)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The intersection of an apartment through the base chamber with `Y_n`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ApartmentFragment {
    pub chambers: BTreeSet<Chamber>,
    /// `δ(1, x) ↦ x`.
    pub by_w: BTreeMap<WElement, Chamber>,
}

fn right_descents(sys: &CoxeterSystem, w: &WElement) -> Result<Vec<(Gen, WElement)>> {
    let mut out = Vec::new();
    for s in sys.support(w).iter() {
        let ws = sys.multiply(w, &sys.reduce(&[s])?)?;
        if ws.len() < w.len() {
            out.push((s, ws));
        }
    }
    Ok(out)
}

/// Whether `set` is a fragment in `Y_n`: it contains the base chamber,
/// `δ(1, ·)` maps it bijectively onto the `W`-ball, it is `δ`-isometric,
/// and each chamber has its `s`-neighbor whenever `δ(1, x)s` is in range.
pub fn is_apartment_fragment(b: &Building, n: usize, set: &BTreeSet<Chamber>) -> Result<bool> {
    let ball = b.ball(n)?;
    let wball = b.sys().w_ball(n, b.chamber_cap)?;
    if !set.contains(&b.base()) || !set.iter().all(|c| ball.contains(c)) {
        return Ok(false);
    }
    let by_w: BTreeMap<WElement, &Chamber> = set.iter().map(|c| (b.w_distance(&b.base(), c), c)).collect();
    if by_w.len() != set.len() || by_w.keys().cloned().collect::<BTreeSet<_>>() != wball {
        return Ok(false);
    }
    for (v, x) in &by_w {
        for (w, y) in &by_w {
            if b.w_distance(x, y) != b.sys().multiply(&b.sys().inverse(v), w)? {
                return Ok(false);
            }
        }
        for s in 0..b.rank() {
            let vs = b.sys().multiply(v, &b.sys().reduce(&[s])?)?;
            if wball.contains(&vs) {
                let count = set.iter().filter(|y| b.s_adjacent(x, y, s)).count();
                if count != 1 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Every apartment fragment through the base chamber in `Y_n`, sorted.
/// `(s, earlier index, extra descents to check)` for one element of the `W`-ball.
type PlanStep = (Gen, usize, Vec<(Gen, usize)>);

pub fn apartments_through_base(b: &Building, n: usize, cap: usize) -> Result<Vec<ApartmentFragment>> {
    let ball = b.ball(n)?;
    let order: Vec<WElement> = b.sys().w_ball(n, b.chamber_cap)?.into_iter().collect();
    let mut plan: Vec<PlanStep> = Vec::with_capacity(order.len());
    let pos: HashMap<&WElement, usize> = order.iter().enumerate().map(|(i, w)| (w, i)).collect();
    for w in order.iter().skip(1) {
        let desc = right_descents(b.sys(), w)?;
        let checks: Vec<(Gen, usize)> = desc.iter().map(|(s, ws)| (*s, pos[ws])).collect();
        let (s, prev) = checks[0];
        plan.push((s, prev, checks[1..].to_vec()));
    }
    let mut out = Vec::new();
    let mut chosen: Vec<Chamber> = vec![b.base()];
    fn go(
        b: &Building,
        ball: &Clump,
        order: &[WElement],
        plan: &[PlanStep],
        chosen: &mut Vec<Chamber>,
        out: &mut Vec<ApartmentFragment>,
        cap: usize,
    ) -> Result<()> {
        let k = chosen.len();
        if k == order.len() {
            if out.len() >= cap {
                return Err(Error::Size { what: "apartment fragments".into(), cap, reached: out.len() + 1 });
            }
            out.push(ApartmentFragment {
                chambers: chosen.iter().cloned().collect(),
                by_w: order.iter().cloned().zip(chosen.iter().cloned()).collect(),
            });
            return Ok(());
        }
        let (s, prev, checks) = &plan[k - 1];
        let anchor = chosen[*prev].clone();
        for x in b.panel(&anchor, *s) {
            if x == anchor || !ball.contains(&x) {
                continue;
            }
            if checks.iter().all(|&(t, j)| b.s_adjacent(&chosen[j], &x, t)) {
                chosen.push(x);
                go(b, ball, order, plan, chosen, out, cap)?;
                chosen.pop();
            }
        }
        Ok(())
    }
    go(b, &ball, &order, &plan, &mut chosen, &mut out, cap)?;
    for f in &out {
        if !is_apartment_fragment(b, n, &f.chambers)? {
            return Err(Error::Internal("enumerated set fails the fragment conditions".into()));
        }
    }
    out.sort();
    Ok(out)
}

fn sheet_exponents(b: &Building, c_prev: &Clump, k: &Side) -> Result<(Face, Vec<Option<usize>>)> {
    let part = sheets(b, c_prev, k)?;
    let m = k.mirrors[0].clone();
    let ex = (0..b.q(k.ty)).map(|e| part.sheet_of(&b.gp().mul_gen(&m.rep, k.ty, e))).collect();
    Ok((m, ex))
}

/// The automorphism of `domain` exchanging sheets `i` and `j` of the
/// unfolding of `c_prev` along `k`. It swaps the two `u`-wings of the least
/// mirror of `k` containing those sheets, and fixes everything else.
///
/// `domain` must be preserved by automorphisms fixing the base chamber,
/// such as a ball `Y_n` or the unfolding itself.
pub fn sheet_swap(b: &Building, c_prev: &Clump, k: &Side, i: usize, j: usize, domain: &Clump) -> Result<BallAutomorphism> {
    let part = sheets(b, c_prev, k)?;
    if i == j || i >= part.blocks.len() || j >= part.blocks.len() {
        return Err(Error::Domain(format!("invalid sheet pair ({i}, {j}) among {} sheets", part.blocks.len())));
    }
    let (m, ex) = sheet_exponents(b, c_prev, k)?;
    let u = k.ty;
    let ei = ex.iter().position(|&x| x == Some(i)).ok_or_else(|| Error::Internal("sheet misses the mirror".into()))?;
    let ej = ex.iter().position(|&x| x == Some(j)).ok_or_else(|| Error::Internal("sheet misses the mirror".into()))?;
    let gp = b.gp();
    let mut map = BTreeMap::new();
    for c in domain.chambers() {
        let (e, rest) = gp.split_left(&gp.quotient(&m.rep, c), u);
        let e = e as usize;
        let e2 = if e == ei { ej } else if e == ej { ei } else { e };
        let image = gp.multiply(&gp.mul_gen(&m.rep, u, e2 as u32), &rest);
        map.insert(c.clone(), image);
    }
    let h = BallAutomorphism { map, perm: (0..b.rank()).collect() };
    let r = h.verify(b, domain);
    if !r.passed() {
        return Err(Error::Internal(format!("sheet swap is not an automorphism: {:?}", r.failures)));
    }
    if c_prev.chambers().iter().any(|c| h.map.get(c) != Some(c)) {
        return Err(Error::Internal("sheet swap moves the clump".into()));
    }
    let si: BTreeSet<Chamber> = part.blocks[i].iter().cloned().collect();
    let sj: BTreeSet<Chamber> = part.blocks[j].iter().cloned().collect();
    if h.image_of(&si).as_ref() != Some(&sj) {
        return Err(Error::Internal("sheet swap does not exchange the sheets".into()));
    }
    Ok(h)
}

/// An automorphism of `Y_n` fixing the base chamber and carrying one
/// fragment onto another, with the sheet swaps used to build it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransitivityWitness {
    pub automorphism: BallAutomorphism,
    /// `(unfolding step, sheet i, sheet j)`.
    pub swaps: Vec<(usize, usize, usize)>,
}

/// Walks the canonical unfolding sequence of `Y_n`; at the first step where
/// the current image of `from` and `to` differ, swaps sheets until they
/// agree on the new chambers.
pub fn transitivity_witness(
    b: &Building,
    from: &ApartmentFragment,
    to: &ApartmentFragment,
    n: usize,
) -> Result<TransitivityWitness> {
    for f in [from, to] {
        if !is_apartment_fragment(b, n, &f.chambers)? {
            return Err(Error::Domain("argument is not an apartment fragment through the base".into()));
        }
    }
    let y = b.ball(n)?;
    let seq = unfolding_sequence(b, n, None::<&mut rand_chacha::ChaCha8Rng>)?;
    if seq.last() != &y {
        return Err(Error::Internal("unfolding does not reach the ball".into()));
    }
    let mut h = BallAutomorphism::identity(b, &y);
    let mut swaps = Vec::new();
    for step in 0..seq.sides.len() {
        let (c_prev, c_next, k) = (&seq.clumps[step], &seq.clumps[step + 1], &seq.sides[step]);
        let part = sheets(b, c_prev, k)?;
        for _ in 0..part.blocks.len() {
            let cur = h.image_of(&from.chambers).ok_or_else(|| Error::Internal("image leaves the ball".into()))?;
            let mut mismatch = None;
            for m in &k.mirrors {
                let pick = |set: &BTreeSet<Chamber>| -> Result<Option<Chamber>> {
                    let mut it = b.face_chambers(m).into_iter().filter(|c| set.contains(c) && !c_prev.contains(c));
                    let first = it.next();
                    if it.next().is_some() {
                        return Err(Error::Internal("fragment meets a mirror twice outside the clump".into()));
                    }
                    Ok(first)
                };
                match (pick(&cur)?, pick(&to.chambers)?) {
                    (Some(x), Some(z)) => {
                        let (si, sj) = (part.sheet_of(&x).unwrap(), part.sheet_of(&z).unwrap());
                        if si != sj {
                            mismatch = Some((si, sj));
                            break;
                        }
                    }
                    (None, None) => {}
                    _ => return Err(Error::Internal("fragments disagree on crossing a mirror".into())),
                }
            }
            let Some((i, j)) = mismatch else { break };
            let s = sheet_swap(b, c_prev, k, i, j, &y)?;
            h = s.compose(&h)?;
            swaps.push((step, i, j));
        }
        let cur = h.image_of(&from.chambers).unwrap();
        let lhs: BTreeSet<&Chamber> = cur.iter().filter(|c| c_next.contains(c)).collect();
        let rhs: BTreeSet<&Chamber> = to.chambers.iter().filter(|c| c_next.contains(c)).collect();
        if lhs != rhs {
            return Err(Error::Internal(format!("fragments still differ after step {step}")));
        }
    }
    let r = h.verify(b, &y);
    if !r.passed() || h.apply(&b.base()) != Some(&b.base()) || h.image_of(&from.chambers).as_ref() != Some(&to.chambers) {
        return Err(Error::Internal("witness fails its structural checks".into()));
    }
    Ok(TransitivityWitness { automorphism: h, swaps })
}
