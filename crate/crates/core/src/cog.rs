//! Scwols of clumps, the canonical simple complex of groups over a clump,
//! local developments at maximal-type vertices, admissibility, and
//! presentations of fundamental groups.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::building::{Building, Chamber, Face};
use crate::clump::{boundary_type, boundary_type_all, Clump, UnionFind};
use crate::coxeter::{Gen, GenSet};
use crate::error::{Error, Result};
use crate::graphprod::DirectProductElement;
use crate::groups::{Ambient, CheckReport, GroupComplex};

/// The small category without loops whose vertices are the faces of a
/// clump and whose edges go from a face to every face of strictly larger
/// type containing it.
#[derive(Clone, Debug, Default)]
pub struct Scwol {
    /// Sorted by `(type, rep)`.
    pub vertices: Vec<Face>,
    /// `(i(a), t(a))`, with `type(i(a)) ⊊ type(t(a))`.
    pub edges: Vec<(usize, usize)>,
    vindex: HashMap<Face, usize>,
    eindex: HashMap<(usize, usize), usize>,
}

impl Scwol {
    pub fn vertex(&self, f: &Face) -> Option<usize> {
        self.vindex.get(f).copied()
    }

    pub fn edge(&self, i: usize, t: usize) -> Option<usize> {
        self.eindex.get(&(i, t)).copied()
    }

    pub fn initial(&self, a: usize) -> usize {
        self.edges[a].0
    }

    pub fn terminal(&self, a: usize) -> usize {
        self.edges[a].1
    }

    /// `ab` for `i(a) = t(b)`.
    pub fn compose(&self, a: usize, b: usize) -> Option<usize> {
        if self.edges[a].0 != self.edges[b].1 {
            return None;
        }
        self.edge(self.edges[b].0, self.edges[a].1)
    }

    pub fn edges_into(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertices.len()];
        for (a, &(_, t)) in self.edges.iter().enumerate() {
            out[t].push(a);
        }
        out
    }

    pub fn edges_from(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertices.len()];
        for (a, &(i, _)) in self.edges.iter().enumerate() {
            out[i].push(a);
        }
        out
    }

    /// All `((a, b), ab)`.
    pub fn composable_pairs(&self) -> BTreeMap<(usize, usize), usize> {
        let into = self.edges_into();
        let mut out = BTreeMap::new();
        for (a, &(i, _)) in self.edges.iter().enumerate() {
            for &b in &into[i] {
                if let Some(ab) = self.compose(a, b) {
                    out.insert((a, b), ab);
                }
            }
        }
        out
    }

    /// No loops, every composable pair composes, composition is associative,
    /// and edges strictly increase type along coset inclusion.
    pub fn check_axioms(&self, b: &Building) -> CheckReport {
        let mut gc = GroupComplex {
            labels: self.vertices.iter().map(|f| show_face(b, f)).collect(),
            edges: self.edges.clone(),
            compose: self.composable_pairs(),
            ..Default::default()
        };
        let amb = Ambient::new(b.gp().params());
        gc.groups = vec![vec![amb.identity()]; self.vertices.len()];
        gc.psi = vec![amb.identity(); self.edges.len()];
        let mut r = crate::groups::verify_complex(&amb, &gc);
        let mut inc = CheckReport::default();
        for &(i, t) in &self.edges {
            let (fi, ft) = (&self.vertices[i], &self.vertices[t]);
            let ok = fi.ty.is_subset(ft.ty) && fi.ty != ft.ty && b.face_of(&fi.rep, ft.ty) == *ft;
            inc.checks += 1;
            if !ok {
                inc.failure_count += 1;
                inc.failures.push(format!("edge {} -> {} is not a strict inclusion", gc.labels[i], gc.labels[t]));
            }
        }
        r.merge(inc);
        r
    }

    pub fn to_dot(&self, b: &Building, local: Option<&[GenSet]>) -> String {
        let mut out = String::from("digraph scwol {\n  rankdir=BT;\n");
        for (v, f) in self.vertices.iter().enumerate() {
            let group = local.map(|l| format!("\\nG{}", show_type(b, l[v]))).unwrap_or_default();
            out.push_str(&format!("  v{v} [label=\"{}{}\"];\n", show_face(b, f), group));
        }
        for &(i, t) in &self.edges {
            out.push_str(&format!("  v{i} -> v{t};\n"));
        }
        out.push_str("}\n");
        out
    }
}

/// `{s,t}` using generator names.
pub fn show_type(b: &Building, t: GenSet) -> String {
    format!("{{{}}}", t.iter().map(|s| b.sys().name(s)).collect::<Vec<_>>().join(","))
}

/// `rep·W{T}` using generator names.
pub fn show_face(b: &Building, f: &Face) -> String {
    format!("{}·{}", b.gp().show(&f.rep), show_type(b, f.ty))
}

pub fn scwol_of(b: &Building, c: &Clump) -> Scwol {
    let mut faces: BTreeSet<Face> = BTreeSet::new();
    for ch in c.chambers() {
        for &t in b.spherical_subsets() {
            faces.insert(b.face_of(ch, t));
        }
    }
    let vertices: Vec<Face> = faces.into_iter().collect();
    let vindex: HashMap<Face, usize> = vertices.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect();
    let mut edges = Vec::new();
    let mut eindex = HashMap::new();
    for (i, f) in vertices.iter().enumerate() {
        for &t in b.spherical_subsets() {
            if f.ty.is_subset(t) && f.ty != t {
                let j = vindex[&b.face_of(&f.rep, t)];
                eindex.insert((i, j), edges.len());
                edges.push((i, j));
            }
        }
    }
    Scwol { vertices, edges, vindex, eindex }
}

/// A simple complex of groups over a clump scwol whose local groups are
/// standard subgroups `G_T` and whose monomorphisms are natural inclusions.
#[derive(Clone, Debug)]
pub struct ComplexOfGroups {
    pub scwol: Scwol,
    /// Type of the local group at each vertex.
    pub local: Vec<GenSet>,
}

impl ComplexOfGroups {
    /// Inclusions are valid: `local(i(a)) ⊆ local(t(a))`.
    pub fn check(&self) -> Result<()> {
        for &(i, t) in &self.scwol.edges {
            if !self.local[i].is_subset(self.local[t]) {
                return Err(Error::Internal(format!("local group at vertex {i} does not include into vertex {t}")));
            }
        }
        Ok(())
    }

    /// The same complex in the generic representation used by the
    /// covering checker.
    pub fn to_group_complex(&self, b: &Building) -> (Ambient, GroupComplex) {
        let amb = Ambient::new(b.gp().params());
        let gc = GroupComplex {
            labels: self.scwol.vertices.iter().map(|f| show_face(b, f)).collect(),
            edges: self.scwol.edges.clone(),
            compose: self.scwol.composable_pairs(),
            groups: self.local.iter().map(|&t| local_elements(b, &amb, t)).collect(),
            psi: vec![amb.identity(); self.scwol.edges.len()],
            twist: BTreeMap::new(),
        };
        (amb, gc)
    }

    pub fn to_dot(&self, b: &Building) -> String {
        self.scwol.to_dot(b, Some(&self.local))
    }
}

pub(crate) fn local_elements(b: &Building, amb: &Ambient, t: GenSet) -> Vec<crate::groups::Amb> {
    let mut v: Vec<_> = b.gp().ds_elements(t).iter().map(|d| amb.from_ds(d)).collect();
    v.sort();
    v
}

/// `G_X(C)`: at each face the product of the generators of its boundary
/// type, trivial away from the boundary.
pub fn canonical_cog(b: &Building, c: &Clump) -> Result<ComplexOfGroups> {
    let scwol = scwol_of(b, c);
    let local = scwol.vertices.iter().map(|f| boundary_type(b, c, f)).collect::<Result<Vec<_>>>()?;
    let cog = ComplexOfGroups { scwol, local };
    cog.check()?;
    Ok(cog)
}

/// The local development at a vertex of maximal spherical type, described
/// through the chambers it glues together.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalDevelopment {
    pub face: Face,
    pub boundary_type: GenSet,
    /// Coordinates in `G_T` of the clump chambers containing the vertex.
    pub clump_chambers: Vec<DirectProductElement>,
    /// `|G_{T_∂}| · |C ∩ σ|`: chambers of the development before gluing.
    pub copies: usize,
    /// Distinct chambers `g + x` of the development.
    pub distinct: usize,
    /// For each `t ∈ T`, the number of points of the `t`-factor of the link.
    pub factors: Vec<(Gen, usize)>,
    /// The chambers form the full product of the factors, with no overlaps.
    pub is_join: bool,
    /// The development is the whole residue: a join of `q_t`-point sets.
    pub complete: bool,
}

pub fn local_development(b: &Building, c: &Clump, sigma: &Face) -> Result<LocalDevelopment> {
    if !b.maximal_spherical().contains(&sigma.ty) {
        return Err(Error::Domain(format!(
            "local development is only computed at maximal spherical type, not {}",
            show_type(b, sigma.ty)
        )));
    }
    let inside = c.chambers_in(b, sigma);
    let bt = boundary_type(b, c, sigma)?;
    let gp = b.gp();
    let coords: Vec<DirectProductElement> = inside.iter().map(|ch| gp.flatten(&gp.quotient(&sigma.rep, ch))).collect();
    let mut images: BTreeSet<DirectProductElement> = BTreeSet::new();
    let mut copies = 0usize;
    for g in gp.ds_elements(bt) {
        for x in &coords {
            copies += 1;
            images.insert(gp.ds_multiply(&g, x));
        }
    }
    let factors: Vec<(Gen, usize)> = sigma
        .ty
        .iter()
        .map(|t| (t, images.iter().map(|d| d.component(t)).collect::<BTreeSet<_>>().len()))
        .collect();
    let product: usize = factors.iter().map(|&(_, n)| n).product();
    let is_join = copies == images.len() && product == images.len();
    let complete = is_join && images.len() == gp.order(sigma.ty);
    Ok(LocalDevelopment {
        face: sigma.clone(),
        boundary_type: bt,
        clump_chambers: coords,
        copies,
        distinct: images.len(),
        factors,
        is_join,
        complete,
    })
}

/// Per-vertex admissibility evidence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexVerdict {
    pub vertex: String,
    pub boundary_type: GenSet,
    pub boundary_type_all: GenSet,
    pub chamber_count: usize,
    pub expected_chamber_count: usize,
    /// Every boundary-type mirror through the vertex is a boundary mirror,
    /// with the expected number of them.
    pub mirror_law: bool,
    pub complete: bool,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub vertices: Vec<VertexVerdict>,
}

impl AdmissibilityReport {
    pub fn failures(&self) -> impl Iterator<Item = &VertexVerdict> {
        self.vertices.iter().filter(|v| !v.ok)
    }
}

/// Checks completeness of the local development at every vertex of
/// maximal spherical type, together with the chamber-count law and the
/// agreement of the two boundary-type characterizations.
pub fn is_admissible(b: &Building, c: &Clump) -> Result<AdmissibilityReport> {
    let mut faces: BTreeSet<Face> = BTreeSet::new();
    for ch in c.chambers() {
        for &t in b.maximal_spherical() {
            faces.insert(b.face_of(ch, t));
        }
    }
    let bd = c.boundary(b);
    let mut vertices = Vec::with_capacity(faces.len());
    for f in &faces {
        let dev = local_development(b, c, f)?;
        let all = boundary_type_all(b, c, f)?;
        let bt = dev.boundary_type;
        let expected = b.gp().order(f.ty.minus(bt));
        let inside: Vec<Chamber> = c.chambers_in(b, f);
        let mirror_law = bt.iter().all(|s| {
            let panels: BTreeSet<Face> = inside.iter().map(|h| b.panel_of(h, s)).collect();
            panels.len() == expected && panels.iter().all(|p| bd.contains(p))
        });
        let ok = dev.complete && all == bt && inside.len() == expected && mirror_law;
        vertices.push(VertexVerdict {
            vertex: show_face(b, f),
            boundary_type: bt,
            boundary_type_all: all,
            chamber_count: inside.len(),
            expected_chamber_count: expected,
            mirror_law,
            complete: dev.complete,
            ok,
        });
    }
    Ok(AdmissibilityReport { admissible: vertices.iter().all(|v| v.ok), vertices })
}

/// A presentation by generators of finite cyclic groups, power relators
/// and commutators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presentation {
    /// `(name, order)`.
    pub generators: Vec<(String, u32)>,
    /// Pairs of generator indices that commute.
    pub commutators: Vec<(usize, usize)>,
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<&str> = self.generators.iter().map(|(n, _)| n.as_str()).collect();
        let mut rels: Vec<String> = self.generators.iter().map(|(n, q)| format!("{n}^{q}")).collect();
        rels.extend(self.commutators.iter().map(|&(x, y)| format!("[{},{}]", gens[x], gens[y])));
        write!(f, "<{} | {}>", gens.join(", "), rels.join(", "))
    }
}

/// The fundamental group of a simple complex of groups with natural
/// inclusions, as the direct limit of its local groups.
///
/// Assumes the underlying scwol is simply connected, so edge generators
/// are trivial. Generator copies of the same type are identified along
/// edges; each connected family becomes one generator.
pub fn presentation(b: &Building, cog: &ComplexOfGroups) -> Presentation {
    let mut slots: Vec<(usize, Gen)> = Vec::new();
    let mut slot_of: HashMap<(usize, Gen), usize> = HashMap::new();
    for (v, t) in cog.local.iter().enumerate() {
        for s in t.iter() {
            slot_of.insert((v, s), slots.len());
            slots.push((v, s));
        }
    }
    let mut uf = UnionFind::new(slots.len());
    for &(i, t) in &cog.scwol.edges {
        for s in cog.local[i].iter() {
            uf.union(slot_of[&(i, s)], slot_of[&(t, s)]);
        }
    }
    // Number the classes by the least slot they contain, then name them.
    let mut class: BTreeMap<usize, usize> = BTreeMap::new();
    let mut of_slot = vec![0; slots.len()];
    for (k, slot) in of_slot.iter_mut().enumerate() {
        let r = uf.find(k);
        let n = class.len();
        *slot = *class.entry(r).or_insert(n);
    }
    let mut gen_type = vec![0; class.len()];
    for k in 0..slots.len() {
        gen_type[of_slot[k]] = slots[k].1;
    }
    let mut per_type: BTreeMap<Gen, usize> = BTreeMap::new();
    for &s in &gen_type {
        *per_type.entry(s).or_default() += 1;
    }
    let mut seen: BTreeMap<Gen, usize> = BTreeMap::new();
    let generators = gen_type
        .iter()
        .map(|&s| {
            let name = b.sys().name(s);
            let k = seen.entry(s).or_default();
            *k += 1;
            let label = if per_type[&s] == 1 { name.to_string() } else { format!("{name}{}", k) };
            (label, b.q(s))
        })
        .collect();
    let mut commutators = BTreeSet::new();
    for (v, t) in cog.local.iter().enumerate() {
        for s in t.iter() {
            for u in t.iter().filter(|&u| u > s) {
                let (x, y) = (of_slot[slot_of[&(v, s)]], of_slot[slot_of[&(v, u)]]);
                commutators.insert((x.min(y), x.max(y)));
            }
        }
    }
    Presentation { generators, commutators: commutators.into_iter().collect() }
}
