//! Edge labelings of clump scwols built along unfolding sequences, and the
//! coverings `G_X(C) → G_X(Y_0)` they define.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::building::{Building, Chamber, Face};
use crate::clump::{sheets, unfold, Clump, Side, UnfoldingSequence};
use crate::cog::{canonical_cog, scwol_of, show_face, ComplexOfGroups};
use crate::coxeter::GenSet;
use crate::error::{Error, Result};
use crate::graphprod::DirectProductElement;
use crate::groups::{verify_covering, Amb, CheckReport, CoveringCheck, Morphism};

/// `λ(a) ∈ G_S` for each edge `a = (i(a), t(a))` of a clump scwol.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeLabeling {
    #[serde(with = "pairs")]
    pub labels: BTreeMap<(Face, Face), DirectProductElement>,
}

mod pairs {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Entry {
        from: Face,
        to: Face,
        label: DirectProductElement,
    }

    pub fn serialize<S: Serializer>(m: &BTreeMap<(Face, Face), DirectProductElement>, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<Entry> =
            m.iter().map(|((f, t), l)| Entry { from: f.clone(), to: t.clone(), label: l.clone() }).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<(Face, Face), DirectProductElement>, D::Error> {
        let v: Vec<Entry> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|e| ((e.from, e.to), e.label)).collect())
    }
}

impl EdgeLabeling {
    pub fn get(&self, from: &Face, to: &Face) -> Option<&DirectProductElement> {
        self.labels.get(&(from.clone(), to.clone()))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Every edge of the scwol of `Y_0` labeled by the identity.
pub fn label_initial(b: &Building) -> EdgeLabeling {
    let x = scwol_of(b, &Clump::base());
    let zero = b.gp().ds_zero();
    let labels = x
        .edges
        .iter()
        .map(|&(i, t)| ((x.vertices[i].clone(), x.vertices[t].clone()), zero.clone()))
        .collect();
    EdgeLabeling { labels }
}

/// Extends `prev`, a labeling of `c_prev`, to the unfolding of `c_prev`
/// along `k`. Returns the unfolded clump and its labeling.
///
/// Old edges keep their labels. A new edge is lifted to `c_prev` by sending
/// each new chamber to the chamber of `c_prev` in its `u`-panel and copies
/// the lifted label; if its terminal face lies in `k`, the `u`-component is
/// replaced by the element assigned to the sheet containing it.
pub fn label_unfold(b: &Building, prev: &EdgeLabeling, c_prev: &Clump, k: &Side) -> Result<(Clump, EdgeLabeling)> {
    let u = k.ty;
    let next = unfold(b, c_prev, k)?;
    let part = sheets(b, c_prev, k)?;
    let q = b.q(u);
    if part.blocks.len() != q as usize - 1 {
        return Err(Error::Internal(format!("unfolding produced {} sheets, expected {}", part.blocks.len(), q - 1)));
    }
    let anchor = &k.mirrors[0];
    let base_chamber = c_prev
        .chambers_in(b, anchor)
        .into_iter()
        .next()
        .ok_or_else(|| Error::Internal("mirror of side meets no chamber".into()))?;
    let into_anchor = (b.face_of(&base_chamber, GenSet::EMPTY), anchor.clone());
    let g = prev
        .labels
        .get(&into_anchor)
        .ok_or_else(|| Error::Internal("previous labeling misses an edge into the side".into()))?
        .component(u);
    let sheet_elements: Vec<u32> = (0..q).filter(|&e| e != g).collect();

    let fold = |phi: &Chamber| -> Result<Chamber> {
        let mut found = b.panel(phi, u).into_iter().filter(|x| c_prev.contains(x));
        match (found.next(), found.next()) {
            (Some(psi), None) => Ok(psi),
            _ => Err(Error::Internal(format!("new chamber {} does not fold onto one old chamber", b.gp().show(phi)))),
        }
    };

    let x = scwol_of(b, &next);
    let mut labels = BTreeMap::new();
    for &(i, t) in &x.edges {
        let (fi, ft) = (&x.vertices[i], &x.vertices[t]);
        let key = (fi.clone(), ft.clone());
        if let Some(l) = prev.labels.get(&key) {
            labels.insert(key, l.clone());
            continue;
        }
        let inside = next.chambers_in(b, fi);
        let mut lifted: Option<(Face, Face)> = None;
        let mut sheet: Option<usize> = None;
        for phi in &inside {
            let psi = fold(phi)?;
            let lift = (b.face_of(&psi, fi.ty), b.face_of(&psi, ft.ty));
            match &lifted {
                None => lifted = Some(lift),
                Some(l) if *l != lift => {
                    return Err(Error::Internal(format!("edge {} has two lifts", show_face(b, fi))));
                }
                _ => {}
            }
            let sh = part
                .sheet_of(phi)
                .ok_or_else(|| Error::Internal("new chamber outside every sheet".into()))?;
            match sheet {
                None => sheet = Some(sh),
                Some(s) if s != sh => {
                    return Err(Error::Internal(format!(
                        "sheet constancy fails at {} -> {}",
                        show_face(b, fi),
                        show_face(b, ft)
                    )));
                }
                _ => {}
            }
        }
        let lift = lifted.ok_or_else(|| Error::Internal("new face meets no chamber".into()))?;
        let base = prev
            .labels
            .get(&lift)
            .ok_or_else(|| Error::Internal(format!("lift of {} -> {} is unlabeled", show_face(b, fi), show_face(b, ft))))?;
        let label = if ft.ty.contains(u) { base.with_component(u, sheet_elements[sheet.unwrap()]) } else { base.clone() };
        labels.insert(key, label);
    }
    Ok((next, EdgeLabeling { labels }))
}

/// Labelings of every clump of an unfolding sequence.
pub fn label_sequence(b: &Building, seq: &UnfoldingSequence) -> Result<Vec<EdgeLabeling>> {
    let mut out = vec![label_initial(b)];
    for (i, k) in seq.sides.iter().enumerate() {
        let (next, l) = label_unfold(b, out.last().unwrap(), &seq.clumps[i], k)?;
        if next != seq.clumps[i + 1] {
            return Err(Error::Internal("relabeled unfolding disagrees with the sequence".into()));
        }
        out.push(l);
    }
    Ok(out)
}

/// Results of the three labeling properties.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelingReport {
    pub unlabeled: CheckReport,
    pub support: CheckReport,
    pub multiplicative: CheckReport,
    pub bijective: CheckReport,
    /// Coset-map verdict for each face and each smaller spherical type.
    #[serde(skip)]
    pub coset_verdicts: BTreeMap<(Face, GenSet), bool>,
}

impl LabelingReport {
    pub fn passed(&self) -> bool {
        self.unlabeled.passed() && self.support.passed() && self.multiplicative.passed() && self.bijective.passed()
    }
}

/// Checks that `λ` is total, that `λ(a) ∈ G_{type(t(a))}`, that
/// `λ(ab) = λ(a)λ(b)`, and that every coset map into `Y_0` is a bijection.
///
/// The coset condition at `σ` of type `T` against types `U ⊊ T` is tested
/// through the labels: the edges into `σ` from faces of type `U` must have
/// pairwise distinct projections to `T − (T_∂σ ∪ U)`, each must satisfy
/// `T_∂i(a) = T_∂σ ∩ U`, and the coset counts must add up to `|G_{T−U}|`.
pub fn verify_labeling(b: &Building, c: &Clump, l: &EdgeLabeling) -> Result<LabelingReport> {
    let cog = canonical_cog(b, c)?;
    let x = &cog.scwol;
    let mut r = LabelingReport::default();
    let mut lab: Vec<Option<&DirectProductElement>> = Vec::with_capacity(x.edges.len());
    for &(i, t) in &x.edges {
        let got = l.get(&x.vertices[i], &x.vertices[t]);
        r.unlabeled.check(got.is_some(), || {
            format!("edge {} -> {} unlabeled", show_face(b, &x.vertices[i]), show_face(b, &x.vertices[t]))
        });
        lab.push(got);
    }
    if !r.unlabeled.passed() {
        return Ok(r);
    }
    let lab: Vec<&DirectProductElement> = lab.into_iter().map(Option::unwrap).collect();
    for (a, &(i, t)) in x.edges.iter().enumerate() {
        r.support.check(lab[a].support().is_subset(x.vertices[t].ty), || {
            format!("label on {} -> {} not supported in its type", show_face(b, &x.vertices[i]), show_face(b, &x.vertices[t]))
        });
    }
    for (&(a, bb), &ab) in &x.composable_pairs() {
        let ok = b.gp().ds_multiply(lab[a], lab[bb]) == *lab[ab];
        r.multiplicative.check(ok, || format!("λ(ab) != λ(a)λ(b) for edges {a}, {bb}"));
    }
    let into = x.edges_into();
    for (s, f) in x.vertices.iter().enumerate() {
        let bs = cog.local[s];
        for &uty in b.spherical_subsets().iter().filter(|u| u.is_subset(f.ty) && **u != f.ty) {
            let off = f.ty.minus(bs.union(uty));
            let mut projections = BTreeSet::new();
            let mut distinct = true;
            let mut injective = true;
            let mut count = 0usize;
            for &a in into[s].iter().filter(|&&a| x.vertices[x.edges[a].0].ty == uty) {
                let bi = cog.local[x.edges[a].0];
                distinct &= projections.insert(lab[a].project(off));
                injective &= bi == bs.inter(uty);
                count += b.gp().order(bs) / b.gp().order(bi);
            }
            let expected = b.gp().order(f.ty.minus(uty));
            r.coset_verdicts.insert((f.clone(), uty), distinct && injective && count == expected);
            r.bijective.check(distinct && injective && count == expected, || {
                format!(
                    "coset map at {} from type {:?} fails: distinct={distinct} injective={injective} count={count}/{expected}",
                    show_face(b, f),
                    uty
                )
            });
        }
    }
    Ok(r)
}

/// A verified covering `G_X(C) → G_X(Y_0)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Covering {
    pub source_vertices: usize,
    pub source_edges: usize,
    pub check: CoveringCheck,
    pub sheets: usize,
}

/// The morphism `G_X(C) → G_X(Y_0)` given by the type projection on the
/// scwol, inclusions on local groups and `φ(a) = λ(a)`, as generic data.
pub fn covering_morphism(
    b: &Building,
    source: &ComplexOfGroups,
    target: &ComplexOfGroups,
    l: &EdgeLabeling,
) -> Result<Morphism> {
    let amb = crate::groups::Ambient::new(b.gp().params());
    let vmap: Vec<usize> = source
        .scwol
        .vertices
        .iter()
        .map(|f| target.scwol.vertex(&b.face_of(&b.base(), f.ty)).expect("Y_0 has a face of every spherical type"))
        .collect();
    let mut emap = Vec::with_capacity(source.scwol.edges.len());
    let mut elem: Vec<Amb> = Vec::with_capacity(source.scwol.edges.len());
    for &(i, t) in &source.scwol.edges {
        emap.push(target.scwol.edge(vmap[i], vmap[t]).expect("Y_0 has an edge for every type inclusion"));
        let lab = l
            .get(&source.scwol.vertices[i], &source.scwol.vertices[t])
            .ok_or_else(|| Error::Domain("labeling is not total".into()))?;
        elem.push(amb.from_ds(lab));
    }
    Ok(Morphism { vmap, emap, local: vec![amb.identity(); source.scwol.vertices.len()], elem })
}

/// Runs the definition-level covering check without turning failures into
/// errors.
pub fn check_covering(b: &Building, c: &Clump, l: &EdgeLabeling) -> Result<CoveringCheck> {
    let source = canonical_cog(b, c)?;
    let target = canonical_cog(b, &Clump::base())?;
    let m = covering_morphism(b, &source, &target, l)?;
    let (amb, src) = source.to_group_complex(b);
    let (_, dst) = target.to_group_complex(b);
    let mut check = verify_covering(&amb, &src, &dst, &m);
    // Re-key pair verdicts by face and target edge initial type.
    check.pair_verdicts = check
        .pair_verdicts
        .into_iter()
        .map(|((v, e), ok)| ((v, target.scwol.vertices[target.scwol.initial(e)].ty.0 as usize), ok))
        .collect();
    Ok(check)
}

/// Compares the label-based coset test with the direct fiber check on every
/// `(σ, b)` pair. Returns the number of pairs and the number of disagreements.
pub fn compare_coset_checks(b: &Building, c: &Clump, l: &EdgeLabeling) -> Result<(usize, usize)> {
    let report = verify_labeling(b, c, l)?;
    let check = check_covering(b, c, l)?;
    Ok((check.pair_verdicts.len(), coset_disagreements(b, c, &report, &check)))
}

/// Number of `(σ, b)` pairs on which the two coset tests disagree, counting
/// pairs present in only one of them.
pub fn coset_disagreements(b: &Building, c: &Clump, report: &LabelingReport, check: &CoveringCheck) -> usize {
    let x = scwol_of(b, c);
    let mut disagree = 0;
    for (&(v, ty), &ok) in &check.pair_verdicts {
        let key = (x.vertices[v].clone(), GenSet(ty as u64));
        if report.coset_verdicts.get(&key) != Some(&ok) {
            disagree += 1;
        }
    }
    disagree + report.coset_verdicts.len().abs_diff(check.pair_verdicts.len())
}

/// Assembles the covering and checks it directly against the definition.
pub fn build_covering(b: &Building, c: &Clump, l: &EdgeLabeling) -> Result<Covering> {
    let check = check_covering(b, c, l)?;
    if !check.passed() {
        let first = check
            .morphism
            .failures
            .iter()
            .chain(&check.fibers.failures)
            .next()
            .cloned()
            .unwrap_or_else(|| format!("sheet counts differ across vertices: {:?}", check.sheet_counts));
        return Err(Error::Verification(first));
    }
    let sheets = check.sheets().unwrap();
    let x = scwol_of(b, c);
    Ok(Covering { source_vertices: x.vertices.len(), source_edges: x.edges.len(), check, sheets })
}

/// Index of `π_1(G_X(C))` in `π_1(G_X(Y_0))`: the sheet count of the covering.
pub fn lattice_index(b: &Building, c: &Clump, l: &EdgeLabeling) -> Result<usize> {
    Ok(build_covering(b, c, l)?.sheets)
}
