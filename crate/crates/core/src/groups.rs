//! Finite complexes of groups over scwols, morphisms between them, and a
//! direct checker for the covering condition.
//!
//! Every local group used in this crate embeds in the ambient group
//! `G_S ⋊ P`, where `P` permutes generators preserving `q`, and every
//! monomorphism, local map and twisting element is conjugation by or
//! multiplication with an ambient element. The checker works in that
//! ambient group and is independent of how the complexes were built.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::coxeter::Gen;
use crate::graphprod::DirectProductElement;

/// An element `(g, π)` of `G_S ⋊ P`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Amb {
    pub g: Vec<u8>,
    pub p: Vec<u8>,
}

/// Arithmetic in `G_S ⋊ P` for fixed cyclic orders.
#[derive(Clone, Debug)]
pub struct Ambient {
    q: Vec<u32>,
}

impl Ambient {
    pub fn new(q: &[u32]) -> Self {
        Ambient { q: q.to_vec() }
    }

    pub fn rank(&self) -> usize {
        self.q.len()
    }

    pub fn identity(&self) -> Amb {
        Amb { g: vec![0; self.rank()], p: (0..self.rank() as u8).collect() }
    }

    pub fn from_ds(&self, d: &DirectProductElement) -> Amb {
        Amb { g: d.components().to_vec(), p: (0..self.rank() as u8).collect() }
    }

    pub fn from_perm(&self, perm: &[Gen]) -> Amb {
        Amb { g: vec![0; self.rank()], p: perm.iter().map(|&x| x as u8).collect() }
    }

    /// `(π·g)_{π(t)} = g_t`.
    fn act(&self, p: &[u8], g: &[u8]) -> Vec<u8> {
        let mut out = vec![0; g.len()];
        for (t, &x) in g.iter().enumerate() {
            out[p[t] as usize] = x;
        }
        out
    }

    pub fn mul(&self, a: &Amb, b: &Amb) -> Amb {
        let moved = self.act(&a.p, &b.g);
        let g = a.g.iter().zip(&moved).enumerate().map(|(s, (&x, &y))| ((x as u32 + y as u32) % self.q[s]) as u8).collect();
        let p = b.p.iter().map(|&t| a.p[t as usize]).collect();
        Amb { g, p }
    }

    pub fn inv(&self, a: &Amb) -> Amb {
        let mut pinv = vec![0u8; a.p.len()];
        for (t, &x) in a.p.iter().enumerate() {
            pinv[x as usize] = t as u8;
        }
        let moved = self.act(&pinv, &a.g);
        let g = moved.iter().enumerate().map(|(s, &x)| ((self.q[s] - x as u32) % self.q[s]) as u8).collect();
        Amb { g, p: pinv }
    }

    /// `x g x⁻¹`.
    pub fn conj(&self, x: &Amb, g: &Amb) -> Amb {
        self.mul(&self.mul(x, g), &self.inv(x))
    }

    pub fn is_identity(&self, a: &Amb) -> bool {
        a.g.iter().all(|&x| x == 0) && a.p.iter().enumerate().all(|(i, &x)| i == x as usize)
    }
}

/// A complex of finite groups over a finite scwol.
#[derive(Clone, Debug, Default)]
pub struct GroupComplex {
    /// Human-readable vertex names, used in reports and DOT output.
    pub labels: Vec<String>,
    /// `(i(a), t(a))` for each edge `a`.
    pub edges: Vec<(usize, usize)>,
    /// `(a, b) ↦ ab` for composable pairs, i.e. `i(a) = t(b)`.
    pub compose: BTreeMap<(usize, usize), usize>,
    /// Sorted element lists of the local groups.
    pub groups: Vec<Vec<Amb>>,
    /// `ψ_a = Ad(psi[a])`.
    pub psi: Vec<Amb>,
    /// Twisting elements `g_{a,b}`; absent entries are the identity.
    pub twist: BTreeMap<(usize, usize), Amb>,
}

impl GroupComplex {
    pub fn vertex_count(&self) -> usize {
        self.groups.len()
    }

    /// Edges grouped by terminal vertex.
    pub fn edges_into(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertex_count()];
        for (a, &(_, t)) in self.edges.iter().enumerate() {
            out[t].push(a);
        }
        out
    }

    fn twist_of(&self, amb: &Ambient, a: usize, b: usize) -> Amb {
        self.twist.get(&(a, b)).cloned().unwrap_or_else(|| amb.identity())
    }

    fn contains(&self, v: usize, x: &Amb) -> bool {
        self.groups[v].binary_search(x).is_ok()
    }

    /// DOT rendering with local groups as vertex labels.
    pub fn to_dot(&self, group_labels: &[String]) -> String {
        let mut out = String::from("digraph scwol {\n  rankdir=BT;\n");
        for (v, l) in self.labels.iter().enumerate() {
            let g = group_labels.get(v).map(String::as_str).unwrap_or("");
            out.push_str(&format!("  v{v} [label=\"{}\\n{}\"];\n", l.replace('"', "'"), g));
        }
        for &(i, t) in &self.edges {
            out.push_str(&format!("  v{i} -> v{t};\n"));
        }
        out.push_str("}\n");
        out
    }
}

/// A morphism of complexes of groups over a scwol morphism.
#[derive(Clone, Debug, Default)]
pub struct Morphism {
    pub vmap: Vec<usize>,
    pub emap: Vec<usize>,
    /// `φ_σ = Ad(local[σ])`.
    pub local: Vec<Amb>,
    /// `φ(a)`.
    pub elem: Vec<Amb>,
}

/// `Φ ∘ Φ'`: local maps compose, and `(Φ ∘ Φ')(a) = φ_{t(f'(a))}(φ'(a)) · φ(f'(a))`.
pub fn compose_morphisms(amb: &Ambient, outer: &Morphism, inner: &Morphism, inner_src: &GroupComplex) -> Morphism {
    let vmap = inner.vmap.iter().map(|&v| outer.vmap[v]).collect();
    let emap = inner.emap.iter().map(|&a| outer.emap[a]).collect();
    let local = inner.vmap.iter().zip(&inner.local).map(|(&v, l)| amb.mul(&outer.local[v], l)).collect();
    let elem = inner
        .emap
        .iter()
        .enumerate()
        .map(|(a, &fa)| {
            let t = inner.vmap[inner_src.edges[a].1];
            amb.mul(&amb.conj(&outer.local[t], &inner.elem[a]), &outer.elem[fa])
        })
        .collect();
    Morphism { vmap, emap, local, elem }
}

/// Outcome of a structural check; `failures` holds the first few messages.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub checks: usize,
    pub failure_count: usize,
    pub failures: Vec<String>,
}

const MAX_LISTED: usize = 20;

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }

    pub fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failure_count += 1;
            if self.failures.len() < MAX_LISTED {
                self.failures.push(msg());
            }
        }
    }

    pub fn merge(&mut self, other: CheckReport) {
        self.checks += other.checks;
        self.failure_count += other.failure_count;
        for f in other.failures {
            if self.failures.len() < MAX_LISTED {
                self.failures.push(f);
            }
        }
    }
}

/// Scwol axioms, local groups being subgroups, and the complex-of-groups
/// compatibility and cocycle conditions.
pub fn verify_complex(amb: &Ambient, c: &GroupComplex) -> CheckReport {
    let mut r = CheckReport::default();
    let id = amb.identity();
    for (v, g) in c.groups.iter().enumerate() {
        let set: BTreeSet<&Amb> = g.iter().collect();
        r.check(set.contains(&id), || format!("local group at {} lacks identity", c.labels[v]));
        let closed = g.iter().all(|x| g.iter().all(|y| set.contains(&amb.mul(x, y))));
        r.check(closed, || format!("local group at {} not closed", c.labels[v]));
        r.check(g.windows(2).all(|w| w[0] < w[1]), || format!("local group at {} not sorted", c.labels[v]));
    }
    for (a, &(i, t)) in c.edges.iter().enumerate() {
        r.check(i != t, || format!("edge {a} is a loop"));
        let ok = c.groups[i].iter().all(|g| c.contains(t, &amb.conj(&c.psi[a], g)));
        r.check(ok, || format!("ψ along {} -> {} leaves the target group", c.labels[i], c.labels[t]));
    }
    let into = c.edges_into();
    for (a, &(ia, ta)) in c.edges.iter().enumerate() {
        for &b in &into[ia] {
            let ab = c.compose.get(&(a, b));
            r.check(ab.is_some(), || format!("composable pair ({a},{b}) has no composite"));
            let Some(&ab) = ab else { continue };
            let ib = c.edges[b].0;
            r.check(c.edges[ab] == (ib, ta), || format!("composite of ({a},{b}) has wrong endpoints"));
            let g = c.twist_of(amb, a, b);
            r.check(c.contains(ta, &g), || format!("twist ({a},{b}) outside local group"));
            let lhs = amb.mul(&g, &c.psi[ab]);
            let rhs = amb.mul(&c.psi[a], &c.psi[b]);
            let ok = c.groups[ib].iter().all(|x| amb.conj(&lhs, x) == amb.conj(&rhs, x));
            r.check(ok, || format!("Ad(g_ab)ψ_ab != ψ_a ψ_b for ({a},{b})"));
        }
    }
    for (&(a, b), &ab) in &c.compose {
        let ib = c.edges[b].0;
        for &cc in &into[ib] {
            let (Some(&bc), Some(&abc1)) = (c.compose.get(&(b, cc)), c.compose.get(&(ab, cc))) else { continue };
            let Some(&abc2) = c.compose.get(&(a, bc)) else { continue };
            r.check(abc1 == abc2, || format!("composition not associative at ({a},{b},{cc})"));
            let lhs = amb.mul(&amb.conj(&c.psi[a], &c.twist_of(amb, b, cc)), &c.twist_of(amb, a, bc));
            let rhs = amb.mul(&c.twist_of(amb, a, b), &c.twist_of(amb, ab, cc));
            r.check(lhs == rhs, || format!("cocycle condition fails at ({a},{b},{cc})"));
        }
    }
    r
}

/// The morphism conditions relating local maps, edge elements and twists.
pub fn verify_morphism(amb: &Ambient, src: &GroupComplex, dst: &GroupComplex, m: &Morphism) -> CheckReport {
    let mut r = CheckReport::default();
    for (a, &(i, t)) in src.edges.iter().enumerate() {
        let fa = m.emap[a];
        r.check(dst.edges[fa] == (m.vmap[i], m.vmap[t]), || format!("edge {a} not mapped over its endpoints"));
        r.check(dst.contains(m.vmap[t], &m.elem[a]), || format!("φ({a}) outside the target local group"));
        for g in &src.groups[i] {
            let lhs = amb.conj(&m.elem[a], &amb.conj(&dst.psi[fa], &amb.conj(&m.local[i], g)));
            let rhs = amb.conj(&m.local[t], &amb.conj(&src.psi[a], g));
            if lhs != rhs {
                r.check(false, || format!("Ad(φ(a))ψ_f(a)φ_i != φ_t ψ_a on edge {} -> {}", src.labels[i], src.labels[t]));
                break;
            }
        }
        r.checks += 1;
    }
    for (v, g) in src.groups.iter().enumerate() {
        let ok = g.iter().all(|x| dst.contains(m.vmap[v], &amb.conj(&m.local[v], x)));
        r.check(ok, || format!("local map at {} leaves the target group", src.labels[v]));
    }
    for (&(a, b), &ab) in &src.compose {
        let fab = dst.compose.get(&(m.emap[a], m.emap[b]));
        r.check(fab == Some(&m.emap[ab]), || format!("f(ab) != f(a)f(b) for ({a},{b})"));
        let t = src.edges[a].1;
        let lhs = amb.mul(&amb.conj(&m.local[t], &src.twist_of(amb, a, b)), &m.elem[ab]);
        let rhs = amb.mul(
            &amb.mul(&m.elem[a], &amb.conj(&dst.psi[m.emap[a]], &m.elem[b])),
            &dst.twist_of(amb, m.emap[a], m.emap[b]),
        );
        r.check(lhs == rhs, || format!("twist compatibility fails at ({a},{b})"));
    }
    r
}

/// Result of checking that a morphism is a covering.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoveringCheck {
    pub morphism: CheckReport,
    /// Number of `(σ, b)` pairs whose coset map was tested.
    pub fiber_pairs: usize,
    pub fibers: CheckReport,
    /// Verdict of the coset-map test for each `(source vertex, target edge)`.
    pub pair_verdicts: BTreeMap<(usize, usize), bool>,
    /// `Σ_{σ ↦ τ} [H_τ : φ_σ(G_σ)]` for each target vertex `τ`.
    pub sheet_counts: Vec<usize>,
}

impl CoveringCheck {
    pub fn passed(&self) -> bool {
        self.morphism.passed() && self.fibers.passed() && self.sheets().is_some()
    }

    /// The common sheet count, if it is the same at every target vertex.
    pub fn sheets(&self) -> Option<usize> {
        let first = *self.sheet_counts.first()?;
        self.sheet_counts.iter().all(|&n| n == first).then_some(first)
    }
}

fn coset_key(amb: &Ambient, x: &Amb, sub: &[Amb]) -> Amb {
    sub.iter().map(|h| amb.mul(x, h)).min().expect("subgroups are nonempty")
}

/// Checks the morphism conditions, injectivity of local maps, and that for
/// each source vertex `σ` and target edge `b` with `t(b) = f(σ)` the map
/// `∐_{a ↦ b, t(a) = σ} G_σ / ψ_a(G_{i(a)}) → H_{f(σ)} / ψ_b(H_{i(b)})`,
/// `g ↦ φ_σ(g) φ(a)`, is a bijection.
pub fn verify_covering(amb: &Ambient, src: &GroupComplex, dst: &GroupComplex, m: &Morphism) -> CoveringCheck {
    let mut out = CoveringCheck { morphism: verify_morphism(amb, src, dst, m), ..Default::default() };
    let src_into = src.edges_into();
    let dst_into = dst.edges_into();
    for (v, g) in src.groups.iter().enumerate() {
        let images: BTreeSet<Amb> = g.iter().map(|x| amb.conj(&m.local[v], x)).collect();
        out.fibers.check(images.len() == g.len(), || format!("local map at {} not injective", src.labels[v]));
        let fv = m.vmap[v];
        for &b in &dst_into[fv] {
            out.fiber_pairs += 1;
            let ib = dst.edges[b].0;
            let target_sub: Vec<Amb> = dst.groups[ib].iter().map(|x| amb.conj(&dst.psi[b], x)).collect();
            let expected = dst.groups[fv].len() / target_sub.len();
            let mut seen: BTreeSet<Amb> = BTreeSet::new();
            let mut collision = false;
            let mut total = 0usize;
            for &a in src_into[v].iter().filter(|&&a| m.emap[a] == b) {
                let ia = src.edges[a].0;
                let sub: Vec<Amb> = src.groups[ia].iter().map(|x| amb.conj(&src.psi[a], x)).collect();
                let reps: BTreeSet<Amb> = g.iter().map(|x| coset_key(amb, x, &sub)).collect();
                for rep in reps {
                    total += 1;
                    let image = amb.mul(&amb.conj(&m.local[v], &rep), &m.elem[a]);
                    if !seen.insert(coset_key(amb, &image, &target_sub)) {
                        collision = true;
                    }
                }
            }
            let ok = !collision && total == expected;
            out.pair_verdicts.insert((v, b), ok);
            out.fibers.check(ok, || {
                format!(
                    "coset map at ({}, {} -> {}) not bijective: {} domain cosets, {} target cosets{}",
                    src.labels[v],
                    dst.labels[ib],
                    dst.labels[fv],
                    total,
                    expected,
                    if collision { ", collision" } else { "" }
                )
            });
        }
    }
    let mut counts = vec![0usize; dst.vertex_count()];
    let mut divisible = true;
    for (v, g) in src.groups.iter().enumerate() {
        let h = dst.groups[m.vmap[v]].len();
        divisible &= h.is_multiple_of(g.len());
        counts[m.vmap[v]] += h / g.len();
    }
    out.fibers.check(divisible, || "local group order does not divide target order".into());
    out.sheet_counts = counts;
    out
}
