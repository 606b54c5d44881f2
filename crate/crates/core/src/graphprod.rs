//! The graph product of cyclic groups `Z/q_s` over the commutation graph of
//! a right-angled Coxeter system, and the direct product `G_S = ∏ Z/q_s`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::coxeter::{lex_normal, CoxeterSystem, Gen, GenSet, WElement};
use crate::error::{Error, Result};

/// Largest supported cyclic order (exponents are stored as bytes).
pub const MAX_Q: u32 = 255;

/// A graph-product element in normal form: nontrivial syllables `(s, e)` with
/// `1 <= e < q_s`, reduced, and ShortLex-least among shuffles.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProductElement {
    syl: Vec<(u8, u8)>,
}

impl ProductElement {
    pub fn identity() -> Self {
        ProductElement { syl: Vec::new() }
    }

    pub fn syllables(&self) -> impl Iterator<Item = (Gen, u32)> + '_ {
        self.syl.iter().map(|&(s, e)| (s as Gen, e as u32))
    }

    /// Number of syllables, which is the gallery distance from the identity chamber.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.syl.len()
    }

    pub fn is_identity(&self) -> bool {
        self.syl.is_empty()
    }
}

impl Ord for ProductElement {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.syl.len().cmp(&other.syl.len()).then_with(|| self.syl.cmp(&other.syl))
    }
}

impl PartialOrd for ProductElement {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for ProductElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syl.is_empty() {
            return write!(f, "1");
        }
        for (i, (s, e)) in self.syl.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "g{s}^{e}")?;
        }
        Ok(())
    }
}

/// An element of `G_S = ∏_s Z/q_s`, one component per generator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DirectProductElement {
    c: Vec<u8>,
}

impl DirectProductElement {
    pub fn component(&self, s: Gen) -> u32 {
        self.c[s] as u32
    }

    pub fn components(&self) -> &[u8] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    /// Generators with a nonzero component.
    pub fn support(&self) -> GenSet {
        GenSet::from_gens(self.c.iter().enumerate().filter(|(_, &x)| x != 0).map(|(i, _)| i))
    }

    pub fn with_component(&self, s: Gen, e: u32) -> Self {
        let mut c = self.c.clone();
        c[s] = e as u8;
        DirectProductElement { c }
    }

    /// Zero outside `r`, unchanged inside.
    pub fn project(&self, r: GenSet) -> Self {
        DirectProductElement {
            c: self.c.iter().enumerate().map(|(i, &x)| if r.contains(i) { x } else { 0 }).collect(),
        }
    }
}

/// Standalone form of [`DirectProductElement::project`].
pub fn project_components(g: &DirectProductElement, r: GenSet) -> DirectProductElement {
    g.project(r)
}

/// A right-angled Coxeter system together with the cyclic orders `q_s`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct GraphProduct {
    sys: CoxeterSystem,
    q: Vec<u32>,
}

impl GraphProduct {
    pub fn new(sys: CoxeterSystem, q: Vec<u32>) -> Result<Self> {
        if q.len() != sys.rank() {
            return Err(Error::Input(format!("expected {} parameters, got {}", sys.rank(), q.len())));
        }
        if let Some((s, &x)) = q.iter().enumerate().find(|(_, &x)| !(2..=MAX_Q).contains(&x)) {
            return Err(Error::Input(format!("parameter q_{} = {x} outside [2, {MAX_Q}]", sys.name(s))));
        }
        Ok(GraphProduct { sys, q })
    }

    pub fn sys(&self) -> &CoxeterSystem {
        &self.sys
    }

    pub fn q(&self, s: Gen) -> u32 {
        self.q[s]
    }

    pub fn params(&self) -> &[u32] {
        &self.q
    }

    pub fn rank(&self) -> usize {
        self.sys.rank()
    }

    /// `|G_T| = ∏_{t ∈ T} q_t`.
    pub fn order(&self, t: GenSet) -> usize {
        t.iter().map(|s| self.q[s] as usize).product()
    }

    /// The syllable `g_s^e`, with `e` taken mod `q_s`.
    pub fn generator(&self, s: Gen, e: u32) -> ProductElement {
        let e = e % self.q[s];
        if e == 0 {
            ProductElement::identity()
        } else {
            ProductElement { syl: vec![(s as u8, e as u8)] }
        }
    }

    /// Normal form of an arbitrary product of syllables.
    pub fn from_syllables(&self, word: &[(Gen, u32)]) -> Result<ProductElement> {
        let mut acc = Vec::with_capacity(word.len());
        for &(s, e) in word {
            if s >= self.rank() {
                return Err(Error::Input(format!("unknown generator index {s}")));
            }
            self.push(&mut acc, s, e % self.q[s]);
        }
        Ok(self.normalize(acc))
    }

    /// Appends `g_s^e` to a reduced syllable sequence.
    fn push(&self, acc: &mut Vec<(u8, u8)>, s: Gen, e: u32) {
        if e == 0 {
            return;
        }
        for i in (0..acc.len()).rev() {
            let x = acc[i].0 as Gen;
            if x == s {
                let ne = (acc[i].1 as u32 + e) % self.q[s];
                if ne == 0 {
                    acc.remove(i);
                } else {
                    acc[i].1 = ne as u8;
                }
                return;
            }
            if !self.sys.commutes(x, s) {
                break;
            }
        }
        acc.push((s as u8, e as u8));
    }

    fn normalize(&self, acc: Vec<(u8, u8)>) -> ProductElement {
        ProductElement { syl: lex_normal(&acc, |x| x.0 as Gen, |a, b| self.sys.commutes(a, b)) }
    }

    pub fn multiply(&self, a: &ProductElement, b: &ProductElement) -> ProductElement {
        let mut acc = a.syl.clone();
        for &(s, e) in &b.syl {
            self.push(&mut acc, s as Gen, e as u32);
        }
        self.normalize(acc)
    }

    /// `a · g_s^e`.
    pub fn mul_gen(&self, a: &ProductElement, s: Gen, e: u32) -> ProductElement {
        let mut acc = a.syl.clone();
        self.push(&mut acc, s, e % self.q[s]);
        self.normalize(acc)
    }

    pub fn inverse(&self, a: &ProductElement) -> ProductElement {
        let acc: Vec<(u8, u8)> =
            a.syl.iter().rev().map(|&(s, e)| (s, (self.q[s as usize] - e as u32) as u8)).collect();
        self.normalize(acc)
    }

    /// `a⁻¹ b`.
    pub fn quotient(&self, a: &ProductElement, b: &ProductElement) -> ProductElement {
        self.multiply(&self.inverse(a), b)
    }

    /// Forgets exponents: the image in `W`.
    pub fn projection_to_w(&self, g: &ProductElement) -> WElement {
        self.sys
            .reduce(&g.syllables().map(|(s, _)| s).collect::<Vec<_>>())
            .expect("syllable generators are in range")
    }

    /// Generators occurring as syllables.
    pub fn support(&self, g: &ProductElement) -> GenSet {
        GenSet::from_gens(g.syllables().map(|(s, _)| s))
    }

    /// Removes every syllable with generator in the spherical set `t` that can
    /// be shuffled to the right end: the shortest element of `g G_T`.
    pub fn strip_right(&self, g: &ProductElement, t: GenSet) -> ProductElement {
        if t.is_empty() {
            return g.clone();
        }
        let mut kept: Vec<(u8, u8)> = Vec::with_capacity(g.syl.len());
        let mut blocked_tail: Vec<Gen> = Vec::new();
        for &(s, e) in g.syl.iter().rev() {
            let s = s as Gen;
            let free = t.contains(s) && blocked_tail.iter().all(|&x| self.sys.commutes(x, s));
            if !free {
                blocked_tail.push(s);
                kept.push((s as u8, e));
            }
        }
        kept.reverse();
        self.normalize(kept)
    }

    /// Splits `g = g_u^e · rest` where `e` is the exponent of the `u`-syllable
    /// that can be shuffled to the left end (0 if none).
    pub fn split_left(&self, g: &ProductElement, u: Gen) -> (u32, ProductElement) {
        for (i, &(s, e)) in g.syl.iter().enumerate() {
            if s as Gen == u {
                let mut rest = g.syl.clone();
                rest.remove(i);
                return (e as u32, self.normalize(rest));
            }
            if !self.sys.commutes(s as Gen, u) {
                break;
            }
        }
        (0, g.clone())
    }

    /// Image under the automorphism induced by a permutation of generators
    /// preserving `q` and `m`.
    pub fn apply_perm(&self, g: &ProductElement, perm: &[Gen]) -> ProductElement {
        let acc: Vec<(u8, u8)> = g.syl.iter().map(|&(s, e)| (perm[s as usize] as u8, e)).collect();
        self.normalize(acc)
    }

    /// All elements of the finite subgroup `G_T`, `T` spherical, ordered by exponent vector.
    pub fn subgroup_elements(&self, t: GenSet) -> Vec<ProductElement> {
        self.ds_elements(t).iter().map(|d| self.embed(d)).collect()
    }

    /// The element of `G_T ⊂ Γ₀` with the given components (support must be spherical).
    pub fn embed(&self, d: &DirectProductElement) -> ProductElement {
        let acc: Vec<(u8, u8)> =
            d.c.iter().enumerate().filter(|(_, &x)| x != 0).map(|(s, &x)| (s as u8, x)).collect();
        self.normalize(acc)
    }

    /// Exponent sums of `g`; inverse to [`GraphProduct::embed`] when the
    /// support of `g` is spherical.
    pub fn flatten(&self, g: &ProductElement) -> DirectProductElement {
        let mut c = vec![0u8; self.rank()];
        for (s, e) in g.syllables() {
            c[s] = ((c[s] as u32 + e) % self.q[s]) as u8;
        }
        DirectProductElement { c }
    }

    pub fn ds_zero(&self) -> DirectProductElement {
        DirectProductElement { c: vec![0; self.rank()] }
    }

    pub fn ds_unit(&self, s: Gen, e: u32) -> DirectProductElement {
        self.ds_zero().with_component(s, e % self.q[s])
    }

    pub fn ds_from(&self, c: &[u32]) -> Result<DirectProductElement> {
        if c.len() != self.rank() {
            return Err(Error::Input("component vector has wrong length".into()));
        }
        Ok(DirectProductElement { c: c.iter().enumerate().map(|(s, &x)| (x % self.q[s]) as u8).collect() })
    }

    pub fn ds_multiply(&self, a: &DirectProductElement, b: &DirectProductElement) -> DirectProductElement {
        DirectProductElement {
            c: a.c.iter().zip(&b.c).enumerate().map(|(s, (&x, &y))| ((x as u32 + y as u32) % self.q[s]) as u8).collect(),
        }
    }

    pub fn ds_inverse(&self, a: &DirectProductElement) -> DirectProductElement {
        DirectProductElement {
            c: a.c.iter().enumerate().map(|(s, &x)| ((self.q[s] - x as u32) % self.q[s]) as u8).collect(),
        }
    }

    /// All elements of `G_T ⊂ G_S`, in lexicographic order of components.
    pub fn ds_elements(&self, t: GenSet) -> Vec<DirectProductElement> {
        let mut out = vec![self.ds_zero()];
        for s in t.iter() {
            let mut next = Vec::with_capacity(out.len() * self.q[s] as usize);
            for d in &out {
                for e in 0..self.q[s] {
                    next.push(d.with_component(s, e));
                }
            }
            out = next;
        }
        out.sort();
        out
    }

    /// Renders an element with generator names, e.g. `s t^2`.
    pub fn show(&self, g: &ProductElement) -> String {
        if g.is_identity() {
            return "1".into();
        }
        g.syllables()
            .map(|(s, e)| if e == 1 { self.sys.name(s).to_string() } else { format!("{}^{e}", self.sys.name(s)) })
            .collect::<Vec<_>>()
            .join(" ")
    }
}
