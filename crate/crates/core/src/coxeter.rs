//! Right-angled Coxeter systems: words, normal forms, spherical subsets.
//!
//! Generators are indexed `0..rank`; the index order is the order used for
//! ShortLex normal forms everywhere in the crate.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Gen = usize;

/// Largest rank supported by the bitmask representation of subsets.
pub const MAX_RANK: usize = 64;

/// Default cap on `|S|` for full enumeration of spherical subsets.
pub const SPHERICAL_CAP: usize = 12;

/// A subset of the generators, stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct GenSet(pub u64);

impl GenSet {
    pub const EMPTY: GenSet = GenSet(0);

    pub fn single(s: Gen) -> Self {
        GenSet(1 << s)
    }

    pub fn from_gens<I: IntoIterator<Item = Gen>>(it: I) -> Self {
        it.into_iter().fold(GenSet::EMPTY, |acc, s| acc.with(s))
    }

    pub fn full(rank: usize) -> Self {
        if rank == 64 {
            GenSet(u64::MAX)
        } else {
            GenSet((1u64 << rank) - 1)
        }
    }

    pub fn contains(self, s: Gen) -> bool {
        self.0 >> s & 1 == 1
    }

    pub fn with(self, s: Gen) -> Self {
        GenSet(self.0 | 1 << s)
    }

    pub fn without(self, s: Gen) -> Self {
        GenSet(self.0 & !(1 << s))
    }

    pub fn union(self, o: GenSet) -> Self {
        GenSet(self.0 | o.0)
    }

    pub fn inter(self, o: GenSet) -> Self {
        GenSet(self.0 & o.0)
    }

    pub fn minus(self, o: GenSet) -> Self {
        GenSet(self.0 & !o.0)
    }

    pub fn is_subset(self, o: GenSet) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = Gen> {
        let bits = self.0;
        (0..64).filter(move |&i| bits >> i & 1 == 1)
    }

    /// All subsets of `self`, in increasing bitmask order.
    pub fn subsets(self) -> Vec<GenSet> {
        let mut out = vec![GenSet::EMPTY];
        let mut sub = self.0;
        let mut acc = Vec::new();
        while sub != 0 {
            acc.push(GenSet(sub));
            sub = (sub - 1) & self.0;
        }
        acc.reverse();
        out.extend(acc);
        out
    }
}

impl fmt::Debug for GenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// An element of `W` in ShortLex normal form.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct WElement(Vec<u8>);

impl WElement {
    pub fn identity() -> Self {
        WElement(Vec::new())
    }

    pub fn letters(&self) -> impl DoubleEndedIterator<Item = Gen> + ExactSizeIterator + '_ {
        self.0.iter().map(|&s| s as Gen)
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_vec(&self) -> Vec<Gen> {
        self.letters().collect()
    }
}

impl Ord for WElement {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for WElement {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for WElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w{:?}", self.0)
    }
}

/// A right-angled Coxeter system: every pair of distinct generators either
/// commutes (`m = 2`) or generates an infinite dihedral group (`m = ∞`).
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct CoxeterSystem {
    names: Vec<String>,
    /// `commute[s]` is the set of `t != s` with `m(s,t) = 2`.
    commute: Vec<GenSet>,
}

/// The spherical subsets of `S` and the nerve they span.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SphericalPoset {
    /// Every spherical subset, including `∅`, in increasing (size, bitmask) order.
    pub subsets: Vec<GenSet>,
    /// Simplices of the nerve: the nonempty spherical subsets.
    pub nerve: Vec<GenSet>,
}

impl CoxeterSystem {
    /// Builds a system from generator names and the list of commuting pairs.
    pub fn new<S: AsRef<str>>(names: &[S], commuting: &[(Gen, Gen)]) -> Result<Self> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        if names.is_empty() {
            return Err(Error::Input("a Coxeter system needs at least one generator".into()));
        }
        if names.len() > MAX_RANK {
            return Err(Error::Input(format!("rank {} exceeds {}", names.len(), MAX_RANK)));
        }
        let distinct: BTreeSet<&String> = names.iter().collect();
        if distinct.len() != names.len() {
            return Err(Error::Input("duplicate generator name".into()));
        }
        let mut commute = vec![GenSet::EMPTY; names.len()];
        for &(s, t) in commuting {
            if s >= names.len() || t >= names.len() {
                return Err(Error::Input(format!("commuting pair ({s},{t}) out of range")));
            }
            if s == t {
                return Err(Error::Input(format!("generator {} cannot commute with itself", names[s])));
            }
            commute[s] = commute[s].with(t);
            commute[t] = commute[t].with(s);
        }
        Ok(CoxeterSystem { names, commute })
    }

    /// Convenience constructor from names.
    pub fn from_names(names: &[&str], commuting: &[(&str, &str)]) -> Result<Self> {
        let idx = |n: &str| {
            names
                .iter()
                .position(|x| *x == n)
                .ok_or_else(|| Error::Input(format!("unknown generator {n}")))
        };
        let pairs = commuting
            .iter()
            .map(|(a, b)| Ok((idx(a)?, idx(b)?)))
            .collect::<Result<Vec<_>>>()?;
        CoxeterSystem::new(names, &pairs)
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, s: Gen) -> &str {
        &self.names[s]
    }

    pub fn index(&self, name: &str) -> Option<Gen> {
        self.names.iter().position(|n| n == name)
    }

    pub fn all(&self) -> GenSet {
        GenSet::full(self.rank())
    }

    /// True iff `s != t` and `m(s,t) = 2`.
    pub fn commutes(&self, s: Gen, t: Gen) -> bool {
        self.commute[s].contains(t)
    }

    /// The generators commuting with `s`.
    pub fn commuting_with(&self, s: Gen) -> GenSet {
        self.commute[s]
    }

    /// `m(s,t)`, with `None` standing for infinity.
    pub fn m(&self, s: Gen, t: Gen) -> Option<u32> {
        if s == t {
            Some(1)
        } else if self.commutes(s, t) {
            Some(2)
        } else {
            None
        }
    }

    /// Commuting pairs `(s,t)` with `s < t`.
    pub fn commuting_pairs(&self) -> Vec<(Gen, Gen)> {
        let mut out = Vec::new();
        for s in 0..self.rank() {
            for t in s + 1..self.rank() {
                if self.commutes(s, t) {
                    out.push((s, t));
                }
            }
        }
        out
    }

    fn check_letters(&self, w: &[Gen]) -> Result<()> {
        match w.iter().find(|&&s| s >= self.rank()) {
            Some(s) => Err(Error::Input(format!("unknown generator index {s}"))),
            None => Ok(()),
        }
    }

    /// Reduces an arbitrary word to its ShortLex normal form.
    pub fn reduce(&self, w: &[Gen]) -> Result<WElement> {
        self.check_letters(w)?;
        let mut acc: Vec<u8> = Vec::with_capacity(w.len());
        for &s in w {
            self.push_letter(&mut acc, s);
        }
        Ok(WElement(lex_normal(&acc, |&x| x as Gen, |a, b| self.commutes(a, b))))
    }

    /// Reduces a word given by generator names.
    pub fn reduce_names(&self, w: &[&str]) -> Result<WElement> {
        let idx = w
            .iter()
            .map(|n| self.index(n).ok_or_else(|| Error::Input(format!("unknown generator {n}"))))
            .collect::<Result<Vec<_>>>()?;
        self.reduce(&idx)
    }

    /// Appends `s` to a reduced word, cancelling against the last `s` that can
    /// be shuffled to the end.
    fn push_letter(&self, acc: &mut Vec<u8>, s: Gen) {
        for i in (0..acc.len()).rev() {
            let x = acc[i] as Gen;
            if x == s {
                acc.remove(i);
                return;
            }
            if !self.commutes(x, s) {
                break;
            }
        }
        acc.push(s as u8);
    }

    pub fn multiply(&self, a: &WElement, b: &WElement) -> Result<WElement> {
        let mut w = a.to_vec();
        w.extend(b.letters());
        self.reduce(&w)
    }

    pub fn inverse(&self, a: &WElement) -> WElement {
        let w: Vec<Gen> = a.letters().rev().collect();
        WElement(lex_normal(
            &w.iter().map(|&s| s as u8).collect::<Vec<_>>(),
            |&x| x as Gen,
            |x, y| self.commutes(x, y),
        ))
    }

    /// Letters occurring in the normal form (equivalently, in every reduced word).
    pub fn support(&self, g: &WElement) -> GenSet {
        GenSet::from_gens(g.letters())
    }

    pub fn is_spherical(&self, t: GenSet) -> bool {
        t.iter().all(|s| t.without(s).is_subset(self.commute[s]))
    }

    /// True iff `W` is finite, i.e. `S` itself is spherical.
    pub fn is_finite(&self) -> bool {
        self.is_spherical(self.all())
    }

    /// Enumerates all spherical subsets (cliques of the commutation graph).
    pub fn spherical_poset(&self) -> Result<SphericalPoset> {
        self.spherical_poset_capped(SPHERICAL_CAP)
    }

    pub fn spherical_poset_capped(&self, cap: usize) -> Result<SphericalPoset> {
        if self.rank() > cap {
            return Err(Error::Size { what: "generators for spherical enumeration".into(), cap, reached: self.rank() });
        }
        let mut subsets = Vec::new();
        self.cliques(GenSet::EMPTY, 0, &mut subsets);
        subsets.sort_by_key(|t| (t.len(), t.0));
        let nerve = subsets.iter().copied().filter(|t| !t.is_empty()).collect();
        Ok(SphericalPoset { subsets, nerve })
    }

    fn cliques(&self, cur: GenSet, from: Gen, out: &mut Vec<GenSet>) {
        out.push(cur);
        for s in from..self.rank() {
            if cur.is_subset(self.commute[s]) {
                self.cliques(cur.with(s), s + 1, out);
            }
        }
    }

    /// Spherical subsets not contained in a larger spherical subset.
    pub fn maximal_spherical(&self) -> Vec<GenSet> {
        let all = self.spherical_poset_capped(MAX_RANK).expect("rank within bitmask range").subsets;
        all.iter()
            .copied()
            .filter(|t| !all.iter().any(|u| u != t && t.is_subset(*u)))
            .collect()
    }

    /// Elements of the finite group `W_T`, for spherical `T`.
    pub fn spherical_elements(&self, t: GenSet) -> Vec<WElement> {
        debug_assert!(self.is_spherical(t));
        t.subsets()
            .into_iter()
            .map(|sub| WElement(sub.iter().map(|s| s as u8).collect()))
            .collect()
    }

    /// The combinatorial ball of radius `n` in `W`: `B_0 = {1}` and `B_n` adds
    /// every `w x` with `w ∈ B_{n-1}` and `x` in a spherical parabolic subgroup.
    pub fn w_ball(&self, n: usize, cap: usize) -> Result<BTreeSet<WElement>> {
        let maximal = self.maximal_spherical();
        let mut ball: BTreeSet<WElement> = BTreeSet::from([WElement::identity()]);
        let mut frontier: Vec<WElement> = vec![WElement::identity()];
        for _ in 0..n {
            let mut next = Vec::new();
            for w in &frontier {
                for &t in &maximal {
                    for x in self.spherical_elements(t) {
                        let y = self.multiply(w, &x)?;
                        if !ball.contains(&y) {
                            ball.insert(y.clone());
                            next.push(y);
                            if ball.len() > cap {
                                return Err(Error::Size { what: "W-ball".into(), cap, reached: ball.len() });
                            }
                        }
                    }
                }
            }
            frontier = next;
        }
        Ok(ball)
    }

    /// Renders an element with generator names.
    pub fn show(&self, g: &WElement) -> String {
        if g.is_identity() {
            return "1".into();
        }
        g.letters().map(|s| self.names[s].as_str()).collect::<Vec<_>>().join("")
    }
}

/// ShortLex-least linear extension of a trace: repeatedly take the smallest
/// generator among the items that can be shuffled to the front.
pub(crate) fn lex_normal<T: Copy>(
    items: &[T],
    gen: impl Fn(&T) -> Gen,
    commute: impl Fn(Gen, Gen) -> bool,
) -> Vec<T> {
    let mut rest: Vec<T> = items.to_vec();
    let mut out = Vec::with_capacity(rest.len());
    while !rest.is_empty() {
        let mut best: Option<usize> = None;
        'cand: for i in 0..rest.len() {
            let gi = gen(&rest[i]);
            for x in &rest[..i] {
                if !commute(gen(x), gi) {
                    continue 'cand;
                }
            }
            if best.is_none_or(|b| gi < gen(&rest[b])) {
                best = Some(i);
            }
        }
        let b = best.expect("the first item is always a candidate");
        out.push(rest.remove(b));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dinf() -> CoxeterSystem {
        CoxeterSystem::from_names(&["s", "t"], &[]).unwrap()
    }

    fn square() -> CoxeterSystem {
        CoxeterSystem::from_names(&["s", "t"], &[("s", "t")]).unwrap()
    }

    #[test]
    fn tits_moves() {
        let w = dinf();
        assert!(w.reduce(&[0, 0]).unwrap().is_identity());
        assert_eq!(w.reduce(&[0, 1, 0]).unwrap().to_vec(), vec![0, 1, 0]);
        assert_eq!(square().reduce(&[0, 1, 0]).unwrap().to_vec(), vec![1]);
        assert_eq!(square().reduce(&[1, 0]).unwrap().to_vec(), vec![0, 1]);
    }

    #[test]
    fn unknown_letter_rejected() {
        assert!(matches!(dinf().reduce(&[0, 5]), Err(Error::Input(_))));
        assert!(dinf().reduce_names(&["s", "x"]).is_err());
    }

    #[test]
    fn support_and_sphericity() {
        let w = dinf();
        let g = w.reduce(&[0, 1, 0]).unwrap();
        assert_eq!(w.support(&g), GenSet::from_gens([0, 1]));
        assert!(w.is_spherical(GenSet::EMPTY));
        assert!(!w.is_spherical(GenSet::from_gens([0, 1])));
        assert!(square().is_spherical(GenSet::from_gens([0, 1])));
        assert!(square().is_finite());
        assert!(!w.is_finite());
    }

    #[test]
    fn nerve_examples() {
        let free3 = CoxeterSystem::from_names(&["a", "b", "c"], &[]).unwrap();
        assert_eq!(free3.spherical_poset().unwrap().nerve.len(), 3);
        let mixed = CoxeterSystem::from_names(&["a", "b", "c"], &[("b", "c")]).unwrap();
        let p = mixed.spherical_poset().unwrap();
        assert_eq!(p.nerve.iter().filter(|t| t.len() == 1).count(), 3);
        assert_eq!(p.nerve.iter().filter(|t| t.len() == 2).count(), 1);
        let names = ["a", "b", "c", "d", "e", "f"];
        let pairs: Vec<_> = (0..6).map(|i| (names[i], names[(i + 1) % 6])).collect();
        let hex = CoxeterSystem::from_names(&names, &pairs).unwrap();
        let p = hex.spherical_poset().unwrap();
        assert_eq!(p.nerve.len(), 12);
        assert!(p.nerve.iter().all(|t| t.len() <= 2));
    }

    #[test]
    fn rank_cap() {
        let names: Vec<String> = (0..13).map(|i| format!("g{i}")).collect();
        let sys = CoxeterSystem::new(&names, &[]).unwrap();
        assert!(matches!(sys.spherical_poset(), Err(Error::Size { .. })));
    }

    #[test]
    fn w_ball_radius_one_square_is_whole_group() {
        assert_eq!(square().w_ball(1, 100).unwrap().len(), 4);
        assert_eq!(dinf().w_ball(1, 100).unwrap().len(), 3);
        assert_eq!(dinf().w_ball(2, 100).unwrap().len(), 5);
    }
}
