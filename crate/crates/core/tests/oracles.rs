//! Brute-force oracles, compared with the library and with the frozen values
//! in `fixtures/golden.json`. Set `RABUILD_REFREEZE=1` to rewrite the file
//! from the oracles.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use rabuild::building::{Building, Chamber};
use rabuild::cog::scwol_of;
use rabuild::coxeter::GenSet;
use rabuild::graphprod::ProductElement;
use rabuild::symmetry::type_permutation_group;

#[derive(Debug, PartialEq, Eq, Serialize, Deserialize)]
struct Golden {
    ball_sizes: Vec<usize>,
    first_ball_vertices: usize,
    first_ball_edges: usize,
    type_permutations: usize,
}

/// `Y_n` as all products of `n` elements of maximal spherical subgroups.
fn oracle_ball(b: &Building, n: usize) -> BTreeSet<Chamber> {
    let gp = b.gp();
    let pieces: BTreeSet<ProductElement> =
        b.maximal_spherical().iter().flat_map(|&t| gp.subgroup_elements(t)).collect();
    let mut ball = BTreeSet::from([b.base()]);
    for _ in 0..n {
        let next: Vec<Chamber> = ball.iter().flat_map(|g| pieces.iter().map(move |x| gp.multiply(g, x))).collect();
        ball.extend(next);
    }
    ball
}

/// Faces of a chamber set as `(type, chambers of the face)`, with the
/// residue computed by closing under panels.
fn oracle_faces(b: &Building, chambers: &BTreeSet<Chamber>) -> BTreeSet<(u64, BTreeSet<Chamber>)> {
    let mut out = BTreeSet::new();
    for c in chambers {
        for &t in b.spherical_subsets() {
            let mut residue = BTreeSet::from([c.clone()]);
            let mut stack = vec![c.clone()];
            while let Some(x) = stack.pop() {
                for s in t.iter() {
                    for y in b.panel(&x, s) {
                        if residue.insert(y.clone()) {
                            stack.push(y);
                        }
                    }
                }
            }
            out.insert((t.0, residue));
        }
    }
    out
}

fn oracle_scwol_counts(b: &Building, chambers: &BTreeSet<Chamber>) -> (usize, usize) {
    let faces: Vec<(u64, BTreeSet<Chamber>)> = oracle_faces(b, chambers).into_iter().collect();
    let mut edges = 0;
    for (ta, ra) in &faces {
        for (tb, rb) in &faces {
            let (ta, tb) = (GenSet(*ta), GenSet(*tb));
            if ta != tb && ta.is_subset(tb) && ra.is_subset(rb) {
                edges += 1;
            }
        }
    }
    (faces.len(), edges)
}

fn oracle_type_permutations(b: &Building) -> usize {
    let n = b.rank();
    let sys = b.sys();
    (0..n)
        .permutations(n)
        .filter(|p| {
            (0..n).all(|s| b.q(s) == b.q(p[s]))
                && (0..n).all(|s| (0..n).all(|t| s == t || sys.commutes(s, t) == sys.commutes(p[s], p[t])))
        })
        .count()
}

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/golden.json")
}

#[test]
fn oracles_match_library_and_fixtures() {
    let mut computed: BTreeMap<String, Golden> = BTreeMap::new();
    for case in common::suite() {
        let b = &case.building;
        let mut sizes = Vec::new();
        for n in 0..=case.radius.min(2) {
            let oracle = oracle_ball(b, n);
            let y = b.ball(n).unwrap();
            assert_eq!(y.chambers(), &oracle, "{} n={n}", case.name);
            sizes.push(oracle.len());
        }
        let y1 = oracle_ball(b, 1);
        let (v, e) = oracle_scwol_counts(b, &y1);
        let x = scwol_of(b, &b.ball(1).unwrap());
        assert_eq!((x.vertices.len(), x.edges.len()), (v, e), "{}", case.name);
        let perms = oracle_type_permutations(b);
        assert_eq!(type_permutation_group(b.sys(), b.gp().params()).len(), perms, "{}", case.name);
        computed.insert(
            case.name.to_string(),
            Golden { ball_sizes: sizes, first_ball_vertices: v, first_ball_edges: e, type_permutations: perms },
        );
    }
    let path = golden_path();
    if std::env::var_os("RABUILD_REFREEZE").is_some() {
        std::fs::write(&path, serde_json::to_string_pretty(&computed).unwrap() + "\n").unwrap();
    }
    let frozen: BTreeMap<String, Golden> = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(frozen, computed);
    assert_eq!(frozen["hexagon-3"].ball_sizes[1], 37);
}
