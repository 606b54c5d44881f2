mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rabuild::building::Building;
use rabuild::clump::{boundary_type_all, unfolding_sequence, Clump};
use rabuild::coxeter::{CoxeterSystem, Gen, GenSet};
use rabuild::covering::{check_covering, label_sequence, verify_labeling, EdgeLabeling};
use rabuild::graphprod::{GraphProduct, ProductElement};
use rabuild::symmetry::{quotient_cog, type_permutation_group};

/// A random commutation graph on `n` generators with parameters in `2..=4`.
fn system() -> impl Strategy<Value = (CoxeterSystem, Vec<u32>)> {
    (1usize..=5).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (Just(n), proptest::collection::vec(any::<bool>(), pairs), proptest::collection::vec(2u32..=4, n))
    })
    .prop_map(|(n, mask, q)| {
        let all: Vec<(Gen, Gen)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let pairs: Vec<(Gen, Gen)> = all.into_iter().zip(mask).filter(|(_, m)| *m).map(|(p, _)| p).collect();
        let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
        (CoxeterSystem::new(&names, &pairs).unwrap(), q)
    })
}

fn word(rank: usize, max: usize) -> impl Strategy<Value = Vec<Gen>> {
    proptest::collection::vec(0..rank, 0..max)
}

fn product_element(gp: &GraphProduct, raw: &[(usize, u32)]) -> ProductElement {
    let syl: Vec<(Gen, u32)> = raw.iter().map(|&(s, e)| (s % gp.rank(), e % gp.q(s % gp.rank()))).collect();
    gp.from_syllables(&syl).unwrap()
}

fn syllables() -> impl Strategy<Value = Vec<(usize, u32)>> {
    proptest::collection::vec((0usize..8, 0u32..8), 0..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduction_is_canonical(
        (sys, w, seed) in system().prop_flat_map(|(sys, _)| {
            let r = sys.rank();
            (Just(sys), word(r, 14), any::<u64>())
        })
    ) {
        let r = sys.reduce(&w).unwrap();
        prop_assert!(r.len() <= w.len());
        prop_assert_eq!(&sys.reduce(&r.to_vec()).unwrap(), &r);
        let mut ww = w.clone();
        ww.extend(w.iter().rev());
        prop_assert!(sys.reduce(&ww).unwrap().is_identity());
        // Inserting s s anywhere does not change the element.
        if !w.is_empty() {
            let at = seed as usize % (w.len() + 1);
            let s = w[seed as usize % w.len()];
            let mut padded = w.clone();
            padded.splice(at..at, [s, s]);
            prop_assert_eq!(sys.reduce(&padded).unwrap(), r.clone());
        }
        prop_assert_eq!(sys.inverse(&r), sys.reduce(&w.iter().rev().copied().collect::<Vec<_>>()).unwrap());
    }

    #[test]
    fn product_group_laws((sys, q) in system(), a in syllables(), b in syllables(), c in syllables()) {
        let gp = GraphProduct::new(sys, q).unwrap();
        let (a, b, c) = (product_element(&gp, &a), product_element(&gp, &b), product_element(&gp, &c));
        let ab = gp.multiply(&a, &b);
        prop_assert_eq!(gp.multiply(&ab, &c), gp.multiply(&a, &gp.multiply(&b, &c)));
        prop_assert!(gp.multiply(&a, &gp.inverse(&a)).is_identity());
        prop_assert_eq!(gp.quotient(&a, &ab), b.clone());
        prop_assert_eq!(gp.flatten(&ab), gp.ds_multiply(&gp.flatten(&a), &gp.flatten(&b)));
        let (e, rest) = gp.split_left(&ab, 0);
        prop_assert_eq!(gp.multiply(&gp.generator(0, e), &rest), ab);
    }

    #[test]
    fn distance_is_inverse_symmetric((sys, q) in system(), a in syllables(), b in syllables()) {
        let b_ = Building::new(GraphProduct::new(sys, q).unwrap()).unwrap();
        let gp = b_.gp();
        let (x, y) = (product_element(gp, &a), product_element(gp, &b));
        let d = b_.w_distance(&x, &y);
        prop_assert_eq!(b_.sys().inverse(&d), b_.w_distance(&y, &x));
        prop_assert_eq!(d, gp.projection_to_w(&gp.quotient(&x, &y)));
    }
}

/// Old labels survive each unfolding. A new edge carries the label of its
/// fold onto the previous clump, except possibly in the unfolded direction.
fn check_stability(b: &Building, seed: u64) -> Result<(), TestCaseError> {
    let seq = unfolding_sequence(b, 2, Some(&mut ChaCha8Rng::seed_from_u64(seed))).unwrap();
    let labels = label_sequence(b, &seq).unwrap();
    for (i, k) in seq.sides.iter().enumerate() {
        let (prev, next) = (&labels[i], &labels[i + 1]);
        let c_prev = &seq.clumps[i];
        let others = GenSet::full(b.rank()).without(k.ty);
        for ((f, t), l) in &next.labels {
            if let Some(old) = prev.get(f, t) {
                prop_assert_eq!(old, l);
                continue;
            }
            let phi = seq.clumps[i + 1].chambers_in(b, f).into_iter().find(|c| !c_prev.contains(c)).unwrap();
            let psi = b.panel(&phi, k.ty).into_iter().find(|c| c_prev.contains(c)).unwrap();
            let lifted = prev.get(&b.face_of(&psi, f.ty), &b.face_of(&psi, t.ty)).unwrap();
            prop_assert_eq!(lifted.project(others), l.project(others));
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn labels_are_stable(which in 0usize..9, seed in any::<u64>()) {
        let case = common::suite().swap_remove(which);
        check_stability(&case.building, seed)?;
    }

    #[test]
    fn cyclic_subgroup_quotients_cover(which in 0usize..3, pick in any::<usize>()) {
        let b = match which {
            0 => common::building(&["s", "t"], &[], vec![3, 3]),
            1 => common::cycle(6, vec![2; 6]),
            _ => common::cycle(4, vec![2; 4]),
        };
        let all = type_permutation_group(b.sys(), b.gp().params());
        let g = &all[pick % all.len()];
        let mut h: BTreeSet<Vec<Gen>> = BTreeSet::from([(0..b.rank()).collect()]);
        let mut p = g.clone();
        while h.insert(p.clone()) {
            p = p.iter().map(|&x| g[x]).collect();
        }
        let h: Vec<Vec<Gen>> = h.into_iter().collect();
        let y = b.ball(1).unwrap();
        let q = quotient_cog(&b, &y, &h).unwrap();
        prop_assert!(q.passed(), "{:?}", q.covering.fibers.failures);
        prop_assert_eq!(q.covering.sheets(), Some(h.len()));
    }
}

/// Shifting one label in a direction where the face is not on the boundary
/// breaks both the label-based checks and the direct covering check.
#[test]
fn mutated_labels_are_caught() {
    let mut caught = 0;
    for case in common::suite() {
        let b = &case.building;
        let seq = unfolding_sequence(b, 1, None::<&mut ChaCha8Rng>).unwrap();
        let c: &Clump = seq.last();
        let good = label_sequence(b, &seq).unwrap().pop().unwrap();
        for (idx, ((f, t), l)) in good.labels.iter().enumerate() {
            if idx % 7 != 0 {
                continue;
            }
            let interior = t.ty.minus(boundary_type_all(b, c, t).unwrap());
            for u in interior.iter() {
                let mut bad: EdgeLabeling = good.clone();
                let e = (l.component(u) + 1) % b.q(u);
                bad.labels.insert((f.clone(), t.clone()), l.with_component(u, e));
                let r = verify_labeling(b, c, &bad).unwrap();
                let k = check_covering(b, c, &bad).unwrap();
                assert!(!r.passed(), "{}: labeling check missed a mutation", case.name);
                assert!(!k.passed(), "{}: covering check missed a mutation", case.name);
                caught += 1;
            }
        }
    }
    assert!(caught > 20, "only {caught} mutations tried");
}
