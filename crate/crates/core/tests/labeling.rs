mod common;

use rabuild::clump::unfolding_sequence;
use rabuild::covering::{build_covering, label_sequence, verify_labeling};

#[test]
fn canonical_sequences_label_and_cover() {
    for case in common::suite() {
        let b = &case.building;
        let seq = unfolding_sequence(b, case.radius, None::<&mut rand_chacha::ChaCha8Rng>).unwrap();
        let labels = label_sequence(b, &seq).unwrap();
        for (c, l) in seq.clumps.iter().zip(&labels) {
            let r = verify_labeling(b, c, l).unwrap();
            assert!(r.passed(), "{}: {:?}", case.name, r);
            let cov = build_covering(b, c, l).unwrap();
            assert_eq!(cov.sheets, c.len(), "{}", case.name);
        }
        println!("{}: {} steps, {} chambers", case.name, seq.sides.len(), seq.last().len());
    }
}
