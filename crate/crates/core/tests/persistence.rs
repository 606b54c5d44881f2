mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rabuild::building::BallCache;
use rabuild::clump::{unfolding_sequence, ClumpRecord};

#[test]
fn ball_cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for case in common::suite() {
        let b = &case.building;
        let path = dir.path().join(format!("{}.json", case.name));
        let (first, reused) = BallCache::load_or_build(b, 2, "h", &path).unwrap();
        assert!(!reused);
        let bytes = std::fs::read(&path).unwrap();
        let (second, reused) = BallCache::load_or_build(b, 2, "h", &path).unwrap();
        assert!(reused);
        assert_eq!(first, second);
        assert_eq!(second.clump(), b.ball(2).unwrap());
        assert_eq!(BallCache::build(b, 2, "h").unwrap().to_json().into_bytes(), bytes);
        // A different config hash forces a rebuild.
        let (_, reused) = BallCache::load_or_build(b, 2, "other", &path).unwrap();
        assert!(!reused);
    }
}

#[test]
fn corrupt_ball_cache_rejected() {
    let b = common::building(&["s", "t"], &[], vec![2, 3]);
    let good = BallCache::build(&b, 1, "h").unwrap();
    let mut shuffled = good.clone();
    shuffled.chambers.swap(1, 2);
    assert!(BallCache::from_json(&b, &shuffled.to_json()).is_err());
    let text = good.to_json().replace("[[1,2]]", "[[1,3]]");
    assert!(BallCache::from_json(&b, &text).is_err());
    assert!(BallCache::from_json(&b, "{\"radius\": 1}").is_err());
}

#[test]
fn clump_records_replay() {
    for case in common::suite() {
        let b = &case.building;
        let seq = unfolding_sequence(b, 2, Some(&mut ChaCha8Rng::seed_from_u64(5))).unwrap();
        let rec = ClumpRecord::from_sequence(&seq, "h");
        let text = serde_json::to_string(&rec).unwrap();
        let back: ClumpRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(&back.replay(b).unwrap(), seq.last(), "{}", case.name);
        let mut reordered = back.clone();
        if reordered.steps.len() > 2 {
            let last = reordered.steps.len() - 1;
            reordered.steps.swap(0, last);
            assert!(reordered.replay(b).is_err(), "{}", case.name);
        }
    }
}
