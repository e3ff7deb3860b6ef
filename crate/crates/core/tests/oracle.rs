//! Split and trigger search against exhaustive enumeration.

mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trigger_tree::{best_split, find_trigger, LearnerConfig};

const TOL: f64 = 1e-12;

#[test]
fn find_trigger_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut found = 0;
    for case in 0..200 {
        let binary = case % 10 == 9;
        let (split, node) = random_node(&mut rng, 50, 3, binary);
        let config = random_criterion(&mut rng, binary);
        let min_arm = rng.random_range(1..4);
        let got = find_trigger(&split, &node, &config, min_arm).ok();
        let want = oracle_trigger(&split, &node, &config, min_arm);
        match (got, want) {
            (Some(g), Some(w)) => {
                found += 1;
                assert_eq!(g.trigger, w.trigger, "case {case} {config:?}");
                assert!(rel_close(g.score, w.score, TOL), "case {case}: {} vs {}", g.score, w.score);
                // a difference of O(1) means: compare on the outcome scale
                assert!((g.ace - w.ace).abs() < TOL, "case {case}: ace {} vs {}", g.ace, w.ace);
            }
            (None, None) => {}
            (g, w) => panic!("case {case}: search {g:?} vs enumeration {w:?}"),
        }
    }
    assert!(found >= 150, "only {found} nodes had an admissible trigger");
}

#[test]
fn best_split_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut found = 0;
    for case in 0..100 {
        let binary = case % 10 == 9;
        let (split, node) = random_node(&mut rng, 50, 3, binary);
        let mut config = LearnerConfig::new(random_criterion(&mut rng, binary));
        config.min_group_size = rng.random_range(2..4);
        let got = best_split(&split, &node, &config);
        let want = oracle_best_split(&split, &node, &config);
        match (got, want) {
            (Some(g), Some(w)) => {
                found += 1;
                assert_eq!(g.rule.feature, w.feature, "case {case}");
                assert!(rel_close(g.rule.threshold, w.threshold, TOL), "case {case}: threshold {} vs {}", g.rule.threshold, w.threshold);
                assert_eq!(g.left.trigger, w.left.trigger, "case {case}");
                assert_eq!(g.right.trigger, w.right.trigger, "case {case}");
                assert!(rel_close(g.total(), w.total(), TOL), "case {case}: {} vs {}", g.total(), w.total());
            }
            (None, None) => {}
            (g, w) => panic!("case {case}: search {g:?} vs enumeration {w:?}"),
        }
    }
    assert!(found >= 50, "only {found} nodes had a split");
}
