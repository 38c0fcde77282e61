mod oracles;

use dialstruct::decode::eisner;
use dialstruct::ScoreMatrix;
use oracles::{all_trees, brute_force_best, random_matrix, tree_is_valid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn tree_counts_are_catalan() {
    // Rightward projective trees rooted at 1 over n nodes: Catalan(n - 1).
    let counts: Vec<usize> = (1..=7).map(|n| all_trees(n).len()).collect();
    assert_eq!(counts, vec![1, 1, 2, 5, 14, 42, 132]);
}

#[test]
fn eisner_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..200 {
        let n = rng.random_range(1..=6);
        let m = random_matrix(&mut rng, n);
        let tree = eisner(&m);
        assert!(tree_is_valid(&tree));
        assert!((tree.score(&m) - brute_force_best(&m)).abs() < 1e-12);
    }
}

#[test]
fn eisner_optimal_under_ties() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let n = rng.random_range(2..=7);
        let m = ScoreMatrix::from_fn(n, |_, _| rng.random_range(0..3) as f64 / 2.0);
        let tree = eisner(&m);
        assert!(tree_is_valid(&tree));
        assert_eq!(tree.score(&m), brute_force_best(&m));
    }
}
