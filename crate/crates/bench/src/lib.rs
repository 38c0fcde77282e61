//! Deterministic inputs shared by the benchmarks.

use dialstruct::corpus::{generate_synthetic, SyntheticSpec};
use dialstruct::scoring::ScorePair;

/// Noisy planted dialogues of exactly `n` turns.
pub fn planted_pairs(n: usize, count: usize) -> Vec<ScorePair> {
    let spec = SyntheticSpec {
        n_dialogues: count,
        turns: (n, n),
        topics: (1, (n / 4).clamp(1, 4)),
        seed: 7,
        ..Default::default()
    };
    generate_synthetic(&spec).expect("valid bench spec").1
}
