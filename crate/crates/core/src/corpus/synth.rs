//! Synthetic dialogues with planted topic blocks and discourse trees.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{CorpusBundle, Split, Task};
use crate::scoring::{minmax, ScorePair};
use crate::{Arc, DependencyStructure, Dialogue, Error, LabeledArc, Result, ScoreMatrix, Segmentation};

const MINMAX_EPS: f64 = 1e-12;
const WORDS_PER_TOPIC: usize = 6;
const WORDS_PER_UTTERANCE: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_dialogues: usize,
    /// Inclusive range of dialogue lengths.
    pub turns: (usize, usize),
    /// Inclusive range of topic counts. Every topic spans at least two turns.
    pub topics: (usize, usize),
    pub noise_sigma: f64,
    pub within_score: f64,
    pub cross_score: f64,
    pub arc_score: f64,
    pub low_score: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_dialogues: 200,
            turns: (8, 16),
            topics: (2, 4),
            noise_sigma: 0.2,
            within_score: 0.9,
            cross_score: 0.1,
            arc_score: 0.9,
            low_score: 0.1,
            seed: 42,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InfeasibleSpec(m.to_string()));
        if self.turns.0 > self.turns.1 || self.topics.0 > self.topics.1 {
            return bad("empty turns or topics range");
        }
        if self.turns.0 < 2 {
            return bad("dialogues need at least 2 turns");
        }
        if self.topics.0 == 0 {
            return bad("dialogues need at least 1 topic");
        }
        if 2 * self.topics.1 > self.turns.0 {
            return bad("topics of at least two turns each do not fit the shortest dialogue");
        }
        if !(self.within_score > self.cross_score && self.cross_score >= 0.0) {
            return bad("need within_score > cross_score >= 0");
        }
        if !(self.arc_score > self.low_score && self.low_score >= 0.0) {
            return bad("need arc_score > low_score >= 0");
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad("noise_sigma must be finite and non-negative");
        }
        Ok(())
    }
}

/// Random split of `n` into `topics` blocks of at least two turns each.
fn block_sizes<R: Rng>(n: usize, topics: usize, rng: &mut R) -> Vec<usize> {
    // Stars and bars over the turns left after the mandatory two per block.
    let spare = n - 2 * topics;
    let mut cuts: Vec<usize> = sample(rng, spare + topics - 1, topics - 1).into_vec();
    cuts.sort_unstable();
    let mut parts = Vec::with_capacity(topics);
    let mut last = 0usize;
    for &c in &cuts {
        parts.push(c - last);
        last = c + 1;
    }
    parts.push(spare + topics - 1 - last);
    parts.into_iter().map(|p| p + 2).collect()
}

/// Random rightward projective tree over consecutive blocks.
///
/// Each block's first utterance attaches to a node on the right spine of the
/// previous block, so exactly one arc crosses every block boundary. All other
/// arcs stay inside their block.
pub fn planted_tree<R: Rng>(blocks: &[usize], rng: &mut R) -> DependencyStructure {
    let n: usize = blocks.iter().sum();
    let mut heads = Vec::with_capacity(n.saturating_sub(1));
    // Right spine of the tree built so far; `block_base` is the stack depth
    // where the current block's nodes begin.
    let mut stack: Vec<usize> = Vec::new();
    let mut block_base = 0;
    let mut next = 1;
    for &size in blocks {
        for offset in 0..size {
            let j = next;
            next += 1;
            if j == 1 {
                stack.push(j);
                continue;
            }
            // Pop part of the current block's spine; at a block start the
            // previous block's spine supplies the cross link.
            let keep = rng.random_range(block_base + 1..=stack.len());
            if offset == 0 {
                block_base = keep;
            }
            stack.truncate(keep);
            heads.push(*stack.last().expect("spine never empty"));
            stack.push(j);
        }
    }
    DependencyStructure::from_heads(&heads).expect("construction yields a projective tree")
}

fn noisy<R: Rng>(m: &ScoreMatrix, noise: Option<&Normal<f64>>, rng: &mut R) -> ScoreMatrix {
    let perturbed = match noise {
        Some(dist) => m.map_upper(|v| (v + dist.sample(rng)).clamp(0.0, 1.0)),
        None => m.map_upper(|v| v.clamp(0.0, 1.0)),
    };
    minmax(&perturbed, MINMAX_EPS)
}

/// Generates a corpus with planted gold structure and the matching raw
/// score matrices. The same spec always yields the same output.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(CorpusBundle, Vec<ScorePair>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = (spec.noise_sigma > 0.0).then(|| Normal::new(0.0, spec.noise_sigma).expect("valid sigma"));
    let mut dialogues = Vec::with_capacity(spec.n_dialogues);
    let mut pairs = Vec::with_capacity(spec.n_dialogues);

    for idx in 0..spec.n_dialogues {
        let n = rng.random_range(spec.turns.0..=spec.turns.1);
        let topics = rng.random_range(spec.topics.0..=spec.topics.1.min(n / 2));
        let blocks = block_sizes(n, topics, &mut rng);
        let tree = planted_tree(&blocks, &mut rng);

        let mut block_of = Vec::with_capacity(n + 1);
        block_of.push(usize::MAX);
        let mut boundaries = Vec::new();
        for (b, &size) in blocks.iter().enumerate() {
            block_of.extend(std::iter::repeat_n(b, size));
            if b + 1 < blocks.len() {
                boundaries.push(block_of.len() - 1);
            }
        }
        let segmentation = Segmentation::new(n, boundaries)?;

        let topic = ScoreMatrix::from_fn(n, |i, j| {
            if block_of[i] == block_of[j] {
                spec.within_score
            } else {
                spec.cross_score
            }
        });
        let arcs = tree.arc_set();
        let rhetorical = ScoreMatrix::from_fn(n, |i, j| {
            if arcs.contains(&Arc::new(i, j)) {
                spec.arc_score
            } else {
                spec.low_score
            }
        });
        let topic = noisy(&topic, noise.as_ref(), &mut rng);
        let rhetorical = noisy(&rhetorical, noise.as_ref(), &mut rng);

        let turns: Vec<(String, String)> = (1..=n)
            .map(|i| {
                let b = block_of[i];
                let words: Vec<String> = (0..WORDS_PER_UTTERANCE)
                    .map(|_| format!("t{b}w{}", rng.random_range(0..WORDS_PER_TOPIC)))
                    .collect();
                (if i % 2 == 1 { "A" } else { "B" }.to_string(), words.join(" "))
            })
            .collect();
        let mut d = Dialogue::from_turns(format!("synth-{idx:04}"), turns);
        d.gold_arcs = Some(
            tree.arcs()
                .iter()
                .map(|&arc| LabeledArc {
                    arc,
                    relation: "planted".into(),
                })
                .collect(),
        );
        d.gold_boundaries = Some(segmentation);
        dialogues.push(d);
        pairs.push(ScorePair::new(topic, rhetorical)?);
    }

    Ok((
        CorpusBundle {
            dialogues,
            task: Task::Both,
            split: Split::Test,
        },
        pairs,
    ))
}
