//! Initial rhetorical and topic score matrices.
//!
//! Scores come from one of three sources: precomputed matrices, precomputed
//! utterance embeddings, or the built-in lexical baseline. Whatever the
//! source, both matrices are min-max normalized to `[0, 1]` before they reach
//! the mutual-learning stage.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::matrix::check_same_n;
use crate::{Dialogue, Error, Result, ScoreMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingKind {
    Rhetorical,
    TopicConsistency,
    TopicCoherence,
}

/// One vector per utterance, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct UtteranceEmbeddings {
    pub dialogue_id: String,
    pub kind: EmbeddingKind,
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl UtteranceEmbeddings {
    pub fn new(dialogue_id: impl Into<String>, kind: EmbeddingKind, n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Invalid("embedding dimension must be at least 1".into()));
        }
        if data.len() != n * d {
            return Err(Error::DimensionMismatch {
                expected: n * d,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite embedding value".into()));
        }
        Ok(UtteranceEmbeddings {
            dialogue_id: dialogue_id.into(),
            kind,
            n,
            d,
            data,
        })
    }

    pub fn from_rows(dialogue_id: impl Into<String>, kind: EmbeddingKind, rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.len(),
            });
        }
        Self::new(dialogue_id, kind, rows.len(), d, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreSource {
    MatrixFile,
    EmbeddingFile,
    Lexical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Minmax,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScorerConfig {
    pub source: ScoreSource,
    pub normalization: Normalization,
    pub epsilon: f64,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        ScorerConfig {
            source: ScoreSource::Lexical,
            normalization: Normalization::Minmax,
            epsilon: 1e-9,
        }
    }
}

impl ScorerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Invalid("scorer epsilon must be positive".into()));
        }
        Ok(())
    }
}

/// Pairwise cosine similarity mapped from `[-1, 1]` to `[0, 1]`.
pub fn cosine_matrix(e: &UtteranceEmbeddings, epsilon: f64) -> Result<ScoreMatrix> {
    let norms: Vec<f64> = (0..e.n).map(|i| dot(e.row(i), e.row(i)).sqrt()).collect();
    if let Some(i) = norms.iter().position(|&nm| nm < epsilon) {
        return Err(Error::ZeroNormVector(i + 1));
    }
    Ok(ScoreMatrix::from_fn(e.n, |i, j| {
        let c = dot(e.row(i - 1), e.row(j - 1)) / (norms[i - 1] * norms[j - 1]);
        (c.clamp(-1.0, 1.0) + 1.0) / 2.0
    }))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Topic boundary score: consistency plus coherence, renormalized.
///
/// An all-zero sum stays all-zero instead of going through the
/// degenerate-range rule of [`normalize`].
pub fn compose_boundary_scores(
    consistency: &ScoreMatrix,
    coherence: &ScoreMatrix,
    cfg: &ScorerConfig,
) -> Result<ScoreMatrix> {
    let sum = consistency.zip_upper(coherence, |a, b| a + b)?;
    if sum.upper_entries().iter().all(|v| v.abs() < cfg.epsilon) {
        return Ok(ScoreMatrix::zeros(sum.n()));
    }
    Ok(normalize(&sum, cfg))
}

/// Min-max rescaling of the upper entries to `[0, 1]`.
///
/// A range narrower than `cfg.epsilon` yields the constant 0.5 matrix.
pub fn normalize(m: &ScoreMatrix, cfg: &ScorerConfig) -> ScoreMatrix {
    match cfg.normalization {
        Normalization::None => m.clone(),
        Normalization::Minmax => minmax(m, cfg.epsilon),
    }
}

pub(crate) fn minmax(m: &ScoreMatrix, epsilon: f64) -> ScoreMatrix {
    let entries = m.upper_entries();
    let lo = entries.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = entries.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if entries.is_empty() || hi - lo < epsilon {
        return ScoreMatrix::constant(m.n(), 0.5);
    }
    m.map_upper(|v| ((v - lo) / (hi - lo)).clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LexicalKind {
    Rhetorical,
    Topic,
}

/// Lowercased alphanumeric tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Term-frequency cosine between utterances, mapped to `[0, 1]`. The
/// rhetorical variant additionally decays with distance as `1 / (j - i)`.
///
/// Utterances without tokens score 0 against everything.
pub fn lexical_scores(d: &Dialogue, kind: LexicalKind) -> ScoreMatrix {
    let bags: Vec<BTreeMap<String, f64>> = d
        .utterances
        .iter()
        .map(|u| {
            let mut bag = BTreeMap::new();
            for t in tokenize(&u.text) {
                *bag.entry(t).or_insert(0.0) += 1.0;
            }
            bag
        })
        .collect();
    let norms: Vec<f64> = bags
        .iter()
        .map(|b| b.values().map(|c| c * c).sum::<f64>().sqrt())
        .collect();
    ScoreMatrix::from_fn(d.n(), |i, j| {
        let (a, b) = (&bags[i - 1], &bags[j - 1]);
        if a.is_empty() || b.is_empty() {
            return 0.0;
        }
        let c: f64 = a.iter().filter_map(|(t, x)| b.get(t).map(|y| x * y)).sum();
        let sim = (c / (norms[i - 1] * norms[j - 1]) + 1.0) / 2.0;
        match kind {
            LexicalKind::Topic => sim,
            LexicalKind::Rhetorical => sim / (j - i) as f64,
        }
    })
}

/// Normalized topic and rhetorical matrices for one dialogue.
#[derive(Clone, Debug, PartialEq)]
pub struct ScorePair {
    pub topic: ScoreMatrix,
    pub rhetorical: ScoreMatrix,
}

impl ScorePair {
    pub fn new(topic: ScoreMatrix, rhetorical: ScoreMatrix) -> Result<Self> {
        check_same_n(&topic, &rhetorical)?;
        Ok(ScorePair { topic, rhetorical })
    }

    pub fn n(&self) -> usize {
        self.topic.n()
    }

    pub fn truncate(&self, k: usize) -> Self {
        ScorePair {
            topic: self.topic.truncate(k),
            rhetorical: self.rhetorical.truncate(k),
        }
    }
}

/// Source of initial score matrices.
pub trait Scorer: Sync {
    fn score(&self, d: &Dialogue) -> Result<ScorePair>;
}

#[derive(Clone, Debug, Default)]
pub struct LexicalScorer {
    pub config: ScorerConfig,
}

impl Scorer for LexicalScorer {
    fn score(&self, d: &Dialogue) -> Result<ScorePair> {
        if d.n() < 2 {
            return Err(Error::Invalid(format!("dialogue {} has fewer than 2 utterances", d.id)));
        }
        ScorePair::new(
            normalize(&lexical_scores(d, LexicalKind::Topic), &self.config),
            normalize(&lexical_scores(d, LexicalKind::Rhetorical), &self.config),
        )
    }
}

/// Precomputed matrices keyed by dialogue id.
///
/// The topic channel is either a ready `topic` matrix or the composition of
/// `consistency` and (optional) `coherence` matrices.
#[derive(Clone, Debug, Default)]
pub struct MatrixScorer {
    pub config: ScorerConfig,
    pub rhetorical: HashMap<String, ScoreMatrix>,
    pub topic: HashMap<String, ScoreMatrix>,
    pub consistency: HashMap<String, ScoreMatrix>,
    pub coherence: HashMap<String, ScoreMatrix>,
}

impl MatrixScorer {
    fn lookup<'a>(map: &'a HashMap<String, ScoreMatrix>, d: &Dialogue, what: &str) -> Result<Option<&'a ScoreMatrix>> {
        match map.get(&d.id) {
            Some(m) if m.n() != d.n() => Err(Error::DimensionMismatch {
                expected: d.n(),
                found: m.n(),
            }),
            Some(m) => Ok(Some(m)),
            None if map.is_empty() => Ok(None),
            None => Err(Error::Invalid(format!("no {what} matrix for dialogue {}", d.id))),
        }
    }
}

impl Scorer for MatrixScorer {
    fn score(&self, d: &Dialogue) -> Result<ScorePair> {
        let rhe = Self::lookup(&self.rhetorical, d, "rhetorical")?
            .ok_or_else(|| Error::Invalid(format!("no rhetorical matrix for dialogue {}", d.id)))?;
        let topic = match Self::lookup(&self.topic, d, "topic")? {
            Some(t) => normalize(t, &self.config),
            None => {
                let cons = Self::lookup(&self.consistency, d, "consistency")?
                    .ok_or_else(|| Error::Invalid(format!("no topic matrix for dialogue {}", d.id)))?;
                let zero = ScoreMatrix::zeros(d.n());
                let coh = Self::lookup(&self.coherence, d, "coherence")?.unwrap_or(&zero);
                compose_boundary_scores(cons, coh, &self.config)?
            }
        };
        ScorePair::new(topic, normalize(rhe, &self.config))
    }
}

/// Precomputed utterance embeddings keyed by `(dialogue id, kind)`.
#[derive(Clone, Debug, Default)]
pub struct EmbeddingScorer {
    pub config: ScorerConfig,
    pub embeddings: HashMap<(String, EmbeddingKind), UtteranceEmbeddings>,
}

impl EmbeddingScorer {
    pub fn insert(&mut self, e: UtteranceEmbeddings) {
        self.embeddings.insert((e.dialogue_id.clone(), e.kind), e);
    }

    fn channel(&self, d: &Dialogue, kind: EmbeddingKind) -> Result<Option<ScoreMatrix>> {
        match self.embeddings.get(&(d.id.clone(), kind)) {
            None => Ok(None),
            Some(e) if e.n() != d.n() => Err(Error::DimensionMismatch {
                expected: d.n(),
                found: e.n(),
            }),
            Some(e) => cosine_matrix(e, self.config.epsilon).map(Some),
        }
    }
}

impl Scorer for EmbeddingScorer {
    fn score(&self, d: &Dialogue) -> Result<ScorePair> {
        let missing = |what: &str| Error::Invalid(format!("no {what} embeddings for dialogue {}", d.id));
        let rhe = self
            .channel(d, EmbeddingKind::Rhetorical)?
            .ok_or_else(|| missing("rhetorical"))?;
        let cons = self
            .channel(d, EmbeddingKind::TopicConsistency)?
            .ok_or_else(|| missing("topic consistency"))?;
        let coh = self
            .channel(d, EmbeddingKind::TopicCoherence)?
            .unwrap_or_else(|| ScoreMatrix::zeros(d.n()));
        ScorePair::new(
            compose_boundary_scores(&cons, &coh, &self.config)?,
            normalize(&rhe, &self.config),
        )
    }
}
