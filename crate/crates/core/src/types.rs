//! Dialogues, arcs, trees and segmentations.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    /// 1-based position in the dialogue.
    pub index: usize,
    pub speaker: String,
    pub text: String,
}

/// Unlabeled directed link from `head` to `dependent`.
///
/// Predicted arcs always point rightward (`head < dependent`). Gold arcs read
/// from external corpora may point backwards; they are kept as-is so that
/// they count against recall.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Arc {
    pub head: usize,
    pub dependent: usize,
}

impl Arc {
    pub fn new(head: usize, dependent: usize) -> Self {
        Arc { head, dependent }
    }

    pub fn is_rightward(&self) -> bool {
        self.head < self.dependent
    }

    pub fn len(&self) -> usize {
        self.head.abs_diff(self.dependent)
    }
}

/// Gold arc with its relation label. Labels are preserved but never scored.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledArc {
    pub arc: Arc,
    pub relation: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dialogue {
    pub id: String,
    pub utterances: Vec<Utterance>,
    pub gold_arcs: Option<Vec<LabeledArc>>,
    pub gold_boundaries: Option<Segmentation>,
}

impl Dialogue {
    /// Creates a dialogue from `(speaker, text)` pairs, numbering them from 1.
    pub fn from_turns<S, T>(id: impl Into<String>, turns: impl IntoIterator<Item = (S, T)>) -> Self
    where
        S: Into<String>,
        T: Into<String>,
    {
        let utterances = turns
            .into_iter()
            .enumerate()
            .map(|(i, (speaker, text))| Utterance {
                index: i + 1,
                speaker: speaker.into(),
                text: text.into(),
            })
            .collect();
        Dialogue {
            id: id.into(),
            utterances,
            gold_arcs: None,
            gold_boundaries: None,
        }
    }

    pub fn n(&self) -> usize {
        self.utterances.len()
    }

    /// Gold arcs with labels stripped and duplicates removed.
    pub fn gold_arc_set(&self) -> Option<BTreeSet<Arc>> {
        self.gold_arcs
            .as_ref()
            .map(|arcs| arcs.iter().map(|a| a.arc).collect())
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        for (pos, u) in self.utterances.iter().enumerate() {
            if u.index != pos + 1 {
                return Err(Error::Invalid(format!(
                    "dialogue {}: utterance at position {} has index {}",
                    self.id,
                    pos + 1,
                    u.index
                )));
            }
            if u.text.trim().is_empty() {
                return Err(Error::Invalid(format!(
                    "dialogue {}: utterance {} is empty",
                    self.id, u.index
                )));
            }
        }
        if let Some(arcs) = &self.gold_arcs {
            for a in arcs {
                for index in [a.arc.head, a.arc.dependent] {
                    if index == 0 || index > n {
                        return Err(Error::IndexOutOfRange {
                            dialogue: self.id.clone(),
                            index,
                            n,
                        });
                    }
                }
            }
        }
        if let Some(seg) = &self.gold_boundaries {
            if seg.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: seg.n(),
                });
            }
        }
        Ok(())
    }
}

/// Topic segmentation of `n` utterances as a set of boundary gaps.
///
/// Gap `g` separates utterance `g` from utterance `g + 1`, so valid gaps lie
/// in `[1, n - 1]`. No boundaries means a single topic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segmentation {
    n: usize,
    boundaries: BTreeSet<usize>,
}

impl Segmentation {
    pub fn new(n: usize, boundaries: impl IntoIterator<Item = usize>) -> Result<Self> {
        let boundaries: BTreeSet<usize> = boundaries.into_iter().collect();
        if let Some(&g) = boundaries.iter().find(|&&g| g == 0 || g >= n) {
            return Err(Error::Invalid(format!(
                "boundary gap {g} outside [1, {}]",
                n.saturating_sub(1)
            )));
        }
        Ok(Segmentation { n, boundaries })
    }

    pub fn single(n: usize) -> Self {
        Segmentation {
            n,
            boundaries: BTreeSet::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn boundaries(&self) -> &BTreeSet<usize> {
        &self.boundaries
    }

    pub fn num_segments(&self) -> usize {
        self.boundaries.len() + 1
    }

    /// Segment number (0-based) of every utterance, in utterance order.
    pub fn segment_ids(&self) -> Vec<usize> {
        let mut ids = Vec::with_capacity(self.n);
        let mut seg = 0;
        for u in 1..=self.n {
            ids.push(seg);
            if self.boundaries.contains(&u) {
                seg += 1;
            }
        }
        ids
    }

    /// Boundaries that fall inside the first `k` utterances.
    pub fn truncate(&self, k: usize) -> Self {
        let k = k.min(self.n);
        Segmentation {
            n: k,
            boundaries: self.boundaries.iter().copied().filter(|&g| g < k).collect(),
        }
    }
}

/// Rooted projective tree over utterances `1..=n` with rightward arcs only.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyStructure {
    n: usize,
    // Sorted by dependent.
    arcs: Vec<Arc>,
}

impl DependencyStructure {
    pub fn new(n: usize, arcs: impl IntoIterator<Item = Arc>) -> Result<Self> {
        let mut arcs: Vec<Arc> = arcs.into_iter().collect();
        arcs.sort_by_key(|a| (a.dependent, a.head));
        validate_tree(n, &arcs)?;
        Ok(DependencyStructure { n, arcs })
    }

    /// Builds the tree from a head table where `heads[j - 2]` is the head of utterance `j`.
    pub fn from_heads(heads: &[usize]) -> Result<Self> {
        let n = heads.len() + 1;
        Self::new(n, heads.iter().enumerate().map(|(k, &h)| Arc::new(h, k + 2)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc_set(&self) -> BTreeSet<Arc> {
        self.arcs.iter().copied().collect()
    }

    /// Head of every utterance `2..=n`, in order.
    pub fn heads(&self) -> Vec<usize> {
        self.arcs.iter().map(|a| a.head).collect()
    }

    /// Sum of `scores` over the tree's arcs.
    pub fn score(&self, scores: &crate::ScoreMatrix) -> f64 {
        self.arcs.iter().map(|a| scores.get(a.head, a.dependent)).sum()
    }
}

/// Checks the tree invariants: `n - 1` rightward arcs, every utterance
/// `2..=n` is a dependent exactly once (so utterance 1 is the only root),
/// and no two arcs cross.
pub fn validate_tree(n: usize, arcs: &[Arc]) -> Result<()> {
    if n == 0 {
        return Err(Error::Invalid("tree over zero utterances".into()));
    }
    if arcs.len() != n - 1 {
        return Err(Error::Invalid(format!(
            "tree over {n} utterances needs {} arcs, got {}",
            n - 1,
            arcs.len()
        )));
    }
    let mut seen = vec![false; n + 1];
    for a in arcs {
        if a.head == 0 || a.dependent > n || !a.is_rightward() {
            return Err(Error::Invalid(format!(
                "arc ({}, {}) is not a rightward arc within [1, {n}]",
                a.head, a.dependent
            )));
        }
        if std::mem::replace(&mut seen[a.dependent], true) {
            return Err(Error::Invalid(format!("utterance {} has two heads", a.dependent)));
        }
    }
    for a in arcs {
        for b in arcs {
            if a.head < b.head && b.head < a.dependent && a.dependent < b.dependent {
                return Err(Error::Invalid(format!(
                    "arcs ({}, {}) and ({}, {}) cross",
                    a.head, a.dependent, b.head, b.dependent
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_ids_follow_boundaries() {
        let s = Segmentation::new(5, [2, 3]).unwrap();
        assert_eq!(s.segment_ids(), vec![0, 0, 1, 2, 2]);
        assert_eq!(s.num_segments(), 3);
        assert!(Segmentation::new(3, [3]).is_err());
        assert!(Segmentation::new(3, [0]).is_err());
    }

    #[test]
    fn tree_validator() {
        assert!(DependencyStructure::from_heads(&[1, 1, 3]).is_ok());
        // (1,3) and (2,4) cross
        assert!(DependencyStructure::from_heads(&[1, 1, 2]).is_err());
        // leftward arc
        assert!(DependencyStructure::new(3, [Arc::new(1, 2), Arc::new(3, 2)]).is_err());
        // utterance 3 has no head
        assert!(DependencyStructure::new(3, [Arc::new(1, 2)]).is_err());
    }

    #[test]
    fn dialogue_validation_catches_bad_gold() {
        let mut d = Dialogue::from_turns("d", [("a", "hi"), ("b", "hello")]);
        assert!(d.validate().is_ok());
        d.gold_arcs = Some(vec![LabeledArc {
            arc: Arc::new(1, 3),
            relation: "QAP".into(),
        }]);
        assert!(matches!(d.validate(), Err(Error::IndexOutOfRange { index: 3, .. })));
    }
}
