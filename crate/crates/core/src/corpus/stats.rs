use serde::Serialize;

use super::CorpusBundle;

/// Per-dialogue averages of a loaded corpus.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusStats {
    pub dialogues: usize,
    pub mean_utterances: f64,
    /// Mean number of distinct gold links, when the corpus has them.
    pub mean_relations: Option<f64>,
    /// Mean number of topic boundaries, when the corpus has them.
    pub mean_shifts: Option<f64>,
}

pub fn corpus_stats(c: &CorpusBundle) -> CorpusStats {
    let count = c.dialogues.len();
    let mean = |f: &dyn Fn(&crate::Dialogue) -> Option<usize>| -> Option<f64> {
        let vals: Vec<usize> = c.dialogues.iter().filter_map(f).collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<usize>() as f64 / vals.len() as f64)
        }
    };
    CorpusStats {
        dialogues: count,
        mean_utterances: mean(&|d| Some(d.n())).unwrap_or(0.0),
        mean_relations: mean(&|d| d.gold_arc_set().map(|s| s.len())),
        mean_shifts: mean(&|d| d.gold_boundaries.as_ref().map(|s| s.boundaries().len())),
    }
}

/// Published inventory of one benchmark dataset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReferenceStats {
    pub name: &'static str,
    pub mean_utterances: f64,
    /// Allowed deviation of a freshly loaded copy from `mean_utterances`.
    pub utterance_tolerance: f64,
    pub mean_relations: Option<f64>,
    pub mean_shifts: Option<f64>,
    pub train: usize,
    pub val: Option<usize>,
    pub test: usize,
}

/// The STAC utterance average is printed truncated ("10."), hence its
/// wider band.
pub const REFERENCE_STATS: [ReferenceStats; 5] = [
    ReferenceStats {
        name: "molweni",
        mean_utterances: 8.8,
        utterance_tolerance: 0.1,
        mean_relations: Some(7.8),
        mean_shifts: None,
        train: 8771,
        val: Some(883),
        test: 100,
    },
    ReferenceStats {
        name: "stac",
        mean_utterances: 10.0,
        utterance_tolerance: 0.5,
        mean_relations: Some(11.4),
        mean_shifts: None,
        train: 965,
        val: None,
        test: 116,
    },
    ReferenceStats {
        name: "doc2dial",
        mean_utterances: 12.7,
        utterance_tolerance: 0.1,
        mean_relations: None,
        mean_shifts: Some(2.9),
        train: 2895,
        val: Some(621),
        test: 621,
    },
    ReferenceStats {
        name: "tiage",
        mean_utterances: 14.8,
        utterance_tolerance: 0.1,
        mean_relations: None,
        mean_shifts: Some(3.5),
        train: 300,
        val: Some(100),
        test: 100,
    },
    ReferenceStats {
        name: "dialseg711",
        mean_utterances: 27.2,
        utterance_tolerance: 0.1,
        mean_relations: None,
        mean_shifts: Some(5.6),
        train: 711,
        val: None,
        test: 711,
    },
];

/// Looks up a dataset by case-insensitive name.
pub fn reference_stats(name: &str) -> Option<&'static ReferenceStats> {
    REFERENCE_STATS.iter().find(|r| r.name.eq_ignore_ascii_case(name))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Split, Task};
    use crate::{Arc, Dialogue, LabeledArc};

    #[test]
    fn averages() {
        let mut a = Dialogue::from_turns("a", [("x", "1"), ("y", "2"), ("x", "3")]);
        a.gold_arcs = Some(vec![
            LabeledArc { arc: Arc::new(1, 2), relation: "QAP".into() },
            LabeledArc { arc: Arc::new(1, 3), relation: "Comment".into() },
        ]);
        let mut b = Dialogue::from_turns("b", [("x", "1"), ("y", "2")]);
        b.gold_arcs = Some(vec![]);
        let c = CorpusBundle {
            dialogues: vec![a, b],
            task: Task::DiscourseParsing,
            split: Split::Test,
        };
        let s = corpus_stats(&c);
        assert_eq!(s.mean_utterances, 2.5);
        assert_eq!(s.mean_relations, Some(1.0));
        assert_eq!(s.mean_shifts, None);
    }

    #[test]
    fn reference_lookup() {
        let m = reference_stats("Molweni").unwrap();
        assert_eq!((m.mean_utterances, m.mean_relations), (8.8, Some(7.8)));
        assert_eq!(reference_stats("stac").unwrap().utterance_tolerance, 0.5);
        assert!(reference_stats("unknown").is_none());
    }
}
