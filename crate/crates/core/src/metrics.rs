//! Segmentation and parsing metrics, plus corpus-level reports.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::{Arc, Error, Result, ScoreMatrix, Segmentation};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegEvalConfig {
    /// Window size. When absent, half the mean gold segment length (at least 2),
    /// capped at `n - 1`.
    pub k: Option<usize>,
}

impl SegEvalConfig {
    pub fn resolve_k(&self, gold: &Segmentation) -> Result<usize> {
        let n = gold.n();
        match self.k {
            Some(k) if k == 0 || k >= n => Err(Error::WindowTooLarge { k, n }),
            Some(k) => Ok(k),
            None => {
                if n < 2 {
                    return Err(Error::WindowTooLarge { k: 1, n });
                }
                let k = (n as f64 / (2.0 * gold.num_segments() as f64)).round() as usize;
                Ok(k.max(2).min(n - 1))
            }
        }
    }
}

fn check_pair(gold: &Segmentation, pred: &Segmentation) -> Result<()> {
    if gold.n() != pred.n() {
        return Err(Error::DimensionMismatch {
            expected: gold.n(),
            found: pred.n(),
        });
    }
    Ok(())
}

/// Share of windows `(i, i + k)` on which gold and prediction disagree about
/// whether both ends lie in the same segment.
pub fn pk(gold: &Segmentation, pred: &Segmentation, cfg: &SegEvalConfig) -> Result<f64> {
    check_pair(gold, pred)?;
    let k = cfg.resolve_k(gold)?;
    let n = gold.n();
    let (g, p) = (gold.segment_ids(), pred.segment_ids());
    let errors = (0..n - k)
        .filter(|&i| (g[i] == g[i + k]) != (p[i] == p[i + k]))
        .count();
    Ok(errors as f64 / (n - k) as f64)
}

/// Share of windows `(i, i + k)` whose internal boundary counts differ.
pub fn window_diff(gold: &Segmentation, pred: &Segmentation, cfg: &SegEvalConfig) -> Result<f64> {
    check_pair(gold, pred)?;
    let k = cfg.resolve_k(gold)?;
    let n = gold.n();
    let inside = |s: &Segmentation, i: usize| s.boundaries().range(i..i + k).count();
    let errors = (1..=n - k).filter(|&i| inside(gold, i) != inside(pred, i)).count();
    Ok(errors as f64 / (n - k) as f64)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ArcScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched: usize,
    pub gold: usize,
    pub predicted: usize,
}

impl ArcScores {
    pub fn from_counts(matched: usize, gold: usize, predicted: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(matched, predicted);
        let recall = ratio(matched, gold);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        ArcScores {
            precision,
            recall,
            f1,
            matched,
            gold,
            predicted,
        }
    }
}

/// Exact-match precision, recall and F1 over unlabeled arcs.
pub fn arc_f1(gold: &BTreeSet<Arc>, pred: &BTreeSet<Arc>) -> ArcScores {
    ArcScores::from_counts(gold.intersection(pred).count(), gold.len(), pred.len())
}

/// Distance-weighted sum of a matrix: each entry `(i, j)` counts `1 / (j - i)`.
pub fn local_rhetorical_intensity(a_top_rhe: &ScoreMatrix) -> f64 {
    let n = a_top_rhe.n();
    let mut total = 0.0;
    for i in 1..=n {
        for j in i + 1..=n {
            total += a_top_rhe.get(i, j) / (j - i) as f64;
        }
    }
    total
}

/// Min-max rescaling of per-dialogue intensities across a corpus.
pub fn rescale_intensities(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - lo) / (hi - lo)).collect()
}

/// Per-dialogue evaluation row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DialogueEval {
    pub id: String,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub one_minus_pk: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub one_minus_wd: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arcs: Option<ArcScores>,
    /// Gold arcs pointing leftward; unreachable by rightward prediction.
    #[serde(skip_serializing_if = "is_zero")]
    pub unreachable_gold: usize,
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalAggregate {
    pub dialogues: usize,
    /// Macro average over dialogues with gold segmentation.
    pub one_minus_pk: Option<f64>,
    pub one_minus_wd: Option<f64>,
    /// Micro average over all arcs.
    pub arcs: Option<ArcScores>,
    /// Upper bound on recall given leftward gold arcs.
    pub recall_ceiling: Option<f64>,
}

/// What a dialogue's prediction and gold look like, for evaluation.
pub struct EvalItem<'a> {
    pub id: &'a str,
    pub n: usize,
    pub gold_arcs: Option<BTreeSet<Arc>>,
    pub pred_arcs: Option<BTreeSet<Arc>>,
    pub gold_seg: Option<&'a Segmentation>,
    pub pred_seg: Option<&'a Segmentation>,
}

pub fn evaluate_dialogue(item: &EvalItem<'_>, cfg: &SegEvalConfig) -> Result<DialogueEval> {
    let mut row = DialogueEval {
        id: item.id.to_string(),
        n: item.n,
        k: None,
        one_minus_pk: None,
        one_minus_wd: None,
        arcs: None,
        unreachable_gold: 0,
    };
    if let (Some(gold), Some(pred)) = (item.gold_seg, item.pred_seg) {
        if gold.n() >= 2 {
            row.k = Some(cfg.resolve_k(gold)?);
            row.one_minus_pk = Some(1.0 - pk(gold, pred, cfg)?);
            row.one_minus_wd = Some(1.0 - window_diff(gold, pred, cfg)?);
        }
    }
    if let (Some(gold), Some(pred)) = (&item.gold_arcs, &item.pred_arcs) {
        row.arcs = Some(arc_f1(gold, pred));
        row.unreachable_gold = gold.iter().filter(|a| !a.is_rightward()).count();
    }
    Ok(row)
}

/// Macro-averaged segmentation scores and micro-averaged arc scores.
pub fn aggregate(rows: &[DialogueEval]) -> EvalAggregate {
    let mean = |vals: Vec<f64>| {
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    };
    let pk = mean(rows.iter().filter_map(|r| r.one_minus_pk).collect());
    let wd = mean(rows.iter().filter_map(|r| r.one_minus_wd).collect());
    let arc_rows: Vec<&ArcScores> = rows.iter().filter_map(|r| r.arcs.as_ref()).collect();
    let (arcs, recall_ceiling) = if arc_rows.is_empty() {
        (None, None)
    } else {
        let matched = arc_rows.iter().map(|a| a.matched).sum();
        let gold: usize = arc_rows.iter().map(|a| a.gold).sum();
        let predicted = arc_rows.iter().map(|a| a.predicted).sum();
        let unreachable: usize = rows.iter().map(|r| r.unreachable_gold).sum();
        let ceiling = if gold == 0 {
            1.0
        } else {
            (gold - unreachable) as f64 / gold as f64
        };
        (Some(ArcScores::from_counts(matched, gold, predicted)), Some(ceiling))
    };
    EvalAggregate {
        dialogues: rows.len(),
        one_minus_pk: pk,
        one_minus_wd: wd,
        arcs,
        recall_ceiling,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn seg(n: usize, b: &[usize]) -> Segmentation {
        Segmentation::new(n, b.iter().copied()).unwrap()
    }

    fn k(k: usize) -> SegEvalConfig {
        SegEvalConfig { k: Some(k) }
    }

    #[test]
    fn pk_examples() {
        let g = seg(6, &[2, 4]);
        assert_eq!(pk(&g, &g, &SegEvalConfig::default()).unwrap(), 0.0);
        assert_eq!(pk(&seg(4, &[2]), &seg(4, &[]), &k(1)).unwrap(), 1.0 / 3.0);
        assert_eq!(pk(&seg(5, &[]), &seg(5, &[1, 2, 3, 4]), &k(1)).unwrap(), 1.0);
    }

    #[test]
    fn wd_examples() {
        let g = seg(6, &[2, 4]);
        assert_eq!(window_diff(&g, &g, &SegEvalConfig::default()).unwrap(), 0.0);
        assert_eq!(window_diff(&seg(4, &[2]), &seg(4, &[]), &k(1)).unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn window_errors() {
        assert!(matches!(
            pk(&seg(4, &[2]), &seg(4, &[]), &k(4)),
            Err(Error::WindowTooLarge { k: 4, n: 4 })
        ));
        assert!(matches!(
            pk(&seg(4, &[2]), &seg(5, &[]), &k(1)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn default_k() {
        // 12 utterances, 3 segments: round(12 / 6) = 2
        assert_eq!(SegEvalConfig::default().resolve_k(&seg(12, &[4, 8])).unwrap(), 2);
        // 20 utterances, 1 segment: round(20 / 2) = 10
        assert_eq!(SegEvalConfig::default().resolve_k(&seg(20, &[])).unwrap(), 10);
        // capped below n
        assert_eq!(SegEvalConfig::default().resolve_k(&seg(2, &[])).unwrap(), 1);
    }

    #[test]
    fn arc_examples() {
        let gold: BTreeSet<Arc> = [Arc::new(1, 2), Arc::new(2, 3)].into();
        let pred: BTreeSet<Arc> = [Arc::new(1, 2), Arc::new(1, 3)].into();
        let s = arc_f1(&gold, &pred);
        assert_eq!((s.precision, s.recall, s.f1), (0.5, 0.5, 0.5));
        let s = arc_f1(&gold, &gold);
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        let s = arc_f1(&gold, &[Arc::new(1, 3)].into());
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn intensity_examples() {
        let mut m = ScoreMatrix::zeros(3);
        m.set(1, 3, 0.6);
        assert_abs_diff_eq!(local_rhetorical_intensity(&m), 0.3, epsilon = 1e-12);
        assert_eq!(local_rhetorical_intensity(&ScoreMatrix::zeros(4)), 0.0);
        assert_abs_diff_eq!(local_rhetorical_intensity(&ScoreMatrix::constant(3, 1.0)), 2.5, epsilon = 1e-12);
        assert_eq!(rescale_intensities(&[1.0, 3.0, 2.0]), vec![0.0, 1.0, 0.5]);
    }

    #[test]
    fn aggregate_is_micro_for_arcs() {
        let rows = vec![
            DialogueEval {
                id: "a".into(),
                n: 3,
                k: None,
                one_minus_pk: Some(1.0),
                one_minus_wd: Some(1.0),
                arcs: Some(ArcScores::from_counts(2, 2, 2)),
                unreachable_gold: 0,
            },
            DialogueEval {
                id: "b".into(),
                n: 5,
                k: None,
                one_minus_pk: Some(0.5),
                one_minus_wd: Some(0.0),
                arcs: Some(ArcScores::from_counts(0, 6, 4)),
                unreachable_gold: 2,
            },
        ];
        let agg = aggregate(&rows);
        assert_eq!(agg.one_minus_pk, Some(0.75));
        assert_eq!(agg.one_minus_wd, Some(0.5));
        let arcs = agg.arcs.unwrap();
        assert_eq!((arcs.matched, arcs.gold, arcs.predicted), (2, 8, 6));
        assert_eq!(agg.recall_ceiling, Some(0.75));
    }

    proptest::proptest! {
        #[test]
        fn precision_recall_swap(g in proptest::collection::btree_set((1usize..6, 1usize..6), 0..8),
                                 p in proptest::collection::btree_set((1usize..6, 1usize..6), 0..8)) {
            let g: BTreeSet<Arc> = g.into_iter().map(|(h, d)| Arc::new(h, d)).collect();
            let p: BTreeSet<Arc> = p.into_iter().map(|(h, d)| Arc::new(h, d)).collect();
            proptest::prop_assert_eq!(arc_f1(&g, &p).precision, arc_f1(&p, &g).recall);
        }

        #[test]
        fn intensity_is_homogeneous(values in proptest::collection::vec(0.0f64..1.0, 10), c in 0.1f64..5.0) {
            let m = ScoreMatrix::from_upper(5, &values).unwrap();
            let scaled = m.map_upper(|v| v * c);
            proptest::prop_assert!((local_rhetorical_intensity(&scaled) - c * local_rhetorical_intensity(&m)).abs() < 1e-9);
        }
    }
}
