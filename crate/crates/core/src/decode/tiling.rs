//! TextTiling over a score matrix.
//!
//! Cohesion across a gap is the mean score of the block of pairs that
//! straddle it (up to `window` utterances on each side). Valleys in the
//! cohesion curve are scored by how far the curve climbs on both sides, and
//! valleys deeper than the cutoff become topic boundaries.

use serde::{Deserialize, Serialize};

use crate::matrix::population_stats;
use crate::{Error, Result, ScoreMatrix, Segmentation};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy", content = "value")]
pub enum ThresholdPolicy {
    /// Mean minus half the standard deviation of the depth scores.
    MuMinusHalfSigma,
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TilingConfig {
    pub window: usize,
    pub threshold: ThresholdPolicy,
    /// Width of a centered moving average applied to the gap scores.
    pub smoothing: Option<usize>,
}

impl Default for TilingConfig {
    fn default() -> Self {
        TilingConfig {
            window: 2,
            threshold: ThresholdPolicy::MuMinusHalfSigma,
            smoothing: None,
        }
    }
}

impl TilingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::Invalid("tiling window must be at least 1".into()));
        }
        if let ThresholdPolicy::Fixed(t) = self.threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::Invalid("fixed tiling threshold must lie in [0, 1]".into()));
            }
        }
        Ok(())
    }
}

/// Block cohesion for every gap `1..n`; entry `i - 1` belongs to gap `i`.
pub fn gap_scores(common: &ScoreMatrix, cfg: &TilingConfig) -> Vec<f64> {
    let n = common.n();
    let w = cfg.window.max(1);
    let raw: Vec<f64> = (1..n)
        .map(|gap| {
            let rows = gap.saturating_sub(w - 1).max(1)..=gap;
            let cols = gap + 1..=(gap + w).min(n);
            let mut sum = 0.0;
            let mut count = 0usize;
            for p in rows {
                for q in cols.clone() {
                    sum += common.get(p, q);
                    count += 1;
                }
            }
            sum / count as f64
        })
        .collect();
    match cfg.smoothing {
        Some(width) if width > 1 => smooth(&raw, width),
        _ => raw,
    }
}

fn smooth(values: &[f64], width: usize) -> Vec<f64> {
    let half = width / 2;
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(values.len() - 1);
            values[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// Depth of every gap in the cohesion curve.
///
/// Only valley floors get a depth: the climb to the highest point reached
/// moving left while the curve does not decrease, plus the same to the
/// right. Gaps with a strictly lower neighbour score 0, and a flat floor
/// spanning several gaps credits its depth to the leftmost one.
pub fn depth_scores(g: &[f64]) -> Vec<f64> {
    let len = g.len();
    let mut depth = vec![0.0; len];
    let mut a = 0;
    while a < len {
        let v = g[a];
        let mut b = a;
        while b + 1 < len && g[b + 1] == v {
            b += 1;
        }
        let left_higher = a == 0 || g[a - 1] > v;
        let right_higher = b + 1 == len || g[b + 1] > v;
        if left_higher && right_higher {
            let mut left_peak = v;
            for &x in g[..a].iter().rev() {
                if x < left_peak {
                    break;
                }
                left_peak = x;
            }
            let mut right_peak = v;
            for &x in &g[b + 1..] {
                if x < right_peak {
                    break;
                }
                right_peak = x;
            }
            depth[a] = (left_peak - v) + (right_peak - v);
        }
        a = b + 1;
    }
    depth
}

/// Segments the dialogue at gaps whose depth exceeds the cutoff.
///
/// A gap must also have positive depth, so flat stretches never produce
/// boundaries even when the cutoff drops below zero.
pub fn texttiling(common: &ScoreMatrix, cfg: &TilingConfig) -> Segmentation {
    let n = common.n();
    if n < 2 {
        return Segmentation::single(n);
    }
    let depth = depth_scores(&gap_scores(common, cfg));
    let cutoff = match cfg.threshold {
        ThresholdPolicy::Fixed(t) => t,
        ThresholdPolicy::MuMinusHalfSigma => {
            let s = population_stats(&depth);
            s.mean - s.std / 2.0
        }
    };
    let boundaries = depth
        .iter()
        .enumerate()
        .filter(|(_, &d)| d > 0.0 && d > cutoff)
        .map(|(i, _)| i + 1);
    Segmentation::new(n, boundaries).expect("gap index out of range")
}
