//! End-to-end decoding of scored dialogues.

use crate::decode::{eisner, texttiling, TilingConfig};
use crate::mutual::{common_matrix, fuse, ModelParams};
use crate::scoring::{minmax, ScorePair};
use crate::{DependencyStructure, Result, ScoreMatrix, Segmentation};

/// Structures decoded from one dialogue.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub tree: DependencyStructure,
    pub segmentation: Segmentation,
    /// The matrix both decoders read.
    pub common: ScoreMatrix,
}

/// Decodes a tree and a segmentation from the same matrix.
pub fn decode(common: ScoreMatrix, tiling: &TilingConfig) -> Prediction {
    Prediction {
        tree: eisner(&common),
        segmentation: texttiling(&common, tiling),
        common,
    }
}

/// Fuses the pair under `params` and decodes the common matrix.
pub fn infer(pair: &ScorePair, params: &ModelParams, tiling: &TilingConfig) -> Result<Prediction> {
    let fused = fuse(&pair.topic, &pair.rhetorical, params)?;
    Ok(decode(common_matrix(&fused), tiling))
}

/// Baseline that decodes the normalized sum of the two input matrices.
pub fn simple_incorporation(pair: &ScorePair, tiling: &TilingConfig) -> Prediction {
    let sum = pair
        .topic
        .zip_upper(&pair.rhetorical, |a, b| a + b)
        .expect("score pair with mismatched dimensions");
    decode(minmax(&sum, 1e-12), tiling)
}

/// Decodes each input matrix on its own: the tree from the rhetorical
/// matrix and the segmentation from the topic matrix.
pub fn separate(pair: &ScorePair, tiling: &TilingConfig) -> (DependencyStructure, Segmentation) {
    (eisner(&pair.rhetorical), texttiling(&pair.topic, tiling))
}
