//! Decoding the common matrix into structures.

mod eisner;
mod tiling;

pub use eisner::eisner;
pub use tiling::{depth_scores, gap_scores, texttiling, ThresholdPolicy, TilingConfig};
