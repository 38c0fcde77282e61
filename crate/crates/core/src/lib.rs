//! Joint rhetorical/topic structure induction for dialogues.
//!
//! Two upper-triangular score matrices per dialogue (rhetorical and topic)
//! are fused by a small set of learnable weights, aligned against each other
//! without supervision, and the resulting common matrix is decoded into a
//! discourse dependency tree (Eisner) and a topic segmentation (TextTiling).
//!
//! Utterance indices are 1-based everywhere in the public data model.

pub mod corpus;
pub mod decode;
mod error;
pub mod matrix;
pub mod metrics;
pub mod mutual;
pub mod pipeline;
pub mod scoring;
pub mod types;

pub use error::{Error, Result};
pub use matrix::{mat_stats, upper_entries, ScoreMatrix, Stats};
pub use types::{Arc, DependencyStructure, Dialogue, LabeledArc, Segmentation, Utterance};

/// Version string embedded in every file this crate writes.
pub const TOOL_VERSION: &str = concat!("dialstruct ", env!("CARGO_PKG_VERSION"));
