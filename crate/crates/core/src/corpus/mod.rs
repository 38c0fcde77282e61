//! Corpora: file formats, dataset converters, truncation, statistics and
//! synthetic planted-structure generation.

mod convert;
pub mod format;
mod stats;
mod synth;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use convert::{parse_link_json, parse_linear_segments};
pub use format::{read_corpus, write_corpus};
pub use stats::{corpus_stats, reference_stats, CorpusStats, ReferenceStats, REFERENCE_STATS};
pub use synth::{generate_synthetic, planted_tree, SyntheticSpec};

use crate::{Dialogue, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    DiscourseParsing,
    TopicSegmentation,
    Both,
}

impl Task {
    pub fn has_arcs(self) -> bool {
        matches!(self, Task::DiscourseParsing | Task::Both)
    }

    pub fn has_boundaries(self) -> bool {
        matches!(self, Task::TopicSegmentation | Task::Both)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    /// Guesses the split from a file name (`train`, `dev`/`val`, otherwise test).
    pub fn from_path(path: &Path) -> Split {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().to_lowercase())
            .unwrap_or_default();
        if stem.contains("train") {
            Split::Train
        } else if stem.contains("dev") || stem.contains("val") {
            Split::Val
        } else {
            Split::Test
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusBundle {
    pub dialogues: Vec<Dialogue>,
    pub task: Task,
    pub split: Split,
}

impl CorpusBundle {
    pub fn validate(&self) -> Result<()> {
        for d in &self.dialogues {
            d.validate()?;
            let bad = |what: &str| {
                Err(crate::Error::Invalid(format!(
                    "dialogue {}: {what} does not match task {:?}",
                    d.id, self.task
                )))
            };
            // Unannotated dialogues are fine; annotations outside the task are not.
            if d.gold_arcs.is_some() && !self.task.has_arcs() {
                return bad("gold arcs");
            }
            if d.gold_boundaries.is_some() && !self.task.has_boundaries() {
                return bad("gold boundaries");
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusFormat {
    #[default]
    Canonical,
    StacLinks,
    MolweniLinks,
    LinearSegments,
}

/// Reads a corpus in any supported format into canonical form.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<CorpusBundle> {
    let split = Split::from_path(path);
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dialogue".into());
    match format {
        CorpusFormat::Canonical => read_corpus(path),
        CorpusFormat::StacLinks | CorpusFormat::MolweniLinks => {
            let text = std::fs::read_to_string(path)?;
            Ok(CorpusBundle {
                dialogues: parse_link_json(&text, &stem)?,
                task: Task::DiscourseParsing,
                split,
            })
        }
        CorpusFormat::LinearSegments => {
            let text = std::fs::read_to_string(path)?;
            Ok(CorpusBundle {
                dialogues: parse_linear_segments(&text, &stem)?,
                task: Task::TopicSegmentation,
                split,
            })
        }
    }
}

/// First `max_turns` utterances of a dialogue, with gold structure that
/// refers to removed utterances dropped.
pub fn truncate_dialogue(d: &Dialogue, max_turns: usize) -> Dialogue {
    if d.n() <= max_turns {
        return d.clone();
    }
    Dialogue {
        id: d.id.clone(),
        utterances: d.utterances[..max_turns].to_vec(),
        gold_arcs: d.gold_arcs.as_ref().map(|arcs| {
            arcs.iter()
                .filter(|a| a.arc.head <= max_turns && a.arc.dependent <= max_turns)
                .cloned()
                .collect()
        }),
        gold_boundaries: d.gold_boundaries.as_ref().map(|s| s.truncate(max_turns)),
    }
}

/// Truncates train and validation dialogues; test dialogues keep every turn.
pub fn truncate_for_training(c: &CorpusBundle, max_turns: usize) -> CorpusBundle {
    assert!(max_turns >= 2, "max_turns must be at least 2");
    let dialogues = match c.split {
        Split::Test => c.dialogues.clone(),
        Split::Train | Split::Val => c.dialogues.iter().map(|d| truncate_dialogue(d, max_turns)).collect(),
    };
    CorpusBundle {
        dialogues,
        task: c.task,
        split: c.split,
    }
}
