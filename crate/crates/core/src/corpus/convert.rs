//! Best-effort adapters for public dataset layouts.

use std::collections::BTreeSet;

use log::warn;
use serde::Deserialize;

use crate::{Arc, Dialogue, Error, LabeledArc, Result, Segmentation};

/// Text substituted for utterances that are empty in the source data.
const EMPTY_PLACEHOLDER: &str = "<empty>";

#[derive(Deserialize)]
struct LinkEdu {
    #[serde(default)]
    speaker: String,
    #[serde(default)]
    text: String,
}

#[derive(Deserialize)]
struct LinkRelation {
    x: i64,
    y: i64,
    #[serde(rename = "type", default)]
    relation: String,
}

#[derive(Deserialize)]
struct LinkDialogue {
    #[serde(default)]
    id: Option<serde_json::Value>,
    edus: Vec<LinkEdu>,
    #[serde(default)]
    relations: Vec<LinkRelation>,
}

/// Parses the JSON list layout shared by the STAC and Molweni releases:
/// `[{"id", "edus": [{"speaker", "text"}], "relations": [{"x", "y", "type"}]}]`
/// with 0-based `x` (head) and `y` (dependent).
///
/// Duplicate links are dropped with a warning. Dialogues without an id are
/// named `{stem}-{position}`.
pub fn parse_link_json(text: &str, stem: &str) -> Result<Vec<Dialogue>> {
    let raw: Vec<LinkDialogue> = serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
    raw.into_iter()
        .enumerate()
        .map(|(pos, r)| {
            let id = match r.id {
                Some(serde_json::Value::String(s)) => s,
                Some(v) => v.to_string(),
                None => format!("{stem}-{pos}"),
            };
            let n = r.edus.len();
            let turns = r.edus.into_iter().enumerate().map(|(k, e)| {
                let text = if e.text.trim().is_empty() {
                    warn!("dialogue {id}: utterance {} is empty", k + 1);
                    EMPTY_PLACEHOLDER.to_string()
                } else {
                    e.text
                };
                (e.speaker, text)
            });
            let mut d = Dialogue::from_turns(id.clone(), turns);
            let mut seen = BTreeSet::new();
            let mut arcs = Vec::with_capacity(r.relations.len());
            for rel in r.relations {
                let to_index = |v: i64| -> Result<usize> {
                    if v < 0 || v as usize >= n {
                        return Err(Error::IndexOutOfRange {
                            dialogue: id.clone(),
                            index: (v + 1).max(0) as usize,
                            n,
                        });
                    }
                    Ok(v as usize + 1)
                };
                let arc = Arc::new(to_index(rel.x)?, to_index(rel.y)?);
                if !seen.insert(arc) {
                    warn!("dialogue {id}: duplicate arc {} -> {} dropped", arc.head, arc.dependent);
                    continue;
                }
                arcs.push(LabeledArc {
                    arc,
                    relation: rel.relation,
                });
            }
            d.gold_arcs = Some(arcs);
            Ok(d)
        })
        .collect()
}

fn is_delimiter(line: &str) -> bool {
    let t = line.trim();
    t.len() >= 3 && t.chars().all(|c| c == '=')
}

/// Parses plain-text segmentation corpora: one utterance per line, a line of
/// `===` (three or more) between topics, and a blank line between dialogues.
/// A line of the form `speaker<TAB>text` carries its speaker.
pub fn parse_linear_segments(text: &str, stem: &str) -> Result<Vec<Dialogue>> {
    let mut dialogues = Vec::new();
    let mut turns: Vec<(String, String)> = Vec::new();
    let mut boundaries: Vec<usize> = Vec::new();
    let mut start_line = 1;

    let mut flush = |turns: &mut Vec<(String, String)>, boundaries: &mut Vec<usize>, line: usize| -> Result<()> {
        if turns.is_empty() {
            boundaries.clear();
            return Ok(());
        }
        let n = turns.len();
        // Delimiters before the first or after the last utterance mark no gap.
        let gaps = boundaries.drain(..).filter(|&g| g > 0 && g < n);
        let seg = Segmentation::new(n, gaps).map_err(|e| Error::parse(line, e.to_string()))?;
        let mut d = Dialogue::from_turns(format!("{stem}-{}", dialogues.len()), turns.drain(..));
        d.gold_boundaries = Some(seg);
        dialogues.push(d);
        Ok(())
    };

    for (no, line) in text.lines().enumerate() {
        let no = no + 1;
        if line.trim().is_empty() {
            flush(&mut turns, &mut boundaries, start_line)?;
            start_line = no + 1;
        } else if is_delimiter(line) {
            if boundaries.last() != Some(&turns.len()) {
                boundaries.push(turns.len());
            }
        } else {
            let (speaker, body) = match line.split_once('\t') {
                Some((s, t)) => (s.trim().to_string(), t.trim().to_string()),
                None => (String::new(), line.trim().to_string()),
            };
            turns.push((speaker, body));
        }
    }
    flush(&mut turns, &mut boundaries, start_line)?;
    Ok(dialogues)
}
