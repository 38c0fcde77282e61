//! On-disk formats.
//!
//! Every file is UTF-8, newline-delimited JSON: a header line carrying
//! `format` and `version`, then one record per dialogue. The parameter file
//! is the exception: a single pretty-printed JSON document.

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{CorpusBundle, Split, Task};
use crate::mutual::{EpochRecord, FlowMode, ModelParams};
use crate::scoring::{EmbeddingKind, UtteranceEmbeddings};
use crate::{Arc, DependencyStructure, Dialogue, Error, LabeledArc, Result, ScoreMatrix, Segmentation, Utterance};

pub const VERSION: u32 = 1;
pub const CORPUS_FORMAT: &str = "dialstruct/corpus";
pub const MATRIX_FORMAT: &str = "dialstruct/matrix";
pub const EMBEDDING_FORMAT: &str = "dialstruct/embeddings";
pub const STRUCTURES_FORMAT: &str = "dialstruct/structures";
pub const PARAMS_FORMAT: &str = "dialstruct/params";

fn json_err(line: usize, e: serde_json::Error) -> Error {
    Error::parse(line, e.to_string())
}

/// Splits newline-delimited JSON into a checked header and numbered records.
fn read_jsonl(text: &str, format: &str) -> Result<(Value, Vec<(usize, Value)>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());
    let (hline, htext) = lines.next().ok_or_else(|| Error::parse(1, "missing header line"))?;
    let header: Value = serde_json::from_str(htext).map_err(|e| json_err(hline, e))?;
    match header.get("format").and_then(Value::as_str) {
        Some(f) if f == format => {}
        other => {
            return Err(Error::parse(
                hline,
                format!("expected format {format:?}, found {other:?}"),
            ))
        }
    }
    match header.get("version").and_then(Value::as_u64) {
        Some(v) if v == u64::from(VERSION) => {}
        other => return Err(Error::parse(hline, format!("unsupported version {other:?}"))),
    }
    let records = lines
        .map(|(no, l)| serde_json::from_str(l).map(|v| (no, v)).map_err(|e| json_err(no, e)))
        .collect::<Result<_>>()?;
    Ok((header, records))
}

fn decode<T: DeserializeOwned>(line: usize, v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| json_err(line, e))
}

fn write_jsonl<T: Serialize>(path: &Path, header: &Value, records: impl IntoIterator<Item = T>) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    let io = |e: serde_json::Error| Error::Io(e.into());
    serde_json::to_writer(&mut out, header).map_err(io)?;
    out.write_all(b"\n")?;
    for r in records {
        serde_json::to_writer(&mut out, &r).map_err(io)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn header(format: &str, extra: Value) -> Value {
    let mut h = serde_json::json!({ "format": format, "version": VERSION });
    if let (Value::Object(h), Value::Object(extra)) = (&mut h, extra) {
        h.extend(extra);
    }
    h
}

// ---------------------------------------------------------------------------
// Canonical corpus

#[derive(Serialize, Deserialize)]
struct CorpusHeader {
    task: Task,
    split: Split,
}

#[derive(Serialize, Deserialize)]
struct UtteranceRecord {
    speaker: String,
    text: String,
}

#[derive(Serialize, Deserialize)]
struct DialogueRecord {
    id: String,
    utterances: Vec<UtteranceRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gold_arcs: Option<Vec<(usize, usize, String)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gold_boundaries: Option<Vec<usize>>,
}

/// Parses a canonical corpus document.
pub fn parse_corpus(text: &str) -> Result<CorpusBundle> {
    let (h, records) = read_jsonl(text, CORPUS_FORMAT)?;
    let h: CorpusHeader = decode(1, h)?;
    let mut dialogues = Vec::with_capacity(records.len());
    for (line, v) in records {
        let r: DialogueRecord = decode(line, v)?;
        let n = r.utterances.len();
        let utterances = r
            .utterances
            .into_iter()
            .enumerate()
            .map(|(i, u)| Utterance {
                index: i + 1,
                speaker: u.speaker,
                text: u.text,
            })
            .collect();
        let gold_arcs = r.gold_arcs.map(|arcs| {
            arcs.into_iter()
                .map(|(h, d, relation)| LabeledArc {
                    arc: Arc::new(h, d),
                    relation,
                })
                .collect()
        });
        let gold_boundaries = r
            .gold_boundaries
            .map(|b| Segmentation::new(n, b))
            .transpose()
            .map_err(|e| Error::parse(line, e.to_string()))?;
        let d = Dialogue {
            id: r.id,
            utterances,
            gold_arcs,
            gold_boundaries,
        };
        d.validate().map_err(|e| match e {
            e @ Error::IndexOutOfRange { .. } => e,
            e => Error::parse(line, e.to_string()),
        })?;
        dialogues.push(d);
    }
    let bundle = CorpusBundle {
        dialogues,
        task: h.task,
        split: h.split,
    };
    bundle.validate()?;
    Ok(bundle)
}

pub fn read_corpus(path: &Path) -> Result<CorpusBundle> {
    parse_corpus(&fs::read_to_string(path)?)
}

pub fn write_corpus(path: &Path, c: &CorpusBundle) -> Result<()> {
    let h = header(
        CORPUS_FORMAT,
        serde_json::to_value(CorpusHeader {
            task: c.task,
            split: c.split,
        })
        .expect("header serializes"),
    );
    let records = c.dialogues.iter().map(|d| DialogueRecord {
        id: d.id.clone(),
        utterances: d
            .utterances
            .iter()
            .map(|u| UtteranceRecord {
                speaker: u.speaker.clone(),
                text: u.text.clone(),
            })
            .collect(),
        gold_arcs: d.gold_arcs.as_ref().map(|arcs| {
            arcs.iter()
                .map(|a| (a.arc.head, a.arc.dependent, a.relation.clone()))
                .collect()
        }),
        gold_boundaries: d
            .gold_boundaries
            .as_ref()
            .map(|s| s.boundaries().iter().copied().collect()),
    });
    write_jsonl(path, &h, records)
}

// ---------------------------------------------------------------------------
// Score matrices

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Rhetorical,
    Topic,
    TopicConsistency,
    TopicCoherence,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixFile {
    pub kind: MatrixKind,
    /// Free-form header fields other than format/version/kind (e.g. the
    /// exporter's recipe).
    pub meta: serde_json::Map<String, Value>,
    pub matrices: Vec<(String, ScoreMatrix)>,
}

impl MatrixFile {
    pub fn into_map(self) -> HashMap<String, ScoreMatrix> {
        self.matrices.into_iter().collect()
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRecord {
    id: String,
    n: usize,
    upper: Vec<f64>,
}

pub fn parse_matrices(text: &str) -> Result<MatrixFile> {
    let (h, records) = read_jsonl(text, MATRIX_FORMAT)?;
    let mut meta = match h {
        Value::Object(m) => m,
        _ => unreachable!("header checked to be an object"),
    };
    let kind: MatrixKind = decode(1, meta.remove("kind").unwrap_or(Value::Null))?;
    meta.remove("format");
    meta.remove("version");
    let matrices = records
        .into_iter()
        .map(|(line, v)| {
            let r: MatrixRecord = decode(line, v)?;
            let m = ScoreMatrix::from_upper(r.n, &r.upper).map_err(|e| Error::parse(line, e.to_string()))?;
            Ok((r.id, m))
        })
        .collect::<Result<_>>()?;
    Ok(MatrixFile { kind, meta, matrices })
}

pub fn read_matrices(path: &Path) -> Result<MatrixFile> {
    parse_matrices(&fs::read_to_string(path)?)
}

pub fn write_matrices(path: &Path, file: &MatrixFile) -> Result<()> {
    let mut extra = file.meta.clone();
    extra.insert("kind".into(), serde_json::to_value(file.kind).expect("kind serializes"));
    let h = header(MATRIX_FORMAT, Value::Object(extra));
    let records = file.matrices.iter().map(|(id, m)| MatrixRecord {
        id: id.clone(),
        n: m.n(),
        upper: m.upper_entries(),
    });
    write_jsonl(path, &h, records)
}

// ---------------------------------------------------------------------------
// Utterance embeddings

#[derive(Serialize, Deserialize)]
struct EmbeddingRecord {
    id: String,
    kind: EmbeddingKind,
    n: usize,
    d: usize,
    data: Vec<f64>,
}

pub fn parse_embeddings(text: &str) -> Result<Vec<UtteranceEmbeddings>> {
    let (_, records) = read_jsonl(text, EMBEDDING_FORMAT)?;
    records
        .into_iter()
        .map(|(line, v)| {
            let r: EmbeddingRecord = decode(line, v)?;
            UtteranceEmbeddings::new(r.id, r.kind, r.n, r.d, r.data).map_err(|e| Error::parse(line, e.to_string()))
        })
        .collect()
}

pub fn read_embeddings(path: &Path) -> Result<Vec<UtteranceEmbeddings>> {
    parse_embeddings(&fs::read_to_string(path)?)
}

pub fn write_embeddings(path: &Path, embeddings: &[UtteranceEmbeddings], meta: Value) -> Result<()> {
    let h = header(EMBEDDING_FORMAT, meta);
    let records = embeddings.iter().map(|e| EmbeddingRecord {
        id: e.dialogue_id.clone(),
        kind: e.kind,
        n: e.n(),
        d: e.dim(),
        data: e.data().to_vec(),
    });
    write_jsonl(path, &h, records)
}

// ---------------------------------------------------------------------------
// Predicted structures

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureRecord {
    pub id: String,
    pub n: usize,
    pub arcs: Vec<(usize, usize)>,
    pub boundaries: Vec<usize>,
}

impl StructureRecord {
    pub fn new(id: impl Into<String>, tree: &DependencyStructure, seg: &Segmentation) -> Self {
        StructureRecord {
            id: id.into(),
            n: tree.n(),
            arcs: tree.arcs().iter().map(|a| (a.head, a.dependent)).collect(),
            boundaries: seg.boundaries().iter().copied().collect(),
        }
    }

    pub fn tree(&self) -> Result<DependencyStructure> {
        DependencyStructure::new(self.n, self.arcs.iter().map(|&(h, d)| Arc::new(h, d)))
    }

    pub fn segmentation(&self) -> Result<Segmentation> {
        Segmentation::new(self.n, self.boundaries.iter().copied())
    }
}

pub fn parse_structures(text: &str) -> Result<Vec<StructureRecord>> {
    let (_, records) = read_jsonl(text, STRUCTURES_FORMAT)?;
    records
        .into_iter()
        .map(|(line, v)| {
            let r: StructureRecord = decode(line, v)?;
            r.tree().map_err(|e| Error::parse(line, e.to_string()))?;
            r.segmentation().map_err(|e| Error::parse(line, e.to_string()))?;
            Ok(r)
        })
        .collect()
}

pub fn read_structures(path: &Path) -> Result<Vec<StructureRecord>> {
    parse_structures(&fs::read_to_string(path)?)
}

/// Writes predictions; `config` is echoed into the header.
pub fn write_structures(path: &Path, records: &[StructureRecord], config: &Value) -> Result<()> {
    let h = header(
        STRUCTURES_FORMAT,
        serde_json::json!({ "tool": crate::TOOL_VERSION, "config": config }),
    );
    write_jsonl(path, &h, records)
}

// ---------------------------------------------------------------------------
// Model parameters

#[derive(Serialize, Deserialize)]
struct ParamsDocument {
    format: String,
    version: u32,
    tool: String,
    seed: u64,
    n_max: usize,
    flow_mode: FlowMode,
    w_col: Vec<f64>,
    w_row: Vec<f64>,
    w_left: Vec<f64>,
    w_right: Vec<f64>,
    #[serde(default)]
    best_epoch: usize,
    #[serde(default)]
    history: Vec<EpochRecord>,
    #[serde(default)]
    config: Value,
}

/// Parameter file contents besides the parameters themselves.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamsProvenance {
    pub seed: u64,
    pub best_epoch: usize,
    pub history: Vec<EpochRecord>,
    pub config: Value,
}

pub fn params_to_string(p: &ModelParams, prov: &ParamsProvenance) -> String {
    let doc = ParamsDocument {
        format: PARAMS_FORMAT.into(),
        version: VERSION,
        tool: crate::TOOL_VERSION.into(),
        seed: prov.seed,
        n_max: p.n_max,
        flow_mode: p.flow_mode,
        w_col: p.w_col.clone(),
        w_row: p.w_row.clone(),
        w_left: p.w_left.clone(),
        w_right: p.w_right.clone(),
        best_epoch: prov.best_epoch,
        history: prov.history.clone(),
        config: prov.config.clone(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("params serialize");
    s.push('\n');
    s
}

pub fn parse_params(text: &str) -> Result<(ModelParams, ParamsProvenance)> {
    let doc: ParamsDocument = serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
    if doc.format != PARAMS_FORMAT || doc.version != VERSION {
        return Err(Error::parse(1, format!("unsupported params file {} v{}", doc.format, doc.version)));
    }
    let p = ModelParams {
        n_max: doc.n_max,
        flow_mode: doc.flow_mode,
        w_col: doc.w_col,
        w_row: doc.w_row,
        w_left: doc.w_left,
        w_right: doc.w_right,
    };
    p.validate()?;
    Ok((
        p,
        ParamsProvenance {
            seed: doc.seed,
            best_epoch: doc.best_epoch,
            history: doc.history,
            config: doc.config,
        },
    ))
}

pub fn write_params(path: &Path, p: &ModelParams, prov: &ParamsProvenance) -> Result<()> {
    fs::write(path, params_to_string(p, prov))?;
    Ok(())
}

pub fn read_params(path: &Path) -> Result<(ModelParams, ParamsProvenance)> {
    parse_params(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"format":"dialstruct/corpus","version":1,"task":"discourse_parsing","split":"test"}
{"id":"d1","utterances":[{"speaker":"A","text":"hi"},{"speaker":"B","text":"hello"}],"gold_arcs":[[1,2,"Greeting"]]}
"#;

    #[test]
    fn minimal_canonical_file() {
        let c = parse_corpus(MINIMAL).unwrap();
        assert_eq!(c.dialogues.len(), 1);
        let d = &c.dialogues[0];
        assert_eq!(d.n(), 2);
        assert_eq!(d.gold_arc_set().unwrap().into_iter().collect::<Vec<_>>(), vec![Arc::new(1, 2)]);
        assert_eq!(d.gold_arcs.as_ref().unwrap()[0].relation, "Greeting");
    }

    #[test]
    fn header_is_checked() {
        let bad = MINIMAL.replace("\"version\":1", "\"version\":7");
        assert!(matches!(parse_corpus(&bad), Err(Error::Parse { line: 1, .. })));
        let wrong = MINIMAL.replace("dialstruct/corpus", "dialstruct/matrix");
        assert!(matches!(parse_corpus(&wrong), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn bad_record_reports_line() {
        let text = format!("{MINIMAL}{{\"id\": 3}}\n");
        assert!(matches!(parse_corpus(&text), Err(Error::Parse { line: 3, .. })));
        let oob = MINIMAL.replace("[1,2,\"Greeting\"]", "[1,5,\"Greeting\"]");
        assert!(matches!(parse_corpus(&oob), Err(Error::IndexOutOfRange { index: 5, .. })));
    }

    #[test]
    fn matrix_file_keeps_meta() {
        let text = r#"{"format":"dialstruct/matrix","version":1,"kind":"rhetorical","recipe":"mean-final-layer"}
{"id":"d1","n":3,"upper":[0.1,0.2,0.3]}
"#;
        let f = parse_matrices(text).unwrap();
        assert_eq!(f.kind, MatrixKind::Rhetorical);
        assert_eq!(f.meta["recipe"], "mean-final-layer");
        assert_eq!(f.matrices[0].1.get(2, 3), 0.3);
        let short = text.replace("[0.1,0.2,0.3]", "[0.1,0.2]");
        assert!(matches!(parse_matrices(&short), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn embedding_dims_checked() {
        let text = r#"{"format":"dialstruct/embeddings","version":1}
{"id":"d1","kind":"topic_consistency","n":2,"d":2,"data":[1.0,0.0,0.0]}
"#;
        assert!(matches!(parse_embeddings(text), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn params_round_trip() {
        let p = ModelParams::init(4, FlowMode::PerIndex, 42);
        let prov = ParamsProvenance {
            seed: 42,
            best_epoch: 2,
            history: vec![],
            config: serde_json::json!({"learning_rate": 3e-6}),
        };
        let text = params_to_string(&p, &prov);
        let (back, prov_back) = parse_params(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(prov_back, prov);
    }
}
