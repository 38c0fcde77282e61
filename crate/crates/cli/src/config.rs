use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use dialstruct::corpus::{CorpusFormat, SyntheticSpec};
use dialstruct::decode::TilingConfig;
use dialstruct::metrics::SegEvalConfig;
use dialstruct::mutual::TrainConfig;
use dialstruct::scoring::ScorerConfig;

/// Everything a command needs, loaded from TOML and `--set` overrides.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scorer: ScorerConfig,
    pub train: TrainConfig,
    pub tiling: TilingConfig,
    pub eval: SegEvalConfig,
    pub synth: SyntheticSpec,
    pub paths: Paths,
    /// Worker threads for per-dialogue commands; all cores when absent.
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub corpus_format: CorpusFormat,
    /// Optional validation corpus for `train`, same format as `corpus`.
    pub validation: Option<PathBuf>,
    pub rhetorical: Option<PathBuf>,
    pub topic: Option<PathBuf>,
    pub consistency: Option<PathBuf>,
    pub coherence: Option<PathBuf>,
    pub embeddings: Vec<PathBuf>,
    /// Parameters read by `infer`.
    pub params_in: Option<PathBuf>,
    /// Parameters written by `train`.
    pub params_out: Option<PathBuf>,
    /// Structures read by `eval`.
    pub predictions: Option<PathBuf>,
    /// Output file (`infer`, `eval`) or directory (`score`, `synth`).
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, overrides: &[String], seed: Option<u64>) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                text.parse::<toml::Table>()
                    .with_context(|| format!("parsing config {}", p.display()))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let mut cfg: RunConfig = toml::Value::Table(table).try_into().context("invalid configuration")?;
        if let Some(s) = seed {
            cfg.train.seed = s;
            cfg.synth.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.scorer.validate()?;
        self.train.validate()?;
        self.tiling.validate()?;
        if self.threads == Some(0) {
            bail!("threads must be at least 1");
        }
        Ok(())
    }

    /// Provenance copy of the configuration. Output locations are left out
    /// so that the same run written to two places yields identical files.
    pub fn echo(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(paths) = v.get_mut("paths").and_then(|p| p.as_object_mut()) {
            paths.remove("params_out");
            paths.remove("output");
        }
        v
    }

    pub fn require<'a>(&self, path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
        match path {
            Some(p) => Ok(p),
            None => bail!("missing paths.{what} (set it in the config or with --set paths.{what}=...)"),
        }
    }
}

/// Applies one `dotted.key=value` override. The value is read as a TOML
/// value when it parses as one and as a bare string otherwise.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let Some((key, raw)) = spec.split_once('=') else {
        bail!("override {spec:?} is not of the form key=value");
    };
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        bail!("override {spec:?} has an empty key segment");
    }
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().expect("non-empty key");
    let mut cur = table;
    for p in parts {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = match entry {
            toml::Value::Table(t) => t,
            _ => bail!("override {spec:?}: {p} is not a table"),
        };
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_nest_and_type() {
        let cfg = RunConfig::load(
            None,
            &[
                "train.learning_rate=0.01".into(),
                "train.max_epochs=4".into(),
                "paths.corpus=data/x.jsonl".into(),
                "synth.turns=[4, 6]".into(),
            ],
            Some(7),
        )
        .unwrap();
        assert_eq!(cfg.train.learning_rate, 0.01);
        assert_eq!(cfg.train.max_epochs, 4);
        assert_eq!(cfg.train.seed, 7);
        assert_eq!(cfg.synth.turns, (4, 6));
        assert_eq!(cfg.paths.corpus.as_deref(), Some(Path::new("data/x.jsonl")));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::load(None, &["train.learnin_rate=1".into()], None).is_err());
        assert!(RunConfig::load(None, &["nonsense".into()], None).is_err());
    }

    #[test]
    fn echo_drops_outputs() {
        let mut cfg = RunConfig::default();
        cfg.paths.output = Some("a".into());
        cfg.paths.params_out = Some("b".into());
        let e = cfg.echo();
        assert!(e["paths"].get("output").is_none());
        assert!(e["paths"].get("params_out").is_none());
        assert!(e["paths"].get("corpus").is_some());
    }
}
