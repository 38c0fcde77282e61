use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use log::{info, warn};
use rayon::prelude::*;
use serde_json::{json, Value};

use dialstruct::corpus::format::{
    read_embeddings, read_matrices, read_params, read_structures, write_matrices, write_params, write_structures,
    MatrixFile, MatrixKind, ParamsProvenance, StructureRecord,
};
use dialstruct::corpus::{corpus_stats, generate_synthetic, load_corpus, reference_stats, write_corpus, CorpusBundle};
use dialstruct::metrics::{aggregate, evaluate_dialogue, EvalItem};
use dialstruct::mutual::{train, ModelParams};
use dialstruct::pipeline::infer;
use dialstruct::scoring::{EmbeddingScorer, LexicalScorer, MatrixScorer, ScorePair, ScoreSource, Scorer};
use dialstruct::{DependencyStructure, Dialogue, Segmentation, TOOL_VERSION};

use crate::config::RunConfig;

/// Convention note carried by every evaluation report.
const METRIC_CONVENTION: &str =
    "segmentation as 1-Pk and 1-WD, macro-averaged over dialogues; arcs unlabeled, micro-averaged P/R/F1";

fn pool(cfg: &RunConfig) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .context("starting worker pool")
}

fn load(cfg: &RunConfig) -> Result<CorpusBundle> {
    let path = cfg.require(&cfg.paths.corpus, "corpus")?;
    let c = load_corpus(path, cfg.paths.corpus_format).with_context(|| format!("loading {}", path.display()))?;
    c.validate().with_context(|| format!("validating {}", path.display()))?;
    Ok(c)
}

fn matrix_map(path: &Option<std::path::PathBuf>, expected: MatrixKind) -> Result<HashMap<String, dialstruct::ScoreMatrix>> {
    let Some(path) = path else {
        return Ok(HashMap::new());
    };
    let file = read_matrices(path).with_context(|| format!("reading {}", path.display()))?;
    if file.kind != expected {
        bail!("{} holds {:?} matrices, expected {:?}", path.display(), file.kind, expected);
    }
    Ok(file.into_map())
}

pub fn build_scorer(cfg: &RunConfig) -> Result<Box<dyn Scorer>> {
    let config = cfg.scorer.clone();
    Ok(match cfg.scorer.source {
        ScoreSource::Lexical => Box::new(LexicalScorer { config }),
        ScoreSource::MatrixFile => {
            let p = &cfg.paths;
            if p.rhetorical.is_none() {
                bail!("matrix_file scoring needs paths.rhetorical");
            }
            if p.topic.is_none() && p.consistency.is_none() {
                bail!("matrix_file scoring needs paths.topic or paths.consistency");
            }
            Box::new(MatrixScorer {
                config,
                rhetorical: matrix_map(&p.rhetorical, MatrixKind::Rhetorical)?,
                topic: matrix_map(&p.topic, MatrixKind::Topic)?,
                consistency: matrix_map(&p.consistency, MatrixKind::TopicConsistency)?,
                coherence: matrix_map(&p.coherence, MatrixKind::TopicCoherence)?,
            })
        }
        ScoreSource::EmbeddingFile => {
            if cfg.paths.embeddings.is_empty() {
                bail!("embedding_file scoring needs paths.embeddings");
            }
            let mut s = EmbeddingScorer {
                config,
                ..Default::default()
            };
            for path in &cfg.paths.embeddings {
                for e in read_embeddings(path).with_context(|| format!("reading {}", path.display()))? {
                    s.insert(e);
                }
            }
            Box::new(s)
        }
    })
}

fn meta(cfg: &RunConfig) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("tool".into(), TOOL_VERSION.into());
    m.insert("config".into(), cfg.echo());
    m
}

fn output_dir(cfg: &RunConfig) -> Result<&Path> {
    let dir = cfg.require(&cfg.paths.output, "output")?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn write_pairs(dir: &Path, ids: &[String], pairs: &[ScorePair], cfg: &RunConfig) -> Result<()> {
    for (kind, name) in [(MatrixKind::Topic, "topic.jsonl"), (MatrixKind::Rhetorical, "rhetorical.jsonl")] {
        let matrices = ids
            .iter()
            .zip(pairs)
            .map(|(id, p)| {
                let m = if kind == MatrixKind::Topic { &p.topic } else { &p.rhetorical };
                (id.clone(), m.clone())
            })
            .collect();
        let file = MatrixFile {
            kind,
            meta: meta(cfg),
            matrices,
        };
        let path = dir.join(name);
        write_matrices(&path, &file).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

pub fn score(cfg: &RunConfig) -> Result<()> {
    let corpus = load(cfg)?;
    let scorer = build_scorer(cfg)?;
    let dir = output_dir(cfg)?;
    let pairs: Vec<ScorePair> = pool(cfg)?.install(|| {
        corpus
            .dialogues
            .par_iter()
            .map(|d| scorer.score(d).with_context(|| format!("scoring dialogue {}", d.id)))
            .collect::<Result<_>>()
    })?;
    let ids: Vec<String> = corpus.dialogues.iter().map(|d| d.id.clone()).collect();
    write_pairs(dir, &ids, &pairs, cfg)?;
    println!("scored {} dialogues into {}", pairs.len(), dir.display());
    Ok(())
}

pub fn train_cmd(cfg: &RunConfig) -> Result<()> {
    let corpus = load(cfg)?;
    let validation = match &cfg.paths.validation {
        Some(p) => Some(load_corpus(p, cfg.paths.corpus_format).with_context(|| format!("loading {}", p.display()))?),
        None => None,
    };
    let out = cfg.require(&cfg.paths.params_out, "params_out")?;
    let scorer = build_scorer(cfg)?;
    let outcome = train(
        &corpus.dialogues,
        validation.as_ref().map(|v| v.dialogues.as_slice()),
        scorer.as_ref(),
        &cfg.train,
    )?;
    if outcome.dropped > 0 {
        warn!("{} dialogues were not usable for training", outcome.dropped);
    }
    for e in &outcome.history {
        let val = e.val_loss.map_or("-".to_string(), |v| format!("{v:.6e}"));
        println!(
            "epoch {:>3}  train {:.6e}  val {val}  skipped {}",
            e.epoch, e.train_loss, e.skipped
        );
    }
    let prov = ParamsProvenance {
        seed: cfg.train.seed,
        best_epoch: outcome.best_epoch,
        history: outcome.history,
        config: cfg.echo(),
    };
    write_params(out, &outcome.params, &prov).with_context(|| format!("writing {}", out.display()))?;
    println!("best epoch {}; parameters written to {}", outcome.best_epoch, out.display());
    Ok(())
}

fn predict_one(d: &Dialogue, scorer: &dyn Scorer, params: &ModelParams, cfg: &RunConfig) -> Result<Option<StructureRecord>> {
    if d.n() == 1 {
        let tree = DependencyStructure::new(1, Vec::<dialstruct::Arc>::new())?;
        return Ok(Some(StructureRecord::new(&d.id, &tree, &Segmentation::single(1))));
    }
    if d.n() > params.n_max {
        warn!("skipping dialogue {}: {} utterances exceed n_max {}", d.id, d.n(), params.n_max);
        return Ok(None);
    }
    let pair = scorer.score(d).with_context(|| format!("scoring dialogue {}", d.id))?;
    let p = infer(&pair, params, &cfg.tiling).with_context(|| format!("decoding dialogue {}", d.id))?;
    Ok(Some(StructureRecord::new(&d.id, &p.tree, &p.segmentation)))
}

pub fn infer_cmd(cfg: &RunConfig, identity: bool) -> Result<()> {
    let corpus = load(cfg)?;
    let params = if identity {
        ModelParams::simple_incorporation(cfg.train.n_max)
    } else {
        let path = cfg.require(&cfg.paths.params_in, "params_in")?;
        read_params(path).with_context(|| format!("reading {}", path.display()))?.0
    };
    let out = cfg.require(&cfg.paths.output, "output")?;
    let scorer = build_scorer(cfg)?;
    let records: Vec<Option<StructureRecord>> = pool(cfg)?.install(|| {
        corpus
            .dialogues
            .par_iter()
            .map(|d| predict_one(d, scorer.as_ref(), &params, cfg))
            .collect::<Result<_>>()
    })?;
    let records: Vec<StructureRecord> = records.into_iter().flatten().collect();
    let mut echo = cfg.echo();
    echo["identity_params"] = json!(identity);
    write_structures(out, &records, &echo).with_context(|| format!("writing {}", out.display()))?;
    println!(
        "decoded {} of {} dialogues into {}",
        records.len(),
        corpus.dialogues.len(),
        out.display()
    );
    Ok(())
}

pub fn eval_cmd(cfg: &RunConfig, allow_missing: bool) -> Result<()> {
    let corpus = load(cfg)?;
    let pred_path = cfg.require(&cfg.paths.predictions, "predictions")?;
    let preds = read_structures(pred_path).with_context(|| format!("reading {}", pred_path.display()))?;

    let gold: HashMap<&str, &Dialogue> = corpus.dialogues.iter().map(|d| (d.id.as_str(), d)).collect();
    let mut seen = BTreeSet::new();
    for p in &preds {
        if !gold.contains_key(p.id.as_str()) {
            bail!("prediction for unknown dialogue {}", p.id);
        }
        if !seen.insert(p.id.as_str()) {
            bail!("duplicate prediction for dialogue {}", p.id);
        }
    }
    let missing: Vec<&str> = corpus
        .dialogues
        .iter()
        .map(|d| d.id.as_str())
        .filter(|id| !seen.contains(id))
        .collect();
    if !missing.is_empty() {
        if !allow_missing {
            bail!("{} gold dialogues have no prediction, first {}", missing.len(), missing[0]);
        }
        warn!("{} gold dialogues have no prediction and are left out", missing.len());
    }

    let mut rows = Vec::with_capacity(preds.len());
    for p in &preds {
        let d = gold[p.id.as_str()];
        if p.n != d.n() {
            bail!("dialogue {}: prediction has n = {}, gold has n = {}", p.id, p.n, d.n());
        }
        let tree = p.tree()?;
        let seg = p.segmentation()?;
        let item = EvalItem {
            id: &p.id,
            n: p.n,
            gold_arcs: d.gold_arc_set(),
            pred_arcs: Some(tree.arc_set()),
            gold_seg: d.gold_boundaries.as_ref(),
            pred_seg: Some(&seg),
        };
        rows.push(evaluate_dialogue(&item, &cfg.eval).with_context(|| format!("evaluating dialogue {}", p.id))?);
    }
    let agg = aggregate(&rows);
    let report = json!({
        "tool": TOOL_VERSION,
        "convention": METRIC_CONVENTION,
        "window": cfg.eval.k.map_or(json!("per dialogue, half the mean gold segment length"), |k| json!(k)),
        "config": cfg.echo(),
        "aggregate": agg,
        "dialogues": rows,
    });
    if let Some(out) = &cfg.paths.output {
        let mut text = serde_json::to_string_pretty(&report)?;
        text.push('\n');
        fs::write(out, text).with_context(|| format!("writing {}", out.display()))?;
    }
    let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
    println!("dialogues {}", agg.dialogues);
    println!("1-Pk      {}", fmt(agg.one_minus_pk));
    println!("1-WD      {}", fmt(agg.one_minus_wd));
    if let Some(a) = agg.arcs {
        println!("arc P/R/F1 {:.4} / {:.4} / {:.4}", a.precision, a.recall, a.f1);
        if let Some(c) = agg.recall_ceiling.filter(|&c| c < 1.0) {
            println!("recall ceiling {c:.4} (leftward gold arcs)");
        }
    }
    Ok(())
}

pub fn synth(cfg: &RunConfig) -> Result<()> {
    let dir = output_dir(cfg)?;
    let (corpus, pairs) = generate_synthetic(&cfg.synth)?;
    write_corpus(&dir.join("corpus.jsonl"), &corpus)?;
    let ids: Vec<String> = corpus.dialogues.iter().map(|d| d.id.clone()).collect();
    write_pairs(dir, &ids, &pairs, cfg)?;
    info!("synthetic spec {:?}", cfg.synth);
    println!("wrote {} synthetic dialogues to {}", pairs.len(), dir.display());
    Ok(())
}

/// Returns whether every compared statistic lies inside its band.
pub fn stats(cfg: &RunConfig, dataset: Option<&str>) -> Result<bool> {
    let corpus = load(cfg)?;
    let s = corpus_stats(&corpus);
    let mut report = json!({ "stats": s });
    let mut ok = true;
    if let Some(name) = dataset {
        let Some(r) = reference_stats(name) else {
            bail!("no reference statistics for dataset {name:?}");
        };
        let within = |v: Option<f64>, reference: Option<f64>, tol: f64| match (v, reference) {
            (Some(v), Some(r)) => Some((v - r).abs() <= tol + 1e-9),
            _ => None,
        };
        // Published averages carry one decimal.
        let checks = json!({
            "mean_utterances": within(Some(s.mean_utterances), Some(r.mean_utterances), r.utterance_tolerance),
            "mean_relations": within(s.mean_relations, r.mean_relations, 0.1),
            "mean_shifts": within(s.mean_shifts, r.mean_shifts, 0.1),
        });
        ok = checks
            .as_object()
            .expect("object")
            .values()
            .all(|v| v.as_bool() != Some(false));
        report["reference"] = json!(r);
        report["within_tolerance"] = checks;
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(ok)
}
