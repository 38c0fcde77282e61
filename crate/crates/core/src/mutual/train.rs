use log::{debug, warn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{fuse, gradients, loss, Adam, ModelParams, TrainConfig};
use crate::corpus::truncate_dialogue;
use crate::scoring::{ScorePair, Scorer};
use crate::{Dialogue, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean loss over the training steps taken this epoch (pre-update values).
    pub train_loss: f64,
    /// Mean validation loss after the epoch, if any validation dialogue was usable.
    pub val_loss: Option<f64>,
    /// Training dialogues whose step was skipped this epoch.
    pub skipped: usize,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// Parameters with the best validation loss.
    pub params: ModelParams,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    /// Dialogues dropped before training (unscorable or too short).
    pub dropped: usize,
}

/// Scores the corpus, truncates it to the training length and trains.
///
/// Without an explicit validation set the trailing share
/// (`holdout_fraction`) of the corpus is held out for early stopping.
pub fn train(
    corpus: &[Dialogue],
    validation: Option<&[Dialogue]>,
    scorer: &dyn Scorer,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut dropped = 0;
    let mut score_all = |dialogues: &[Dialogue]| -> Vec<ScorePair> {
        dialogues
            .iter()
            .filter_map(|d| {
                let d = truncate_dialogue(d, cfg.max_train_turns);
                if d.n() < 2 {
                    dropped += 1;
                    return None;
                }
                match scorer.score(&d) {
                    Ok(pair) => Some(pair),
                    Err(e) => {
                        warn!("skipping dialogue {}: {e}", d.id);
                        dropped += 1;
                        None
                    }
                }
            })
            .collect()
    };
    let train_pairs = score_all(corpus);
    let val_pairs = validation.map(&mut score_all);
    let mut outcome = train_on_pairs(&train_pairs, val_pairs.as_deref(), cfg)?;
    outcome.dropped += dropped;
    Ok(outcome)
}

/// Trains on already-scored dialogues.
pub fn train_on_pairs(train: &[ScorePair], validation: Option<&[ScorePair]>, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let (train, validation) = match validation {
        Some(v) if !v.is_empty() => (train, v),
        _ => {
            let held = (train.len() as f64 * cfg.holdout_fraction).floor() as usize;
            if held == 0 {
                (train, train)
            } else {
                let (a, b) = train.split_at(train.len() - held);
                (a, b)
            }
        }
    };
    let mut dropped = 0;
    let usable: Vec<&ScorePair> = train
        .iter()
        .filter(|p| {
            let ok = p.n() >= 2 && p.n() <= cfg.n_max;
            dropped += usize::from(!ok);
            ok
        })
        .collect();
    if usable.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    let mut params = ModelParams::init(cfg.n_max, cfg.flow_mode, cfg.seed);
    let mut adam = Adam::new(cfg.learning_rate, params.num_values());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..usable.len()).collect();

    let mut best = params.clone();
    let mut best_score = f64::INFINITY;
    let mut best_epoch = 0;
    let mut stale = 0;
    let mut history = Vec::new();

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut steps = 0;
        let mut skipped = 0;
        for &idx in &order {
            let pair = usable[idx];
            match gradients(&pair.topic, &pair.rhetorical, &params, cfg) {
                Ok((value, grads)) => {
                    adam.step(&mut params, &grads);
                    total += value;
                    steps += 1;
                }
                Err(Error::DegenerateMean { mean }) => {
                    debug!("epoch {epoch}: degenerate mean {mean}, step skipped");
                    skipped += 1;
                }
                Err(e) => return Err(e),
            }
        }
        if skipped > 0 {
            warn!("epoch {epoch}: skipped {skipped} degenerate steps");
        }
        let train_loss = if steps > 0 { total / steps as f64 } else { f64::NAN };
        let val_loss = mean_loss(validation, &params, cfg);
        history.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            skipped,
        });

        // An epoch without a usable validation loss never counts as an
        // improvement.
        let score = val_loss.unwrap_or(f64::INFINITY);
        if score < best_score {
            best_score = score;
            best = params.clone();
            best_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                debug!("early stop after epoch {epoch}");
                break;
            }
        }
    }

    Ok(TrainOutcome {
        params: best,
        history,
        best_epoch,
        dropped,
    })
}

/// Mean loss over the dialogues that fit the model and have a defined loss.
fn mean_loss(pairs: &[ScorePair], params: &ModelParams, cfg: &TrainConfig) -> Option<f64> {
    let values: Vec<f64> = pairs
        .iter()
        .filter(|p| p.n() >= 2 && p.n() <= params.n_max)
        .filter_map(|p| {
            fuse(&p.topic, &p.rhetorical, params)
                .and_then(|f| loss(&f, cfg))
                .ok()
        })
        .collect();
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}
