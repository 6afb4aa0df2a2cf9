//! Training loop: per-epoch shuffling, mini-batch mean gradients, Adam
//! updates, and checkpointing.

mod adam;
mod checkpoint;
mod loss;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use loss::cross_entropy;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Vocab, WindowExample};
use crate::error::{Error, Result};
use crate::nn::{backprop_window_into, forward_window, Gradients, Mode, ModelParams};
use crate::rng::{derive_seed, seeded};

/// Examples per parallel accumulation chunk. Fixed (not tied to the thread
/// count) so the reduction order, and therefore the result, is identical no
/// matter how many workers run.
const GRAD_CHUNK: usize = 8;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seq_len: usize,
    pub embed_dim: usize,
    pub hidden: usize,
    pub layers: usize,
    pub dropout_p: f64,
    pub genre: Option<String>,
    pub seed: u64,
    /// Final checkpoint path; per-epoch checkpoints are written next to it.
    /// `None` disables checkpointing.
    pub checkpoint: Option<PathBuf>,
    /// Optional global gradient-norm clip. Off by default.
    pub grad_clip: Option<f64>,
    /// Fraction of examples held out for an eval-mode loss report (0 = none).
    pub holdout_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 3,
            batch_size: 64,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seq_len: 4,
            embed_dim: 128,
            hidden: 128,
            layers: 3,
            dropout_p: 0.2,
            genre: None,
            seed: 42,
            checkpoint: None,
            grad_clip: None,
            holdout_fraction: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.epochs < 1 {
            return fail("epochs must be at least 1");
        }
        if self.batch_size < 1 {
            return fail("batch_size must be at least 1");
        }
        if self.learning_rate <= 0.0 {
            return fail("learning_rate must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout_p) {
            return fail("dropout_p must be in [0, 1)");
        }
        if self.seq_len < 1 {
            return fail("seq_len must be at least 1");
        }
        if self.embed_dim < 1 || self.hidden < 1 || self.layers < 1 {
            return fail("embed_dim, hidden and layers must be at least 1");
        }
        if !(0.0..1.0).contains(&self.holdout_fraction) {
            return fail("holdout_fraction must be in [0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    pub examples: usize,
    pub seconds: f64,
    pub holdout_loss: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainHistory {
    pub epochs: Vec<EpochStats>,
}

impl TrainHistory {
    pub fn final_loss(&self) -> Option<f64> {
        self.epochs.last().map(|e| e.mean_loss)
    }

    /// The training log: one line per epoch, tab-separated
    /// `epoch\tmean_loss\texamples\tseconds`.
    pub fn log_lines(&self) -> String {
        self.epochs
            .iter()
            .map(|e| {
                format!(
                    "{}\t{:.6}\t{}\t{:.3}\n",
                    e.epoch, e.mean_loss, e.examples, e.seconds
                )
            })
            .collect()
    }
}

/// Train a model on window examples. Each epoch reshuffles with the seeded
/// generator; each batch applies one Adam step on the mean of the per-example
/// gradients. (seed, config, data) fully determine the result, independent of
/// the rayon thread count.
pub fn train(
    config: &TrainConfig,
    windows: &[WindowExample],
    vocab: &Vocab,
) -> Result<(ModelParams, TrainHistory)> {
    config.validate()?;
    if windows.is_empty() {
        return Err(Error::Config("training corpus has no windows".to_string()));
    }
    for w in windows {
        if w.context.len() != config.seq_len {
            return Err(Error::Mismatch(format!(
                "window context length {} != configured seq_len {}",
                w.context.len(),
                config.seq_len
            )));
        }
        for &id in w.context.iter().chain([&w.target]) {
            if id >= vocab.size() {
                return Err(Error::OutOfRange {
                    what: "training window id",
                    id,
                    bound: vocab.size(),
                });
            }
        }
    }

    let mut rng = seeded(config.seed);
    let mut params = ModelParams::init(
        vocab.size(),
        config.embed_dim,
        config.hidden,
        config.layers,
        config.dropout_p,
        config.seq_len,
        &mut rng,
    );
    let mut state = AdamState::new(
        &params,
        config.learning_rate,
        config.beta1,
        config.beta2,
        config.epsilon,
    );

    let mut indices: Vec<usize> = (0..windows.len()).collect();
    let holdout: Vec<usize> = if config.holdout_fraction > 0.0 {
        indices.shuffle(&mut rng);
        let n_holdout = ((windows.len() as f64) * config.holdout_fraction) as usize;
        indices.split_off(windows.len() - n_holdout)
    } else {
        Vec::new()
    };
    if indices.is_empty() {
        return Err(Error::Config(
            "holdout_fraction leaves no training examples".to_string(),
        ));
    }

    let mut history = TrainHistory::default();
    for epoch in 1..=config.epochs {
        let start = Instant::now();
        indices.shuffle(&mut rng);

        let mut loss_sum = 0.0;
        let mut position = 0usize;
        for batch in indices.chunks(config.batch_size) {
            let (batch_loss, mut grads) =
                batch_gradients(&params, windows, batch, config.seed, epoch, position)?;
            grads.scale(1.0 / batch.len() as f64);
            if let Some(max_norm) = config.grad_clip {
                clip_grad_norm(&mut grads, max_norm);
            }
            adam_step(&mut params, &grads, &mut state)?;
            loss_sum += batch_loss;
            position += batch.len();
        }

        let holdout_loss = if holdout.is_empty() {
            None
        } else {
            Some(mean_eval_loss(&params, windows, &holdout)?)
        };
        history.epochs.push(EpochStats {
            epoch,
            mean_loss: loss_sum / indices.len() as f64,
            examples: indices.len(),
            seconds: start.elapsed().as_secs_f64(),
            holdout_loss,
        });

        if let Some(path) = &config.checkpoint {
            save_checkpoint(&params, vocab, &state, epoch_checkpoint_path(path, epoch))?;
        }
    }

    if let Some(path) = &config.checkpoint {
        save_checkpoint(&params, vocab, &state, path)?;
    }
    Ok((params, history))
}

/// Sum of per-example losses and gradients over one batch. Examples are
/// processed in fixed-size chunks that may run in parallel; chunk results are
/// folded in index order, and every example derives its own dropout stream
/// from (seed, epoch, position), so the sum never depends on scheduling.
fn batch_gradients(
    params: &ModelParams,
    windows: &[WindowExample],
    batch: &[usize],
    seed: u64,
    epoch: usize,
    position: usize,
) -> Result<(f64, Gradients)> {
    let chunks: Vec<(f64, Gradients)> = batch
        .par_chunks(GRAD_CHUNK)
        .enumerate()
        .map(|(chunk_idx, chunk)| {
            let mut grads = Gradients::zeros_like(params);
            let mut loss_sum = 0.0;
            for (j, &window_idx) in chunk.iter().enumerate() {
                let example = &windows[window_idx];
                let pos = position + chunk_idx * GRAD_CHUNK + j;
                let mut example_rng = seeded(derive_seed(seed, epoch as u64, pos as u64));
                let (_, cache) =
                    forward_window(params, &example.context, Mode::Train, &mut example_rng)?;
                let cache = cache.expect("train mode produces a cache");
                loss_sum += backprop_window_into(example, params, &cache, &mut grads)?;
            }
            Ok((loss_sum, grads))
        })
        .collect::<Result<_>>()?;

    let mut total = Gradients::zeros_like(params);
    let mut loss_sum = 0.0;
    for (loss, grads) in &chunks {
        loss_sum += loss;
        total.add_assign(grads);
    }
    Ok((loss_sum, total))
}

fn mean_eval_loss(
    params: &ModelParams,
    windows: &[WindowExample],
    subset: &[usize],
) -> Result<f64> {
    let mut rng = seeded(0); // eval mode draws nothing
    let mut sum = 0.0;
    for &idx in subset {
        let example = &windows[idx];
        let (logits, _) = forward_window(params, &example.context, Mode::Eval, &mut rng)?;
        sum += cross_entropy(&logits, example.target)?;
    }
    Ok(sum / subset.len() as f64)
}

fn clip_grad_norm(grads: &mut Gradients, max_norm: f64) {
    let norm = grads.l2_norm();
    if norm > max_norm && norm > 0.0 {
        grads.scale(max_norm / norm);
    }
}

/// `model.ckpt` -> `model.epoch3.ckpt`
fn epoch_checkpoint_path(path: &Path, epoch: usize) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.epoch{epoch}.{}", ext.to_string_lossy()),
        None => format!("{stem}.epoch{epoch}"),
    };
    path.with_file_name(name)
}
