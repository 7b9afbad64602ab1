//! Training: one example per (item, bin) with the bin's popularity as the
//! target, a summed per-head squared-error objective, Adam with loss-coupled
//! weight decay, and early stopping on the validation bin.

mod checkpoint;

use std::time::Instant;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use crate::corpus::{Corpus, SplitSpec};
use crate::error::{PareError, Result};
use crate::metrics::GroundTruth;
use crate::model::{ItemInput, PareModel};
use crate::numerics::{AdamConfig, AdamState, Tape};

pub use checkpoint::{load_checkpoint, save_checkpoint, validate_dims, CHECKPOINT_VERSION};

/// One training target: predict `item_id`'s popularity at `target_bin`.
/// History, side info, and the target count resolve lazily from the corpus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrainExample {
    pub item_id: String,
    pub target_bin: usize,
}

/// Training and validation examples for one split.
#[derive(Clone, Debug)]
pub struct ExampleSet {
    pub train: Vec<TrainExample>,
    pub valid: Vec<TrainExample>,
}

/// One example per (item, t) with release_bin <= t <= train_end_bin,
/// including zero-count bins, plus a validation example per item released
/// by the validation bin. Order is deterministic (item id, then bin).
pub fn build_examples(corpus: &Corpus, split: &SplitSpec) -> Result<ExampleSet> {
    let mut train = Vec::new();
    let mut valid = Vec::new();
    for (item_id, series) in &corpus.series {
        for t in series.release_bin..=split.train_end_bin.min(series.last_bin()) {
            train.push(TrainExample {
                item_id: item_id.clone(),
                target_bin: t,
            });
        }
        if series.release_bin <= split.valid_bin {
            valid.push(TrainExample {
                item_id: item_id.clone(),
                target_bin: split.valid_bin,
            });
        }
    }
    if train.is_empty() {
        return Err(PareError::data(
            "empty training region: no item is released before the validation bin",
        ));
    }
    Ok(ExampleSet { train, valid })
}

/// What the early-stopping rule optimizes on the validation examples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ValidationCriterion {
    /// The same summed squared-error objective as training (the default).
    Loss,
    /// Hit ratio at `n` on the validation bin's ground truth.
    HitRate { n: usize },
}

/// Optimizer and schedule settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Number of non-improving epochs tolerated before stopping.
    pub patience: usize,
    pub seed: u64,
    pub weight_decay: f64,
    pub criterion: ValidationCriterion,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            lr: 0.005,
            batch_size: 128,
            max_epochs: 50,
            patience: 5,
            seed: 42,
            weight_decay: 0.0001,
            criterion: ValidationCriterion::Loss,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lr <= 0.0 || !self.lr.is_finite() {
            return Err(PareError::usage(format!(
                "learning rate must be positive, found {}",
                self.lr
            )));
        }
        if self.batch_size == 0 {
            return Err(PareError::usage("batch_size must be at least 1"));
        }
        if self.max_epochs == 0 {
            return Err(PareError::usage("max_epochs must be at least 1"));
        }
        if self.patience == 0 {
            return Err(PareError::usage("patience must be at least 1"));
        }
        if self.weight_decay < 0.0 {
            return Err(PareError::usage("weight_decay must be non-negative"));
        }
        Ok(())
    }
}

/// Losses and timing for one epoch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub valid_loss: f64,
    pub seconds: f64,
}

/// Outcome of a training run. The model holds the parameters of the best
/// validation epoch, not the last one.
#[derive(Clone, Debug)]
pub struct TrainReport {
    /// Validation loss of the untrained model (epoch 0).
    pub initial_valid_loss: f64,
    pub epochs: Vec<EpochStats>,
    pub best_epoch: usize,
    pub best_valid_loss: f64,
    pub stopped_early: bool,
}

fn resolve(model: &PareModel, corpus: &Corpus, examples: &[TrainExample]) -> Result<Vec<(ItemInput, f64)>> {
    examples
        .iter()
        .map(|ex| {
            let input = model.input_for(corpus, &ex.item_id, ex.target_bin)?;
            let target = corpus.series[&ex.item_id].count_at(ex.target_bin) as f64;
            Ok((input, target))
        })
        .collect()
}

/// Mean per-example objective over a slice of resolved examples, without
/// touching gradients.
fn forward_loss(model: &PareModel, data: &[(ItemInput, f64)]) -> Result<f64> {
    if data.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for chunk in data.chunks(256) {
        let mut tape = Tape::new();
        let bound = model.bind(&mut tape)?;
        for (input, target) in chunk {
            let loss = model.example_loss(&mut tape, &bound, input, *target)?;
            total += tape.scalar(loss)?;
        }
    }
    Ok(total / data.len() as f64)
}

/// Validation selection score; lower is better for both criteria.
fn selection_score(
    model: &PareModel,
    corpus: &Corpus,
    split: &SplitSpec,
    valid_loss: f64,
    criterion: ValidationCriterion,
) -> Result<f64> {
    match criterion {
        ValidationCriterion::Loss => Ok(valid_loss),
        ValidationCriterion::HitRate { n } => {
            let truth = match GroundTruth::from_corpus(corpus, split.valid_bin) {
                Ok(t) => t,
                // No validation interactions: fall back to the loss.
                Err(_) => return Ok(valid_loss),
            };
            let scores = crate::ranker::score_all(model, corpus, split.valid_bin)?;
            let list = crate::ranker::top_n(&scores, n);
            let report = crate::metrics::evaluate(&list, &truth, &[n])?;
            Ok(-report.row(n).unwrap().hit_rate)
        }
    }
}

/// Loss value and analytic gradients of the training objective at the
/// model's current parameters (one forward and backward pass).
pub fn objective_analytic(
    model: &PareModel,
    corpus: &Corpus,
    examples: &[TrainExample],
) -> Result<(f64, std::collections::BTreeMap<String, crate::numerics::Tensor>)> {
    if examples.is_empty() {
        return Err(PareError::data("objective needs at least one example"));
    }
    let data = resolve(model, corpus, examples)?;
    let mut tape = Tape::new();
    let bound = model.bind(&mut tape)?;
    let mut terms = Vec::with_capacity(data.len());
    for (input, target) in &data {
        terms.push(model.example_loss(&mut tape, &bound, input, *target)?);
    }
    let total = tape.sum(&terms)?;
    let mean = tape.scale(total, 1.0 / data.len() as f64)?;
    let mut store = model.store.clone();
    store.zero_grads();
    tape.backward(mean, &mut store)?;
    let grads = store
        .iter()
        .map(|(name, p)| (name.clone(), p.grad.clone()))
        .collect();
    Ok((tape.scalar(mean)?, grads))
}

/// Check the analytic gradients of the full training objective (the mean
/// summed per-head squared error over `examples`) against central finite
/// differences at perturbation `h`.
pub fn objective_gradient_check(
    model: &PareModel,
    corpus: &Corpus,
    examples: &[TrainExample],
    h: f64,
) -> Result<crate::numerics::GradCheckReport> {
    if examples.is_empty() {
        return Err(PareError::data("gradient check needs at least one example"));
    }
    let data = resolve(model, corpus, examples)?;
    let config = model.config;
    let dims = model.dims.clone();
    let mut store = model.store.clone();
    crate::numerics::gradient_check(&mut store, h, move |s| {
        let probe = PareModel {
            config,
            dims: dims.clone(),
            store: s.clone(),
        };
        let mut tape = Tape::new();
        let bound = probe.bind(&mut tape)?;
        let mut terms = Vec::with_capacity(data.len());
        for (input, target) in &data {
            terms.push(probe.example_loss(&mut tape, &bound, input, *target)?);
        }
        let total = tape.sum(&terms)?;
        let mean = tape.scale(total, 1.0 / data.len() as f64)?;
        Ok((tape, mean))
    })
}

/// Minimize the summed per-head squared error with Adam, shuffling with the
/// seeded generator each epoch. Stops after `patience` epochs without
/// validation improvement and restores the best parameters.
pub fn train(
    model: &mut PareModel,
    corpus: &Corpus,
    examples: &ExampleSet,
    config: &TrainConfig,
) -> Result<TrainReport> {
    config.validate()?;
    if examples.train.is_empty() {
        return Err(PareError::data("no training examples"));
    }
    let train_data = resolve(model, corpus, &examples.train)?;
    let valid_data = resolve(model, corpus, &examples.valid)?;
    let split = corpus.split()?;

    let mut rng = StdRng::seed_from_u64(config.seed);
    let mut adam = AdamState::new(AdamConfig {
        lr: config.lr,
        weight_decay: config.weight_decay,
        ..AdamConfig::default()
    });

    let initial_valid_loss = if valid_data.is_empty() {
        forward_loss(model, &train_data)?
    } else {
        forward_loss(model, &valid_data)?
    };
    let mut best_score =
        selection_score(model, corpus, &split, initial_valid_loss, config.criterion)?;
    let mut best_params = model.store.snapshot();
    let mut best_epoch = 0;
    let mut best_valid_loss = initial_valid_loss;
    let mut bad_epochs = 0;
    let mut epochs = Vec::new();
    let mut stopped_early = false;
    let mut order: Vec<usize> = (0..train_data.len()).collect();

    for epoch in 1..=config.max_epochs {
        let started = Instant::now();
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for (batch_no, chunk) in order.chunks(config.batch_size).enumerate() {
            let mut tape = Tape::new();
            let bound = model.bind(&mut tape)?;
            let mut terms = Vec::with_capacity(chunk.len());
            for &idx in chunk {
                let (input, target) = &train_data[idx];
                terms.push(model.example_loss(&mut tape, &bound, input, *target)?);
            }
            let total = tape.sum(&terms)?;
            let mean = tape.scale(total, 1.0 / chunk.len() as f64)?;
            let batch_loss = tape.scalar(mean)?;
            if !batch_loss.is_finite() {
                return Err(PareError::numeric(format!(
                    "training diverged at epoch {epoch}, batch {batch_no}"
                )));
            }
            loss_sum += tape.scalar(total)?;
            tape.backward(mean, &mut model.store)?;
            adam.step(&mut model.store)?;
        }
        let train_loss = loss_sum / train_data.len() as f64;
        let valid_loss = if valid_data.is_empty() {
            train_loss
        } else {
            forward_loss(model, &valid_data)?
        };
        epochs.push(EpochStats {
            epoch,
            train_loss,
            valid_loss,
            seconds: started.elapsed().as_secs_f64(),
        });

        let score = selection_score(model, corpus, &split, valid_loss, config.criterion)?;
        if score < best_score {
            best_score = score;
            best_params = model.store.snapshot();
            best_epoch = epoch;
            best_valid_loss = valid_loss;
            bad_epochs = 0;
        } else {
            bad_epochs += 1;
            if bad_epochs >= config.patience {
                stopped_early = true;
                break;
            }
        }
    }

    model.store.restore(&best_params)?;
    Ok(TrainReport {
        initial_valid_loss,
        epochs,
        best_epoch,
        best_valid_loss,
        stopped_early,
    })
}
