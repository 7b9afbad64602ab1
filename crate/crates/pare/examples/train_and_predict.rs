//! Train the model on a synthetic corpus and inspect per-head prediction
//! breakdowns at the held-out test bin.
//!
//! ```bash
//! cargo run --release --example train_and_predict
//! ```

use pare::model::{PareConfig, PareModel};
use pare::synthetic::{self, SyntheticSpec};
use pare::trainer::{build_examples, train, TrainConfig};

fn main() -> pare::Result<()> {
    let corpus = synthetic::corpus(&SyntheticSpec {
        num_items: 30,
        num_bins: 20,
        seed: 5,
        ..SyntheticSpec::default()
    })?;
    let split = corpus.split()?;
    let config = PareConfig {
        embedding_dim: 16,
        lstm_hidden: 16,
        ..PareConfig::default()
    };
    let mut model = PareModel::from_corpus(&corpus, config, 42)?;
    let examples = build_examples(&corpus, &split)?;
    println!(
        "training on {} examples, validating on {}",
        examples.train.len(),
        examples.valid.len()
    );

    let train_config = TrainConfig {
        lr: 0.01,
        batch_size: 64,
        max_epochs: 30,
        patience: 5,
        seed: 42,
        ..TrainConfig::default()
    };
    let report = train(&mut model, &corpus, &examples, &train_config)?;
    println!("epoch 0 validation loss: {:.3}", report.initial_valid_loss);
    for stats in report.epochs.iter().step_by(5) {
        println!(
            "epoch {:>2}  train {:>8.3}  valid {:>8.3}",
            stats.epoch, stats.train_loss, stats.valid_loss
        );
    }
    println!(
        "best validation {:.3} at epoch {}{}",
        report.best_valid_loss,
        report.best_epoch,
        if report.stopped_early { " (early stop)" } else { "" }
    );

    println!();
    println!("per-head breakdowns at the test bin (top 5 by fused score):");
    let mut breakdowns = model.predict_all(&corpus, split.test_bin)?;
    breakdowns.sort_by(|a, b| b.y_fused.total_cmp(&a.y_fused));
    println!("item        y_H      y_T     y_P     y_S     y_F     attention (H, T, P, S)");
    for b in breakdowns.iter().take(5) {
        println!(
            "{:<10} {:>6.2}  {:>6.2}  {:>6.2}  {:>6.2}  {:>6.2}   ({:.3}, {:.3}, {:.3}, {:.3})",
            b.item_id,
            b.y_history,
            b.y_temporal,
            b.y_periodic,
            b.y_side,
            b.y_fused,
            b.attention[0],
            b.attention[1],
            b.attention[2],
            b.attention[3],
        );
    }
    Ok(())
}
