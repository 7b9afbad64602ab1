//! Head ablation: train with growing head subsets and report HR@10 next to
//! the learned attention weights of each variant.
//!
//! ```bash
//! cargo run --release --example head_ablation
//! ```

use pare::metrics::{evaluate, GroundTruth};
use pare::model::{HeadSet, PareConfig, PareModel};
use pare::ranker::{score_all, top_n};
use pare::synthetic::{self, SyntheticSpec};
use pare::trainer::{build_examples, train, TrainConfig};

fn main() -> pare::Result<()> {
    let corpus = synthetic::corpus(&SyntheticSpec {
        num_items: 30,
        num_bins: 20,
        seed: 3,
        ..SyntheticSpec::default()
    })?;
    let split = corpus.split()?;
    let examples = build_examples(&corpus, &split)?;
    let truth = GroundTruth::from_corpus(&corpus, split.test_bin)?;

    println!("subset     HR@10    attention (H, T, P, S)");
    for subset in ["H", "H,T", "H,T,S", "H,T,P", "H,T,P,S"] {
        let config = PareConfig {
            embedding_dim: 16,
            lstm_hidden: 16,
            heads: HeadSet::parse(subset)?,
            ..PareConfig::default()
        };
        let mut model = PareModel::from_corpus(&corpus, config, 42)?;
        let train_config = TrainConfig {
            lr: 0.01,
            batch_size: 64,
            max_epochs: 20,
            patience: 4,
            seed: 42,
            ..TrainConfig::default()
        };
        train(&mut model, &corpus, &examples, &train_config)?;

        let scores = score_all(&model, &corpus, split.test_bin)?;
        let list = top_n(&scores, 10);
        let report = evaluate(&list, &truth, &[10])?;
        let hr = report.row(10).unwrap().hit_rate;

        // Attention weights come from any breakdown; they are shared
        // across items.
        let any_item = scores.keys().next().unwrap().clone();
        let breakdown = model.predict(&corpus, &any_item, split.test_bin)?;
        let fmt = |v: f64| {
            if v == 0.0 {
                "   -  ".to_string()
            } else {
                format!("{v:.4}")
            }
        };
        println!(
            "{:<9} {:.4}   ({}, {}, {}, {})",
            config.heads.to_string(),
            hr,
            fmt(breakdown.attention[0]),
            fmt(breakdown.attention[1]),
            fmt(breakdown.attention[2]),
            fmt(breakdown.attention[3]),
        );
    }
    Ok(())
}
