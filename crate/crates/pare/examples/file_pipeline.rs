//! The file-driven pipeline end to end: write a dataset to disk, then run
//! the same subcommands the `pare` binary exposes (ingest, stats, train,
//! predict, evaluate, baseline) against it.
//!
//! ```bash
//! cargo run --release --example file_pipeline
//! ```

use pare::cli::{run, Command, RunConfig};
use pare::synthetic::{self, SyntheticSpec};

fn main() -> pare::Result<()> {
    let dir = std::env::temp_dir().join("pare_file_pipeline");
    let data = synthetic::generate(&SyntheticSpec {
        num_items: 25,
        num_bins: 18,
        num_users: 120,
        seed: 9,
        ..SyntheticSpec::default()
    });
    let (interactions, items) = synthetic::write_dataset(&data, &dir.join("data"))?;
    println!("dataset -> {}", dir.join("data").display());

    let mut config = RunConfig::default();
    config.interactions = Some(interactions);
    config.items = Some(items);
    config.output_dir = dir.join("out");
    config.side_fields = synthetic::schema();
    config.set("embedding_dim", "16")?;
    config.set("lstm_hidden", "16")?;
    config.set("lr", "0.01")?;
    config.set("batch_size", "64")?;
    config.set("max_epochs", "15")?;
    config.set("seed", "42")?;

    // The same config file the binary would consume:
    println!();
    println!("run configuration:");
    for line in config.to_file_string().lines().take(6) {
        println!("  {line}");
    }
    println!("  ...");

    for command in [
        Command::Ingest,
        Command::Stats,
        Command::Train,
        Command::Predict,
        Command::Evaluate,
        Command::Baseline,
    ] {
        println!();
        println!("--- {command:?}");
        run(command, &config)?;
    }
    Ok(())
}
