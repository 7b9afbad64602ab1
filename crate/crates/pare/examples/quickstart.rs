//! Generate a synthetic interaction corpus, build popularity series, and
//! inspect the global time split.
//!
//! ```bash
//! cargo run --example quickstart
//! ```

use pare::synthetic::{self, SyntheticSpec};

fn main() -> pare::Result<()> {
    let spec = SyntheticSpec {
        num_users: 120,
        num_items: 20,
        num_bins: 18,
        seed: 11,
        ..SyntheticSpec::default()
    };
    let corpus = synthetic::corpus(&spec)?;
    let stats = corpus.stats()?;

    println!("corpus: {} interactions over {} bins", corpus.interactions.len(), stats.num_bins);
    println!();
    println!("#Users  #Items  #Train  #Validate  #Test");
    println!(
        "{:<7} {:<7} {:<7} {:<10} {:<6}",
        stats.num_users,
        stats.num_items,
        stats.train_interactions,
        stats.valid_interactions,
        stats.test_interactions
    );

    let split = corpus.split()?;
    println!();
    println!(
        "split: train bins 1..={}, validation bin {}, test bin {}",
        split.train_end_bin, split.valid_bin, split.test_bin
    );

    println!();
    println!("a few popularity series (distinct users per bin since release):");
    for (item_id, series) in corpus.series.iter().take(4) {
        let counts: Vec<String> = series.counts().iter().map(|c| c.to_string()).collect();
        println!(
            "  {item_id} (released bin {:>2}): [{}]",
            series.release_bin,
            counts.join(", ")
        );
    }
    Ok(())
}
