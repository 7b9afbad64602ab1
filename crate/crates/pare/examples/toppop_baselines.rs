//! Most-popular baselines over trailing windows: recent popularity beats
//! all-time popularity when the catalog drifts.
//!
//! ```bash
//! cargo run --example toppop_baselines
//! ```

use pare::metrics::{evaluate, GroundTruth};
use pare::ranker::{cutoff_toppop, Window};
use pare::synthetic::{self, SyntheticSpec};

fn main() -> pare::Result<()> {
    let corpus = synthetic::corpus(&SyntheticSpec::default())?;
    let split = corpus.split()?;
    let truth = GroundTruth::from_corpus(&corpus, split.test_bin)?;

    println!("most-popular baselines at the test bin, by trailing window:");
    println!();
    println!("window     precision@10  recall@10  hr@10    mrr@10   ndcg@10");
    for window in [
        Window::Months(3),
        Window::Months(6),
        Window::Months(12),
        Window::All,
    ] {
        let list = cutoff_toppop(&corpus, split.test_bin, window)?;
        let report = evaluate(&list, &truth, &[10])?;
        let row = report.row(10).unwrap();
        println!(
            "{:<10} {:<13.4} {:<10.4} {:<8.4} {:<8.4} {:<8.4}",
            window.to_string(),
            row.precision,
            row.recall,
            row.hit_rate,
            row.mrr,
            row.ndcg
        );
    }

    println!();
    let recent = cutoff_toppop(&corpus, split.test_bin, Window::Months(3))?;
    let all_time = cutoff_toppop(&corpus, split.test_bin, Window::All)?;
    println!("top 5 by the 3-month window: {:?}", recent.top_ids(5));
    println!("top 5 by the full history:  {:?}", all_time.top_ids(5));
    Ok(())
}
