//! The top-N metrics on a worked example: hit ratio, precision, recall,
//! MRR, and NDCG across cutoffs.
//!
//! ```bash
//! cargo run --example ranking_metrics
//! ```

use std::collections::{BTreeMap, BTreeSet};

use pare::metrics::{evaluate, overlap_count, GroundTruth};
use pare::ranker::top_n;

fn main() -> pare::Result<()> {
    // A fixed global list and three users with different tastes.
    let scores: BTreeMap<String, f64> = [
        ("alpha", 9.0),
        ("bravo", 7.5),
        ("charlie", 6.0),
        ("delta", 4.5),
        ("echo", 3.0),
        ("foxtrot", 1.5),
    ]
    .into_iter()
    .map(|(id, s)| (id.to_string(), s))
    .collect();
    let list = top_n(&scores, 5);
    println!("recommended list: {:?}", list.top_ids(5));

    let mut truth_map: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    truth_map.insert("u1".into(), ["alpha".into()].into_iter().collect());
    truth_map.insert("u2".into(), ["charlie".into(), "foxtrot".into()].into_iter().collect());
    truth_map.insert("u3".into(), ["zulu".into()].into_iter().collect());
    let truth = GroundTruth::from_map(truth_map)?;

    let report = evaluate(&list, &truth, &[1, 3, 5])?;
    println!();
    println!("n   precision  recall   hr      mrr     ndcg");
    for row in &report.rows {
        println!(
            "{:<3} {:<10.4} {:<8.4} {:<7.4} {:<7.4} {:<7.4}",
            row.n, row.precision, row.recall, row.hit_rate, row.mrr, row.ndcg
        );
    }
    println!("averaged over {} users (u3 never hits)", report.user_count);

    // Overlap between two lists, the way competing recommenders are
    // compared.
    let other_scores: BTreeMap<String, f64> = [
        ("charlie", 5.0),
        ("golf", 4.0),
        ("alpha", 3.0),
        ("hotel", 2.0),
    ]
    .into_iter()
    .map(|(id, s)| (id.to_string(), s))
    .collect();
    let other = top_n(&other_scores, 4);
    println!();
    println!(
        "overlap@3 with {:?}: {}",
        other.top_ids(3),
        overlap_count(&list, &other, 3)
    );
    Ok(())
}
