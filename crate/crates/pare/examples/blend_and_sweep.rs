//! Blend an external personalized recommender with popularity scores and
//! sweep the mixing coefficient. The planted setup makes neither endpoint
//! optimal: personal tastes need the external side, the surging item needs
//! the popularity side.
//!
//! ```bash
//! cargo run --example blend_and_sweep
//! ```

use std::collections::{BTreeMap, BTreeSet};

use pare::blend::{beta_sweep, default_beta_grid, ExternalScores, ScoreScaling};
use pare::metrics::GroundTruth;

fn main() -> pare::Result<()> {
    // Ten users: five will pick their personal favourite, five will pick
    // the item about to surge in popularity.
    let mut external: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    let mut truth: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut popularity: BTreeMap<String, f64> = BTreeMap::new();
    popularity.insert("surging".into(), 10.0);

    for u in 0..10 {
        let user = format!("u{u}");
        let favourite = format!("favourite_{u}");
        let mut row = BTreeMap::new();
        row.insert(favourite.clone(), 10.0);
        for d in 0..15 {
            row.insert(format!("decoy_{u}_{d}"), 5.0);
            popularity.insert(format!("decoy_{u}_{d}"), 1.0);
        }
        row.insert("surging".into(), 0.0);
        external.insert(user.clone(), row);
        popularity.insert(favourite.clone(), 0.0);
        let wants = if u % 2 == 0 { favourite } else { "surging".into() };
        truth.insert(user, [wants].into_iter().collect());
    }

    let external = ExternalScores::from_map("demo", external)?;
    let truth = GroundTruth::from_map(truth)?;
    let table = beta_sweep(
        &external,
        &popularity,
        &truth,
        &default_beta_grid(),
        &[10],
        ScoreScaling::Raw,
        None,
    )?;

    println!("beta   hr@10");
    let mut best = (0.0, 0.0);
    for (beta, report) in &table {
        let hr = report.row(10).unwrap().hit_rate;
        println!("{beta:<6} {hr:.2}");
        if hr > best.1 {
            best = (*beta, hr);
        }
    }
    println!();
    println!(
        "pure external (beta=1) and pure popularity (beta=0) each serve half \
         the users; the blend peaks at beta = {} with hr@10 = {:.2}",
        best.0, best.1
    );
    Ok(())
}
