//! Verify the analytic gradients of the full training objective against
//! central finite differences on a miniature model.
//!
//! ```bash
//! cargo run --example gradient_check
//! ```

use pare::cli::gradcheck_fixture;
use pare::model::PareConfig;
use pare::trainer::objective_gradient_check;

fn main() -> pare::Result<()> {
    let seed = 1;
    let (model, corpus, examples) = gradcheck_fixture(seed, &PareConfig::default())?;
    println!(
        "checking {} parameters over {} examples (seed {seed})",
        model.store.total_values(),
        examples.len()
    );
    let report = objective_gradient_check(&model, &corpus, &examples, 1e-5)?;
    println!("{report}");
    if report.passes(1e-4) {
        println!("all gradients match finite differences within 1e-4");
    } else {
        println!("mismatch detected; see flagged parameters above");
    }
    Ok(())
}
