//! Popularity profiles: mean interactions by item age, and per-category
//! calendar-month activity.
//!
//! ```bash
//! cargo run --example popularity_profiles
//! ```

use pare::corpus::{popularity_profile, ProfileMode};
use pare::synthetic::{self, SyntheticSpec};

fn bar(value: f64, scale: f64) -> String {
    let n = ((value / scale) * 40.0).round() as usize;
    "#".repeat(n.min(60))
}

fn main() -> pare::Result<()> {
    let corpus = synthetic::corpus(&SyntheticSpec::default())?;

    let release = popularity_profile(&corpus, &ProfileMode::SinceRelease)?;
    let peak = release.iter().map(|(_, m)| *m).fold(0.0, f64::max);
    println!("mean distinct users by bins since release:");
    for (age, mean) in release.iter().take(14) {
        println!("  age {age:>2}  {mean:>6.2}  {}", bar(*mean, peak));
    }

    for category in ["holiday", "offseason"] {
        let profile = popularity_profile(
            &corpus,
            &ProfileMode::CalendarMonth {
                category: category.to_string(),
            },
        )?;
        let peak = profile.iter().map(|(_, m)| *m).fold(f64::MIN_POSITIVE, f64::max);
        println!();
        println!("mean monthly activity for category `{category}`:");
        for (month, mean) in profile {
            println!("  month {month:>2}  {mean:>6.2}  {}", bar(mean, peak));
        }
    }
    Ok(())
}
