use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::Corpus;
use crate::error::{PareError, Result};

/// Which popularity profile to compute.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProfileMode {
    /// Mean count at each age (bins since release), averaged over the items
    /// whose series reaches that age.
    SinceRelease,
    /// Mean distinct-user count per calendar month for items carrying the
    /// named category, averaged over (item, year) cells across the dataset
    /// span.
    CalendarMonth { category: String },
}

/// (year, month) of a Unix timestamp, months 1-12 (proleptic Gregorian).
pub fn calendar_month_of(ts: i64) -> (i64, u32) {
    let days = ts.div_euclid(86_400);
    let z = days + 719_468;
    let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
    let doe = (z - era * 146_097) as u64;
    let yoe = (doe - doe / 1_460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe as i64 + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    (if m <= 2 { y + 1 } else { y }, m)
}

/// Profile table of (index, mean count). Index is the age in bins for
/// [`ProfileMode::SinceRelease`] and the calendar month (1-12) otherwise.
pub fn popularity_profile(corpus: &Corpus, mode: &ProfileMode) -> Result<Vec<(usize, f64)>> {
    if corpus.series.is_empty() {
        return Err(PareError::data("no popularity series to profile"));
    }
    match mode {
        ProfileMode::SinceRelease => {
            let max_age = corpus
                .series
                .values()
                .map(|s| s.counts().len())
                .max()
                .unwrap_or(0);
            let mut table = Vec::with_capacity(max_age);
            for age in 0..max_age {
                let mut total = 0.0;
                let mut n = 0usize;
                for series in corpus.series.values() {
                    if let Some(&count) = series.counts().get(age) {
                        total += count as f64;
                        n += 1;
                    }
                }
                if n > 0 {
                    table.push((age, total / n as f64));
                }
            }
            Ok(table)
        }
        ProfileMode::CalendarMonth { category } => {
            let category_id = corpus
                .catalog
                .category_id(category)
                .ok_or_else(|| PareError::data(format!("unknown category `{category}`")))?;
            let members: BTreeSet<&str> = corpus
                .catalog
                .items()
                .filter(|item| item.categories().contains(&category_id))
                .map(|item| item.item_id.as_str())
                .collect();
            if members.is_empty() {
                return Err(PareError::data(format!(
                    "no items carry category `{category}`"
                )));
            }
            let (first_year, _) = calendar_month_of(corpus.binning.origin_ts);
            let last_ts = corpus
                .interactions
                .iter()
                .map(|r| r.timestamp)
                .max()
                .unwrap_or(corpus.binning.origin_ts);
            let (last_year, _) = calendar_month_of(last_ts);
            let num_years = (last_year - first_year + 1).max(1) as f64;

            // Distinct users per (item, year, month) cell.
            let mut cells: BTreeMap<(String, i64, u32), BTreeSet<&str>> = BTreeMap::new();
            for rec in &corpus.interactions {
                if !members.contains(rec.item_id.as_str()) {
                    continue;
                }
                let (year, month) = calendar_month_of(rec.timestamp);
                cells
                    .entry((rec.item_id.clone(), year, month))
                    .or_default()
                    .insert(rec.user_id.as_str());
            }
            let denominator = members.len() as f64 * num_years;
            let mut table = Vec::with_capacity(12);
            for month in 1..=12u32 {
                let total: f64 = cells
                    .iter()
                    .filter(|((_, _, m), _)| *m == month)
                    .map(|(_, users)| users.len() as f64)
                    .sum();
                table.push((month as usize, total / denominator));
            }
            Ok(table)
        }
    }
}
