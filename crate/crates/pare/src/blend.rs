//! Blend an external personalized recommender's scores with the model's
//! popularity scores: `s_new(u, i) = beta * s(u, i) + (1 - beta) * y_F(i)`.
//!
//! Items missing from one source contribute zero from that side, so the
//! candidate universe per user is the union of the user's externally
//! scored items and every popularity-scored item.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use crate::error::{PareError, Result};
use crate::metrics::{evaluate_per_user, GroundTruth, MetricsReport};
use crate::ranker::{top_n, RankedList};

/// Per-(user, item) preference scores from an external recommender.
#[derive(Clone, Debug)]
pub struct ExternalScores {
    pub source: String,
    by_user: BTreeMap<String, BTreeMap<String, f64>>,
    /// Duplicate (user, item) pairs resolved last-wins during loading.
    pub duplicate_count: u64,
}

impl ExternalScores {
    pub fn from_map(
        source: impl Into<String>,
        by_user: BTreeMap<String, BTreeMap<String, f64>>,
    ) -> Result<ExternalScores> {
        if by_user.is_empty() {
            return Err(PareError::data("external scores cover no users"));
        }
        Ok(ExternalScores {
            source: source.into(),
            by_user,
            duplicate_count: 0,
        })
    }

    pub fn users(&self) -> impl Iterator<Item = &str> {
        self.by_user.keys().map(|s| s.as_str())
    }

    pub fn get(&self, user: &str) -> Option<&BTreeMap<String, f64>> {
        self.by_user.get(user)
    }

    pub fn num_users(&self) -> usize {
        self.by_user.len()
    }

    pub fn num_pairs(&self) -> usize {
        self.by_user.values().map(|m| m.len()).sum()
    }
}

/// Load `user_id,item_id,score` lines. Duplicate pairs resolve last-wins
/// (counted); a malformed score aborts with its line number.
pub fn load_scores(path: &Path) -> Result<ExternalScores> {
    let text = fs::read_to_string(path).map_err(|e| {
        PareError::data(format!("cannot read scores file {}: {e}", path.display()))
    })?;
    let source = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "external".to_string());
    let mut by_user: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    let mut duplicates = 0u64;
    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if idx == 0 && line.starts_with("user_id,") {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(PareError::data(format!(
                "{}:{}: expected user_id,item_id,score",
                path.display(),
                idx + 1
            )));
        }
        let score: f64 = parts[2].trim().parse().map_err(|_| {
            PareError::data(format!(
                "{}:{}: malformed score `{}`",
                path.display(),
                idx + 1,
                parts[2].trim()
            ))
        })?;
        if !score.is_finite() {
            return Err(PareError::data(format!(
                "{}:{}: non-finite score",
                path.display(),
                idx + 1
            )));
        }
        let user = parts[0].trim().to_string();
        let item = parts[1].trim().to_string();
        if by_user
            .entry(user)
            .or_default()
            .insert(item, score)
            .is_some()
        {
            duplicates += 1;
        }
    }
    if by_user.is_empty() {
        return Err(PareError::data(format!(
            "scores file {} holds no entries",
            path.display()
        )));
    }
    Ok(ExternalScores {
        source,
        by_user,
        duplicate_count: duplicates,
    })
}

/// Whether to blend raw scores (faithful default) or min-max normalize
/// each source to [0, 1] first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScoreScaling {
    Raw,
    MinMax,
}

fn min_max_map(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

fn rescale(v: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        (v - lo) / (hi - lo)
    } else {
        // A constant source carries no ranking signal; park it mid-range.
        0.5
    }
}

/// Blended per-user score maps over the union candidate set.
pub fn blend_scores(
    external: &ExternalScores,
    popularity: &BTreeMap<String, f64>,
    beta: f64,
    scaling: ScoreScaling,
) -> Result<BTreeMap<String, BTreeMap<String, f64>>> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(PareError::usage(format!(
            "beta must lie in [0, 1], found {beta}"
        )));
    }
    let (ext_lo, ext_hi, pop_lo, pop_hi) = match scaling {
        ScoreScaling::Raw => (0.0, 0.0, 0.0, 0.0),
        ScoreScaling::MinMax => {
            let (el, eh) =
                min_max_map(external.by_user.values().flat_map(|m| m.values().copied()));
            let (pl, ph) = min_max_map(popularity.values().copied());
            (el, eh, pl, ph)
        }
    };
    let ext_score = |v: f64| match scaling {
        ScoreScaling::Raw => v,
        ScoreScaling::MinMax => rescale(v, ext_lo, ext_hi),
    };
    let pop_score = |v: f64| match scaling {
        ScoreScaling::Raw => v,
        ScoreScaling::MinMax => rescale(v, pop_lo, pop_hi),
    };

    let mut blended = BTreeMap::new();
    for (user, ext_items) in &external.by_user {
        let mut row: BTreeMap<String, f64> = BTreeMap::new();
        for (item, &s) in ext_items {
            let pop = popularity.get(item).map(|&y| pop_score(y)).unwrap_or(0.0);
            row.insert(item.clone(), beta * ext_score(s) + (1.0 - beta) * pop);
        }
        for (item, &y) in popularity {
            row.entry(item.clone()).or_insert_with(|| {
                // No external opinion: that side contributes zero.
                (1.0 - beta) * pop_score(y)
            });
        }
        blended.insert(user.clone(), row);
    }
    Ok(blended)
}

/// Top-N list per user from blended scores, optionally dropping items the
/// user already interacted with.
pub fn blended_lists(
    blended: &BTreeMap<String, BTreeMap<String, f64>>,
    n: usize,
    seen: Option<&BTreeMap<String, BTreeSet<String>>>,
) -> BTreeMap<String, RankedList> {
    blended
        .iter()
        .map(|(user, scores)| {
            let filtered: BTreeMap<String, f64> = match seen.and_then(|s| s.get(user)) {
                Some(seen_items) => scores
                    .iter()
                    .filter(|(item, _)| !seen_items.contains(*item))
                    .map(|(item, &s)| (item.clone(), s))
                    .collect(),
                None => scores.clone(),
            };
            (user.clone(), top_n(&filtered, n))
        })
        .collect()
}

/// One metrics report per beta over the same truth, plus the list length
/// used for ranking (the largest cutoff).
pub fn beta_sweep(
    external: &ExternalScores,
    popularity: &BTreeMap<String, f64>,
    truth: &GroundTruth,
    betas: &[f64],
    cutoffs: &[usize],
    scaling: ScoreScaling,
    seen: Option<&BTreeMap<String, BTreeSet<String>>>,
) -> Result<Vec<(f64, MetricsReport)>> {
    if betas.is_empty() {
        return Err(PareError::usage("beta sweep needs at least one beta"));
    }
    let n = cutoffs.iter().copied().max().unwrap_or(10);
    let mut table = Vec::with_capacity(betas.len());
    for &beta in betas {
        let blended = blend_scores(external, popularity, beta, scaling)?;
        let lists = blended_lists(&blended, n, seen);
        let report = evaluate_per_user(&lists, truth, cutoffs)?;
        table.push((beta, report));
    }
    Ok(table)
}

/// The default beta grid 0.0, 0.1, ..., 1.0.
pub fn default_beta_grid() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;
    use tempfile::NamedTempFile;

    fn write_file(content: &str) -> NamedTempFile {
        let mut f = NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn external(pairs: &[(&str, &str, f64)]) -> ExternalScores {
        let mut by_user: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for (u, i, s) in pairs {
            by_user
                .entry(u.to_string())
                .or_default()
                .insert(i.to_string(), *s);
        }
        ExternalScores::from_map("test", by_user).unwrap()
    }

    fn popularity(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(i, s)| (i.to_string(), *s)).collect()
    }

    #[test]
    fn load_scores_counts_entries_and_duplicates() {
        let f = write_file("u1,i1,0.5\nu1,i2,0.25\nu2,i1,-1.5\n");
        let scores = load_scores(f.path()).unwrap();
        assert_eq!(scores.num_pairs(), 3);
        assert_eq!(scores.duplicate_count, 0);

        let f = write_file("u1,i1,0.5\nu1,i1,0.75\n");
        let scores = load_scores(f.path()).unwrap();
        assert_eq!(scores.num_pairs(), 1);
        assert_eq!(scores.duplicate_count, 1);
        assert_eq!(scores.get("u1").unwrap()["i1"], 0.75); // last wins
    }

    #[test]
    fn malformed_score_reports_the_line() {
        let f = write_file("u1,i1,0.5\nu2,i2,banana\n");
        let err = load_scores(f.path()).unwrap_err();
        assert!(err.to_string().contains(":2:"), "{err}");
    }

    #[test]
    fn blend_arithmetic_matches_hand_example() {
        // s = 2, y_F = 4, beta = 0.25 -> 0.25*2 + 0.75*4 = 3.5
        let blended = blend_scores(
            &external(&[("u", "i", 2.0)]),
            &popularity(&[("i", 4.0)]),
            0.25,
            ScoreScaling::Raw,
        )
        .unwrap();
        assert_eq!(blended["u"]["i"], 3.5);
    }

    #[test]
    fn blended_score_is_affine_in_beta() {
        let ext = external(&[("u", "i", -1.75)]);
        let pop = popularity(&[("i", 6.5)]);
        for k in 0..=10 {
            let beta = k as f64 / 10.0;
            let blended = blend_scores(&ext, &pop, beta, ScoreScaling::Raw).unwrap();
            let expected = beta * (-1.75) + (1.0 - beta) * 6.5;
            assert!((blended["u"]["i"] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn beta_outside_unit_interval_is_rejected() {
        let ext = external(&[("u", "i", 1.0)]);
        let pop = popularity(&[("i", 1.0)]);
        assert!(blend_scores(&ext, &pop, -0.1, ScoreScaling::Raw).is_err());
        assert!(blend_scores(&ext, &pop, 1.1, ScoreScaling::Raw).is_err());
    }

    #[test]
    fn endpoints_reproduce_each_source_ranking() {
        // External prefers a > b > c for u; popularity prefers c > b > a.
        let ext = external(&[
            ("u", "a", 3.0),
            ("u", "b", 2.0),
            ("u", "c", 1.0),
        ]);
        let pop = popularity(&[("a", 0.1), ("b", 5.0), ("c", 9.0)]);

        let at_one = blend_scores(&ext, &pop, 1.0, ScoreScaling::Raw).unwrap();
        let lists = blended_lists(&at_one, 3, None);
        assert_eq!(lists["u"].top_ids(3), vec!["a", "b", "c"]);

        let at_zero = blend_scores(&ext, &pop, 0.0, ScoreScaling::Raw).unwrap();
        let lists = blended_lists(&at_zero, 3, None);
        assert_eq!(lists["u"].top_ids(3), vec!["c", "b", "a"]);
    }

    #[test]
    fn candidates_never_leave_the_union() {
        let ext = external(&[("u", "only_ext", 1.0)]);
        let pop = popularity(&[("only_pop", 2.0)]);
        let blended = blend_scores(&ext, &pop, 0.5, ScoreScaling::Raw).unwrap();
        let items: Vec<&String> = blended["u"].keys().collect();
        assert_eq!(items, vec!["only_ext", "only_pop"]);
        // Missing sides contribute zero.
        assert_eq!(blended["u"]["only_ext"], 0.5);
        assert_eq!(blended["u"]["only_pop"], 1.0);
    }

    #[test]
    fn min_max_scaling_aligns_disparate_ranges() {
        let ext = external(&[("u", "a", 1000.0), ("u", "b", 2000.0)]);
        let pop = popularity(&[("a", 0.9), ("b", 0.1)]);
        let blended = blend_scores(&ext, &pop, 0.5, ScoreScaling::MinMax).unwrap();
        // a: 0.5*0 + 0.5*1 = 0.5; b: 0.5*1 + 0.5*0 = 0.5
        assert!((blended["u"]["a"] - 0.5).abs() < 1e-15);
        assert!((blended["u"]["b"] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn seen_filter_drops_interacted_items() {
        let ext = external(&[("u", "a", 3.0), ("u", "b", 2.0)]);
        let pop = popularity(&[("a", 1.0), ("b", 1.0)]);
        let blended = blend_scores(&ext, &pop, 1.0, ScoreScaling::Raw).unwrap();
        let mut seen = BTreeMap::new();
        seen.insert(
            "u".to_string(),
            ["a".to_string()].into_iter().collect::<BTreeSet<String>>(),
        );
        let lists = blended_lists(&blended, 2, Some(&seen));
        assert_eq!(lists["u"].top_ids(2), vec!["b"]);
    }

    #[test]
    fn singleton_sweep_yields_one_row() {
        let ext = external(&[("u", "a", 1.0)]);
        let pop = popularity(&[("a", 1.0)]);
        let truth = {
            let mut m = BTreeMap::new();
            m.insert(
                "u".to_string(),
                ["a".to_string()].into_iter().collect::<BTreeSet<String>>(),
            );
            GroundTruth::from_map(m).unwrap()
        };
        let table = beta_sweep(
            &ext,
            &pop,
            &truth,
            &[0.5],
            &[1],
            ScoreScaling::Raw,
            None,
        )
        .unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(table[0].0, 0.5);
        assert_eq!(table[0].1.row(1).unwrap().hit_rate, 1.0);
    }

    #[test]
    fn sweep_endpoints_match_pure_rankings() {
        // u1's truth is externally known; u2's truth is the popular item.
        let ext = external(&[
            ("u1", "personal", 10.0),
            ("u1", "pop", 0.0),
            ("u2", "personal", 10.0),
            ("u2", "pop", 0.0),
        ]);
        let pop = popularity(&[("personal", 0.0), ("pop", 10.0)]);
        let truth = {
            let mut m = BTreeMap::new();
            m.insert(
                "u1".to_string(),
                ["personal".to_string()]
                    .into_iter()
                    .collect::<BTreeSet<String>>(),
            );
            m.insert(
                "u2".to_string(),
                ["pop".to_string()].into_iter().collect::<BTreeSet<String>>(),
            );
            GroundTruth::from_map(m).unwrap()
        };
        let table = beta_sweep(
            &ext,
            &pop,
            &truth,
            &[0.0, 1.0],
            &[1],
            ScoreScaling::Raw,
            None,
        )
        .unwrap();
        // beta = 0: everyone sees the popularity ranking -> only u2 hits.
        assert_eq!(table[0].1.row(1).unwrap().hit_rate, 0.5);
        // beta = 1: everyone sees the external ranking -> only u1 hits.
        assert_eq!(table[1].1.row(1).unwrap().hit_rate, 0.5);
    }
}
