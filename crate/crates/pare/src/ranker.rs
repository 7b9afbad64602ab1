//! Top-N ranking: fused model scores at a target bin, plus the
//! trailing-window most-popular baselines.

use std::collections::BTreeMap;

use crate::corpus::Corpus;
use crate::error::{PareError, Result};
use crate::model::PareModel;

/// Items ordered by descending score, ties broken by ascending item id.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedList {
    entries: Vec<(String, f64)>,
    /// The requested cutoff.
    pub cutoff: usize,
    /// True when fewer items than the cutoff were available.
    pub shortfall: bool,
}

impl RankedList {
    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Item ids of the first `n` entries.
    pub fn top_ids(&self, n: usize) -> Vec<&str> {
        self.entries
            .iter()
            .take(n)
            .map(|(id, _)| id.as_str())
            .collect()
    }

    /// `rank,item_id,score` lines, ranks starting at 1.
    pub fn to_lines(&self) -> String {
        let mut out = String::from("rank,item_id,score\n");
        for (rank, (id, score)) in self.entries.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", rank + 1, id, score));
        }
        out
    }

    pub fn parse(text: &str) -> Result<RankedList> {
        let mut entries = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (idx == 0 && line.starts_with("rank,")) {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 3 {
                return Err(PareError::data(format!(
                    "ranked list line {}: expected rank,item_id,score",
                    idx + 1
                )));
            }
            let score: f64 = parts[2].trim().parse().map_err(|_| {
                PareError::data(format!("ranked list line {}: bad score", idx + 1))
            })?;
            entries.push((parts[1].trim().to_string(), score));
        }
        let cutoff = entries.len();
        Ok(RankedList {
            entries,
            cutoff,
            shortfall: false,
        })
    }
}

/// First `n` items under (score descending, item id ascending). When fewer
/// than `n` items exist the full list is returned with `shortfall` set.
pub fn top_n(scores: &BTreeMap<String, f64>, n: usize) -> RankedList {
    let mut entries: Vec<(String, f64)> = scores
        .iter()
        .map(|(id, &score)| (id.clone(), score))
        .collect();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let shortfall = entries.len() < n;
    entries.truncate(n);
    RankedList {
        entries,
        cutoff: n,
        shortfall,
    }
}

/// Fused model score for every item released by `bin`. Items that cannot
/// be placed on the time axis are absent; an empty result is an error.
pub fn score_all(model: &PareModel, corpus: &Corpus, bin: usize) -> Result<BTreeMap<String, f64>> {
    let scores: BTreeMap<String, f64> = model
        .predict_all(corpus, bin)?
        .into_iter()
        .map(|b| (b.item_id, b.y_fused))
        .collect();
    if scores.is_empty() {
        return Err(PareError::data(format!(
            "no items released by bin {bin} to score"
        )));
    }
    Ok(scores)
}

/// Trailing window of the most-popular baseline.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Window {
    /// Count interactions over the last `n` bins (one bin per month).
    Months(usize),
    /// Count over the entire history before the target bin.
    All,
}

impl Window {
    pub fn parse(text: &str) -> Result<Window> {
        match text.trim().to_ascii_lowercase().as_str() {
            "all" => Ok(Window::All),
            other => {
                let months: usize = other.parse().map_err(|_| {
                    PareError::usage(format!(
                        "window must be a month count or `all`, found `{other}`"
                    ))
                })?;
                if months == 0 {
                    return Err(PareError::usage("window must cover at least one month"));
                }
                Ok(Window::Months(months))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Window::Months(m) => format!("{m}m"),
            Window::All => "all".to_string(),
        }
    }
}

impl std::fmt::Display for Window {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Window::Months(m) => write!(f, "{m} months"),
            Window::All => write!(f, "ALL"),
        }
    }
}

/// Most-popular baseline at bin `t`: each item released by `t` scores the
/// sum of its distinct-user counts over `[max(1, t - w), t - 1]`
/// (`[1, t - 1]` for ALL), ranked under the usual tie rule.
pub fn cutoff_toppop(corpus: &Corpus, t: usize, window: Window) -> Result<RankedList> {
    if t < 2 {
        return Err(PareError::data(format!(
            "no history before bin {t} for a most-popular baseline"
        )));
    }
    let from = match window {
        Window::All => 1,
        Window::Months(m) => {
            if m == 0 {
                return Err(PareError::usage("window must cover at least one month"));
            }
            t.saturating_sub(m).max(1)
        }
    };
    let to = t - 1;
    let mut scores = BTreeMap::new();
    for (item_id, series) in &corpus.series {
        if series.release_bin > t {
            continue;
        }
        scores.insert(item_id.clone(), series.window_sum(from, to) as f64);
    }
    if scores.is_empty() {
        return Err(PareError::data(format!(
            "no items released by bin {t} to rank"
        )));
    }
    Ok(top_n(&scores, scores.len()))
}
