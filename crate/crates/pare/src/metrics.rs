//! Top-N ranking metrics: hit ratio, precision, recall, MRR, and NDCG at a
//! set of cutoffs, averaged over users with binary relevance.
//!
//! Definitions, for a user with relevant set `G` and top-N list `L`
//! (ranks 1-based): hits = |L ∩ G|; precision = hits / N;
//! recall = hits / |G|; HR = 1 if hits >= 1;
//! MRR = 1 / rank of the first relevant item within the top N (0 if none);
//! NDCG = DCG / IDCG with DCG = sum over relevant ranks r of 1/log2(r+1)
//! and IDCG = sum over r = 1..min(N, |G|).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{PareError, Result};
use crate::ranker::RankedList;

/// Relevant items per user for one evaluation bin. Users with no relevant
/// items are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundTruth {
    by_user: BTreeMap<String, BTreeSet<String>>,
}

impl GroundTruth {
    /// Users and the distinct items they touched in `bin`.
    pub fn from_corpus(corpus: &Corpus, bin: usize) -> Result<GroundTruth> {
        GroundTruth::from_map(corpus.interactions_in_bin(bin))
    }

    pub fn from_map(map: BTreeMap<String, BTreeSet<String>>) -> Result<GroundTruth> {
        let by_user: BTreeMap<String, BTreeSet<String>> = map
            .into_iter()
            .filter(|(_, items)| !items.is_empty())
            .collect();
        if by_user.is_empty() {
            return Err(PareError::data("no users with relevant items to evaluate"));
        }
        Ok(GroundTruth { by_user })
    }

    pub fn users(&self) -> impl Iterator<Item = &str> {
        self.by_user.keys().map(|s| s.as_str())
    }

    pub fn get(&self, user: &str) -> Option<&BTreeSet<String>> {
        self.by_user.get(user)
    }

    pub fn len(&self) -> usize {
        self.by_user.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_user.is_empty()
    }
}

/// Mean metrics at one cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub n: usize,
    pub precision: f64,
    pub recall: f64,
    pub hit_rate: f64,
    pub mrr: f64,
    pub ndcg: f64,
}

/// Metrics at every requested cutoff, averaged over `user_count` users.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rows: Vec<MetricsRow>,
    pub user_count: usize,
}

impl MetricsReport {
    pub fn row(&self, n: usize) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    /// `method,n,precision,recall,hr,mrr,ndcg` lines.
    pub fn to_table(&self, method: &str) -> String {
        let mut out = String::from("method,n,precision,recall,hr,mrr,ndcg\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                method, r.n, r.precision, r.recall, r.hit_rate, r.mrr, r.ndcg
            ));
        }
        out
    }
}

/// Metrics for one user at one cutoff.
fn user_metrics(list: &[&str], truth: &BTreeSet<String>, n: usize) -> MetricsRow {
    let top = &list[..list.len().min(n)];
    let mut hits = 0usize;
    let mut first_hit_rank = None;
    let mut dcg = 0.0;
    for (idx, item) in top.iter().enumerate() {
        if truth.contains(*item) {
            let rank = idx + 1;
            hits += 1;
            if first_hit_rank.is_none() {
                first_hit_rank = Some(rank);
            }
            dcg += 1.0 / ((rank + 1) as f64).log2();
        }
    }
    let ideal_hits = n.min(truth.len());
    let idcg: f64 = (1..=ideal_hits).map(|r| 1.0 / ((r + 1) as f64).log2()).sum();
    MetricsRow {
        n,
        precision: hits as f64 / n as f64,
        recall: hits as f64 / truth.len() as f64,
        hit_rate: if hits > 0 { 1.0 } else { 0.0 },
        mrr: first_hit_rank.map(|r| 1.0 / r as f64).unwrap_or(0.0),
        ndcg: if idcg > 0.0 { dcg / idcg } else { 0.0 },
    }
}

fn mean_rows<'a, F>(per_user_lists: F, truth: &GroundTruth, cutoffs: &[usize]) -> Result<MetricsReport>
where
    F: Fn(&str) -> Vec<&'a str>,
{
    if cutoffs.is_empty() {
        return Err(PareError::usage("no cutoffs requested"));
    }
    if cutoffs.contains(&0) {
        return Err(PareError::usage("cutoffs must be at least 1"));
    }
    let users: Vec<&str> = truth.users().collect();
    let mut rows = Vec::with_capacity(cutoffs.len());
    for &n in cutoffs {
        let mut acc = MetricsRow {
            n,
            precision: 0.0,
            recall: 0.0,
            hit_rate: 0.0,
            mrr: 0.0,
            ndcg: 0.0,
        };
        for user in &users {
            let list = per_user_lists(user);
            let truth_set = truth.get(user).expect("users come from the truth map");
            let m = user_metrics(&list, truth_set, n);
            acc.precision += m.precision;
            acc.recall += m.recall;
            acc.hit_rate += m.hit_rate;
            acc.mrr += m.mrr;
            acc.ndcg += m.ndcg;
        }
        let count = users.len() as f64;
        acc.precision /= count;
        acc.recall /= count;
        acc.hit_rate /= count;
        acc.mrr /= count;
        acc.ndcg /= count;
        rows.push(acc);
    }
    Ok(MetricsReport {
        rows,
        user_count: users.len(),
    })
}

/// Evaluate one global (non-personalized) list against every user's truth.
pub fn evaluate(list: &RankedList, truth: &GroundTruth, cutoffs: &[usize]) -> Result<MetricsReport> {
    let ids: Vec<&str> = list.top_ids(list.len());
    mean_rows(|_| ids.clone(), truth, cutoffs)
}

/// Evaluate per-user lists. A truth user with no list counts with zero
/// metrics (they were recommended nothing).
pub fn evaluate_per_user(
    lists: &BTreeMap<String, RankedList>,
    truth: &GroundTruth,
    cutoffs: &[usize],
) -> Result<MetricsReport> {
    mean_rows(
        |user| {
            lists
                .get(user)
                .map(|l| l.top_ids(l.len()))
                .unwrap_or_default()
        },
        truth,
        cutoffs,
    )
}

/// Number of items shared by the top `n` of two ranked lists.
pub fn overlap_count(a: &RankedList, b: &RankedList, n: usize) -> usize {
    let set_a: BTreeSet<&str> = a.top_ids(n).into_iter().collect();
    b.top_ids(n).into_iter().filter(|id| set_a.contains(id)).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranker::top_n;

    fn list_of(ids: &[&str]) -> RankedList {
        let scores: BTreeMap<String, f64> = ids
            .iter()
            .enumerate()
            .map(|(rank, id)| (id.to_string(), (ids.len() - rank) as f64))
            .collect();
        top_n(&scores, ids.len())
    }

    fn truth_of(pairs: &[(&str, &[&str])]) -> GroundTruth {
        let map: BTreeMap<String, BTreeSet<String>> = pairs
            .iter()
            .map(|(user, items)| {
                (
                    user.to_string(),
                    items.iter().map(|s| s.to_string()).collect(),
                )
            })
            .collect();
        GroundTruth::from_map(map).unwrap()
    }

    #[test]
    fn perfect_single_hit_scores_one_everywhere() {
        let report = evaluate(&list_of(&["x"]), &truth_of(&[("u", &["x"])]), &[1]).unwrap();
        let row = report.row(1).unwrap();
        assert_eq!(row.precision, 1.0);
        assert_eq!(row.recall, 1.0);
        assert_eq!(row.hit_rate, 1.0);
        assert_eq!(row.mrr, 1.0);
        assert_eq!(row.ndcg, 1.0);
    }

    #[test]
    fn rank_two_hit_matches_definitional_arithmetic() {
        // truth item at rank 2 of 3, |G| = 1, N = 3
        let report = evaluate(
            &list_of(&["a", "hit", "b"]),
            &truth_of(&[("u", &["hit"])]),
            &[3],
        )
        .unwrap();
        let row = report.row(3).unwrap();
        assert!((row.mrr - 0.5).abs() < 1e-15);
        assert!((row.ndcg - 1.0 / 3f64.log2()).abs() < 1e-12); // about 0.6309
        assert!((row.precision - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(row.recall, 1.0);
        assert_eq!(row.hit_rate, 1.0);
    }

    #[test]
    fn miss_scores_zero() {
        let report = evaluate(
            &list_of(&["a", "b"]),
            &truth_of(&[("u", &["absent"])]),
            &[1, 2],
        )
        .unwrap();
        for row in &report.rows {
            assert_eq!(row.hit_rate, 0.0);
            assert_eq!(row.mrr, 0.0);
            assert_eq!(row.ndcg, 0.0);
        }
    }

    #[test]
    fn metrics_average_over_users() {
        // One user hits at rank 1, the other misses entirely.
        let report = evaluate(
            &list_of(&["x", "y"]),
            &truth_of(&[("hits", &["x"]), ("misses", &["z"])]),
            &[2],
        )
        .unwrap();
        let row = report.row(2).unwrap();
        assert_eq!(report.user_count, 2);
        assert_eq!(row.hit_rate, 0.5);
        assert_eq!(row.mrr, 0.5);
        assert!((row.precision - 0.25).abs() < 1e-15);
    }

    #[test]
    fn empty_truth_is_an_error() {
        assert!(GroundTruth::from_map(BTreeMap::new()).is_err());
        let mut map = BTreeMap::new();
        map.insert("u".to_string(), BTreeSet::new());
        assert!(GroundTruth::from_map(map).is_err());
    }

    #[test]
    fn mrr_is_truncated_at_the_cutoff() {
        let report = evaluate(
            &list_of(&["a", "b", "hit"]),
            &truth_of(&[("u", &["hit"])]),
            &[2, 3],
        )
        .unwrap();
        assert_eq!(report.row(2).unwrap().mrr, 0.0);
        assert!((report.row(3).unwrap().mrr - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_item_truth_identities_hold() {
        // For |G| = 1: recall = HR, and NDCG = 1/log2(rank+1) on a hit.
        for rank in 1..=5usize {
            let mut ids = vec!["d1", "d2", "d3", "d4", "d5"];
            ids.insert(rank - 1, "hit");
            let report = evaluate(&list_of(&ids), &truth_of(&[("u", &["hit"])]), &[5]).unwrap();
            let row = report.row(5).unwrap();
            assert_eq!(row.recall, row.hit_rate);
            if rank <= 5 {
                let expected = 1.0 / ((rank + 1) as f64).log2();
                assert!((row.ndcg - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hr_recall_mrr_are_monotone_in_n_and_ndcg_for_single_truth() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..100 {
            let pool: Vec<String> = (0..12).map(|i| format!("i{i}")).collect();
            let mut ids: Vec<&str> = pool.iter().map(|s| s.as_str()).collect();
            for i in (1..ids.len()).rev() {
                let j = rng.random_range(0..=i);
                ids.swap(i, j);
            }
            let truth_item = pool[rng.random_range(0..pool.len())].clone();
            let truth = truth_of(&[("u", &[truth_item.as_str()])]);
            let report = evaluate(&list_of(&ids), &truth, &[1, 3, 5, 7, 10]).unwrap();
            for pair in report.rows.windows(2) {
                assert!(pair[1].hit_rate >= pair[0].hit_rate - 1e-15);
                assert!(pair[1].recall >= pair[0].recall - 1e-15);
                assert!(pair[1].mrr >= pair[0].mrr - 1e-15);
                assert!(pair[1].ndcg >= pair[0].ndcg - 1e-15);
            }
        }
    }

    #[test]
    fn global_list_equals_per_user_with_identical_lists() {
        let list = list_of(&["a", "b", "c", "d"]);
        let truth = truth_of(&[("u1", &["b"]), ("u2", &["d", "a"]), ("u3", &["zz"])]);
        let global = evaluate(&list, &truth, &[1, 2, 3]).unwrap();
        let per_user: BTreeMap<String, RankedList> = truth
            .users()
            .map(|u| (u.to_string(), list.clone()))
            .collect();
        let personalized = evaluate_per_user(&per_user, &truth, &[1, 2, 3]).unwrap();
        assert_eq!(global, personalized);
    }

    #[test]
    fn truth_user_without_a_list_counts_as_zero() {
        let mut lists = BTreeMap::new();
        lists.insert("covered".to_string(), list_of(&["x"]));
        let truth = truth_of(&[("covered", &["x"]), ("uncovered", &["x"])]);
        let report = evaluate_per_user(&lists, &truth, &[1]).unwrap();
        assert_eq!(report.row(1).unwrap().hit_rate, 0.5);
    }

    #[test]
    fn overlap_examples() {
        let a = list_of(&["1", "2", "3", "4"]);
        let b = list_of(&["3", "5", "1", "6"]);
        assert_eq!(overlap_count(&a, &a, 4), 4);
        assert_eq!(overlap_count(&a, &b, 3), 2); // {1, 3}
        let disjoint = list_of(&["7", "8"]);
        assert_eq!(overlap_count(&a, &disjoint, 4), 0);
    }

    #[test]
    fn precision_bounds_hold() {
        let report = evaluate(
            &list_of(&["a", "hit1", "hit2"]),
            &truth_of(&[("u", &["hit1", "hit2"])]),
            &[1, 2, 3],
        )
        .unwrap();
        for row in &report.rows {
            assert!(row.precision <= row.hit_rate + 1e-15);
            assert!(row.mrr <= row.hit_rate + 1e-15);
            assert!((0.0..=1.0).contains(&row.precision));
            assert!((0.0..=1.0).contains(&row.ndcg));
        }
    }
}
