//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (`cargo test --test acceptance -- --nocapture` to watch).

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use pare::blend::{beta_sweep, blend_scores, blended_lists, ExternalScores, ScoreScaling};
use pare::cli::{gradcheck_fixture, run, Command, RunConfig};
use pare::corpus::{Corpus, InteractionRecord, ItemCatalog, RawItem, DEFAULT_BIN_SECONDS};
use pare::metrics::{evaluate, GroundTruth};
use pare::model::{ema, Head, HeadSet, PareConfig, PareModel, PeriodMode};
use pare::ranker::{cutoff_toppop, score_all, top_n, Window};
use pare::synthetic::{self, SyntheticSpec};
use pare::trainer::{build_examples, objective_gradient_check, train, TrainConfig};

fn pass(criterion: &str, detail: String) {
    println!("acceptance {criterion}: PASS: {detail}");
}

/// Criterion 1: on a miniature model (d=8, hidden=8, C=3, M=2, 20 bins),
/// every parameter's analytic gradient of the full objective matches
/// central differences (h=1e-5) with relative error < 1e-4 across 20
/// seeds, in under a minute.
#[test]
fn criterion_1_gradient_exactness() {
    let started = Instant::now();
    let base = PareConfig::default();
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let (model, corpus, examples) = gradcheck_fixture(seed, &base).unwrap();
        assert_eq!(model.config.embedding_dim, 8);
        assert_eq!(model.config.lstm_hidden, 8);
        assert_eq!(model.dims.num_categories, 3);
        assert_eq!(model.dims.num_side_fields(), 2);
        assert_eq!(model.dims.num_bins, 20);
        let report = objective_gradient_check(&model, &corpus, &examples, 1e-5).unwrap();
        assert!(
            report.passes(1e-4),
            "seed {seed} exceeded the tolerance:\n{report}"
        );
        worst = worst.max(report.max_rel_err());
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "gradient checks took {elapsed:.1}s");
    pass(
        "criterion 1 (gradient exactness)",
        format!("worst rel err {worst:.2e} over 20 seeds in {elapsed:.1}s"),
    );
}

/// Independent definitional metrics: collect the 1-based ranks of relevant
/// items within the top-N, then derive all five metrics from that list.
fn oracle_metrics(list: &[String], truth: &BTreeSet<String>, n: usize) -> [f64; 5] {
    let hit_ranks: Vec<usize> = list
        .iter()
        .take(n)
        .enumerate()
        .filter(|(_, item)| truth.contains(*item))
        .map(|(idx, _)| idx + 1)
        .collect();
    let hits = hit_ranks.len() as f64;
    let precision = hits / n as f64;
    let recall = hits / truth.len() as f64;
    let hr = if hit_ranks.is_empty() { 0.0 } else { 1.0 };
    let mrr = hit_ranks.first().map(|&r| 1.0 / r as f64).unwrap_or(0.0);
    let dcg: f64 = hit_ranks.iter().map(|&r| 1.0 / ((r + 1) as f64).log2()).sum();
    let ideal: f64 = (1..=n.min(truth.len()))
        .map(|r| 1.0 / ((r + 1) as f64).log2())
        .sum();
    let ndcg = if ideal > 0.0 { dcg / ideal } else { 0.0 };
    [precision, recall, hr, mrr, ndcg]
}

/// Criterion 2: evaluate() matches the definitional oracle on 1000 random
/// (ranked list, ground truth) instances to 1e-12 at N in {1,3,5,7,10}.
#[test]
fn criterion_2_metrics_match_definitional_oracle() {
    let mut rng = StdRng::seed_from_u64(2024);
    let pool: Vec<String> = (0..30).map(|i| format!("item{i:02}")).collect();
    let cutoffs = [1usize, 3, 5, 7, 10];
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let mut shuffled = pool.clone();
        shuffled.shuffle(&mut rng);
        let list_items: Vec<String> = shuffled[..12].to_vec();
        let truth_size = rng.random_range(1..=4);
        let mut truth_items = pool.clone();
        truth_items.shuffle(&mut rng);
        let truth_set: BTreeSet<String> = truth_items[..truth_size].iter().cloned().collect();

        let scores: BTreeMap<String, f64> = list_items
            .iter()
            .enumerate()
            .map(|(rank, id)| (id.clone(), (list_items.len() - rank) as f64))
            .collect();
        let list = top_n(&scores, list_items.len());
        let mut map = BTreeMap::new();
        map.insert("user".to_string(), truth_set.clone());
        let truth = GroundTruth::from_map(map).unwrap();
        let report = evaluate(&list, &truth, &cutoffs).unwrap();

        for &n in &cutoffs {
            let expected = oracle_metrics(&list_items, &truth_set, n);
            let row = report.row(n).unwrap();
            let got = [row.precision, row.recall, row.hit_rate, row.mrr, row.ndcg];
            for (g, e) in got.iter().zip(expected.iter()) {
                let diff = (g - e).abs();
                assert!(diff < 1e-12, "n={n}: {got:?} vs {expected:?}");
                worst = worst.max(diff);
            }
        }
    }
    pass(
        "criterion 2 (metrics oracle equivalence)",
        format!("1000 instances x 5 cutoffs, worst abs diff {worst:.1e}"),
    );
}

/// Criterion 3: most-popular baselines match a brute-force counting oracle
/// exactly on a 200-user/50-item/24-bin synthetic corpus.
#[test]
fn criterion_3_toppop_matches_brute_force_oracle() {
    let spec = SyntheticSpec {
        num_users: 200,
        num_items: 50,
        num_bins: 24,
        seed: 33,
        ..SyntheticSpec::default()
    };
    let data = synthetic::generate(&spec);
    let corpus = synthetic::build_corpus(&data).unwrap();
    let t = corpus.split().unwrap().test_bin;
    assert_eq!(t, 24);

    // Oracle straight off the raw records: bin arithmetic, release
    // clamping, and distinct (user, bin) counting are all recomputed here.
    let origin = data.interactions.iter().map(|r| r.timestamp).min().unwrap();
    let bin_of = |ts: i64| ((ts - origin) / DEFAULT_BIN_SECONDS) as usize + 1;
    let mut first_seen: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &data.interactions {
        let bin = bin_of(r.timestamp);
        first_seen
            .entry(r.item_id.as_str())
            .and_modify(|b| *b = (*b).min(bin))
            .or_insert(bin);
    }
    let release_bin: BTreeMap<&str, usize> = data
        .items
        .iter()
        .map(|item| {
            let from_ts = item.release_ts.map(|ts| {
                if ts < origin {
                    1
                } else {
                    bin_of(ts).min(24)
                }
            });
            let first = first_seen.get(item.item_id.as_str()).copied();
            let bin = match (from_ts, first) {
                (Some(a), Some(b)) => a.min(b),
                (Some(a), None) => a,
                (None, Some(b)) => b,
                (None, None) => unreachable!("synthetic items always have release_ts"),
            };
            (item.item_id.as_str(), bin)
        })
        .collect();

    for window in [
        Window::Months(3),
        Window::Months(6),
        Window::Months(12),
        Window::All,
    ] {
        let from = match window {
            Window::All => 1,
            Window::Months(m) => t.saturating_sub(m).max(1),
        };
        let mut pairs: BTreeMap<&str, BTreeSet<(&str, usize)>> = BTreeMap::new();
        for r in &data.interactions {
            let bin = bin_of(r.timestamp);
            if bin >= from && bin < t {
                pairs
                    .entry(r.item_id.as_str())
                    .or_default()
                    .insert((r.user_id.as_str(), bin));
            }
        }
        let expected_scores: BTreeMap<String, f64> = release_bin
            .iter()
            .filter(|(_, &release)| release <= t)
            .map(|(&id, _)| {
                let count = pairs.get(id).map(|s| s.len()).unwrap_or(0);
                (id.to_string(), count as f64)
            })
            .collect();
        let expected = top_n(&expected_scores, expected_scores.len());
        let got = cutoff_toppop(&corpus, t, window).unwrap();
        assert_eq!(got.entries(), expected.entries(), "window {window}");
    }
    pass(
        "criterion 3 (baseline oracle equivalence)",
        "windows 3/6/12/ALL equal the brute-force lists on 200u/50i/24b".to_string(),
    );
}

/// Criterion 4: the moving average matches a hand-unrolled recursion with
/// explicit per-position weights, including both closed forms.
#[test]
fn criterion_4_ema_matches_unrolled_recursion() {
    let mut rng = StdRng::seed_from_u64(4);
    let mut checked = 0usize;
    for &alpha in &[0.0f64, 0.25, 0.5, 1.0] {
        for _ in 0..250 {
            let len = rng.random_range(0..=50);
            let seq: Vec<f64> = (0..len).map(|_| rng.random::<f64>() * 50.0).collect();
            // Unrolled weights: the first count keeps (1-a)^(L-1), every
            // later count k gets a * (1-a)^(L-1-k).
            let expected = if seq.is_empty() {
                0.0
            } else {
                let l = seq.len();
                seq.iter()
                    .enumerate()
                    .map(|(k, &p)| {
                        let w = if k == 0 {
                            (1.0 - alpha).powi((l - 1) as i32)
                        } else {
                            alpha * (1.0 - alpha).powi((l - 1 - k) as i32)
                        };
                        w * p
                    })
                    .sum()
            };
            let got = ema(&seq, alpha);
            assert!(
                (got - expected).abs() < 1e-12,
                "alpha {alpha}, len {len}: {got} vs {expected}"
            );
            if !seq.is_empty() {
                if alpha == 1.0 {
                    assert_eq!(got, *seq.last().unwrap());
                }
                if alpha == 0.0 {
                    assert_eq!(got, seq[0]);
                }
            }
            checked += 1;
        }
    }
    pass(
        "criterion 4 (moving-average correctness)",
        format!("{checked} random sequences across alpha in {{0, 0.25, 0.5, 1}}"),
    );
}

fn fusion_corpus() -> Corpus {
    let mut attributes = BTreeMap::new();
    attributes.insert("categories".to_string(), vec!["x".to_string()]);
    attributes.insert("brand".to_string(), vec!["b".to_string()]);
    let raws = vec![RawItem {
        item_id: "m".to_string(),
        release_ts: Some(1),
        attributes,
    }];
    let catalog = ItemCatalog::from_raw(raws, &synthetic::schema()).unwrap();
    let interactions = vec![
        InteractionRecord {
            user_id: "u".to_string(),
            item_id: "m".to_string(),
            timestamp: 1,
        },
        InteractionRecord {
            user_id: "v".to_string(),
            item_id: "m".to_string(),
            timestamp: 1 + 3 * DEFAULT_BIN_SECONDS,
        },
    ];
    Corpus::build(interactions, catalog, DEFAULT_BIN_SECONDS).unwrap()
}

/// Criterion 5: fusion weights are positive and sum to one across 1000
/// random parameter draws, and the ablation masks reproduce the structural
/// subset rows, each emitting its weight vector.
#[test]
fn criterion_5_fusion_constraint_and_ablation_masks() {
    let corpus = fusion_corpus();
    let config = PareConfig {
        embedding_dim: 2,
        lstm_hidden: 2,
        omega: 3,
        ..PareConfig::default()
    };
    let mut model = PareModel::from_corpus(&corpus, config, 55).unwrap();
    let mut rng = StdRng::seed_from_u64(555);
    let mut worst_sum_err: f64 = 0.0;
    for _ in 0..1000 {
        for v in model.store.value_mut("fusion.logits").unwrap().data_mut() {
            *v = (rng.random::<f64>() - 0.5) * 24.0;
        }
        let b = model.predict(&corpus, "m", 3).unwrap();
        let total: f64 = b.attention.iter().sum();
        worst_sum_err = worst_sum_err.max((total - 1.0).abs());
        assert!((total - 1.0).abs() < 1e-9, "sum {total}");
        for a in b.attention {
            assert!(a > 0.0, "non-positive weight {a}");
        }
    }

    let subsets: [&[Head]; 5] = [
        &[Head::History],
        &[Head::History, Head::Temporal],
        &[Head::History, Head::Temporal, Head::Side],
        &[Head::History, Head::Temporal, Head::Periodic],
        &[Head::History, Head::Temporal, Head::Periodic, Head::Side],
    ];
    println!("subset     attention weights (H, T, P, S; 0 = masked)");
    for heads in subsets {
        let head_set = HeadSet::from_heads(heads).unwrap();
        let config = PareConfig {
            embedding_dim: 2,
            lstm_hidden: 2,
            omega: 3,
            heads: head_set,
            ..PareConfig::default()
        };
        let model = PareModel::from_corpus(&corpus, config, 56).unwrap();
        let b = model.predict(&corpus, "m", 3).unwrap();
        for (idx, head) in Head::ALL.iter().enumerate() {
            if head_set.contains(*head) {
                assert!(b.attention[idx] > 0.0);
            } else {
                assert_eq!(b.attention[idx], 0.0);
            }
        }
        let total: f64 = b.attention.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        let recomposed = b.attention[0] * b.y_history
            + b.attention[1] * b.y_temporal
            + b.attention[2] * b.y_periodic
            + b.attention[3] * b.y_side;
        assert!((b.y_fused - recomposed).abs() < 1e-12);
        println!(
            "{:<10} ({:.4}, {:.4}, {:.4}, {:.4})",
            head_set.to_string(),
            b.attention[0],
            b.attention[1],
            b.attention[2],
            b.attention[3]
        );
    }
    pass(
        "criterion 5 (fusion constraint + ablation masks)",
        format!("1000 draws, worst |sum(a) - 1| = {worst_sum_err:.1e}; 5 subset rows emitted"),
    );
}

/// Criterion 6: on the planted synthetic corpus, training halves the
/// epoch-0 validation loss, and the model's HR@10 beats the all-history
/// baseline strictly and at least matches the 3-month baseline, all
/// within five minutes.
#[test]
fn criterion_6_synthetic_learnability() {
    let started = Instant::now();
    let corpus = synthetic::corpus(&SyntheticSpec::default()).unwrap();
    let split = corpus.split().unwrap();
    let config = PareConfig {
        embedding_dim: 16,
        lstm_hidden: 16,
        ..PareConfig::default()
    };
    let mut model = PareModel::from_corpus(&corpus, config, 42).unwrap();
    let examples = build_examples(&corpus, &split).unwrap();
    let train_config = TrainConfig {
        lr: 0.02,
        batch_size: 64,
        max_epochs: 120,
        patience: 15,
        seed: 42,
        ..TrainConfig::default()
    };
    let report = train(&mut model, &corpus, &examples, &train_config).unwrap();

    // (a) validation loss at least halves.
    assert!(
        report.best_valid_loss <= 0.5 * report.initial_valid_loss,
        "validation went {} -> {}",
        report.initial_valid_loss,
        report.best_valid_loss
    );

    let truth = GroundTruth::from_corpus(&corpus, split.test_bin).unwrap();
    let scores = score_all(&model, &corpus, split.test_bin).unwrap();
    let model_list = top_n(&scores, 10);
    let model_hr = evaluate(&model_list, &truth, &[10])
        .unwrap()
        .row(10)
        .unwrap()
        .hit_rate;
    let hr_of = |window: Window| {
        let list = cutoff_toppop(&corpus, split.test_bin, window).unwrap();
        evaluate(&list, &truth, &[10]).unwrap().row(10).unwrap().hit_rate
    };
    let all_hr = hr_of(Window::All);
    let recent_hr = hr_of(Window::Months(3));

    // (b) strictly above the all-history baseline.
    assert!(
        model_hr > all_hr,
        "model hr@10 {model_hr} vs all-history {all_hr}"
    );
    // (c) at least the 3-month baseline.
    assert!(
        model_hr >= recent_hr,
        "model hr@10 {model_hr} vs 3-month {recent_hr}"
    );
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "took {elapsed:.0}s");
    pass(
        "criterion 6 (synthetic learnability)",
        format!(
            "valid loss {:.2} -> {:.2}; hr@10 model {model_hr:.4} > all {all_hr:.4}, >= 3m {recent_hr:.4}; {elapsed:.0}s",
            report.initial_valid_loss, report.best_valid_loss
        ),
    );
}

/// Criterion 7: beta endpoints reproduce each source's ranking exactly and
/// a constructed mixture attains its best HR@10 strictly inside (0, 1).
#[test]
fn criterion_7_blend_endpoints_and_interior_optimum() {
    // Half the users want their personal favourite (externally known),
    // half want the item about to surge (popularity-known).
    let mut external_map: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    let mut truth_map: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut popularity: BTreeMap<String, f64> = BTreeMap::new();
    popularity.insert("surging".to_string(), 10.0);
    for u in 0..20 {
        let user = format!("u{u:02}");
        let favourite = format!("fav_{u:02}");
        let mut row = BTreeMap::new();
        row.insert(favourite.clone(), 10.0);
        for d in 0..15 {
            row.insert(format!("decoy_{u:02}_{d:02}"), 5.0);
            popularity.insert(format!("decoy_{u:02}_{d:02}"), 1.0);
        }
        row.insert("surging".to_string(), 0.0);
        external_map.insert(user.clone(), row);
        popularity.insert(favourite.clone(), 0.0);
        let wanted = if u % 2 == 0 {
            favourite
        } else {
            "surging".to_string()
        };
        truth_map.insert(user, [wanted].into_iter().collect());
    }
    let external = ExternalScores::from_map("mixture", external_map).unwrap();
    let truth = GroundTruth::from_map(truth_map).unwrap();

    // Endpoint rank equality per user, over the shared candidate union.
    for (beta, pure_external) in [(1.0, true), (0.0, false)] {
        let blended = blend_scores(&external, &popularity, beta, ScoreScaling::Raw).unwrap();
        let lists = blended_lists(&blended, usize::MAX, None);
        for (user, list) in &lists {
            let mut reference: BTreeMap<String, f64> = popularity
                .keys()
                .map(|item| (item.clone(), 0.0))
                .collect();
            if pure_external {
                for (item, &s) in external.get(user).unwrap() {
                    reference.insert(item.clone(), s);
                }
            } else {
                for (item, &y) in &popularity {
                    reference.insert(item.clone(), y);
                }
                for item in external.get(user).unwrap().keys() {
                    reference.entry(item.clone()).or_insert(0.0);
                }
            }
            let expected = top_n(&reference, reference.len());
            assert_eq!(
                list.top_ids(list.len()),
                expected.top_ids(expected.len()),
                "beta {beta}, user {user}"
            );
        }
    }

    let betas: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let table = beta_sweep(
        &external,
        &popularity,
        &truth,
        &betas,
        &[10],
        ScoreScaling::Raw,
        None,
    )
    .unwrap();
    let hr = |idx: usize| table[idx].1.row(10).unwrap().hit_rate;
    let (best_idx, _) = table
        .iter()
        .enumerate()
        .max_by(|a, b| {
            let ha = a.1 .1.row(10).unwrap().hit_rate;
            let hb = b.1 .1.row(10).unwrap().hit_rate;
            ha.partial_cmp(&hb).unwrap()
        })
        .unwrap();
    assert!(best_idx != 0 && best_idx != table.len() - 1, "optimum at an endpoint");
    assert!(hr(best_idx) > hr(0) && hr(best_idx) > hr(table.len() - 1));
    pass(
        "criterion 7 (blend endpoints + interior optimum)",
        format!(
            "endpoints rank-equal; hr@10 peaks at beta {} ({:.2} vs {:.2}/{:.2} at the ends)",
            table[best_idx].0,
            hr(best_idx),
            hr(0),
            hr(table.len() - 1)
        ),
    );
}

/// Criterion 8: two full train+predict runs with the same seed produce
/// byte-identical checkpoints, prediction files, and ranked lists.
#[test]
fn criterion_8_determinism() {
    let spec = SyntheticSpec {
        num_items: 15,
        num_bins: 14,
        num_users: 80,
        seed: 77,
        ..SyntheticSpec::default()
    };
    let data = synthetic::generate(&spec);
    let base = tempfile::tempdir().unwrap();
    let (interactions, items) = synthetic::write_dataset(&data, &base.path().join("data")).unwrap();

    let run_once = |out: &std::path::Path| {
        let mut config = RunConfig::default();
        config.interactions = Some(interactions.clone());
        config.items = Some(items.clone());
        config.output_dir = out.to_path_buf();
        config.side_fields = synthetic::schema();
        config.set("embedding_dim", "8").unwrap();
        config.set("lstm_hidden", "8").unwrap();
        config.set("max_epochs", "4").unwrap();
        config.set("batch_size", "32").unwrap();
        config.set("seed", "9").unwrap();
        run(Command::Train, &config).unwrap();
        run(Command::Predict, &config).unwrap();
        run(Command::Evaluate, &config).unwrap();
    };
    let dir_a = base.path().join("a");
    let dir_b = base.path().join("b");
    run_once(&dir_a);
    run_once(&dir_b);

    for artifact in ["checkpoint.json", "predictions.csv", "ranked_pare.csv"] {
        let a = std::fs::read(dir_a.join(artifact)).unwrap();
        let b = std::fs::read(dir_b.join(artifact)).unwrap();
        assert_eq!(a, b, "{artifact} differs between identical runs");
        assert!(!a.is_empty());
    }
    pass(
        "criterion 8 (determinism)",
        "checkpoint.json, predictions.csv, ranked_pare.csv byte-identical across runs".to_string(),
    );
}

/// Criterion 9 (best-effort, non-gating): with the public Amazon Video
/// Games reviews present, the all-history baseline's HR@10 should land
/// near the reported 0.0643; the deviation is printed, never asserted.
///
/// Point PARE_AMAZON_REVIEWS at the ratings CSV (user,item,rating,timestamp
/// or item,user,rating,timestamp ordering are both accepted) to enable it.
#[test]
fn criterion_9_amazon_video_games_best_effort() {
    let path = match std::env::var("PARE_AMAZON_REVIEWS") {
        Ok(p) => std::path::PathBuf::from(p),
        Err(_) => {
            println!(
                "acceptance criterion 9 (amazon best-effort): SKIP: set \
                 PARE_AMAZON_REVIEWS to the Video Games ratings CSV to enable"
            );
            return;
        }
    };
    let text = std::fs::read_to_string(&path).expect("reviews file readable");

    // Documented preprocessing: ratings become implicit interactions, then
    // users and items with fewer than five interactions are dropped,
    // iterated to a fixpoint (the usual 5-core).
    let mut records: Vec<InteractionRecord> = Vec::new();
    for line in text.lines() {
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() < 4 {
            continue;
        }
        if let Ok(ts) = parts[3].trim().parse::<i64>() {
            if ts > 0 {
                records.push(InteractionRecord {
                    user_id: parts[0].trim().to_string(),
                    item_id: parts[1].trim().to_string(),
                    timestamp: ts,
                });
            }
        }
    }
    loop {
        let mut user_counts: BTreeMap<&str, usize> = BTreeMap::new();
        let mut item_counts: BTreeMap<&str, usize> = BTreeMap::new();
        for r in &records {
            *user_counts.entry(r.user_id.as_str()).or_default() += 1;
            *item_counts.entry(r.item_id.as_str()).or_default() += 1;
        }
        let before = records.len();
        let keep: Vec<bool> = records
            .iter()
            .map(|r| user_counts[r.user_id.as_str()] >= 5 && item_counts[r.item_id.as_str()] >= 5)
            .collect();
        let mut idx = 0;
        records.retain(|_| {
            let k = keep[idx];
            idx += 1;
            k
        });
        if records.len() == before {
            break;
        }
    }

    let item_ids: BTreeSet<String> = records.iter().map(|r| r.item_id.clone()).collect();
    let raws: Vec<RawItem> = item_ids
        .iter()
        .map(|id| RawItem {
            item_id: id.clone(),
            release_ts: None,
            attributes: BTreeMap::from([
                ("categories".to_string(), vec!["video_games".to_string()]),
            ]),
        })
        .collect();
    let catalog = ItemCatalog::from_raw(raws, &["categories".to_string()]).unwrap();
    let corpus = Corpus::build(records, catalog, DEFAULT_BIN_SECONDS).unwrap();
    let split = corpus.split().unwrap();
    let truth = GroundTruth::from_corpus(&corpus, split.test_bin).unwrap();
    let list = cutoff_toppop(&corpus, split.test_bin, Window::All).unwrap();
    let hr = evaluate(&list, &truth, &[10]).unwrap().row(10).unwrap().hit_rate;
    let reported = 0.0643;
    println!(
        "acceptance criterion 9 (amazon best-effort): REPORT: all-history hr@10 = {hr:.4}, \
         reported value {reported}, deviation {:+.4} (not asserted; item/user \
         filtering in the original evaluation is unspecified)",
        hr - reported
    );
}

/// The periodic head's calendar mode is part of the public surface the
/// criteria exercise indirectly; pin its config contract here.
#[test]
fn calendar_mode_requires_a_twelve_period_cycle() {
    let config = PareConfig {
        omega: 6,
        period_mode: PeriodMode::CalendarMonth,
        ..PareConfig::default()
    };
    assert!(config.validate().is_err());
}
