//! Seeded synthetic corpora with planted dynamics: popularity that decays
//! with item age, sharp annual category spikes, a few stale blockbusters,
//! and late releases with little history. Data is generated as ordinary
//! interaction records and item lines, then assembled through the same
//! path as file ingestion.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::corpus::{Corpus, InteractionRecord, ItemCatalog, RawItem, DEFAULT_BIN_SECONDS};
use crate::error::{PareError, Result};

/// Shape of a generated corpus.
#[derive(Clone, Debug)]
pub struct SyntheticSpec {
    pub num_users: usize,
    pub num_items: usize,
    pub num_bins: usize,
    /// Cycle length of the planted category spikes.
    pub omega: usize,
    pub seed: u64,
    /// Expected distinct users for a typical item in its release bin.
    pub base_scale: f64,
    /// Per-bin popularity decay after release.
    pub decay: f64,
    /// Popularity multiplier when a category hits its peak period. The
    /// "holiday" category peaks exactly at the final bin's period.
    pub spike_multiplier: f64,
    /// Early releases with a large base and fast decay: hugely popular
    /// long ago, dead by the end (they mislead all-history baselines).
    pub num_classics: usize,
    /// Items released within the last three bins (little or no history).
    pub num_late: usize,
}

impl Default for SyntheticSpec {
    fn default() -> SyntheticSpec {
        SyntheticSpec {
            num_users: 200,
            num_items: 50,
            num_bins: 26,
            omega: 12,
            seed: 7,
            base_scale: 8.0,
            decay: 0.95,
            spike_multiplier: 4.0,
            num_classics: 8,
            num_late: 4,
        }
    }
}

/// Generated records, ready for assembly or for writing as data files.
#[derive(Clone, Debug)]
pub struct SyntheticData {
    pub interactions: Vec<InteractionRecord>,
    pub items: Vec<RawItem>,
    pub spec: SyntheticSpec,
}

const ORIGIN_TS: i64 = 1_000;

fn bin_start(bin: usize) -> i64 {
    ORIGIN_TS + (bin as i64 - 1) * DEFAULT_BIN_SECONDS
}

fn raw_item(id: &str, release_bin: usize, category: &str, brand: &str) -> RawItem {
    let mut attributes = BTreeMap::new();
    attributes.insert("categories".to_string(), vec![category.to_string()]);
    attributes.insert("brand".to_string(), vec![brand.to_string()]);
    RawItem {
        item_id: id.to_string(),
        release_ts: Some(bin_start(release_bin)),
        attributes,
    }
}

fn sample_users(rng: &mut StdRng, pool: usize, k: usize) -> BTreeSet<usize> {
    let k = k.min(pool);
    let mut chosen = BTreeSet::new();
    while chosen.len() < k {
        chosen.insert(rng.random_range(0..pool));
    }
    chosen
}

/// Generate interactions and items with the planted dynamics.
pub fn generate(spec: &SyntheticSpec) -> SyntheticData {
    let mut rng = StdRng::seed_from_u64(spec.seed);
    // The holiday cycle peaks at the final bin's period and the offseason
    // cycle one period earlier, so both held-out bins carry a surge that
    // is predictable only from the planted periodicity.
    let holiday_phase = (spec.num_bins - 1) % spec.omega;
    let offseason_phase = (spec.num_bins + spec.omega - 2) % spec.omega;
    let brands = ["brand_a", "brand_b", "brand_c"];

    struct ItemPlan {
        id: String,
        release_bin: usize,
        base: f64,
        decay: f64,
        phase: usize,
        category: &'static str,
    }

    // Classics carry their own category and a mid-training phase so their
    // large release bursts do not confound the held-out-bin spikes.
    let classic_phase = (holiday_phase + spec.omega / 2) % spec.omega;
    let mut plans = Vec::with_capacity(spec.num_items);
    let late_window = spec.num_bins.saturating_sub(3).max(1);
    for i in 0..spec.num_items {
        let id = format!("item_{i:03}");
        let plan = if i == 0 {
            // Item 0 anchors bin 1 so the generated bin grid matches the
            // corpus binning exactly.
            ItemPlan {
                id,
                release_bin: 1,
                base: spec.base_scale * 5.0,
                decay: 0.6,
                phase: classic_phase,
                category: "classic",
            }
        } else if i < spec.num_classics {
            ItemPlan {
                id,
                release_bin: 1 + rng.random_range(0..2),
                base: spec.base_scale * (4.0 + 2.0 * rng.random::<f64>()),
                decay: 0.6,
                phase: classic_phase,
                category: "classic",
            }
        } else if i >= spec.num_items - spec.num_late {
            let release_bin = late_window + rng.random_range(0..3).min(spec.num_bins - late_window);
            let holiday = rng.random::<f64>() < 0.5;
            ItemPlan {
                id,
                release_bin,
                base: spec.base_scale * (0.75 + 0.5 * rng.random::<f64>()),
                decay: spec.decay,
                phase: if holiday { holiday_phase } else { offseason_phase },
                category: if holiday { "holiday" } else { "offseason" },
            }
        } else {
            // Regular items release uniformly across the timeline so every
            // bin sees a mix of fresh and decayed items (stationary-ish
            // marginals, like a live catalog).
            let span = spec.num_bins.saturating_sub(2).max(1);
            let holiday = rng.random::<f64>() < 0.5;
            ItemPlan {
                id,
                release_bin: 1 + rng.random_range(0..span),
                base: spec.base_scale * (0.75 + 0.5 * rng.random::<f64>()),
                decay: spec.decay,
                phase: if holiday { holiday_phase } else { offseason_phase },
                category: if holiday { "holiday" } else { "offseason" },
            }
        };
        plans.push(plan);
    }

    let mut items = Vec::with_capacity(plans.len());
    let mut interactions = Vec::new();
    for (i, plan) in plans.iter().enumerate() {
        let brand = brands[i % brands.len()];
        // Brands carry real signal, the way a famous director lifts a
        // movie's draw.
        let brand_lift = match i % brands.len() {
            0 => 1.35,
            1 => 1.0,
            _ => 0.65,
        };
        items.push(raw_item(&plan.id, plan.release_bin, plan.category, brand));
        for bin in plan.release_bin..=spec.num_bins {
            let age = (bin - plan.release_bin) as f64;
            let mut rate = plan.base * brand_lift * plan.decay.powf(age);
            if (bin - 1) % spec.omega == plan.phase {
                rate *= spec.spike_multiplier;
            }
            let jitter = 0.85 + 0.3 * rng.random::<f64>();
            let count = (rate * jitter).round() as usize;
            for user in sample_users(&mut rng, spec.num_users, count) {
                let offset = rng.random_range(0..DEFAULT_BIN_SECONDS);
                interactions.push(InteractionRecord {
                    user_id: format!("u_{user:04}"),
                    item_id: plan.id.clone(),
                    timestamp: bin_start(bin) + offset,
                });
            }
        }
    }

    // Anchor the first and last bin boundaries.
    interactions.push(InteractionRecord {
        user_id: "u_0000".to_string(),
        item_id: "item_000".to_string(),
        timestamp: ORIGIN_TS,
    });
    interactions.push(InteractionRecord {
        user_id: "u_0001".to_string(),
        item_id: "item_000".to_string(),
        timestamp: bin_start(spec.num_bins),
    });

    SyntheticData {
        interactions,
        items,
        spec: spec.clone(),
    }
}

/// Side-info schema used by the generator.
pub fn schema() -> Vec<String> {
    vec!["categories".to_string(), "brand".to_string()]
}

/// Assemble a generated dataset through the standard corpus path.
pub fn build_corpus(data: &SyntheticData) -> Result<Corpus> {
    let catalog = ItemCatalog::from_raw(data.items.clone(), &schema())?;
    let corpus = Corpus::build(data.interactions.clone(), catalog, DEFAULT_BIN_SECONDS)?;
    if corpus.binning.num_bins != data.spec.num_bins {
        return Err(PareError::data(format!(
            "generated corpus spans {} bins, expected {}",
            corpus.binning.num_bins, data.spec.num_bins
        )));
    }
    Ok(corpus)
}

/// Convenience: generate and assemble in one step.
pub fn corpus(spec: &SyntheticSpec) -> Result<Corpus> {
    build_corpus(&generate(spec))
}

/// Write the dataset as the two standard input files and return their
/// paths (`interactions.csv`, `items.jsonl`).
pub fn write_dataset(data: &SyntheticData, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)
        .map_err(|e| PareError::data(format!("cannot create {}: {e}", dir.display())))?;
    let interactions_path = dir.join("interactions.csv");
    let mut text = String::from("user_id,item_id,timestamp\n");
    for rec in &data.interactions {
        text.push_str(&format!("{},{},{}\n", rec.user_id, rec.item_id, rec.timestamp));
    }
    fs::write(&interactions_path, text)
        .map_err(|e| PareError::data(format!("cannot write interactions: {e}")))?;

    let items_path = dir.join("items.jsonl");
    let mut text = String::new();
    for item in &data.items {
        text.push_str(&item.to_json_line());
        text.push('\n');
    }
    fs::write(&items_path, text)
        .map_err(|e| PareError::data(format!("cannot write items: {e}")))?;
    Ok((interactions_path, items_path))
}

/// Miniature corpus for gradient checking: 20 bins, six items with short
/// histories and small counts (so no gate saturates), three categories,
/// and two side-info fields.
pub fn mini_corpus(seed: u64) -> Result<Corpus> {
    let mut rng = StdRng::seed_from_u64(seed);
    let categories = ["c0", "c1", "c2"];
    let brands = ["b0", "b1"];
    let num_bins = 20usize;
    let mut items = Vec::new();
    let mut interactions = Vec::new();
    for i in 0..6 {
        let id = format!("m{i}");
        let release_bin = 12 + i;
        items.push(raw_item(
            &id,
            release_bin,
            categories[i % categories.len()],
            brands[i % brands.len()],
        ));
        for bin in release_bin..=num_bins {
            let count = rng.random_range(0..=2usize);
            for user in sample_users(&mut rng, 12, count) {
                let offset = rng.random_range(0..DEFAULT_BIN_SECONDS);
                interactions.push(InteractionRecord {
                    user_id: format!("u{user}"),
                    item_id: id.clone(),
                    timestamp: bin_start(bin) + offset,
                });
            }
        }
    }
    // Orphan pads fix the bin grid without touching any series.
    for bin in [1usize, num_bins] {
        interactions.push(InteractionRecord {
            user_id: "pad".to_string(),
            item_id: "_pad".to_string(),
            timestamp: bin_start(bin),
        });
    }
    let catalog = ItemCatalog::from_raw(items, &schema())?;
    let corpus = Corpus::build(interactions, catalog, DEFAULT_BIN_SECONDS)?;
    debug_assert_eq!(corpus.binning.num_bins, num_bins);
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let spec = SyntheticSpec {
            num_items: 10,
            num_bins: 14,
            ..SyntheticSpec::default()
        };
        let a = generate(&spec);
        let b = generate(&spec);
        assert_eq!(a.interactions, b.interactions);
        assert_eq!(a.items.len(), b.items.len());
    }

    #[test]
    fn corpus_matches_the_requested_shape() {
        let spec = SyntheticSpec::default();
        let corpus = corpus(&spec).unwrap();
        assert_eq!(corpus.binning.num_bins, spec.num_bins);
        assert_eq!(corpus.catalog.len(), spec.num_items);
        assert_eq!(corpus.catalog.num_categories(), 3);
        assert_eq!(corpus.orphan_count, 0);
        for series in corpus.series.values() {
            for &count in series.counts() {
                assert!((count as usize) <= spec.num_users);
            }
        }
    }

    #[test]
    fn planted_decay_shows_in_the_release_profile() {
        use crate::corpus::{popularity_profile, ProfileMode};
        let corpus = corpus(&SyntheticSpec::default()).unwrap();
        let profile = popularity_profile(&corpus, &ProfileMode::SinceRelease).unwrap();
        let early: f64 = profile[..3].iter().map(|(_, m)| m).sum::<f64>() / 3.0;
        let late: f64 = profile[8..14].iter().map(|(_, m)| m).sum::<f64>() / 6.0;
        assert!(
            early > 2.0 * late,
            "expected decaying profile, found early {early} vs late {late}"
        );
    }

    #[test]
    fn holiday_items_spike_at_their_phase() {
        let spec = SyntheticSpec::default();
        let corpus = corpus(&spec).unwrap();
        let holiday_phase = (spec.num_bins - 1) % spec.omega;
        let holiday_id = corpus
            .catalog
            .category_id("holiday")
            .expect("holiday category exists");
        let mut spike_total = 0.0;
        let mut spike_bins = 0usize;
        let mut quiet_total = 0.0;
        let mut quiet_bins = 0usize;
        for item in corpus.catalog.items() {
            if !item.categories().contains(&holiday_id) {
                continue;
            }
            let series = &corpus.series[&item.item_id];
            for bin in series.release_bin..=spec.num_bins {
                let value = series.count_at(bin) as f64;
                if (bin - 1) % spec.omega == holiday_phase {
                    spike_total += value;
                    spike_bins += 1;
                } else {
                    quiet_total += value;
                    quiet_bins += 1;
                }
            }
        }
        assert!(spike_bins > 0 && quiet_bins > 0);
        let spike_mean = spike_total / spike_bins as f64;
        let quiet_mean = quiet_total / quiet_bins as f64;
        assert!(
            spike_mean > 1.5 * quiet_mean,
            "expected spikes, found {spike_mean} vs {quiet_mean}"
        );
    }

    #[test]
    fn written_dataset_round_trips_through_ingestion() {
        use crate::corpus::{load_interactions, load_items, IngestMode};
        let spec = SyntheticSpec {
            num_items: 8,
            num_bins: 10,
            num_users: 30,
            ..SyntheticSpec::default()
        };
        let data = generate(&spec);
        let dir = tempfile::tempdir().unwrap();
        let (ipath, mpath) = write_dataset(&data, dir.path()).unwrap();
        let loaded = load_interactions(&ipath, IngestMode::Strict).unwrap();
        assert!(loaded.had_header);
        assert_eq!(loaded.records.len(), data.interactions.len());
        let catalog = load_items(&mpath, &schema()).unwrap();
        assert_eq!(catalog.len(), 8);
        let from_files =
            Corpus::build(loaded.records, catalog, DEFAULT_BIN_SECONDS).unwrap();
        let direct = build_corpus(&data).unwrap();
        assert_eq!(from_files.binning, direct.binning);
        for (id, series) in &direct.series {
            assert_eq!(series.counts(), from_files.series[id].counts());
        }
    }

    #[test]
    fn mini_corpus_has_the_gradcheck_shape() {
        let corpus = mini_corpus(3).unwrap();
        assert_eq!(corpus.binning.num_bins, 20);
        assert_eq!(corpus.catalog.num_categories(), 3);
        assert_eq!(corpus.catalog.vocab_sizes().len(), 2);
        assert_eq!(corpus.catalog.len(), 6);
        for series in corpus.series.values() {
            assert!(series.release_bin >= 12);
        }
    }
}
