//! Interaction ingestion, time binning, popularity series, and the global
//! time split.

mod ingest;
mod profile;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{PareError, Result};

pub use ingest::{load_interactions, load_items, IngestMode, LoadedInteractions, RawItem};
pub use profile::{calendar_month_of, popularity_profile, ProfileMode};

/// One observed (user, item, timestamp) event.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteractionRecord {
    pub user_id: String,
    pub item_id: String,
    /// Seconds since the Unix epoch; always positive.
    pub timestamp: i64,
}

/// Catalog entry for one item after vocabulary indexing.
///
/// `side_info[j]` holds the sorted attribute ids of side-info field `j`;
/// field 0 is always the category set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ItemRecord {
    pub item_id: String,
    pub release_ts: Option<i64>,
    pub side_info: Vec<Vec<u32>>,
}

impl ItemRecord {
    pub fn categories(&self) -> &[u32] {
        &self.side_info[0]
    }
}

/// One side-info field and its attribute vocabulary. Attribute ids are
/// positions in `terms`, assigned in order of first appearance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SideField {
    pub name: String,
    pub terms: Vec<String>,
}

impl SideField {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn id_of(&self, term: &str) -> Option<u32> {
        self.terms.iter().position(|t| t == term).map(|i| i as u32)
    }
}

/// All items plus the vocabularies of their side-info fields.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ItemCatalog {
    items: BTreeMap<String, ItemRecord>,
    index: BTreeMap<String, usize>,
    pub fields: Vec<SideField>,
    /// Items that came without a release timestamp (their release bin is
    /// backfilled from the first observed interaction).
    pub missing_release: u64,
}

impl ItemCatalog {
    /// Build a catalog from raw item records. `schema` names the side-info
    /// fields in order; the first must be `categories`.
    pub fn from_raw(raw: Vec<RawItem>, schema: &[String]) -> Result<ItemCatalog> {
        if schema.is_empty() || schema[0] != "categories" {
            return Err(PareError::data(
                "side-info schema must start with the `categories` field",
            ));
        }
        let mut fields: Vec<SideField> = schema
            .iter()
            .map(|name| SideField {
                name: name.clone(),
                terms: Vec::new(),
            })
            .collect();
        let mut term_ids: Vec<BTreeMap<String, u32>> = vec![BTreeMap::new(); schema.len()];
        let mut items: BTreeMap<String, ItemRecord> = BTreeMap::new();
        let mut missing_release = 0;

        for item in raw {
            if items.contains_key(&item.item_id) {
                return Err(PareError::data(format!(
                    "duplicate item id {}",
                    item.item_id
                )));
            }
            for key in item.attributes.keys() {
                if !schema.contains(key) {
                    return Err(PareError::data(format!(
                        "unknown side-info field `{key}` on item {}",
                        item.item_id
                    )));
                }
            }
            let mut side_info = Vec::with_capacity(schema.len());
            for (j, field_name) in schema.iter().enumerate() {
                let mut ids: Vec<u32> = Vec::new();
                if let Some(terms) = item.attributes.get(field_name) {
                    for term in terms {
                        let next = fields[j].terms.len() as u32;
                        let id = *term_ids[j].entry(term.clone()).or_insert_with(|| {
                            fields[j].terms.push(term.clone());
                            next
                        });
                        if !ids.contains(&id) {
                            ids.push(id);
                        }
                    }
                }
                ids.sort_unstable();
                side_info.push(ids);
            }
            if item.release_ts.is_none() {
                missing_release += 1;
            }
            items.insert(
                item.item_id.clone(),
                ItemRecord {
                    item_id: item.item_id,
                    release_ts: item.release_ts,
                    side_info,
                },
            );
        }

        let index = items
            .keys()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        Ok(ItemCatalog {
            items,
            index,
            fields,
            missing_release,
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, item_id: &str) -> Option<&ItemRecord> {
        self.items.get(item_id)
    }

    /// Dense item index (the row of the item embedding table).
    pub fn index_of(&self, item_id: &str) -> Option<usize> {
        self.index.get(item_id).copied()
    }

    pub fn items(&self) -> impl Iterator<Item = &ItemRecord> {
        self.items.values()
    }

    pub fn item_ids(&self) -> impl Iterator<Item = &str> {
        self.items.keys().map(|s| s.as_str())
    }

    pub fn num_categories(&self) -> usize {
        self.fields[0].terms.len()
    }

    /// Vocabulary size of every side-info field, categories first.
    pub fn vocab_sizes(&self) -> Vec<usize> {
        self.fields.iter().map(|f| f.terms.len()).collect()
    }

    pub fn category_id(&self, name: &str) -> Option<u32> {
        self.fields[0].id_of(name)
    }
}

/// Fixed-width time binning. Bin 1 starts at the earliest interaction in
/// the dataset; `bin_of` maps a timestamp to a 1-based bin index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeBinning {
    pub origin_ts: i64,
    pub bin_seconds: i64,
    pub num_bins: usize,
}

/// Thirty days, the default bin width.
pub const DEFAULT_BIN_SECONDS: i64 = 2_592_000;

impl TimeBinning {
    pub fn new(origin_ts: i64, bin_seconds: i64, num_bins: usize) -> Result<TimeBinning> {
        if bin_seconds <= 0 {
            return Err(PareError::data("bin_seconds must be positive"));
        }
        Ok(TimeBinning {
            origin_ts,
            bin_seconds,
            num_bins,
        })
    }

    /// 1-based bin of a timestamp, or None when it falls outside
    /// `[origin, origin + num_bins * bin_seconds)`.
    pub fn bin_of(&self, ts: i64) -> Option<usize> {
        if ts < self.origin_ts {
            return None;
        }
        let bin = ((ts - self.origin_ts) / self.bin_seconds) as usize + 1;
        if bin <= self.num_bins {
            Some(bin)
        } else {
            None
        }
    }

    /// Bin of a timestamp clamped into `[1, num_bins]`; used for release
    /// timestamps that precede or trail the interaction window.
    pub fn bin_of_clamped(&self, ts: i64) -> usize {
        if ts < self.origin_ts {
            return 1;
        }
        let bin = ((ts - self.origin_ts) / self.bin_seconds) as usize + 1;
        bin.min(self.num_bins)
    }

    /// Timestamp at which a bin starts.
    pub fn bin_start(&self, bin: usize) -> i64 {
        self.origin_ts + (bin as i64 - 1) * self.bin_seconds
    }
}

/// Global time split: last bin test, penultimate validation, remainder train.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_end_bin: usize,
    pub valid_bin: usize,
    pub test_bin: usize,
}

impl SplitSpec {
    pub fn from_binning(binning: &TimeBinning) -> Result<SplitSpec> {
        if binning.num_bins < 3 {
            return Err(PareError::data(format!(
                "cannot split {} bins into train/validation/test (need at least 3)",
                binning.num_bins
            )));
        }
        Ok(SplitSpec {
            train_end_bin: binning.num_bins - 2,
            valid_bin: binning.num_bins - 1,
            test_bin: binning.num_bins,
        })
    }
}

/// Popularity history of one item: the count of distinct users per bin
/// from its release bin through the final bin, zero-filled.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PopularitySeries {
    pub item_id: String,
    pub release_bin: usize,
    counts: Vec<u32>,
}

impl PopularitySeries {
    pub fn new(item_id: String, release_bin: usize, counts: Vec<u32>) -> PopularitySeries {
        PopularitySeries {
            item_id,
            release_bin,
            counts,
        }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Final bin covered by the series.
    pub fn last_bin(&self) -> usize {
        self.release_bin + self.counts.len() - 1
    }

    /// Distinct-user count in a bin; zero before release or past the end.
    pub fn count_at(&self, bin: usize) -> u32 {
        if bin < self.release_bin || bin > self.last_bin() {
            return 0;
        }
        self.counts[bin - self.release_bin]
    }

    /// History `[p_{t_r}, ..., p_{t-1}]` feeding a prediction at bin `t`.
    /// Empty when `t` equals the release bin (a cold item).
    pub fn history_until(&self, t: usize) -> Result<Vec<f64>> {
        if t < self.release_bin {
            return Err(PareError::data(format!(
                "item {} not yet released at bin {t} (release bin {})",
                self.item_id, self.release_bin
            )));
        }
        let end = (t - self.release_bin).min(self.counts.len());
        Ok(self.counts[..end].iter().map(|&c| c as f64).collect())
    }

    /// Sum of counts over the inclusive bin range, clipped to the series.
    pub fn window_sum(&self, from_bin: usize, to_bin: usize) -> u64 {
        let lo = from_bin.max(self.release_bin);
        let hi = to_bin.min(self.last_bin());
        if hi < lo {
            return 0;
        }
        self.counts[(lo - self.release_bin)..=(hi - self.release_bin)]
            .iter()
            .map(|&c| c as u64)
            .sum()
    }
}

/// Table-1-style corpus statistics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorpusStats {
    pub num_users: usize,
    pub num_items: usize,
    pub num_bins: usize,
    pub train_interactions: usize,
    pub valid_interactions: usize,
    pub test_interactions: usize,
    pub num_categories: usize,
    pub side_vocab_sizes: Vec<usize>,
    pub orphan_interactions: u64,
}

/// Fully assembled dataset: binning, catalog, per-item popularity series,
/// and the raw interactions they were derived from. Everything is immutable
/// after construction and safe to share across threads.
#[derive(Clone, Debug)]
pub struct Corpus {
    pub binning: TimeBinning,
    pub catalog: ItemCatalog,
    pub series: BTreeMap<String, PopularitySeries>,
    pub interactions: Vec<InteractionRecord>,
    /// Interactions whose item is absent from the catalog.
    pub orphan_count: u64,
    /// Catalog items with neither a release timestamp nor any interaction;
    /// they cannot be placed on the time axis and carry no series.
    pub unplaced_items: Vec<String>,
}

impl Corpus {
    /// Assemble a corpus from interactions and an item catalog.
    ///
    /// The bin origin is the earliest interaction timestamp and the final
    /// bin is the one containing the latest. Popularity counts distinct
    /// users per (item, bin); a repeated interaction by one user within a
    /// bin counts once. An item's release bin comes from its release
    /// timestamp (clamped into the bin range), falling back to its first
    /// interaction bin, and is clamped down if an interaction precedes it.
    pub fn build(
        interactions: Vec<InteractionRecord>,
        catalog: ItemCatalog,
        bin_seconds: i64,
    ) -> Result<Corpus> {
        if interactions.is_empty() {
            return Err(PareError::data("no interactions to build a corpus from"));
        }
        let origin = interactions.iter().map(|r| r.timestamp).min().unwrap();
        let latest = interactions.iter().map(|r| r.timestamp).max().unwrap();
        if bin_seconds <= 0 {
            return Err(PareError::data("bin_seconds must be positive"));
        }
        let num_bins = ((latest - origin) / bin_seconds) as usize + 1;
        let binning = TimeBinning::new(origin, bin_seconds, num_bins)?;

        // Distinct users per (item, bin).
        let mut per_item: BTreeMap<&str, BTreeMap<usize, HashSet<&str>>> = BTreeMap::new();
        let mut orphan_count = 0u64;
        for rec in &interactions {
            if catalog.get(&rec.item_id).is_none() {
                orphan_count += 1;
                continue;
            }
            let bin = binning
                .bin_of(rec.timestamp)
                .expect("interaction timestamps define the bin range");
            per_item
                .entry(rec.item_id.as_str())
                .or_default()
                .entry(bin)
                .or_default()
                .insert(rec.user_id.as_str());
        }

        let mut series = BTreeMap::new();
        let mut unplaced_items = Vec::new();
        for item in catalog.items() {
            let bins = per_item.get(item.item_id.as_str());
            let first_interaction_bin = bins.and_then(|b| b.keys().next().copied());
            let release_bin = match (item.release_ts, first_interaction_bin) {
                (Some(ts), Some(first)) => binning.bin_of_clamped(ts).min(first),
                (Some(ts), None) => binning.bin_of_clamped(ts),
                (None, Some(first)) => first,
                (None, None) => {
                    unplaced_items.push(item.item_id.clone());
                    continue;
                }
            };
            let mut counts = vec![0u32; num_bins - release_bin + 1];
            if let Some(bins) = bins {
                for (&bin, users) in bins {
                    counts[bin - release_bin] = users.len() as u32;
                }
            }
            series.insert(
                item.item_id.clone(),
                PopularitySeries::new(item.item_id.clone(), release_bin, counts),
            );
        }

        Ok(Corpus {
            binning,
            catalog,
            series,
            interactions,
            orphan_count,
            unplaced_items,
        })
    }

    pub fn split(&self) -> Result<SplitSpec> {
        SplitSpec::from_binning(&self.binning)
    }

    /// Per-split interaction counts and vocabulary sizes.
    pub fn stats(&self) -> Result<CorpusStats> {
        let split = self.split()?;
        let mut users: BTreeSet<&str> = BTreeSet::new();
        let mut train = 0;
        let mut valid = 0;
        let mut test = 0;
        for rec in &self.interactions {
            users.insert(rec.user_id.as_str());
            let bin = self
                .binning
                .bin_of(rec.timestamp)
                .expect("interactions lie inside the bin range");
            if bin <= split.train_end_bin {
                train += 1;
            } else if bin == split.valid_bin {
                valid += 1;
            } else {
                test += 1;
            }
        }
        Ok(CorpusStats {
            num_users: users.len(),
            num_items: self.catalog.len(),
            num_bins: self.binning.num_bins,
            train_interactions: train,
            valid_interactions: valid,
            test_interactions: test,
            num_categories: self.catalog.num_categories(),
            side_vocab_sizes: self.catalog.vocab_sizes(),
            orphan_interactions: self.orphan_count,
        })
    }

    /// Users mapped to the distinct items they touched in `bin`.
    pub fn interactions_in_bin(&self, bin: usize) -> BTreeMap<String, BTreeSet<String>> {
        let mut by_user: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for rec in &self.interactions {
            if self.binning.bin_of(rec.timestamp) == Some(bin)
                && self.catalog.get(&rec.item_id).is_some()
            {
                by_user
                    .entry(rec.user_id.clone())
                    .or_default()
                    .insert(rec.item_id.clone());
            }
        }
        by_user
    }

    /// Users mapped to every item they touched strictly before `bin`.
    pub fn seen_before_bin(&self, bin: usize) -> BTreeMap<String, BTreeSet<String>> {
        let mut by_user: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for rec in &self.interactions {
            if let Some(b) = self.binning.bin_of(rec.timestamp) {
                if b < bin && self.catalog.get(&rec.item_id).is_some() {
                    by_user
                        .entry(rec.user_id.clone())
                        .or_default()
                        .insert(rec.item_id.clone());
                }
            }
        }
        by_user
    }
}
