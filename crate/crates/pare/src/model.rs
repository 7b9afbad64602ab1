//! The popularity predictor: four heads over an item's history, release
//! distance, category period, and side information, fused by a learned
//! attention vector that is positive and sums to one by construction.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{PareError, Result};
use crate::numerics::{
    lstm_sequence, Activation, LstmParamIds, NodeId, ParamStore, Tape, Tensor,
};

/// The four prediction heads.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Head {
    History,
    Temporal,
    Periodic,
    Side,
}

impl Head {
    pub const ALL: [Head; 4] = [Head::History, Head::Temporal, Head::Periodic, Head::Side];

    pub fn letter(self) -> char {
        match self {
            Head::History => 'H',
            Head::Temporal => 'T',
            Head::Periodic => 'P',
            Head::Side => 'S',
        }
    }

    fn index(self) -> usize {
        match self {
            Head::History => 0,
            Head::Temporal => 1,
            Head::Periodic => 2,
            Head::Side => 3,
        }
    }
}

/// Enabled subset of the four heads. Must be non-empty and include either
/// the history or the temporal head.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct HeadSet {
    bits: u8,
}

impl HeadSet {
    pub fn all() -> HeadSet {
        HeadSet { bits: 0b1111 }
    }

    pub fn from_heads(heads: &[Head]) -> Result<HeadSet> {
        let mut bits = 0u8;
        for h in heads {
            bits |= 1 << h.index();
        }
        let set = HeadSet { bits };
        set.validate()?;
        Ok(set)
    }

    /// Parse a comma- or plus-separated list of head letters, e.g. `H,T,P`.
    pub fn parse(text: &str) -> Result<HeadSet> {
        let mut heads = Vec::new();
        for part in text.split([',', '+']) {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let head = match part.to_ascii_uppercase().as_str() {
                "H" => Head::History,
                "T" => Head::Temporal,
                "P" => Head::Periodic,
                "S" => Head::Side,
                other => {
                    return Err(PareError::usage(format!(
                        "unknown head `{other}` (expected H, T, P, or S)"
                    )))
                }
            };
            heads.push(head);
        }
        HeadSet::from_heads(&heads)
    }

    fn validate(self) -> Result<()> {
        if self.bits == 0 {
            return Err(PareError::usage("at least one head must be enabled"));
        }
        if !self.contains(Head::History) && !self.contains(Head::Temporal) {
            return Err(PareError::usage("the enabled heads must include H or T"));
        }
        Ok(())
    }

    pub fn contains(self, head: Head) -> bool {
        self.bits & (1 << head.index()) != 0
    }

    /// Enabled heads in canonical order H, T, P, S.
    pub fn iter(self) -> impl Iterator<Item = Head> {
        Head::ALL.into_iter().filter(move |h| self.contains(*h))
    }

    pub fn len(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }
}

impl std::fmt::Display for HeadSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let letters: Vec<String> = self.iter().map(|h| h.letter().to_string()).collect();
        write!(f, "{}", letters.join("+"))
    }
}

impl From<HeadSet> for String {
    fn from(set: HeadSet) -> String {
        set.to_string()
    }
}

impl TryFrom<String> for HeadSet {
    type Error = PareError;

    fn try_from(text: String) -> Result<HeadSet> {
        HeadSet::parse(&text)
    }
}

/// How the periodic head maps a bin to its position within the cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodMode {
    /// `(bin - 1) mod omega` on bin indices (the default).
    BinModulo,
    /// Calendar month of the bin's start timestamp; requires `omega = 12`.
    CalendarMonth,
}

/// Model hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PareConfig {
    /// Embedding size `d`.
    pub embedding_dim: usize,
    /// Moving-average coefficient; higher weights recent popularity more.
    pub alpha: f64,
    /// Cycle length of the periodic head.
    pub omega: usize,
    pub lstm_hidden: usize,
    pub heads: HeadSet,
    pub period_mode: PeriodMode,
}

impl Default for PareConfig {
    fn default() -> PareConfig {
        PareConfig {
            embedding_dim: 64,
            alpha: 0.5,
            omega: 12,
            lstm_hidden: 64,
            heads: HeadSet::all(),
            period_mode: PeriodMode::BinModulo,
        }
    }
}

impl PareConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(PareError::usage(format!(
                "alpha must lie in [0, 1], found {}",
                self.alpha
            )));
        }
        if self.omega == 0 {
            return Err(PareError::usage("omega must be at least 1"));
        }
        if self.embedding_dim == 0 {
            return Err(PareError::usage("embedding_dim must be at least 1"));
        }
        if self.lstm_hidden == 0 {
            return Err(PareError::usage("lstm_hidden must be at least 1"));
        }
        if self.period_mode == PeriodMode::CalendarMonth && self.omega != 12 {
            return Err(PareError::usage("calendar period mode requires omega = 12"));
        }
        self.heads.validate()
    }
}

/// Vocabulary sizes the parameter tables are shaped by.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    /// Number of time bins; the shared time table has `num_bins + 1` rows
    /// so bin indices address it directly (row 0 unused). The final bin's
    /// row is never a training target and keeps its initialization.
    pub num_bins: usize,
    pub num_items: usize,
    pub num_categories: usize,
    /// One vocabulary size per side-info field, categories first.
    pub side_vocab_sizes: Vec<usize>,
}

impl ModelDims {
    pub fn from_corpus(corpus: &Corpus) -> ModelDims {
        ModelDims {
            num_bins: corpus.binning.num_bins,
            num_items: corpus.catalog.len(),
            num_categories: corpus.catalog.num_categories(),
            side_vocab_sizes: corpus.catalog.vocab_sizes(),
        }
    }

    pub fn num_side_fields(&self) -> usize {
        self.side_vocab_sizes.len()
    }
}

/// Exponential moving average of a popularity history, most recent last.
///
/// The average starts at the first observed count and each later count
/// enters with weight `alpha`. An empty history (a cold item) yields zero;
/// `alpha = 1` returns the latest count, `alpha = 0` the count at release.
pub fn ema(history: &[f64], alpha: f64) -> f64 {
    match history.first() {
        None => 0.0,
        Some(&first) => history[1..]
            .iter()
            .fold(first, |acc, &p| alpha * p + (1.0 - alpha) * acc),
    }
}

/// Everything the model needs to score one item at one target bin.
#[derive(Clone, Debug)]
pub struct ItemInput {
    pub item_id: String,
    pub item_index: usize,
    pub release_bin: usize,
    pub target_bin: usize,
    /// Popularity counts from the release bin through `target_bin - 1`.
    pub history: Vec<f64>,
    pub side_info: Vec<Vec<u32>>,
    pub period_index: usize,
}

/// Per-head predictions for one item, plus the fused score and the
/// attention weights in head order H, T, P, S (zero where disabled).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionBreakdown {
    pub item_id: String,
    pub y_status: f64,
    pub y_trend: f64,
    pub y_history: f64,
    pub y_temporal: f64,
    pub y_periodic: f64,
    pub y_side: f64,
    pub y_fused: f64,
    pub attention: [f64; 4],
}

impl PredictionBreakdown {
    pub fn csv_header() -> &'static str {
        "item_id,y_H,y_T,y_P,y_S,y_F,a_1,a_2,a_3,a_4"
    }

    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.item_id,
            self.y_history,
            self.y_temporal,
            self.y_periodic,
            self.y_side,
            self.y_fused,
            self.attention[0],
            self.attention[1],
            self.attention[2],
            self.attention[3],
        )
    }
}

/// Tape nodes produced by one forward pass.
pub struct HeadNodes {
    /// Moving-average estimate entering the history head (a data constant).
    pub status: f64,
    /// Per-head output nodes in order H, T, P, S; None when disabled.
    pub outputs: [Option<NodeId>; 4],
    /// Fused prediction.
    pub fused: NodeId,
    /// Softmax over the enabled heads' logits, in enabled order.
    pub attention: NodeId,
}

/// Parameter leaves bound onto a tape for one batch.
pub struct BoundParams {
    time_table: NodeId,
    item_table: NodeId,
    periodic_table: NodeId,
    side_tables: Vec<NodeId>,
    lstm: LstmParamIds,
    w_history: NodeId,
    b_history: NodeId,
    w_temporal: NodeId,
    b_temporal: NodeId,
    w_periodic: NodeId,
    b_periodic: NodeId,
    w_side: NodeId,
    b_side: NodeId,
    logits: NodeId,
}

/// The popularity model: parameter store plus the forward composition.
#[derive(Clone, Debug)]
pub struct PareModel {
    pub config: PareConfig,
    pub dims: ModelDims,
    pub store: ParamStore,
}

impl PareModel {
    /// Initialize parameters: affine weights Xavier-uniform, biases zero
    /// (LSTM forget-gate bias 1), embeddings uniform in ±0.01, fusion
    /// logits zero so the initial attention is equal.
    pub fn new(dims: ModelDims, config: PareConfig, seed: u64) -> Result<PareModel> {
        config.validate()?;
        if dims.side_vocab_sizes.is_empty() {
            return Err(PareError::data(
                "at least one side-info field (categories) is required",
            ));
        }
        if dims.side_vocab_sizes[0] != dims.num_categories {
            return Err(PareError::data(
                "side-info field 0 must be the category vocabulary",
            ));
        }
        let mut rng = StdRng::seed_from_u64(seed);
        let d = config.embedding_dim;
        let h = config.lstm_hidden;
        let mut store = ParamStore::new();

        let embedding = |rng: &mut StdRng, rows: usize, cols: usize| {
            let data = (0..rows * cols)
                .map(|_| (rng.random::<f64>() * 2.0 - 1.0) * 0.01)
                .collect();
            Tensor::from_vec(&[rows, cols], data)
        };
        let xavier = |rng: &mut StdRng, rows: usize, cols: usize| {
            let limit = (6.0 / (rows + cols) as f64).sqrt();
            let data = (0..rows * cols)
                .map(|_| (rng.random::<f64>() * 2.0 - 1.0) * limit)
                .collect();
            Tensor::from_vec(&[rows, cols], data)
        };

        store.register("embed.time", embedding(&mut rng, dims.num_bins + 1, d)?, true)?;
        store.register("embed.item", embedding(&mut rng, dims.num_items, d)?, true)?;
        store.register(
            "embed.periodic",
            embedding(&mut rng, config.omega * dims.num_categories, d)?,
            true,
        )?;
        for (j, &q) in dims.side_vocab_sizes.iter().enumerate() {
            store.register(&format!("embed.side.{j}"), embedding(&mut rng, q, d)?, true)?;
        }

        for gate in ["input", "forget", "cell", "output"] {
            store.register(&format!("lstm.w_{gate}"), xavier(&mut rng, 1 + h, h)?, true)?;
            let mut bias = Tensor::zeros(&[h]);
            if gate == "forget" {
                bias.fill(1.0);
            }
            store.register(&format!("lstm.b_{gate}"), bias, false)?;
        }

        store.register("head_history.w", xavier(&mut rng, h, 1)?, true)?;
        store.register("head_history.b", Tensor::zeros(&[1]), false)?;
        store.register("head_temporal.w", xavier(&mut rng, 4 * d, 1)?, true)?;
        store.register("head_temporal.b", Tensor::zeros(&[1]), false)?;
        store.register("head_periodic.w", xavier(&mut rng, d, 1)?, true)?;
        store.register("head_periodic.b", Tensor::zeros(&[1]), false)?;
        let m = dims.num_side_fields();
        store.register("head_side.w", xavier(&mut rng, m * d, 1)?, true)?;
        store.register("head_side.b", Tensor::zeros(&[1]), false)?;
        store.register("fusion.logits", Tensor::zeros(&[4]), false)?;

        Ok(PareModel {
            config,
            dims,
            store,
        })
    }

    pub fn from_corpus(corpus: &Corpus, config: PareConfig, seed: u64) -> Result<PareModel> {
        PareModel::new(ModelDims::from_corpus(corpus), config, seed)
    }

    /// Overwrite every parameter with uniform values in `±limit`
    /// (`±lstm_limit` for the recurrent weights and biases).
    ///
    /// Gradient checks run at such generic points rather than at the
    /// training initialization, where near-zero embeddings drive many
    /// gradients below what central differences can resolve.
    pub fn randomize_uniform(&mut self, limit: f64, lstm_limit: f64, seed: u64) {
        let mut rng = StdRng::seed_from_u64(seed);
        let names: Vec<String> = self.store.names().map(|s| s.to_string()).collect();
        for name in names {
            let scale = if name.starts_with("lstm.") {
                lstm_limit
            } else {
                limit
            };
            let tensor = self.store.value_mut(&name).expect("name comes from the store");
            for v in tensor.data_mut() {
                *v = (rng.random::<f64>() * 2.0 - 1.0) * scale;
            }
        }
    }

    /// Position within the periodic cycle for a target bin.
    pub fn period_index(&self, corpus: &Corpus, target_bin: usize) -> usize {
        match self.config.period_mode {
            PeriodMode::BinModulo => (target_bin - 1) % self.config.omega,
            PeriodMode::CalendarMonth => {
                let ts = corpus.binning.bin_start(target_bin);
                let (_, month) = crate::corpus::calendar_month_of(ts);
                (month - 1) as usize
            }
        }
    }

    /// Resolve the model inputs for one item at one target bin.
    ///
    /// The history always runs from the release bin through `target_bin - 1`
    /// (empty for an item released at the target bin), so training targets,
    /// validation targets, and test-time predictions each see exactly the
    /// data available before their bin.
    pub fn input_for(
        &self,
        corpus: &Corpus,
        item_id: &str,
        target_bin: usize,
    ) -> Result<ItemInput> {
        let series = corpus
            .series
            .get(item_id)
            .ok_or_else(|| PareError::data(format!("item {item_id} has no popularity series")))?;
        let record = corpus
            .catalog
            .get(item_id)
            .ok_or_else(|| PareError::data(format!("item {item_id} not in catalog")))?;
        let item_index = corpus
            .catalog
            .index_of(item_id)
            .expect("catalog items always carry an index");
        if target_bin < series.release_bin {
            return Err(PareError::data(format!(
                "item {item_id} not yet released at bin {target_bin} (release bin {})",
                series.release_bin
            )));
        }
        if target_bin > self.dims.num_bins {
            return Err(PareError::data(format!(
                "bin {target_bin} outside the time table (1..={})",
                self.dims.num_bins
            )));
        }
        Ok(ItemInput {
            item_id: item_id.to_string(),
            item_index,
            release_bin: series.release_bin,
            target_bin,
            history: series.history_until(target_bin)?,
            side_info: record.side_info.clone(),
            period_index: self.period_index(corpus, target_bin),
        })
    }

    /// Bind every parameter as a leaf on the tape (once per batch).
    pub fn bind(&self, tape: &mut Tape) -> Result<BoundParams> {
        let side_tables = (0..self.dims.num_side_fields())
            .map(|j| tape.param(&self.store, &format!("embed.side.{j}")))
            .collect::<Result<Vec<_>>>()?;
        Ok(BoundParams {
            time_table: tape.param(&self.store, "embed.time")?,
            item_table: tape.param(&self.store, "embed.item")?,
            periodic_table: tape.param(&self.store, "embed.periodic")?,
            side_tables,
            lstm: LstmParamIds {
                w_input: tape.param(&self.store, "lstm.w_input")?,
                b_input: tape.param(&self.store, "lstm.b_input")?,
                w_forget: tape.param(&self.store, "lstm.w_forget")?,
                b_forget: tape.param(&self.store, "lstm.b_forget")?,
                w_cell: tape.param(&self.store, "lstm.w_cell")?,
                b_cell: tape.param(&self.store, "lstm.b_cell")?,
                w_output: tape.param(&self.store, "lstm.w_output")?,
                b_output: tape.param(&self.store, "lstm.b_output")?,
            },
            w_history: tape.param(&self.store, "head_history.w")?,
            b_history: tape.param(&self.store, "head_history.b")?,
            w_temporal: tape.param(&self.store, "head_temporal.w")?,
            b_temporal: tape.param(&self.store, "head_temporal.b")?,
            w_periodic: tape.param(&self.store, "head_periodic.w")?,
            b_periodic: tape.param(&self.store, "head_periodic.b")?,
            w_side: tape.param(&self.store, "head_side.w")?,
            b_side: tape.param(&self.store, "head_side.b")?,
            logits: tape.param(&self.store, "fusion.logits")?,
        })
    }

    /// History head: moving-average status plus the LSTM trend read from
    /// the final hidden state. A cold item contributes zero status and a
    /// zero hidden state, leaving only the trend bias.
    fn head_history(
        &self,
        tape: &mut Tape,
        bound: &BoundParams,
        input: &ItemInput,
    ) -> Result<(f64, NodeId)> {
        let status = ema(&input.history, self.config.alpha);
        let hidden = lstm_sequence(tape, &input.history, self.config.lstm_hidden, &bound.lstm)?;
        let trend = tape.affine(hidden, bound.w_history, bound.b_history, Activation::None)?;
        let status_node = tape.scalar_input(status);
        let combined = tape.add(status_node, trend)?;
        Ok((status, combined))
    }

    /// Temporal head over the concatenation `[e_T, e_{t_r}, e_T - e_{t_r},
    /// e_item]`, in that order.
    fn head_temporal(
        &self,
        tape: &mut Tape,
        bound: &BoundParams,
        input: &ItemInput,
    ) -> Result<NodeId> {
        if input.item_index >= self.dims.num_items {
            return Err(PareError::data(format!(
                "item index {} outside the item table ({} items)",
                input.item_index, self.dims.num_items
            )));
        }
        let e_t = tape.embed_sum(bound.time_table, &[input.target_bin])?;
        let e_release = tape.embed_sum(bound.time_table, &[input.release_bin])?;
        let e_dis = tape.sub(e_t, e_release)?;
        let e_item = tape.embed_sum(bound.item_table, &[input.item_index])?;
        let features = tape.concat(&[e_t, e_release, e_dis, e_item])?;
        tape.affine(features, bound.w_temporal, bound.b_temporal, Activation::Relu)
    }

    /// Periodic head: the item's categories select rows of the
    /// `omega * C` table at the current period offset. The selector is the
    /// flattened category-major outer product, so category `c` at period
    /// `j` addresses flat row `c * omega + j`.
    fn head_periodic(
        &self,
        tape: &mut Tape,
        bound: &BoundParams,
        input: &ItemInput,
    ) -> Result<NodeId> {
        if self.dims.num_categories == 0 {
            return Err(PareError::data(
                "periodic head requires a non-empty category vocabulary",
            ));
        }
        if input.side_info.is_empty() {
            return Err(PareError::data("item input carries no category field"));
        }
        let rows: Vec<usize> = input.side_info[0]
            .iter()
            .map(|&c| c as usize * self.config.omega + input.period_index)
            .collect();
        let e_p = tape.embed_sum(bound.periodic_table, &rows)?;
        tape.affine(e_p, bound.w_periodic, bound.b_periodic, Activation::Relu)
    }

    /// Side-information head over the concatenated embedded attribute sets.
    /// An item with all-empty side info reduces to `relu(b)`.
    fn head_side(&self, tape: &mut Tape, bound: &BoundParams, input: &ItemInput) -> Result<NodeId> {
        let m = self.dims.num_side_fields();
        if input.side_info.len() != m {
            return Err(PareError::data(format!(
                "expected {m} side-info fields, found {}",
                input.side_info.len()
            )));
        }
        let mut parts = Vec::with_capacity(m);
        for (j, attrs) in input.side_info.iter().enumerate() {
            let rows: Vec<usize> = attrs.iter().map(|&a| a as usize).collect();
            parts.push(tape.embed_sum(bound.side_tables[j], &rows)?);
        }
        let features = tape.concat(&parts)?;
        tape.affine(features, bound.w_side, bound.b_side, Activation::Relu)
    }

    /// Run the enabled heads and fuse them with attention weights drawn
    /// from a softmax over the enabled fusion logits (disabled heads
    /// contribute nothing and their logits are masked out).
    pub fn forward(
        &self,
        tape: &mut Tape,
        bound: &BoundParams,
        input: &ItemInput,
    ) -> Result<HeadNodes> {
        let heads = self.config.heads;
        if heads.is_empty() {
            return Err(PareError::usage("all heads disabled"));
        }
        let mut status = 0.0;
        let mut outputs: [Option<NodeId>; 4] = [None; 4];
        for head in heads.iter() {
            let node = match head {
                Head::History => {
                    let (s, node) = self.head_history(tape, bound, input)?;
                    status = s;
                    node
                }
                Head::Temporal => self.head_temporal(tape, bound, input)?,
                Head::Periodic => self.head_periodic(tape, bound, input)?,
                Head::Side => self.head_side(tape, bound, input)?,
            };
            outputs[head.index()] = Some(node);
        }

        let enabled: Vec<usize> = heads.iter().map(|h| h.index()).collect();
        let logits = tape.gather(bound.logits, &enabled)?;
        let attention = tape.softmax(logits)?;
        let head_nodes: Vec<NodeId> = enabled
            .iter()
            .map(|&i| outputs[i].expect("enabled heads were just computed"))
            .collect();
        let head_vec = tape.concat(&head_nodes)?;
        let fused = tape.dot(head_vec, attention)?;
        Ok(HeadNodes {
            status,
            outputs,
            fused,
            attention,
        })
    }

    /// Training objective for one example: the squared error of every
    /// enabled head plus the fused prediction against the target count.
    pub fn example_loss(
        &self,
        tape: &mut Tape,
        bound: &BoundParams,
        input: &ItemInput,
        target: f64,
    ) -> Result<NodeId> {
        let heads = self.forward(tape, bound, input)?;
        let mut terms = Vec::with_capacity(5);
        for node in heads.outputs.iter().flatten() {
            terms.push(tape.squared_error(*node, target)?);
        }
        terms.push(tape.squared_error(heads.fused, target)?);
        tape.sum(&terms)
    }

    /// Attention weights in head order H, T, P, S, zero where disabled.
    pub fn attention_weights(&self, tape: &Tape, heads: &HeadNodes) -> [f64; 4] {
        let mut full = [0.0; 4];
        let values = tape.value(heads.attention).data();
        for (slot, head) in self.config.heads.iter().enumerate() {
            full[head.index()] = values[slot];
        }
        full
    }

    /// Score one item at one bin, reporting every head and the attention.
    pub fn predict(
        &self,
        corpus: &Corpus,
        item_id: &str,
        target_bin: usize,
    ) -> Result<PredictionBreakdown> {
        let mut tape = Tape::new();
        let bound = self.bind(&mut tape)?;
        self.predict_on(&mut tape, &bound, corpus, item_id, target_bin)
    }

    /// Breakdown for every item released by `target_bin`, sharing one
    /// parameter binding across all forward passes.
    pub fn predict_all(&self, corpus: &Corpus, target_bin: usize) -> Result<Vec<PredictionBreakdown>> {
        let mut tape = Tape::new();
        let bound = self.bind(&mut tape)?;
        let mut out = Vec::new();
        for (item_id, series) in &corpus.series {
            if series.release_bin > target_bin {
                continue;
            }
            out.push(self.predict_on(&mut tape, &bound, corpus, item_id, target_bin)?);
        }
        Ok(out)
    }

    fn predict_on(
        &self,
        tape: &mut Tape,
        bound: &BoundParams,
        corpus: &Corpus,
        item_id: &str,
        target_bin: usize,
    ) -> Result<PredictionBreakdown> {
        let input = self.input_for(corpus, item_id, target_bin)?;
        let heads = self.forward(tape, bound, &input)?;
        let read = |node: Option<NodeId>| -> Result<f64> {
            node.map(|n| tape.scalar(n))
                .transpose()
                .map(|v| v.unwrap_or(0.0))
        };
        let y_history = read(heads.outputs[0])?;
        let y_temporal = read(heads.outputs[1])?;
        let y_periodic = read(heads.outputs[2])?;
        let y_side = read(heads.outputs[3])?;
        let y_fused = tape.scalar(heads.fused)?;
        let attention = self.attention_weights(tape, &heads);
        Ok(PredictionBreakdown {
            item_id: item_id.to_string(),
            y_status: heads.status,
            y_trend: y_history - heads.status,
            y_history,
            y_temporal,
            y_periodic,
            y_side,
            y_fused,
            attention,
        })
    }
}
