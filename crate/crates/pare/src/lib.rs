//! Non-personalized top-N recommendation from predicted item popularity.
//!
//! The model predicts each item's next-period popularity from four signals
//! and fuses them with a learned attention vector:
//!
//! - popularity history: an exponential moving average of recent counts
//!   plus an LSTM-predicted trend,
//! - temporal impact: embeddings of the current period, the release
//!   period, and their difference,
//! - periodic impact: category-by-period-of-cycle embeddings,
//! - side information: embedded attribute sets such as directors or actors.
//!
//! Items are ranked by the fused prediction, evaluated with standard top-N
//! metrics against trailing-window most-popular baselines, and optionally
//! blended with an external personalized recommender's scores.
//!
//! Start with the runnable examples (`cargo run --example quickstart`);
//! each major capability has one. The `pare` binary wraps the same library
//! calls behind file-driven subcommands.

pub mod blend;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod metrics;
pub mod model;
pub mod numerics;
pub mod ranker;
pub mod synthetic;
pub mod trainer;

pub use error::{PareError, Result};
