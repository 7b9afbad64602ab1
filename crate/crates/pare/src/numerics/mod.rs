//! Minimal dense numeric kernel with exact reverse-mode gradients.
//!
//! Everything runs on 64-bit floats. Forward passes are recorded on a
//! [`Tape`]; `Tape::backward` accumulates exact gradients into a
//! [`ParamStore`], which [`AdamState`] then consumes. The
//! [`gradient_check`] harness validates any model closure against central
//! finite differences.
//!
//! Forward passes borrow parameters immutably and may run concurrently;
//! gradient accumulation and optimizer steps take `&mut ParamStore`, so
//! the single-writer rule is enforced by the borrow checker.

mod adam;
mod gradcheck;
mod params;
mod tape;
mod tensor;

pub use adam::{AdamConfig, AdamState};
pub use gradcheck::{
    check_against, gradient_check, relative_error, GradCheckEntry, GradCheckReport,
};
pub use params::{Param, ParamStore};
pub use tape::{lstm_sequence, Activation, LstmParamIds, NodeId, Tape};
pub use tensor::Tensor;
