use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{PareError, Result};
use crate::model::{ModelDims, PareConfig, PareModel};
use crate::numerics::Tensor;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    version: u32,
    config: PareConfig,
    dims: ModelDims,
    params: BTreeMap<String, Tensor>,
}

/// Write the model as versioned JSON: config, vocabulary sizes, and every
/// parameter tensor. 64-bit values round-trip bit-exactly.
pub fn save_checkpoint(model: &PareModel, path: &Path) -> Result<()> {
    let mut params = BTreeMap::new();
    for (name, param) in model.store.iter() {
        if !param.value.all_finite() {
            return Err(PareError::numeric(format!(
                "refusing to checkpoint non-finite parameter {name}"
            )));
        }
        params.insert(name.clone(), param.value.clone());
    }
    let file = CheckpointFile {
        version: CHECKPOINT_VERSION,
        config: model.config,
        dims: model.dims.clone(),
        params,
    };
    let text = serde_json::to_string(&file)
        .map_err(|e| PareError::data(format!("cannot serialize checkpoint: {e}")))?;
    fs::write(path, text).map_err(|e| {
        PareError::data(format!("cannot write checkpoint {}: {e}", path.display()))
    })
}

/// Load a checkpoint into a freshly laid-out model. Fails without partial
/// state on version mismatch, unknown or missing parameters, or any shape
/// that disagrees with the recorded vocabulary sizes.
pub fn load_checkpoint(path: &Path) -> Result<PareModel> {
    let text = fs::read_to_string(path).map_err(|e| {
        PareError::data(format!("cannot read checkpoint {}: {e}", path.display()))
    })?;
    let file: CheckpointFile = serde_json::from_str(&text).map_err(|e| {
        PareError::data(format!("checkpoint {} is corrupt: {e}", path.display()))
    })?;
    if file.version != CHECKPOINT_VERSION {
        return Err(PareError::data(format!(
            "checkpoint version {} unsupported (expected {CHECKPOINT_VERSION})",
            file.version
        )));
    }
    // Lay out the canonical store for these dims, then overwrite every
    // value; any naming or shape drift surfaces here.
    let mut model = PareModel::new(file.dims, file.config, 0)?;
    if file.params.len() != model.store.len() {
        return Err(PareError::data(format!(
            "checkpoint holds {} parameters, model expects {}",
            file.params.len(),
            model.store.len()
        )));
    }
    for (name, tensor) in file.params {
        let slot = model.store.value_mut(&name).map_err(|_| {
            PareError::data(format!("checkpoint carries unknown parameter {name}"))
        })?;
        if slot.shape() != tensor.shape() {
            return Err(PareError::data(format!(
                "checkpoint parameter {name} has shape {}, expected {}",
                tensor.shape_string(),
                slot.shape_string()
            )));
        }
        *slot = tensor;
    }
    Ok(model)
}

/// Check a loaded model against the vocabularies of the corpus it is about
/// to score, naming every table whose shape cannot match.
pub fn validate_dims(model: &PareModel, expected: &ModelDims) -> Result<()> {
    let dims = &model.dims;
    let mut offending = Vec::new();
    if dims.num_bins != expected.num_bins {
        offending.push(format!(
            "embed.time ({} vs {} bins)",
            dims.num_bins, expected.num_bins
        ));
    }
    if dims.num_items != expected.num_items {
        offending.push(format!(
            "embed.item ({} vs {} items)",
            dims.num_items, expected.num_items
        ));
    }
    if dims.num_categories != expected.num_categories {
        offending.push(format!(
            "embed.periodic ({} vs {} categories)",
            dims.num_categories, expected.num_categories
        ));
    }
    if dims.side_vocab_sizes != expected.side_vocab_sizes {
        offending.push(format!(
            "side-info tables ({:?} vs {:?})",
            dims.side_vocab_sizes, expected.side_vocab_sizes
        ));
    }
    if offending.is_empty() {
        Ok(())
    } else {
        Err(PareError::data(format!(
            "checkpoint shaped for different vocabularies: {}",
            offending.join(", ")
        )))
    }
}
