use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::corpus::{InteractionRecord, ItemCatalog};
use crate::error::{PareError, Result};

/// How to treat malformed interaction lines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IngestMode {
    /// Any malformed line aborts with its line number.
    Strict,
    /// Malformed lines are skipped and counted.
    Lenient,
}

/// Interactions read from disk plus ingestion bookkeeping.
#[derive(Clone, Debug)]
pub struct LoadedInteractions {
    pub records: Vec<InteractionRecord>,
    pub skipped_lines: u64,
    pub had_header: bool,
}

/// Item record as written in the items file, before vocabulary indexing.
#[derive(Clone, Debug)]
pub struct RawItem {
    pub item_id: String,
    pub release_ts: Option<i64>,
    /// Side-info field name -> attribute strings (e.g. categories, directors).
    pub attributes: BTreeMap<String, Vec<String>>,
}

impl RawItem {
    /// One-line JSON form matching the items file format.
    pub fn to_json_line(&self) -> String {
        let mut obj = serde_json::Map::new();
        obj.insert("item_id".to_string(), Value::String(self.item_id.clone()));
        if let Some(ts) = self.release_ts {
            obj.insert("release_ts".to_string(), Value::from(ts));
        }
        for (field, terms) in &self.attributes {
            obj.insert(
                field.clone(),
                Value::Array(terms.iter().map(|t| Value::String(t.clone())).collect()),
            );
        }
        Value::Object(obj).to_string()
    }
}

fn parse_interaction_line(line: &str) -> std::result::Result<InteractionRecord, String> {
    let parts: Vec<&str> = line.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected 3 comma-separated fields, found {}", parts.len()));
    }
    let user_id = parts[0].trim();
    let item_id = parts[1].trim();
    let ts_text = parts[2].trim();
    if user_id.is_empty() {
        return Err("empty user_id".to_string());
    }
    if item_id.is_empty() {
        return Err("empty item_id".to_string());
    }
    let timestamp: i64 = ts_text
        .parse()
        .map_err(|_| format!("non-numeric timestamp `{ts_text}`"))?;
    if timestamp <= 0 {
        return Err(format!("timestamp must be positive, found {timestamp}"));
    }
    Ok(InteractionRecord {
        user_id: user_id.to_string(),
        item_id: item_id.to_string(),
        timestamp,
    })
}

/// Load `user_id,item_id,timestamp` lines. A header line is detected by a
/// non-numeric timestamp field on the first line and skipped silently;
/// blank lines are ignored.
pub fn load_interactions(path: &Path, mode: IngestMode) -> Result<LoadedInteractions> {
    let text = fs::read_to_string(path).map_err(|e| {
        PareError::data(format!("cannot read interactions file {}: {e}", path.display()))
    })?;
    let mut records = Vec::new();
    let mut skipped = 0u64;
    let mut had_header = false;
    let mut first_content_line = true;
    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        match parse_interaction_line(line) {
            Ok(rec) => records.push(rec),
            Err(reason) => {
                let header_like = line.split(',').count() == 3
                    && line
                        .split(',')
                        .nth(2)
                        .map(|f| f.trim().parse::<i64>().is_err())
                        .unwrap_or(false);
                if first_content_line && header_like {
                    had_header = true;
                } else {
                    match mode {
                        IngestMode::Strict => {
                            return Err(PareError::data(format!(
                                "{}:{}: {reason}",
                                path.display(),
                                idx + 1
                            )));
                        }
                        IngestMode::Lenient => skipped += 1,
                    }
                }
            }
        }
        first_content_line = false;
    }
    Ok(LoadedInteractions {
        records,
        skipped_lines: skipped,
        had_header,
    })
}

fn parse_item_line(line: &str, line_no: usize, path: &Path) -> Result<RawItem> {
    let fail = |reason: String| {
        PareError::data(format!("{}:{}: {reason}", path.display(), line_no))
    };
    let value: Value = serde_json::from_str(line)
        .map_err(|e| fail(format!("invalid JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| fail("item record must be a JSON object".to_string()))?;
    let item_id = obj
        .get("item_id")
        .and_then(|v| v.as_str())
        .ok_or_else(|| fail("missing string field item_id".to_string()))?
        .to_string();
    if item_id.is_empty() {
        return Err(fail("empty item_id".to_string()));
    }
    let release_ts = match obj.get("release_ts") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_i64()
                .ok_or_else(|| fail(format!("release_ts must be an integer, found {v}")))?,
        ),
    };
    let mut attributes = BTreeMap::new();
    for (key, v) in obj {
        if key == "item_id" || key == "release_ts" {
            continue;
        }
        let arr = v
            .as_array()
            .ok_or_else(|| fail(format!("side-info field `{key}` must be an array")))?;
        let mut terms = Vec::with_capacity(arr.len());
        for t in arr {
            terms.push(
                t.as_str()
                    .ok_or_else(|| {
                        fail(format!("side-info field `{key}` must hold strings"))
                    })?
                    .to_string(),
            );
        }
        attributes.insert(key.clone(), terms);
    }
    Ok(RawItem {
        item_id,
        release_ts,
        attributes,
    })
}

/// Load one-JSON-object-per-line item records and build the catalog.
/// `schema` names the side-info fields in order, `categories` first;
/// vocabularies are assembled on this single pass.
pub fn load_items(path: &Path, schema: &[String]) -> Result<ItemCatalog> {
    let text = fs::read_to_string(path).map_err(|e| {
        PareError::data(format!("cannot read items file {}: {e}", path.display()))
    })?;
    let mut raws = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        raws.push(parse_item_line(line, idx + 1, path)?);
    }
    ItemCatalog::from_raw(raws, schema)
}
