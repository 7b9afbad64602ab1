use std::collections::BTreeMap;
use std::fmt;

use crate::error::{PareError, Result};
use crate::numerics::params::ParamStore;
use crate::numerics::tape::{NodeId, Tape};
use crate::numerics::tensor::Tensor;

/// Worst observed disagreement for one parameter.
#[derive(Clone, Debug)]
pub struct GradCheckEntry {
    pub name: String,
    pub max_rel_err: f64,
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

/// Per-parameter comparison of analytic gradients against central finite
/// differences.
#[derive(Clone, Debug)]
pub struct GradCheckReport {
    pub h: f64,
    pub entries: Vec<GradCheckEntry>,
}

impl GradCheckReport {
    pub fn max_rel_err(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.max_rel_err)
            .fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_err() < tol
    }

    /// Parameters whose worst relative error is at or above `tol`.
    pub fn flagged(&self, tol: f64) -> Vec<&GradCheckEntry> {
        self.entries
            .iter()
            .filter(|e| e.max_rel_err >= tol)
            .collect()
    }
}

impl fmt::Display for GradCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "gradient check (h = {:e})", self.h)?;
        for e in &self.entries {
            writeln!(
                f,
                "  {:<24} max_rel_err {:.3e}  (index {}, analytic {:.6e}, numeric {:.6e})",
                e.name, e.max_rel_err, e.worst_index, e.analytic, e.numeric
            )?;
        }
        write!(f, "  max over parameters: {:.3e}", self.max_rel_err())
    }
}

/// Relative error with a small absolute floor:
/// `|a - n| / max(|a|, |n|, 1e-8)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// Check a model closure's analytic gradients against central finite
/// differences.
///
/// `build` must deterministically map the current parameter values to a
/// scalar loss recorded on a fresh tape; it is evaluated twice up front and
/// an error is returned if the two baseline losses differ.
pub fn gradient_check<F>(store: &mut ParamStore, h: f64, build: F) -> Result<GradCheckReport>
where
    F: Fn(&ParamStore) -> Result<(Tape, NodeId)>,
{
    let (tape_a, loss_a) = build(store)?;
    let (tape_b, loss_b) = build(store)?;
    let base_a = tape_a.scalar(loss_a)?;
    let base_b = tape_b.scalar(loss_b)?;
    if base_a.to_bits() != base_b.to_bits() {
        return Err(PareError::numeric(format!(
            "gradient check: loss closure is not deterministic ({base_a} vs {base_b})"
        )));
    }

    store.zero_grads();
    tape_a.backward(loss_a, store)?;
    let analytic: BTreeMap<String, Tensor> = store
        .iter()
        .map(|(name, p)| (name.clone(), p.grad.clone()))
        .collect();
    store.zero_grads();

    check_against(store, &analytic, h, |s| {
        let (tape, loss) = build(s)?;
        tape.scalar(loss)
    })
}

/// Compare a supplied analytic gradient map against central finite
/// differences of `loss_fn`. Parameter values are perturbed in place and
/// restored bit-exactly.
pub fn check_against<F>(
    store: &mut ParamStore,
    analytic: &BTreeMap<String, Tensor>,
    h: f64,
    loss_fn: F,
) -> Result<GradCheckReport>
where
    F: Fn(&ParamStore) -> Result<f64>,
{
    if h <= 0.0 {
        return Err(PareError::numeric("gradient check: h must be positive"));
    }
    let names: Vec<String> = store.names().map(|s| s.to_string()).collect();
    let mut entries = Vec::with_capacity(names.len());
    for name in names {
        let grads = analytic
            .get(&name)
            .ok_or_else(|| PareError::numeric(format!("no analytic gradient for {name}")))?
            .clone();
        let len = store.value(&name)?.len();
        let mut worst = GradCheckEntry {
            name: name.clone(),
            max_rel_err: 0.0,
            worst_index: 0,
            analytic: grads.data().first().copied().unwrap_or(0.0),
            numeric: 0.0,
        };
        for k in 0..len {
            let original = store.value(&name)?.data()[k];
            store.value_mut(&name)?.data_mut()[k] = original + h;
            let plus = loss_fn(store)?;
            store.value_mut(&name)?.data_mut()[k] = original - h;
            let minus = loss_fn(store)?;
            store.value_mut(&name)?.data_mut()[k] = original;
            let numeric = (plus - minus) / (2.0 * h);
            let a = grads.data()[k];
            let err = relative_error(a, numeric);
            if err > worst.max_rel_err {
                worst.max_rel_err = err;
                worst.worst_index = k;
                worst.analytic = a;
                worst.numeric = numeric;
            }
        }
        entries.push(worst);
    }
    Ok(GradCheckReport { h, entries })
}
