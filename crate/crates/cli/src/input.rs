use std::fs;
use std::path::Path;

use ergrates_core::catalog;
use ergrates_core::flows::{PeriodicFlowModel, PiecewisePowerFunction};
use ergrates_core::measures::SpectralMeasure;

use crate::CliError;

/// A measure from a file, or from the built-in catalog when `spec` names
/// an entry and no such file exists. `q` selects the level of the
/// level-dependent entries.
pub fn load_measure(spec: &str, q: f64) -> Result<(String, SpectralMeasure), CliError> {
    let path = Path::new(spec);
    if path.exists() {
        let text = read(path)?;
        let m = SpectralMeasure::from_json(&text).map_err(|e| CliError::Input(format!("{spec}: {e}")))?;
        return Ok((spec.to_owned(), m));
    }
    match catalog::by_name(spec, q) {
        Some(m) => Ok((spec.to_owned(), m)),
        None => Err(CliError::Input(format!(
            "--input: no file or catalog measure named `{spec}` (catalog: {})",
            catalog::names().join(", ")
        ))),
    }
}

/// A flow model file: a periodic model (array of circles) or a
/// multiplication-flow vector (array of power terms).
#[derive(Debug, Clone)]
pub enum FlowModel {
    Periodic(PeriodicFlowModel),
    Mult(PiecewisePowerFunction),
}

pub fn load_flow_model(spec: &str) -> Result<FlowModel, CliError> {
    let text = read(Path::new(spec))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{spec}: {e}")))?;
    let periodic = value
        .as_array()
        .and_then(|a| a.first())
        .and_then(|v| v.as_object())
        .is_some_and(|o| o.contains_key("period") || o.contains_key("coeffs"));
    if periodic {
        serde_json::from_value(value)
            .map(FlowModel::Periodic)
            .map_err(|e| CliError::Input(format!("{spec}: periodic model: {e}")))
    } else {
        serde_json::from_value(value)
            .map(FlowModel::Mult)
            .map_err(|e| CliError::Input(format!("{spec}: multiplication vector: {e}")))
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("--input: cannot read {}: {e}", path.display())))
}
