pub mod gp;
pub mod spatial;
pub mod species;
pub mod ts;

use std::path::PathBuf;

use crate::error::{invalid, CliResult};

/// Unwrap a required path, naming the missing option.
pub(crate) fn required(value: &Option<PathBuf>, field: &str) -> CliResult<PathBuf> {
    value
        .clone()
        .ok_or_else(|| invalid!("{field}: required (flag --{field} or config file)"))
}

pub(crate) fn acceptance_entry(rates: &[f64]) -> serde_json::Value {
    serde_json::json!(rates)
}
