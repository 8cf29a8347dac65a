//! Versioned JSON model files.

use std::path::Path;

use ecgid_core::classifiers::TrainedModel;
use ecgid_core::features::Standardizer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::write_file;

pub const FORMAT: &str = "ecgid-model";
pub const VERSION: u32 = 1;

/// A fitted classifier plus the z-scoring it expects its inputs to have had.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub standardizer: Option<Standardizer>,
    pub model: TrainedModel,
}

impl ModelFile {
    pub fn new(model: TrainedModel, standardizer: Option<Standardizer>) -> Self {
        ModelFile {
            format: FORMAT.into(),
            version: VERSION,
            standardizer,
            model,
        }
    }

    /// Standardises `x` if needed and predicts its subject.
    pub fn predict(&self, x: &[f64]) -> Result<String> {
        let x = match &self.standardizer {
            Some(s) => s.transform(x)?,
            None => x.to_vec(),
        };
        Ok(self.model.predict(&x)?.to_string())
    }
}

pub fn save_model(path: &Path, file: &ModelFile) -> Result<()> {
    let text = serde_json::to_string(file).map_err(|e| Error::bad_file(path, e))?;
    write_file(path, text.as_bytes())
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let probe: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::bad_file(path, e))?;
    if probe.get("format").and_then(|f| f.as_str()) != Some(FORMAT) {
        return Err(Error::bad_file(path, "not an ecgid model file"));
    }
    match probe.get("version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(VERSION) => {}
        v => {
            return Err(Error::bad_file(
                path,
                format!("model format version {v:?} is not supported (expected {VERSION})"),
            ))
        }
    }
    serde_json::from_value(probe).map_err(|e| Error::bad_file(path, e))
}
