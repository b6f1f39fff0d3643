use super::NeuralError;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::io::{BufReader, BufWriter};
use std::path::Path;

pub const CHECKPOINT_FORMAT: &str = "ibdr-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

/// JSON envelope around a serialisable model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint<T> {
    pub format: String,
    pub version: u32,
    /// Model family, e.g. `"q-network"` or `"forecaster"`.
    pub kind: String,
    pub model: T,
}

impl<T> Checkpoint<T> {
    pub fn new(kind: &str, model: T) -> Self {
        Self { format: CHECKPOINT_FORMAT.into(), version: CHECKPOINT_VERSION, kind: kind.into(), model }
    }
}

pub fn save_checkpoint<T: Serialize>(path: &Path, kind: &str, model: &T) -> Result<(), NeuralError> {
    let file = std::fs::File::create(path).map_err(|e| NeuralError::Checkpoint(format!("{}: {e}", path.display())))?;
    serde_json::to_writer(BufWriter::new(file), &Checkpoint::new(kind, model))
        .map_err(|e| NeuralError::Checkpoint(format!("{}: {e}", path.display())))
}

pub fn load_checkpoint<T: DeserializeOwned>(path: &Path, kind: &str) -> Result<T, NeuralError> {
    let file = std::fs::File::open(path).map_err(|e| NeuralError::Checkpoint(format!("{}: {e}", path.display())))?;
    let ck: Checkpoint<T> = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| NeuralError::Checkpoint(format!("{}: {e}", path.display())))?;
    if ck.format != CHECKPOINT_FORMAT || ck.version != CHECKPOINT_VERSION {
        return Err(NeuralError::Checkpoint(format!("unsupported checkpoint {} v{}", ck.format, ck.version)));
    }
    if ck.kind != kind {
        return Err(NeuralError::Checkpoint(format!("expected a {kind} checkpoint, found {}", ck.kind)));
    }
    Ok(ck.model)
}
