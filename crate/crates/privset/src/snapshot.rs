//! Versioned dataset snapshot documents.

use std::path::Path;

use privset_core::dataset::{Dataset, DatasetError, Provenance, RespondentRecord};
use privset_core::schema::SettingsSchema;
use serde::{Deserialize, Serialize};

use crate::files::{self, Error};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
struct SnapshotOut<'a> {
    format_version: u32,
    schema_version: &'a str,
    provenance: &'a Provenance,
    records: &'a [RespondentRecord],
}

#[derive(Deserialize)]
struct SnapshotIn {
    format_version: u32,
    schema_version: String,
    provenance: Provenance,
    records: Vec<RespondentRecord>,
}

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("corrupt snapshot: {0}")]
    Corrupt(String),
    #[error("unsupported snapshot format version {0} (expected {FORMAT_VERSION})")]
    FormatVersion(u32),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Compact JSON followed by a newline. Deterministic for a given dataset.
pub fn to_bytes(dataset: &Dataset) -> Vec<u8> {
    let doc = SnapshotOut {
        format_version: FORMAT_VERSION,
        schema_version: dataset.schema_version(),
        provenance: dataset.provenance(),
        records: dataset.records(),
    };
    let mut out = serde_json::to_vec(&doc).expect("snapshot serializes");
    out.push(b'\n');
    out
}

pub fn from_bytes(bytes: &[u8], schema: &SettingsSchema) -> Result<Dataset, SnapshotError> {
    let doc: SnapshotIn =
        serde_json::from_slice(bytes).map_err(|e| SnapshotError::Corrupt(e.to_string()))?;
    if doc.format_version != FORMAT_VERSION {
        return Err(SnapshotError::FormatVersion(doc.format_version));
    }
    Ok(Dataset::with_version(
        &doc.schema_version,
        doc.records,
        schema,
        doc.provenance,
    )?)
}

pub fn save(path: &Path, dataset: &Dataset) -> Result<(), Error> {
    files::write_atomic(path, &to_bytes(dataset))
}

pub fn load(path: &Path, schema: &SettingsSchema) -> Result<Dataset, Error> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&bytes, schema).map_err(|e| Error::parse(path, e))
}
