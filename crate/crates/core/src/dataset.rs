//! Respondent records and validated datasets.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::coding::{CodedAttributes, LIKERT_CODED_MAX};
use crate::schema::SettingsSchema;
use crate::scoring::SettingsChoiceVector;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("schema version mismatch: dataset has `{found}`, schema is `{expected}`")]
    SchemaVersion { expected: String, found: String },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("record `{id}`: {reason}")]
    InvalidRecord { id: String, reason: String },
}

/// One survey respondent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RespondentRecord {
    pub id: String,
    pub coded: CodedAttributes,
    /// Satisfaction with current settings, 0..=4.
    pub satisfaction: u8,
    pub choices: SettingsChoiceVector,
}

impl RespondentRecord {
    pub fn validate(&self, schema: &SettingsSchema) -> Result<(), DatasetError> {
        let invalid = |reason: String| DatasetError::InvalidRecord {
            id: self.id.clone(),
            reason,
        };
        if self.id.is_empty() {
            return Err(invalid("empty id".into()));
        }
        self.coded.validate().map_err(|e| invalid(e.to_string()))?;
        if i64::from(self.satisfaction) > LIKERT_CODED_MAX {
            return Err(invalid(format!(
                "satisfaction out of range (0..=4): {}",
                self.satisfaction
            )));
        }
        self.choices
            .validate(schema)
            .map_err(|e| invalid(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    Ingested,
    Synthetic { seed: u64 },
}

/// Records validated against one schema version. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Dataset {
    schema_version: String,
    provenance: Provenance,
    records: Vec<RespondentRecord>,
}

impl Dataset {
    /// Validates every record against `schema` and checks id uniqueness.
    pub fn new(
        records: Vec<RespondentRecord>,
        schema: &SettingsSchema,
        provenance: Provenance,
    ) -> Result<Self, DatasetError> {
        let mut ids = BTreeSet::new();
        for r in &records {
            r.validate(schema)?;
            if !ids.insert(r.id.as_str()) {
                return Err(DatasetError::DuplicateId(r.id.clone()));
            }
        }
        Ok(Self {
            schema_version: schema.version().to_string(),
            provenance,
            records,
        })
    }

    /// Like [`Dataset::new`], but first checks that the records were produced
    /// for `schema_version`.
    pub fn with_version(
        schema_version: &str,
        records: Vec<RespondentRecord>,
        schema: &SettingsSchema,
        provenance: Provenance,
    ) -> Result<Self, DatasetError> {
        if schema_version != schema.version() {
            return Err(DatasetError::SchemaVersion {
                expected: schema.version().to_string(),
                found: schema_version.to_string(),
            });
        }
        Self::new(records, schema, provenance)
    }

    pub fn records(&self) -> &[RespondentRecord] {
        &self.records
    }

    pub fn schema_version(&self) -> &str {
        &self.schema_version
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records satisfied beyond `threshold`, in original order.
    pub fn satisfied(&self, threshold: u8) -> impl Iterator<Item = &RespondentRecord> {
        self.records
            .iter()
            .filter(move |r| r.satisfaction > threshold)
    }

    pub fn into_records(self) -> Vec<RespondentRecord> {
        self.records
    }
}

/// Keeps records with `satisfaction > threshold`. The default threshold of 0
/// drops only the lowest ("highly dissatisfied") category.
pub fn filter_satisfied(dataset: &Dataset, threshold: u8) -> Dataset {
    Dataset {
        schema_version: dataset.schema_version.clone(),
        provenance: dataset.provenance.clone(),
        records: dataset.satisfied(threshold).cloned().collect(),
    }
}

pub const DEFAULT_SATISFACTION_THRESHOLD: u8 = 0;
