//! CSV survey exports to validated datasets.
//!
//! Header (exact, in order): `id, age_group, gender, ethnicity,
//! marital_status, ipip_q1 .. ipip_q20, concern, satisfaction`, then one
//! `setting_<id>` column per schema setting in schema order. Column
//! `ipip_qN` answers the Nth questionnaire item.

use std::collections::{BTreeMap, HashSet};
use std::io::Read;

use privset_core::coding::{Questionnaire, RawIntake};
use privset_core::dataset::{Dataset, Provenance, RespondentRecord};
use privset_core::schema::SettingsSchema;
use privset_core::scoring::SettingsChoiceVector;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowError {
    /// 1-based line number in the source, the header being line 1.
    pub line: u64,
    pub id: Option<String>,
    pub reason: String,
}

impl std::fmt::Display for RowError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.id {
            Some(id) => write!(f, "line {} ({}): {}", self.line, id, self.reason),
            None => write!(f, "line {}: {}", self.line, self.reason),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("unreadable source: {0}")]
    Unreadable(String),
    #[error("header mismatch: {0}")]
    Header(String),
}

#[derive(Debug)]
pub struct IngestOutcome {
    pub dataset: Dataset,
    pub errors: Vec<RowError>,
}

pub fn expected_header(schema: &SettingsSchema, questionnaire: &Questionnaire) -> Vec<String> {
    let mut cols: Vec<String> = ["id", "age_group", "gender", "ethnicity", "marital_status"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    cols.extend((1..=questionnaire.items().len()).map(|n| format!("ipip_q{n}")));
    cols.push("concern".into());
    cols.push("satisfaction".into());
    cols.extend(schema.settings().iter().map(|s| format!("setting_{}", s.id)));
    cols
}

fn check_header(found: &csv::StringRecord, expected: &[String]) -> Result<(), IngestError> {
    for (i, want) in expected.iter().enumerate() {
        match found.get(i) {
            Some(got) if got.trim() == want => {}
            Some(got) => {
                return Err(IngestError::Header(format!(
                    "column {} is `{got}`, expected `{want}`",
                    i + 1
                )))
            }
            None => return Err(IngestError::Header(format!("missing column `{want}`"))),
        }
    }
    if found.len() > expected.len() {
        return Err(IngestError::Header(format!(
            "unexpected extra column `{}`",
            &found[expected.len()]
        )));
    }
    Ok(())
}

fn optional(value: &str) -> Option<String> {
    let v = value.trim();
    (!v.is_empty()).then(|| v.to_string())
}

fn integer(field: &str, value: &str) -> Result<Option<i64>, String> {
    match optional(value) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| format!("{field} is not an integer: `{v}`")),
    }
}

fn parse_row(
    row: &csv::StringRecord,
    schema: &SettingsSchema,
    questionnaire: &Questionnaire,
) -> Result<RespondentRecord, String> {
    let id = row[0].trim().to_string();
    if id.is_empty() {
        return Err("id is required".into());
    }
    let items = questionnaire.items();
    let mut answers = BTreeMap::new();
    for (i, item) in items.iter().enumerate() {
        let col = format!("ipip_q{}", i + 1);
        if let Some(v) = integer(&col, &row[5 + i])? {
            answers.insert(item.id.clone(), v);
        }
    }
    let after_items = 5 + items.len();
    let intake = RawIntake {
        age_group: optional(&row[1]),
        gender: optional(&row[2]),
        ethnicity: optional(&row[3]),
        marital_status: optional(&row[4]),
        mini_ipip_items: answers,
        concern: integer("concern", &row[after_items])?,
        satisfaction: integer("satisfaction", &row[after_items + 1])?,
    };
    let (coded, satisfaction) = intake.code_full(questionnaire).map_err(|e| e.to_string())?;
    let satisfaction = satisfaction.ok_or("satisfaction is required")?;
    let mut choices = SettingsChoiceVector::default();
    for (i, setting) in schema.settings().iter().enumerate() {
        let value = row[after_items + 2 + i].trim();
        if value.is_empty() {
            return Err(format!("setting_{} is required", setting.id));
        }
        choices.insert(setting.id.clone(), value);
    }
    let record = RespondentRecord {
        id,
        coded,
        satisfaction,
        choices,
    };
    record.validate(schema).map_err(|e| match e {
        privset_core::dataset::DatasetError::InvalidRecord { reason, .. } => reason,
        other => other.to_string(),
    })?;
    Ok(record)
}

/// Parses every row. Valid rows become records in source order; invalid
/// rows are reported and skipped.
pub fn ingest_csv<R: Read>(
    source: R,
    schema: &SettingsSchema,
    questionnaire: &Questionnaire,
) -> Result<IngestOutcome, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(source);
    let expected = expected_header(schema, questionnaire);
    let header = reader
        .headers()
        .map_err(|e| IngestError::Unreadable(e.to_string()))?
        .clone();
    check_header(&header, &expected)?;

    let mut records = Vec::new();
    let mut errors = Vec::new();
    let mut seen = HashSet::new();
    for row in reader.records() {
        let row = match row {
            Ok(r) => r,
            Err(e) if e.is_io_error() => return Err(IngestError::Unreadable(e.to_string())),
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                errors.push(RowError {
                    line,
                    id: None,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let line = row.position().map_or(0, |p| p.line());
        let id = optional(row.get(0).unwrap_or(""));
        if row.len() != expected.len() {
            errors.push(RowError {
                line,
                id,
                reason: format!("expected {} fields, found {}", expected.len(), row.len()),
            });
            continue;
        }
        match parse_row(&row, schema, questionnaire) {
            Ok(record) => {
                if !seen.insert(record.id.clone()) {
                    errors.push(RowError {
                        line,
                        id,
                        reason: "duplicate id".into(),
                    });
                } else {
                    records.push(record);
                }
            }
            Err(reason) => errors.push(RowError { line, id, reason }),
        }
    }
    let dataset = Dataset::new(records, schema, Provenance::Ingested)
        .expect("rows are validated individually and ids deduplicated");
    Ok(IngestOutcome { dataset, errors })
}
