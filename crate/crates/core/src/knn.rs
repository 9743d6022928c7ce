//! Nearest-neighbor settings recommendation and the popular-choice baseline.
//!
//! The kNN recommender:
//!
//! 1. drops respondents whose satisfaction is at or below the threshold;
//! 2. takes the `k` respondents closest to the query (Euclidean distance on
//!    feature vectors, ties broken by ascending record id);
//! 3. for every setting averages the neighbors' choice ordinals and rounds
//!    half away from zero;
//! 4. maps each rounded ordinal back to its choice.
//!
//! The popular baseline recommends every setting's modal choice over the whole
//! (unfiltered) dataset, preferring the more private choice on ties, so its
//! output does not depend on the query at all.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::coding::{build_feature_vector, FeatureVector, NormalizationSpec};
use crate::dataset::{Dataset, RespondentRecord, DEFAULT_SATISFACTION_THRESHOLD};
use crate::schema::SettingsSchema;
use crate::scoring::{color_band, score_ordinals, ColorBand, PrivacyScore};

pub const DEFAULT_K: usize = 18;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RecommendError {
    #[error("feature layout mismatch: {left} vs {right} components")]
    LayoutMismatch { left: usize, right: usize },
    #[error(
        "insufficient data: k = {required} neighbors needed but only {available} records remain after filtering (short by {})",
        required - available
    )]
    InsufficientData { required: usize, available: usize },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("dataset was built for schema `{dataset}`, not `{schema}`")]
    SchemaMismatch { dataset: String, schema: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnnConfig {
    pub k: usize,
    pub satisfaction_threshold: u8,
    pub normalization: NormalizationSpec,
}

impl Default for KnnConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            satisfaction_threshold: DEFAULT_SATISFACTION_THRESHOLD,
            normalization: NormalizationSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecommendationMode {
    Knn,
    Popular,
}

impl RecommendationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RecommendationMode::Knn => "knn",
            RecommendationMode::Popular => "popular",
        }
    }
}

impl core::str::FromStr for RecommendationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "knn" => Ok(Self::Knn),
            "popular" => Ok(Self::Popular),
            other => Err(alloc::format!("unknown mode `{other}` (expected knn or popular)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendedSetting {
    pub setting_id: String,
    pub choice_id: String,
    pub ordinal: usize,
    pub grade: f64,
    pub color: ColorBand,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub mode: RecommendationMode,
    /// One entry per schema setting, in schema order.
    pub settings: Vec<RecommendedSetting>,
    /// Neighbors in ascending (distance, id) order; empty for the popular mode.
    pub neighbor_ids: Vec<String>,
    pub total_grade_score: PrivacyScore,
}

impl Recommendation {
    fn from_ordinals(
        mode: RecommendationMode,
        schema: &SettingsSchema,
        ordinals: &[usize],
        neighbor_ids: Vec<String>,
    ) -> Self {
        let settings = schema
            .settings()
            .iter()
            .zip(ordinals)
            .map(|(s, o)| {
                let choice = &s.choices[*o];
                RecommendedSetting {
                    setting_id: s.id.clone(),
                    choice_id: choice.id.clone(),
                    ordinal: *o,
                    grade: choice.grade,
                    color: color_band(choice.grade).expect("schema grades lie in [0, 1]"),
                }
            })
            .collect();
        Self {
            mode,
            settings,
            neighbor_ids,
            total_grade_score: score_ordinals(schema, ordinals),
        }
    }

    pub fn ordinals(&self) -> Vec<usize> {
        self.settings.iter().map(|s| s.ordinal).collect()
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Euclidean distance between two feature vectors of the same layout.
pub fn distance(a: &FeatureVector, b: &FeatureVector) -> Result<f64, RecommendError> {
    if a.components.len() != b.components.len() {
        return Err(RecommendError::LayoutMismatch {
            left: a.components.len(),
            right: b.components.len(),
        });
    }
    Ok(libm::sqrt(squared_distance(&a.components, &b.components)))
}

/// Rounds `sum / count` half away from zero, for nonnegative `sum`.
fn rounded_mean(sum: usize, count: usize) -> usize {
    (2 * sum + count) / (2 * count)
}

fn check_schema(dataset: &Dataset, schema: &SettingsSchema) -> Result<(), RecommendError> {
    if dataset.schema_version() != schema.version() {
        return Err(RecommendError::SchemaMismatch {
            dataset: dataset.schema_version().into(),
            schema: schema.version().into(),
        });
    }
    Ok(())
}

fn record_ordinals(record: &RespondentRecord, schema: &SettingsSchema) -> Vec<usize> {
    record
        .choices
        .ordinals(schema)
        .expect("dataset records are validated against the schema")
}

/// Feature vector of a stored respondent.
pub fn record_features(record: &RespondentRecord, norm: NormalizationSpec) -> FeatureVector {
    build_feature_vector(&record.coded.profile(), norm).expect("validated record")
}

/// The `k` nearest satisfied records, ascending by (distance, id).
pub fn nearest_neighbors<'a>(
    query: &FeatureVector,
    dataset: &'a Dataset,
    config: &KnnConfig,
) -> Result<Vec<&'a RespondentRecord>, RecommendError> {
    if config.k == 0 {
        return Err(RecommendError::InvalidK);
    }
    let mut scored: Vec<(f64, &RespondentRecord)> = Vec::new();
    for record in dataset.satisfied(config.satisfaction_threshold) {
        let features = record_features(record, config.normalization);
        let d = distance(query, &features)?;
        scored.push((d, record));
    }
    if scored.len() < config.k {
        return Err(RecommendError::InsufficientData {
            required: config.k,
            available: scored.len(),
        });
    }
    let by_distance_then_id = |a: &(f64, &RespondentRecord), b: &(f64, &RespondentRecord)| {
        a.0.total_cmp(&b.0).then_with(|| a.1.id.cmp(&b.1.id))
    };
    if scored.len() > config.k {
        scored.select_nth_unstable_by(config.k - 1, by_distance_then_id);
        scored.truncate(config.k);
    }
    scored.sort_by(by_distance_then_id);
    Ok(scored.into_iter().map(|(_, r)| r).collect())
}

pub fn knn_recommend(
    query: &FeatureVector,
    dataset: &Dataset,
    config: &KnnConfig,
    schema: &SettingsSchema,
) -> Result<Recommendation, RecommendError> {
    check_schema(dataset, schema)?;
    let neighbors = nearest_neighbors(query, dataset, config)?;
    let mut sums = vec![0usize; schema.len()];
    for record in &neighbors {
        for (sum, o) in sums.iter_mut().zip(record_ordinals(record, schema)) {
            *sum += o;
        }
    }
    let ordinals: Vec<usize> = sums
        .iter()
        .map(|s| rounded_mean(*s, neighbors.len()))
        .collect();
    let ids = neighbors.iter().map(|r| r.id.clone()).collect();
    Ok(Recommendation::from_ordinals(
        RecommendationMode::Knn,
        schema,
        &ordinals,
        ids,
    ))
}

pub fn popular_recommend(
    dataset: &Dataset,
    schema: &SettingsSchema,
) -> Result<Recommendation, RecommendError> {
    check_schema(dataset, schema)?;
    if dataset.is_empty() {
        return Err(RecommendError::EmptyDataset);
    }
    let mut counts: Vec<Vec<usize>> = schema
        .settings()
        .iter()
        .map(|s| vec![0; s.choices.len()])
        .collect();
    for record in dataset.records() {
        for (c, o) in counts.iter_mut().zip(record_ordinals(record, schema)) {
            c[o] += 1;
        }
    }
    let ordinals: Vec<usize> = counts
        .iter()
        .map(|c| {
            // `max_by_key` keeps the last maximum, so the more private choice wins ties.
            c.iter()
                .enumerate()
                .max_by_key(|(_, count)| **count)
                .map(|(i, _)| i)
                .expect("at least two choices")
        })
        .collect();
    Ok(Recommendation::from_ordinals(
        RecommendationMode::Popular,
        schema,
        &ordinals,
        Vec::new(),
    ))
}
