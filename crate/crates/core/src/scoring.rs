//! Weighted privacy score of a settings configuration.
//!
//! `score = Σ weight(setting) × grade(chosen choice)`, which lies in `[0, 10]`
//! for any valid schema.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::RespondentRecord;
use crate::schema::SettingsSchema;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoringError {
    #[error("missing choice for setting `{0}`")]
    MissingSetting(String),
    #[error("unknown setting `{0}`")]
    UnknownSetting(String),
    #[error("unknown choice `{choice}` for setting `{setting}`")]
    UnknownChoice { setting: String, choice: String },
    #[error("grade {0} outside [0, 1]")]
    GradeOutOfRange(f64),
    #[error("empty dataset")]
    EmptyDataset,
}

/// Chosen choice id per setting id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SettingsChoiceVector(pub BTreeMap<String, String>);

impl SettingsChoiceVector {
    pub fn get(&self, setting: &str) -> Option<&str> {
        self.0.get(setting).map(String::as_str)
    }

    pub fn insert(&mut self, setting: impl Into<String>, choice: impl Into<String>) {
        self.0.insert(setting.into(), choice.into());
    }

    /// Checks that every schema setting is covered by a known choice and that
    /// no foreign settings are present.
    pub fn validate(&self, schema: &SettingsSchema) -> Result<(), ScoringError> {
        self.ordinals(schema).map(|_| ())
    }

    /// Choice ordinals in schema order.
    pub fn ordinals(&self, schema: &SettingsSchema) -> Result<Vec<usize>, ScoringError> {
        if let Some(extra) = self.0.keys().find(|k| schema.setting(k).is_none()) {
            return Err(ScoringError::UnknownSetting(extra.clone()));
        }
        schema
            .settings()
            .iter()
            .map(|s| {
                let choice = self
                    .get(&s.id)
                    .ok_or_else(|| ScoringError::MissingSetting(s.id.clone()))?;
                s.ordinal_of(choice).ok_or_else(|| ScoringError::UnknownChoice {
                    setting: s.id.clone(),
                    choice: choice.into(),
                })
            })
            .collect()
    }

    /// Builds the vector that picks the choice at `ordinals[i]` for setting `i`.
    pub fn from_ordinals(schema: &SettingsSchema, ordinals: &[usize]) -> Option<Self> {
        if ordinals.len() != schema.len() {
            return None;
        }
        let mut out = Self::default();
        for (s, o) in schema.settings().iter().zip(ordinals) {
            out.insert(s.id.clone(), s.choices.get(*o)?.id.clone());
        }
        Some(out)
    }
}

/// A total privacy score in `[0, 10]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PrivacyScore(f64);

impl PrivacyScore {
    pub const MAX: f64 = 10.0;

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Neumaier-compensated sum, so uniform 10/18 weights add back to exactly 10.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn total_score(
    choices: &SettingsChoiceVector,
    schema: &SettingsSchema,
) -> Result<PrivacyScore, ScoringError> {
    let ordinals = choices.ordinals(schema)?;
    Ok(score_ordinals(schema, &ordinals))
}

/// Score of a configuration given as choice ordinals in schema order.
/// `ordinals` must be valid for `schema`.
pub fn score_ordinals(schema: &SettingsSchema, ordinals: &[usize]) -> PrivacyScore {
    let value = compensated_sum(
        schema
            .settings()
            .iter()
            .zip(ordinals)
            .map(|(s, o)| s.weight * s.choices[*o].grade),
    );
    // Rounding can only push past the bounds by an ulp or so.
    PrivacyScore(value.clamp(0.0, PrivacyScore::MAX))
}

/// Four-color privacy key; green marks the most private options.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorBand {
    Red,
    Orange,
    Yellow,
    Green,
}

impl ColorBand {
    pub fn as_str(self) -> &'static str {
        match self {
            ColorBand::Red => "red",
            ColorBand::Orange => "orange",
            ColorBand::Yellow => "yellow",
            ColorBand::Green => "green",
        }
    }
}

/// Quartile bands: `[0.75, 1]` green, `[0.5, 0.75)` yellow, `[0.25, 0.5)`
/// orange, `[0, 0.25)` red.
pub fn color_band(grade: f64) -> Result<ColorBand, ScoringError> {
    if !(0.0..=1.0).contains(&grade) {
        return Err(ScoringError::GradeOutOfRange(grade));
    }
    Ok(if grade >= 0.75 {
        ColorBand::Green
    } else if grade >= 0.5 {
        ColorBand::Yellow
    } else if grade >= 0.25 {
        ColorBand::Orange
    } else {
        ColorBand::Red
    })
}

pub const HISTOGRAM_BIN_WIDTH: f64 = 0.5;
pub const HISTOGRAM_BINS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

/// Descriptive statistics of total scores. `stddev` is the sample (n-1)
/// standard deviation, 0 for a single record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreDistribution {
    pub n: usize,
    pub mean: f64,
    pub stddev: f64,
    pub median: f64,
    pub histogram: Vec<HistogramBin>,
}

pub fn describe_scores(scores: &[f64]) -> Result<ScoreDistribution, ScoringError> {
    if scores.is_empty() {
        return Err(ScoringError::EmptyDataset);
    }
    let n = scores.len();
    let mean = compensated_sum(scores.iter().copied()) / n as f64;
    let stddev = if n > 1 {
        let ss = compensated_sum(scores.iter().map(|s| (s - mean) * (s - mean)));
        libm::sqrt(ss / (n - 1) as f64)
    } else {
        0.0
    };
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let mut histogram: Vec<HistogramBin> = (0..HISTOGRAM_BINS)
        .map(|i| HistogramBin {
            lower: i as f64 * HISTOGRAM_BIN_WIDTH,
            upper: (i + 1) as f64 * HISTOGRAM_BIN_WIDTH,
            count: 0,
        })
        .collect();
    for s in scores {
        let bin = ((s / HISTOGRAM_BIN_WIDTH) as usize).min(HISTOGRAM_BINS - 1);
        histogram[bin].count += 1;
    }
    Ok(ScoreDistribution {
        n,
        mean,
        stddev,
        median,
        histogram,
    })
}

/// Total scores of every record, in dataset order.
pub fn record_scores(
    records: &[RespondentRecord],
    schema: &SettingsSchema,
) -> Result<Vec<f64>, ScoringError> {
    records
        .iter()
        .map(|r| total_score(&r.choices, schema).map(PrivacyScore::value))
        .collect()
}

pub fn score_distribution(
    records: &[RespondentRecord],
    schema: &SettingsSchema,
) -> Result<ScoreDistribution, ScoringError> {
    describe_scores(&record_scores(records, schema)?)
}
