//! Settings catalog: which privacy settings exist, what each choice is worth,
//! and how much each setting contributes to the total score.
//!
//! A schema is validated on construction (and on deserialization), so every
//! `SettingsSchema` value in the program satisfies:
//!
//! - setting ids are unique and weights are nonnegative, summing to 10 (within 1e-9)
//! - each setting has at least two choices with unique ids
//! - choice grades lie in `[0, 1]`, are strictly increasing, start at 0 and end at 1
//!
//! The ordinal position of a choice is therefore its privacy rank
//! (0 = least private).

use alloc::borrow::ToOwned;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Weights of a valid schema sum to this value.
pub const TOTAL_WEIGHT: f64 = 10.0;

/// Allowed deviation of the weight sum from [`TOTAL_WEIGHT`].
pub const WEIGHT_TOLERANCE: f64 = 1e-9;

/// Version tag of the bundled default schema.
pub const DEFAULT_SCHEMA_VERSION: &str = "default-18-v1";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SchemaError {
    #[error("setting `{setting}`: {reason}")]
    Setting { setting: String, reason: String },
    #[error("weights: {0}")]
    Weights(String),
    #[error("schema: {0}")]
    Structure(String),
    #[error("ordinal {ordinal} out of range for setting `{setting}` ({choices} choices)")]
    OrdinalOutOfRange {
        setting: String,
        ordinal: usize,
        choices: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingChoice {
    pub id: String,
    pub label: String,
    /// Privacy grade in `[0, 1]`; 1 is the most private option.
    pub grade: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingDefinition {
    pub id: String,
    pub label: String,
    pub weight: f64,
    /// Sorted ascending by grade.
    pub choices: Vec<SettingChoice>,
}

impl SettingDefinition {
    /// Returns the choice at privacy rank `ordinal` (0 = least private).
    pub fn choice_by_ordinal(&self, ordinal: usize) -> Result<&SettingChoice, SchemaError> {
        self.choices
            .get(ordinal)
            .ok_or_else(|| SchemaError::OrdinalOutOfRange {
                setting: self.id.clone(),
                ordinal,
                choices: self.choices.len(),
            })
    }

    pub fn ordinal_of(&self, choice_id: &str) -> Option<usize> {
        self.choices.iter().position(|c| c.id == choice_id)
    }

    pub fn choice(&self, choice_id: &str) -> Option<&SettingChoice> {
        self.choices.iter().find(|c| c.id == choice_id)
    }

    /// Highest valid ordinal, i.e. the index of the most private choice.
    pub fn max_ordinal(&self) -> usize {
        self.choices.len().saturating_sub(1)
    }

    fn validate(&self) -> Result<(), SchemaError> {
        let fail = |reason: String| SchemaError::Setting {
            setting: self.id.clone(),
            reason,
        };
        if self.id.is_empty() {
            return Err(SchemaError::Structure("setting with empty id".into()));
        }
        if !self.weight.is_finite() || self.weight < 0.0 {
            return Err(fail(format!("weight {} is not a nonnegative number", self.weight)));
        }
        if self.choices.len() < 2 {
            return Err(fail(format!(
                "needs at least 2 choices, has {}",
                self.choices.len()
            )));
        }
        let mut ids = BTreeSet::new();
        for choice in &self.choices {
            if choice.id.is_empty() {
                return Err(fail("choice with empty id".into()));
            }
            if !ids.insert(choice.id.as_str()) {
                return Err(fail(format!("duplicate choice id `{}`", choice.id)));
            }
            if !(0.0..=1.0).contains(&choice.grade) {
                return Err(fail(format!(
                    "grade {} of choice `{}` outside [0, 1]",
                    choice.grade, choice.id
                )));
            }
        }
        for pair in self.choices.windows(2) {
            if pair[1].grade <= pair[0].grade {
                return Err(fail(format!(
                    "choices must be strictly increasing in grade (`{}` then `{}`)",
                    pair[0].id, pair[1].id
                )));
            }
        }
        if self.choices[0].grade != 0.0 {
            return Err(fail("least private choice must have grade 0".into()));
        }
        if self.choices[self.choices.len() - 1].grade != 1.0 {
            return Err(fail("most private choice must have grade 1".into()));
        }
        Ok(())
    }
}

/// Unvalidated wire form; [`SettingsSchema`] deserializes through it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawSchema {
    pub version: String,
    pub settings: Vec<SettingDefinition>,
}

/// A validated, immutable settings catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSchema")]
pub struct SettingsSchema {
    version: String,
    settings: Vec<SettingDefinition>,
}

impl TryFrom<RawSchema> for SettingsSchema {
    type Error = SchemaError;

    fn try_from(raw: RawSchema) -> Result<Self, Self::Error> {
        SettingsSchema::new(raw.version, raw.settings)
    }
}

impl SettingsSchema {
    pub fn new(version: String, settings: Vec<SettingDefinition>) -> Result<Self, SchemaError> {
        if settings.is_empty() {
            return Err(SchemaError::Structure("no settings defined".into()));
        }
        let mut ids = BTreeSet::new();
        for setting in &settings {
            setting.validate()?;
            if !ids.insert(setting.id.as_str()) {
                return Err(SchemaError::Setting {
                    setting: setting.id.clone(),
                    reason: "duplicate setting id".into(),
                });
            }
        }
        let sum: f64 = settings.iter().map(|s| s.weight).sum();
        if (sum - TOTAL_WEIGHT).abs() > WEIGHT_TOLERANCE {
            return Err(SchemaError::Weights(format!(
                "sum is {sum}, expected {TOTAL_WEIGHT}"
            )));
        }
        Ok(Self { version, settings })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn settings(&self) -> &[SettingDefinition] {
        &self.settings
    }

    pub fn setting(&self, id: &str) -> Option<&SettingDefinition> {
        self.settings.iter().find(|s| s.id == id)
    }

    pub fn len(&self) -> usize {
        self.settings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.settings.is_empty()
    }

    pub fn into_raw(self) -> RawSchema {
        RawSchema {
            version: self.version,
            settings: self.settings,
        }
    }
}

/// Choice ladder shared by every bundled setting, least private first.
const AUDIENCE_LADDER: [(&str, &str); 4] = [
    ("public", "Public"),
    ("friends_of_friends", "Friends of friends"),
    ("friends", "Friends"),
    ("only_me", "Only me"),
];

const DEFAULT_SETTINGS: [(&str, &str); 18] = [
    ("future_posts", "Who can see your future posts?"),
    ("past_posts", "Who can see posts you shared in the past?"),
    ("friend_list", "Who can see your friend list?"),
    ("email_lookup", "Who can look you up using your email address?"),
    ("phone_lookup", "Who can look you up using your phone number?"),
    ("search_engines", "Who can find your timeline through search engines?"),
    ("timeline_posting", "Who can post on your timeline?"),
    ("timeline_others_posts", "Who can see what others post on your timeline?"),
    ("tagged_posts", "Who can see posts you've been tagged in?"),
    ("tag_suggestions", "Who sees tag suggestions when photos look like you?"),
    ("birthday", "Who can see your birthday?"),
    ("hometown", "Who can see your hometown?"),
    ("current_city", "Who can see your current city?"),
    ("relationship", "Who can see your relationship status?"),
    ("work_education", "Who can see your work and education?"),
    ("contact_info", "Who can see your contact information?"),
    ("apps_others_use", "Who can bring your info into apps they use?"),
    ("followers", "Who can follow you?"),
];

/// Evenly spaced grades for `count` ordered choices: `0, 1/(count-1), ..., 1`.
pub fn evenly_spaced_grades(count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => alloc::vec![1.0],
        _ => {
            let last = (count - 1) as f64;
            (0..count)
                .map(|i| if i == count - 1 { 1.0 } else { i as f64 / last })
                .collect()
        }
    }
}

/// The bundled stand-in catalog: 18 settings, uniform weights of 10/18 and
/// four evenly graded audience choices each.
pub fn default_schema() -> SettingsSchema {
    let weight = TOTAL_WEIGHT / DEFAULT_SETTINGS.len() as f64;
    let grades = evenly_spaced_grades(AUDIENCE_LADDER.len());
    let settings = DEFAULT_SETTINGS
        .iter()
        .map(|(id, label)| SettingDefinition {
            id: (*id).to_owned(),
            label: (*label).to_owned(),
            weight,
            choices: AUDIENCE_LADDER
                .iter()
                .zip(&grades)
                .map(|((cid, clabel), grade)| SettingChoice {
                    id: (*cid).to_owned(),
                    label: (*clabel).to_string(),
                    grade: *grade,
                })
                .collect(),
        })
        .collect();
    SettingsSchema::new(DEFAULT_SCHEMA_VERSION.to_owned(), settings)
        .expect("bundled schema is valid")
}
