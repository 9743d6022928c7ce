//! Questionnaire answers to coded numeric attributes.
//!
//! Coding rules:
//!
//! - age bracket to its landmark decade (18-24 as 20, 25-34 as 30, ..., 65+ as 70)
//! - gender as a binary indicator, 1 = female, 0 = male
//! - ethnicity and marital status one-hot over fixed vocabularies
//! - concern and satisfaction Likert answers on 0..=4
//! - each Five-Factor trait as the sum of its four Mini-IPIP items (1..=5),
//!   reverse-keyed items entering as `6 - v`, giving a score in 4..=20
//!
//! Which items belong to which trait and which are reverse-keyed is data,
//! carried by a [`Questionnaire`].

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodingError {
    #[error("unknown {kind} `{value}`")]
    UnknownCategory { kind: &'static str, value: String },
    #[error("item value {value} out of range {min}..={max}")]
    OutOfRange { value: i64, min: i64, max: i64 },
    #[error("questionnaire: {0}")]
    Questionnaire(String),
    #[error("{field}: {reason}")]
    Invalid { field: &'static str, reason: String },
}

macro_rules! vocabulary_enum {
    (
        $(#[$meta:meta])*
        $name:ident, $kind:literal, { $($variant:ident => $label:literal),+ $(,)? }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];
            pub const VOCABULARY: &'static [&'static str] = &[$($label),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $label),+
                }
            }

            pub fn index(self) -> usize {
                self as usize
            }
        }

        impl FromStr for $name {
            type Err = CodingError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                let s = s.trim();
                $name::ALL
                    .iter()
                    .copied()
                    .find(|v| v.as_str().eq_ignore_ascii_case(s))
                    .ok_or_else(|| CodingError::UnknownCategory {
                        kind: $kind,
                        value: s.to_string(),
                    })
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

vocabulary_enum!(
    AgeGroup, "age group", {
        From18To24 => "18-24",
        From25To34 => "25-34",
        From35To44 => "35-44",
        From45To54 => "45-54",
        From55To64 => "55-64",
        Over65 => "65+",
    }
);

vocabulary_enum!(
    Gender, "gender", {
        Male => "male",
        Female => "female",
    }
);

vocabulary_enum!(
    Ethnicity, "ethnicity", {
        White => "white",
        Black => "black",
        Asian => "asian",
        Hispanic => "hispanic",
        Other => "other",
    }
);

vocabulary_enum!(
    MaritalStatus, "marital status", {
        Single => "single",
        InRelationship => "in_relationship",
        Engaged => "engaged",
        Married => "married",
        Divorced => "divorced",
        Widowed => "widowed",
    }
);

vocabulary_enum!(
    /// The five Five-Factor Model traits.
    Trait, "trait", {
        Openness => "openness",
        Conscientiousness => "conscientiousness",
        Extraversion => "extraversion",
        Agreeableness => "agreeableness",
        Neuroticism => "neuroticism",
    }
);

/// Landmark decades, in [`AgeGroup`] order.
pub const AGE_DECADES: [u8; 6] = [20, 30, 40, 50, 60, 70];

/// Landmark-decade coding. 65+ maps to 70, continuing the decade pattern.
pub fn code_age(group: AgeGroup) -> u8 {
    AGE_DECADES[group.index()]
}

/// Inverse of [`code_age`].
pub fn age_group_for_decade(decade: u8) -> Option<AgeGroup> {
    AGE_DECADES
        .iter()
        .position(|d| *d == decade)
        .map(|i| AgeGroup::ALL[i])
}

/// 1 = female, 0 = male.
pub fn code_gender(gender: Gender) -> u8 {
    match gender {
        Gender::Male => 0,
        Gender::Female => 1,
    }
}

/// 0/1 vector with a single 1 at `category`'s position in `vocabulary`.
pub fn one_hot(category: &str, vocabulary: &[&str]) -> Result<Vec<u8>, CodingError> {
    let index = vocabulary
        .iter()
        .position(|v| *v == category)
        .ok_or_else(|| CodingError::UnknownCategory {
            kind: "category",
            value: category.to_string(),
        })?;
    let mut out = vec![0u8; vocabulary.len()];
    out[index] = 1;
    Ok(out)
}

/// Position of the single 1 in a valid one-hot vector.
pub fn one_hot_index(bits: &[u8]) -> Option<usize> {
    let mut found = None;
    for (i, b) in bits.iter().enumerate() {
        match (*b, found) {
            (0, _) => {}
            (1, None) => found = Some(i),
            _ => return None,
        }
    }
    found
}

pub const LIKERT_ITEM_MIN: i64 = 1;
pub const LIKERT_ITEM_MAX: i64 = 5;
pub const LIKERT_CODED_MAX: i64 = 4;
pub const TRAIT_MIN: u8 = 4;
pub const TRAIT_MAX: u8 = 20;

/// Sum of four 1..=5 items, reverse-keyed items contributing `6 - v`.
pub fn score_trait(items: [i64; 4], reverse: [bool; 4]) -> Result<u8, CodingError> {
    let mut total = 0i64;
    for (value, rev) in items.into_iter().zip(reverse) {
        if !(LIKERT_ITEM_MIN..=LIKERT_ITEM_MAX).contains(&value) {
            return Err(CodingError::OutOfRange {
                value,
                min: LIKERT_ITEM_MIN,
                max: LIKERT_ITEM_MAX,
            });
        }
        total += if rev { 6 - value } else { value };
    }
    Ok(total as u8)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraitScores {
    pub openness: u8,
    pub conscientiousness: u8,
    pub extraversion: u8,
    pub agreeableness: u8,
    pub neuroticism: u8,
}

impl TraitScores {
    pub fn get(&self, t: Trait) -> u8 {
        match t {
            Trait::Openness => self.openness,
            Trait::Conscientiousness => self.conscientiousness,
            Trait::Extraversion => self.extraversion,
            Trait::Agreeableness => self.agreeableness,
            Trait::Neuroticism => self.neuroticism,
        }
    }

    pub fn set(&mut self, t: Trait, value: u8) {
        match t {
            Trait::Openness => self.openness = value,
            Trait::Conscientiousness => self.conscientiousness = value,
            Trait::Extraversion => self.extraversion = value,
            Trait::Agreeableness => self.agreeableness = value,
            Trait::Neuroticism => self.neuroticism = value,
        }
    }

    fn all_in_range(&self) -> bool {
        Trait::ALL
            .iter()
            .all(|t| (TRAIT_MIN..=TRAIT_MAX).contains(&self.get(*t)))
    }
}

/// One Mini-IPIP item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionItem {
    pub id: String,
    pub prompt: String,
    #[serde(rename = "trait")]
    pub trait_: Trait,
    pub reverse: bool,
}

/// A single Likert question answered on the coded 0..=4 scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LikertQuestion {
    pub id: String,
    pub prompt: String,
    pub anchors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawQuestionnaire {
    pub version: String,
    pub item_anchors: Vec<String>,
    pub items: Vec<QuestionItem>,
    pub concern: LikertQuestion,
    pub satisfaction: LikertQuestion,
}

/// Questionnaire definition: items, trait assignment, reverse keys and anchors.
///
/// Validated so that every trait has exactly four items and item ids are unique.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawQuestionnaire", into = "RawQuestionnaire")]
pub struct Questionnaire {
    raw: RawQuestionnaire,
}

impl From<Questionnaire> for RawQuestionnaire {
    fn from(q: Questionnaire) -> Self {
        q.raw
    }
}

impl TryFrom<RawQuestionnaire> for Questionnaire {
    type Error = CodingError;

    fn try_from(raw: RawQuestionnaire) -> Result<Self, Self::Error> {
        Questionnaire::new(raw)
    }
}

impl Questionnaire {
    pub fn new(raw: RawQuestionnaire) -> Result<Self, CodingError> {
        let mut seen = BTreeMap::new();
        for item in &raw.items {
            if seen.insert(item.id.as_str(), ()).is_some() {
                return Err(CodingError::Questionnaire(format!(
                    "duplicate item id `{}`",
                    item.id
                )));
            }
        }
        for t in Trait::ALL {
            let count = raw.items.iter().filter(|i| i.trait_ == *t).count();
            if count != 4 {
                return Err(CodingError::Questionnaire(format!(
                    "trait {t} has {count} items, expected 4"
                )));
            }
        }
        if raw.item_anchors.len() as i64 != LIKERT_ITEM_MAX - LIKERT_ITEM_MIN + 1 {
            return Err(CodingError::Questionnaire(
                "item anchors must list 5 labels".into(),
            ));
        }
        for q in [&raw.concern, &raw.satisfaction] {
            if q.anchors.len() as i64 != LIKERT_CODED_MAX + 1 {
                return Err(CodingError::Questionnaire(format!(
                    "question `{}` must list 5 anchors",
                    q.id
                )));
            }
        }
        Ok(Self { raw })
    }

    pub fn version(&self) -> &str {
        &self.raw.version
    }

    pub fn items(&self) -> &[QuestionItem] {
        &self.raw.items
    }

    pub fn raw(&self) -> &RawQuestionnaire {
        &self.raw
    }

    /// The four items of `t`, in questionnaire order.
    pub fn trait_items(&self, t: Trait) -> [&QuestionItem; 4] {
        let mut it = self.raw.items.iter().filter(|i| i.trait_ == t);
        // Four items per trait is checked in `new`.
        core::array::from_fn(|_| it.next().expect("four items per trait"))
    }

    fn score(&self, t: Trait, answers: &BTreeMap<String, i64>) -> Result<u8, IntakeErrors> {
        let items = self.trait_items(t);
        let mut values = [0i64; 4];
        let mut errors = IntakeErrors::default();
        for (slot, item) in values.iter_mut().zip(items) {
            match answers.get(&item.id) {
                None => errors.push(item.id.clone(), "is required"),
                Some(v) if !(LIKERT_ITEM_MIN..=LIKERT_ITEM_MAX).contains(v) => errors.push(
                    item.id.clone(),
                    format!("out of range ({LIKERT_ITEM_MIN}..={LIKERT_ITEM_MAX}): {v}"),
                ),
                Some(v) => *slot = *v,
            }
        }
        errors.into_result()?;
        let reverse = items.map(|i| i.reverse);
        score_trait(values, reverse).map_err(|e| IntakeErrors::single(t.as_str(), e.to_string()))
    }
}

/// A field-level validation problem in an intake.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntakeError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for IntakeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[serde(transparent)]
pub struct IntakeErrors(pub Vec<IntakeError>);

impl fmt::Display for IntakeErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl IntakeErrors {
    pub fn single(field: impl Into<String>, message: impl Into<String>) -> Self {
        let mut e = Self::default();
        e.push(field, message);
        e
    }

    pub fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.0.push(IntakeError {
            field: field.into(),
            message: message.into(),
        });
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn fields(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|e| e.field.as_str())
    }

    fn into_result(self) -> Result<(), Self> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(self)
        }
    }

    fn absorb<T>(&mut self, r: Result<T, IntakeErrors>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.0.extend(e.0);
                None
            }
        }
    }
}

/// Questionnaire answers as submitted. Every field is optional on the wire so
/// that missing answers produce field-level errors rather than parse failures.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawIntake {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub age_group: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gender: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ethnicity: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marital_status: Option<String>,
    #[serde(default)]
    pub mini_ipip_items: BTreeMap<String, i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concern: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub satisfaction: Option<i64>,
}

fn required_category<T: FromStr<Err = CodingError>>(
    field: &'static str,
    value: &Option<String>,
) -> Result<T, IntakeErrors> {
    match value {
        None => Err(IntakeErrors::single(field, "is required")),
        Some(s) => s
            .parse()
            .map_err(|e: CodingError| IntakeErrors::single(field, e.to_string())),
    }
}

fn required_likert(field: &'static str, value: Option<i64>) -> Result<u8, IntakeErrors> {
    match value {
        None => Err(IntakeErrors::single(field, "is required")),
        Some(v) if (0..=LIKERT_CODED_MAX).contains(&v) => Ok(v as u8),
        Some(v) => Err(IntakeErrors::single(
            field,
            format!("out of range (0..={LIKERT_CODED_MAX}): {v}"),
        )),
    }
}

impl RawIntake {
    /// Codes the seven-question recommendation subset: age group, ethnicity,
    /// privacy concern and the four neuroticism items.
    pub fn code_for_recommendation(
        &self,
        questionnaire: &Questionnaire,
    ) -> Result<FeatureProfile, IntakeErrors> {
        let mut errors = IntakeErrors::default();
        let age = errors.absorb(required_category::<AgeGroup>("age_group", &self.age_group));
        let ethnicity = errors.absorb(required_category::<Ethnicity>("ethnicity", &self.ethnicity));
        let concern = errors.absorb(required_likert("concern", self.concern));
        let neuroticism =
            errors.absorb(questionnaire.score(Trait::Neuroticism, &self.mini_ipip_items));
        errors.into_result()?;
        Ok(FeatureProfile {
            age_decade: code_age(age.unwrap()),
            ethnicity: ethnicity.unwrap(),
            concern: concern.unwrap(),
            neuroticism: neuroticism.unwrap(),
        })
    }

    /// Codes a complete survey response (all demographics, all 20 items,
    /// concern). Satisfaction is returned separately when present.
    pub fn code_full(
        &self,
        questionnaire: &Questionnaire,
    ) -> Result<(CodedAttributes, Option<u8>), IntakeErrors> {
        let mut errors = IntakeErrors::default();
        let age = errors.absorb(required_category::<AgeGroup>("age_group", &self.age_group));
        let gender = errors.absorb(required_category::<Gender>("gender", &self.gender));
        let ethnicity = errors.absorb(required_category::<Ethnicity>("ethnicity", &self.ethnicity));
        let marital = errors.absorb(required_category::<MaritalStatus>(
            "marital_status",
            &self.marital_status,
        ));
        let concern = errors.absorb(required_likert("concern", self.concern));
        let satisfaction = match self.satisfaction {
            None => None,
            Some(v) => errors.absorb(required_likert("satisfaction", Some(v))),
        };
        let mut traits = TraitScores {
            openness: 0,
            conscientiousness: 0,
            extraversion: 0,
            agreeableness: 0,
            neuroticism: 0,
        };
        for t in Trait::ALL {
            if let Some(v) = errors.absorb(questionnaire.score(*t, &self.mini_ipip_items)) {
                traits.set(*t, v);
            }
        }
        errors.into_result()?;
        let coded = CodedAttributes {
            age_decade: code_age(age.unwrap()),
            gender_female: code_gender(gender.unwrap()),
            ethnicity_onehot: one_hot(ethnicity.unwrap().as_str(), Ethnicity::VOCABULARY)
                .expect("vocabulary member"),
            marital_onehot: one_hot(marital.unwrap().as_str(), MaritalStatus::VOCABULARY)
                .expect("vocabulary member"),
            traits,
            concern: concern.unwrap(),
        };
        Ok((coded, satisfaction))
    }
}

/// Coded attributes of one respondent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodedAttributes {
    pub age_decade: u8,
    pub gender_female: u8,
    pub ethnicity_onehot: Vec<u8>,
    pub marital_onehot: Vec<u8>,
    pub traits: TraitScores,
    pub concern: u8,
}

impl CodedAttributes {
    pub fn validate(&self) -> Result<(), CodingError> {
        let bad = |field, reason: String| Err(CodingError::Invalid { field, reason });
        if age_group_for_decade(self.age_decade).is_none() {
            return bad("age_decade", format!("{} is not a landmark decade", self.age_decade));
        }
        if self.gender_female > 1 {
            return bad("gender_female", format!("{} is not 0 or 1", self.gender_female));
        }
        if self.ethnicity_onehot.len() != Ethnicity::VOCABULARY.len()
            || one_hot_index(&self.ethnicity_onehot).is_none()
        {
            return bad("ethnicity_onehot", "not a valid one-hot vector".into());
        }
        if self.marital_onehot.len() != MaritalStatus::VOCABULARY.len()
            || one_hot_index(&self.marital_onehot).is_none()
        {
            return bad("marital_onehot", "not a valid one-hot vector".into());
        }
        if !self.traits.all_in_range() {
            return bad("traits", format!("scores must lie in {TRAIT_MIN}..={TRAIT_MAX}"));
        }
        if i64::from(self.concern) > LIKERT_CODED_MAX {
            return bad("concern", format!("out of range (0..=4): {}", self.concern));
        }
        Ok(())
    }

    /// Panics if the one-hot vector is invalid; call [`validate`](Self::validate) first.
    pub fn ethnicity(&self) -> Ethnicity {
        Ethnicity::ALL[one_hot_index(&self.ethnicity_onehot).expect("valid one-hot")]
    }

    pub fn profile(&self) -> FeatureProfile {
        FeatureProfile {
            age_decade: self.age_decade,
            ethnicity: self.ethnicity(),
            concern: self.concern,
            neuroticism: self.traits.neuroticism,
        }
    }
}

/// The attributes used for neighbor matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureProfile {
    pub age_decade: u8,
    pub ethnicity: Ethnicity,
    pub concern: u8,
    pub neuroticism: u8,
}

/// Min-max bounds used when normalizing features to `[0, 1]`.
pub const AGE_BOUNDS: (f64, f64) = (20.0, 70.0);
pub const CONCERN_BOUNDS: (f64, f64) = (0.0, 4.0);
pub const NEUROTICISM_BOUNDS: (f64, f64) = (4.0, 20.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationSpec {
    pub enabled: bool,
}

impl Default for NormalizationSpec {
    fn default() -> Self {
        Self { enabled: true }
    }
}

/// Component names of a [`FeatureVector`], in order.
pub const FEATURE_LAYOUT: [&str; 8] = [
    "age",
    "ethnicity_white",
    "ethnicity_black",
    "ethnicity_asian",
    "ethnicity_hispanic",
    "ethnicity_other",
    "concern",
    "neuroticism",
];

/// Layout: age, ethnicity one-hot (5), concern, neuroticism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub components: Vec<f64>,
}

fn scale(value: f64, (lo, hi): (f64, f64), enabled: bool) -> f64 {
    if enabled {
        (value - lo) / (hi - lo)
    } else {
        value
    }
}

pub fn build_feature_vector(
    profile: &FeatureProfile,
    norm: NormalizationSpec,
) -> Result<FeatureVector, CodingError> {
    if age_group_for_decade(profile.age_decade).is_none() {
        return Err(CodingError::Invalid {
            field: "age_decade",
            reason: format!("{} is not a landmark decade", profile.age_decade),
        });
    }
    if i64::from(profile.concern) > LIKERT_CODED_MAX {
        return Err(CodingError::Invalid {
            field: "concern",
            reason: format!("out of range (0..=4): {}", profile.concern),
        });
    }
    if !(TRAIT_MIN..=TRAIT_MAX).contains(&profile.neuroticism) {
        return Err(CodingError::Invalid {
            field: "neuroticism",
            reason: format!("out of range (4..=20): {}", profile.neuroticism),
        });
    }
    let mut components = Vec::with_capacity(FEATURE_LAYOUT.len());
    components.push(scale(f64::from(profile.age_decade), AGE_BOUNDS, norm.enabled));
    components.extend(
        Ethnicity::ALL
            .iter()
            .map(|e| if *e == profile.ethnicity { 1.0 } else { 0.0 }),
    );
    components.push(scale(f64::from(profile.concern), CONCERN_BOUNDS, norm.enabled));
    components.push(scale(
        f64::from(profile.neuroticism),
        NEUROTICISM_BOUNDS,
        norm.enabled,
    ));
    Ok(FeatureVector { components })
}

/// Coded attributes that are correlated against the privacy score and that
/// synthetic effects can be planted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Attribute {
    Trait(Trait),
    Age,
    Gender,
    Ethnicity(Ethnicity),
    Concern,
}

impl Attribute {
    /// Report order: traits, age, gender, ethnicity indicators, concern.
    pub fn all() -> Vec<Attribute> {
        let mut out: Vec<Attribute> = Trait::ALL.iter().map(|t| Attribute::Trait(*t)).collect();
        out.push(Attribute::Age);
        out.push(Attribute::Gender);
        out.extend(Ethnicity::ALL.iter().map(|e| Attribute::Ethnicity(*e)));
        out.push(Attribute::Concern);
        out
    }

    pub fn name(self) -> &'static str {
        match self {
            Attribute::Trait(t) => t.as_str(),
            Attribute::Age => "age",
            Attribute::Gender => "gender_female",
            Attribute::Ethnicity(Ethnicity::Other) => "other_ethnicity",
            Attribute::Ethnicity(e) => e.as_str(),
            Attribute::Concern => "concern",
        }
    }

    pub fn value(self, coded: &CodedAttributes) -> f64 {
        match self {
            Attribute::Trait(t) => f64::from(coded.traits.get(t)),
            Attribute::Age => f64::from(coded.age_decade),
            Attribute::Gender => f64::from(coded.gender_female),
            Attribute::Ethnicity(e) => f64::from(coded.ethnicity_onehot[e.index()]),
            Attribute::Concern => f64::from(coded.concern),
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Attribute {
    type Err = CodingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Attribute::all()
            .into_iter()
            .find(|a| a.name() == s || (s == "gender" && *a == Attribute::Gender))
            .ok_or_else(|| CodingError::UnknownCategory {
                kind: "attribute",
                value: s.to_string(),
            })
    }
}

impl Serialize for Attribute {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Attribute {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
