//! Core algorithms for personalized privacy-settings recommendation.
//!
//! Everything in this crate is pure computation over in-memory values and
//! builds under `#![no_std]` with `alloc`. File formats, CSV ingestion, the
//! HTTP service and the command-line front end live in the `privset` crate.
//!
//! - [`schema`]: the catalog of settings, their ordered choices, grades and weights
//! - [`coding`]: questionnaire answers to coded attributes and kNN feature vectors
//! - [`scoring`]: weighted 0..10 privacy score and color bands
//! - [`dataset`]: respondent records, datasets and the satisfaction filter
//! - [`synth`]: seeded synthetic respondent generator with planted effects
//! - [`knn`]: nearest-neighbor and popular-choice recommenders
//! - [`stats`]: Pearson correlation, t-test p-values, group means
//! - [`eval`]: A/B session assignment and feedback tallies

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod coding;
pub mod dataset;
pub mod eval;
pub mod knn;
pub mod rng;
pub mod schema;
pub mod scoring;
pub mod stats;
pub mod synth;

pub use coding::{
    Attribute, CodedAttributes, FeatureProfile, FeatureVector, NormalizationSpec, Questionnaire,
    RawIntake, TraitScores,
};
pub use dataset::{Dataset, Provenance, RespondentRecord};
pub use knn::{KnnConfig, Recommendation, RecommendationMode};
pub use schema::{SettingChoice, SettingDefinition, SettingsSchema};
pub use scoring::{ColorBand, PrivacyScore, SettingsChoiceVector};
