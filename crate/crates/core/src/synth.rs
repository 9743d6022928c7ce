//! Seeded synthetic respondents with planted attribute/score effects.
//!
//! Generation model, per record:
//!
//! 1. Demographics are drawn from fixed marginals (age and gender follow the
//!    survey sample; ethnicity, marital status and concern use documented
//!    stand-in weights). Each trait score is the sum of four uniform 1..=5 items.
//! 2. A latent privacy propensity is formed as
//!    `latent = Σ sign·strength·z(attribute) + N(0, 1)`, where `z` standardizes
//!    the attribute by its population mean and standard deviation under the
//!    marginals above.
//! 3. For every setting the target grade is
//!    `BASE_GRADE + LATENT_SPREAD·latent + offset(setting) + N(0, SETTING_NOISE)`;
//!    it is scaled to the setting's ordinal range, rounded, and clamped.
//!
//! Exactly `round(n · dissatisfied_fraction)` records get satisfaction 0;
//! the rest draw from 1..=4.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::coding::{
    Attribute, CodedAttributes, Ethnicity, MaritalStatus, Trait, TraitScores, AGE_DECADES,
};
use crate::dataset::{Dataset, DatasetError, Provenance, RespondentRecord};
use crate::rng::SampleRng;
use crate::schema::SettingsSchema;
use crate::scoring::SettingsChoiceVector;

/// Survey-sample age marginals for 18-24 .. 65+.
pub const AGE_WEIGHTS: [f64; 6] = [0.273, 0.501, 0.144, 0.047, 0.031, 0.004];
pub const FEMALE_FRACTION: f64 = 0.377;
/// Stand-in weights, in [`Ethnicity`] order.
pub const ETHNICITY_WEIGHTS: [f64; 5] = [0.74, 0.08, 0.08, 0.06, 0.04];
/// Stand-in weights, in [`MaritalStatus`] order.
pub const MARITAL_WEIGHTS: [f64; 6] = [0.45, 0.15, 0.05, 0.28, 0.06, 0.01];
/// Stand-in weights for concern 0..=4.
pub const CONCERN_WEIGHTS: [f64; 5] = [0.08, 0.17, 0.30, 0.27, 0.18];
/// Satisfaction 1..=4 among records that are not dissatisfied.
pub const SATISFIED_WEIGHTS: [f64; 4] = [0.15, 0.35, 0.35, 0.15];

pub const BASE_GRADE: f64 = 0.37;
pub const LATENT_SPREAD: f64 = 0.15;
pub const SETTING_OFFSET_SD: f64 = 0.10;
pub const SETTING_NOISE: f64 = 0.22;

/// Planted strengths are clamped to this magnitude; beyond it nearly every
/// grade saturates at 0 or 1.
pub const MAX_STRENGTH: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("dissatisfied_fraction {0} outside [0, 1]")]
    Fraction(f64),
    #[error("bad plant spec `{spec}`: {reason}")]
    PlantSpec { spec: String, reason: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Positive => 1.0,
            Direction::Negative => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantedEffect {
    pub attribute: Attribute,
    pub direction: Direction,
    /// Latent-propensity units per attribute standard deviation.
    pub strength: f64,
}

impl fmt::Display for PlantedEffect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = match self.direction {
            Direction::Positive => '+',
            Direction::Negative => '-',
        };
        write!(f, "{}:{}:{}", self.attribute, d, self.strength)
    }
}

/// Parses `attribute:direction:strength`, e.g. `concern:+:0.3`.
impl FromStr for PlantedEffect {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let fail = |reason: &str| SynthError::PlantSpec {
            spec: s.into(),
            reason: reason.into(),
        };
        let mut parts = s.split(':');
        let (Some(attr), Some(dir), Some(strength), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(fail("expected attribute:direction:strength"));
        };
        let attribute = attr
            .parse::<Attribute>()
            .map_err(|_| fail("unknown attribute"))?;
        let direction = match dir.trim() {
            "+" | "pos" | "positive" => Direction::Positive,
            "-" | "neg" | "negative" => Direction::Negative,
            _ => return Err(fail("direction must be + or -")),
        };
        let strength = strength
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite() && *v >= 0.0)
            .ok_or_else(|| fail("strength must be a nonnegative number"))?;
        Ok(Self {
            attribute,
            direction,
            strength,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub n: usize,
    pub dissatisfied_fraction: f64,
    pub planted_effects: Vec<PlantedEffect>,
}

impl SynthConfig {
    pub fn null(seed: u64, n: usize) -> Self {
        Self {
            seed,
            n,
            dissatisfied_fraction: REFERENCE_DISSATISFIED_FRACTION,
            planted_effects: Vec::new(),
        }
    }

    /// The published correlation sign pattern: neuroticism +, age -, white -,
    /// asian +, concern + (concern tuned toward r ≈ 0.27 at n = 451).
    pub fn reference(seed: u64, n: usize) -> Self {
        Self {
            planted_effects: reference_effects(),
            ..Self::null(seed, n)
        }
    }
}

/// 15.5% dissatisfied, so the default filter keeps 84.5%.
pub const REFERENCE_DISSATISFIED_FRACTION: f64 = 0.155;

pub fn reference_effects() -> Vec<PlantedEffect> {
    let e = |attribute, direction, strength| PlantedEffect {
        attribute,
        direction,
        strength,
    };
    vec![
        e(Attribute::Trait(Trait::Neuroticism), Direction::Positive, 0.22),
        e(Attribute::Age, Direction::Negative, 0.22),
        e(Attribute::Ethnicity(Ethnicity::White), Direction::Negative, 0.15),
        e(Attribute::Ethnicity(Ethnicity::Asian), Direction::Positive, 0.15),
        e(Attribute::Concern, Direction::Positive, 0.33),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthesized {
    pub dataset: Dataset,
    pub warnings: Vec<String>,
}

fn categorical_moments(values: &[f64], weights: &[f64]) -> (f64, f64) {
    let total: f64 = weights.iter().sum();
    let mean = values.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / total;
    let var = values
        .iter()
        .zip(weights)
        .map(|(v, w)| (v - mean) * (v - mean) * w)
        .sum::<f64>()
        / total;
    (mean, libm::sqrt(var))
}

fn bernoulli_moments(p: f64) -> (f64, f64) {
    (p, libm::sqrt(p * (1.0 - p)))
}

/// Population mean and standard deviation of an attribute under the
/// generator's marginals.
pub fn attribute_moments(attribute: Attribute) -> (f64, f64) {
    match attribute {
        // Sum of four independent uniform 1..=5 items: mean 12, variance 4 × 2.
        Attribute::Trait(_) => (12.0, libm::sqrt(8.0)),
        Attribute::Age => {
            let decades = AGE_DECADES.map(f64::from);
            categorical_moments(&decades, &AGE_WEIGHTS)
        }
        Attribute::Gender => bernoulli_moments(FEMALE_FRACTION),
        Attribute::Ethnicity(e) => {
            let total: f64 = ETHNICITY_WEIGHTS.iter().sum();
            bernoulli_moments(ETHNICITY_WEIGHTS[e.index()] / total)
        }
        Attribute::Concern => categorical_moments(&[0.0, 1.0, 2.0, 3.0, 4.0], &CONCERN_WEIGHTS),
    }
}

fn record_id(i: usize, n: usize) -> String {
    let width = n.max(1).ilog10() as usize + 1;
    format!("S{:0width$}", i + 1, width = width.max(5))
}

pub fn synth_generate(
    config: &SynthConfig,
    schema: &SettingsSchema,
) -> Result<Synthesized, SynthError> {
    if !(0.0..=1.0).contains(&config.dissatisfied_fraction) {
        return Err(SynthError::Fraction(config.dissatisfied_fraction));
    }
    let mut warnings = Vec::new();
    let effects: Vec<(Attribute, f64, f64, f64)> = config
        .planted_effects
        .iter()
        .map(|e| {
            let mut strength = e.strength;
            if strength > MAX_STRENGTH {
                warnings.push(format!(
                    "strength {} for {} clamped to {MAX_STRENGTH}",
                    e.strength, e.attribute
                ));
                strength = MAX_STRENGTH;
            }
            let (mean, sd) = attribute_moments(e.attribute);
            (e.attribute, e.direction.sign() * strength, mean, sd)
        })
        .collect();

    let mut rng = SampleRng::seeded(config.seed);
    let offsets: Vec<f64> = schema
        .settings()
        .iter()
        .map(|_| SETTING_OFFSET_SD * rng.normal())
        .collect();

    let n = config.n;
    let dissatisfied = libm::round(n as f64 * config.dissatisfied_fraction) as usize;
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    let mut is_dissatisfied = vec![false; n];
    for i in order.into_iter().take(dissatisfied) {
        is_dissatisfied[i] = true;
    }

    let mut records = Vec::with_capacity(n);
    for (i, dissatisfied) in is_dissatisfied.into_iter().enumerate() {
        let age = rng.categorical(&AGE_WEIGHTS);
        let female = rng.unit() < FEMALE_FRACTION;
        let ethnicity = rng.categorical(&ETHNICITY_WEIGHTS);
        let marital = rng.categorical(&MARITAL_WEIGHTS);
        let mut traits = TraitScores {
            openness: 0,
            conscientiousness: 0,
            extraversion: 0,
            agreeableness: 0,
            neuroticism: 0,
        };
        for t in Trait::ALL {
            let score: u64 = (0..4).map(|_| 1 + rng.below(5)).sum();
            traits.set(*t, score as u8);
        }
        let concern = rng.categorical(&CONCERN_WEIGHTS) as u8;
        let satisfaction = if dissatisfied {
            0
        } else {
            1 + rng.categorical(&SATISFIED_WEIGHTS) as u8
        };

        let mut ethnicity_onehot = vec![0u8; Ethnicity::ALL.len()];
        ethnicity_onehot[ethnicity] = 1;
        let mut marital_onehot = vec![0u8; MaritalStatus::ALL.len()];
        marital_onehot[marital] = 1;
        let coded = CodedAttributes {
            age_decade: AGE_DECADES[age],
            gender_female: u8::from(female),
            ethnicity_onehot,
            marital_onehot,
            traits,
            concern,
        };

        let latent = effects
            .iter()
            .map(|(attr, coef, mean, sd)| coef * (attr.value(&coded) - mean) / sd)
            .sum::<f64>()
            + rng.normal();
        let ordinals: Vec<usize> = schema
            .settings()
            .iter()
            .zip(&offsets)
            .map(|(setting, offset)| {
                let grade =
                    BASE_GRADE + LATENT_SPREAD * latent + offset + SETTING_NOISE * rng.normal();
                let max = setting.max_ordinal() as f64;
                libm::round(grade * max).clamp(0.0, max) as usize
            })
            .collect();

        records.push(RespondentRecord {
            id: record_id(i, n),
            coded,
            satisfaction,
            choices: SettingsChoiceVector::from_ordinals(schema, &ordinals)
                .expect("ordinals clamped to range"),
        });
    }

    let dataset = Dataset::new(records, schema, Provenance::Synthetic { seed: config.seed })?;
    Ok(Synthesized { dataset, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::filter_satisfied;
    use crate::schema::default_schema;

    #[test]
    fn deterministic_in_seed() {
        let schema = default_schema();
        let a = synth_generate(&SynthConfig::reference(42, 200), &schema).unwrap();
        let b = synth_generate(&SynthConfig::reference(42, 200), &schema).unwrap();
        assert_eq!(a, b);
        let c = synth_generate(&SynthConfig::reference(43, 200), &schema).unwrap();
        assert_ne!(a.dataset, c.dataset);
    }

    #[test]
    fn exact_dissatisfied_quota() {
        let schema = default_schema();
        let cfg = SynthConfig::null(9, 1000);
        let d = synth_generate(&cfg, &schema).unwrap().dataset;
        assert_eq!(d.records().iter().filter(|r| r.satisfaction == 0).count(), 155);
        assert_eq!(filter_satisfied(&d, 0).len(), 845);
    }

    #[test]
    fn ids_sort_in_generation_order() {
        assert_eq!(record_id(0, 451), "S00001");
        assert_eq!(record_id(450, 451), "S00451");
        assert_eq!(record_id(99_999, 100_000), "S100000");
        assert!(record_id(9, 100_000) < record_id(10, 100_000));
    }

    #[test]
    fn excessive_strength_clamped_with_warning() {
        let schema = default_schema();
        let mut cfg = SynthConfig::null(1, 20);
        cfg.planted_effects.push("concern:+:9".parse().unwrap());
        let out = synth_generate(&cfg, &schema).unwrap();
        assert_eq!(out.warnings.len(), 1);
        assert!(out.warnings[0].contains("clamped"));
    }

    #[test]
    fn bad_inputs() {
        let schema = default_schema();
        let mut cfg = SynthConfig::null(1, 20);
        cfg.dissatisfied_fraction = 1.5;
        assert!(matches!(
            synth_generate(&cfg, &schema),
            Err(SynthError::Fraction(_))
        ));
        for bad in ["concern:+:bogus", "concern:+", "height:+:0.2", "concern:?:0.2", "concern:+:-1"] {
            assert!(bad.parse::<PlantedEffect>().is_err(), "{bad}");
        }
        let ok: PlantedEffect = "white:-:0.15".parse().unwrap();
        assert_eq!(ok.attribute, Attribute::Ethnicity(Ethnicity::White));
        assert_eq!(ok.direction, Direction::Negative);
    }

    #[test]
    fn empty_dataset() {
        let schema = default_schema();
        let d = synth_generate(&SynthConfig::null(1, 0), &schema).unwrap().dataset;
        assert!(d.is_empty());
    }

    #[test]
    fn attribute_moments_match_marginals() {
        let (m, s) = attribute_moments(Attribute::Trait(Trait::Openness));
        assert_eq!(m, 12.0);
        assert!((s * s - 8.0).abs() < 1e-12);
        let (m, _) = attribute_moments(Attribute::Gender);
        assert_eq!(m, FEMALE_FRACTION);
        let (m, _) = attribute_moments(Attribute::Age);
        // 0.273·20 + 0.501·30 + 0.144·40 + 0.047·50 + 0.031·60 + 0.004·70
        assert!((m - 30.74).abs() < 1e-9, "{m}");
    }
}
