//! A/B session assignment and feedback tallies.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::knn::RecommendationMode;
use crate::rng::SampleRng;

pub const RATING_MAX: u8 = 4;

/// Ratings at or above this count as "somewhat or very".
pub const FAVORABLE_AT_LEAST: u8 = 3;
/// Ratings at or below this count as "not really or not at all".
pub const UNFAVORABLE_AT_MOST: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{field} out of range (0..=4): {value}")]
pub struct RatingError {
    pub field: &'static str,
    pub value: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Question {
    Appropriate,
    Private,
    IntendUse,
    PreferTool,
}

impl Question {
    pub const ALL: [Question; 4] = [
        Question::Appropriate,
        Question::Private,
        Question::IntendUse,
        Question::PreferTool,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Question::Appropriate => "appropriate",
            Question::Private => "private",
            Question::IntendUse => "intend_use",
            Question::PreferTool => "prefer_tool",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratings {
    pub appropriate: u8,
    pub private: u8,
    pub intend_use: u8,
    pub prefer_tool: u8,
}

impl Ratings {
    /// Builds ratings from raw integers, rejecting anything outside 0..=4.
    pub fn new(appropriate: i64, private: i64, intend_use: i64, prefer_tool: i64) -> Result<Self, RatingError> {
        let check = |field: &'static str, value: i64| {
            if (0..=i64::from(RATING_MAX)).contains(&value) {
                Ok(value as u8)
            } else {
                Err(RatingError { field, value })
            }
        };
        Ok(Self {
            appropriate: check("appropriate", appropriate)?,
            private: check("private", private)?,
            intend_use: check("intend_use", intend_use)?,
            prefer_tool: check("prefer_tool", prefer_tool)?,
        })
    }

    pub fn get(&self, q: Question) -> u8 {
        match q {
            Question::Appropriate => self.appropriate,
            Question::Private => self.private,
            Question::IntendUse => self.intend_use,
            Question::PreferTool => self.prefer_tool,
        }
    }

    pub fn validate(&self) -> Result<(), RatingError> {
        for q in Question::ALL {
            let v = self.get(q);
            if v > RATING_MAX {
                return Err(RatingError {
                    field: q.as_str(),
                    value: i64::from(v),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackRecord {
    pub session_id: String,
    pub mode: RecommendationMode,
    pub ratings: Ratings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionAssignment {
    pub session_id: String,
    pub mode: RecommendationMode,
    /// Unix seconds.
    pub created_at: u64,
}

/// Draws a uniform mode and a random 128-bit id for each new session.
pub struct SessionAssigner {
    rng: SampleRng,
}

impl SessionAssigner {
    pub fn seeded(seed: u64) -> Self {
        Self {
            rng: SampleRng::seeded(seed),
        }
    }

    pub fn from_rng(rng: ChaCha8Rng) -> Self {
        Self {
            rng: SampleRng::from_rng(rng),
        }
    }

    pub fn assign(&mut self, created_at: u64) -> SessionAssignment {
        let mode = if self.rng.coin() {
            RecommendationMode::Knn
        } else {
            RecommendationMode::Popular
        };
        let hi = self.rng.next_u64();
        let lo = self.rng.next_u64();
        SessionAssignment {
            session_id: format!("{hi:016x}{lo:016x}"),
            mode,
            created_at,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QuestionTally {
    pub n: usize,
    pub favorable: usize,
    pub unfavorable: usize,
    pub favorable_fraction: f64,
    pub unfavorable_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub mode: RecommendationMode,
    pub n: usize,
    pub questions: BTreeMap<Question, QuestionTally>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub total: usize,
    pub modes: Vec<ModeSummary>,
}

/// Per-mode, per-question tallies. Both modes always appear; an empty
/// mode reports zero counts and zero fractions.
pub fn eval_summary<'a, I>(records: I) -> EvalSummary
where
    I: IntoIterator<Item = &'a FeedbackRecord>,
{
    let modes = [RecommendationMode::Knn, RecommendationMode::Popular];
    let mut summaries: Vec<ModeSummary> = modes
        .iter()
        .map(|&mode| ModeSummary {
            mode,
            n: 0,
            questions: Question::ALL
                .iter()
                .map(|&q| (q, QuestionTally::default()))
                .collect(),
        })
        .collect();
    let mut total = 0;
    for record in records {
        total += 1;
        let summary = summaries
            .iter_mut()
            .find(|s| s.mode == record.mode)
            .expect("every mode has a summary");
        summary.n += 1;
        for (q, tally) in summary.questions.iter_mut() {
            let v = record.ratings.get(*q);
            tally.n += 1;
            if v >= FAVORABLE_AT_LEAST {
                tally.favorable += 1;
            }
            if v <= UNFAVORABLE_AT_MOST {
                tally.unfavorable += 1;
            }
        }
    }
    for tally in summaries.iter_mut().flat_map(|s| s.questions.values_mut()) {
        if tally.n > 0 {
            tally.favorable_fraction = tally.favorable as f64 / tally.n as f64;
            tally.unfavorable_fraction = tally.unfavorable as f64 / tally.n as f64;
        }
    }
    EvalSummary {
        total,
        modes: summaries,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn fb(id: &str, mode: RecommendationMode, appropriate: u8) -> FeedbackRecord {
        FeedbackRecord {
            session_id: id.to_string(),
            mode,
            ratings: Ratings {
                appropriate,
                private: 2,
                intend_use: 2,
                prefer_tool: 2,
            },
            comment: None,
        }
    }

    #[test]
    fn ratings_range() {
        assert!(Ratings::new(3, 3, 2, 3).is_ok());
        let err = Ratings::new(3, 7, 2, 3).unwrap_err();
        assert_eq!(err.field, "private");
        assert!(Ratings::new(-1, 0, 0, 0).is_err());
        let bad = Ratings {
            appropriate: 0,
            private: 0,
            intend_use: 0,
            prefer_tool: 5,
        };
        assert_eq!(bad.validate().unwrap_err().field, "prefer_tool");
    }

    #[test]
    fn four_of_five_favorable() {
        let k = RecommendationMode::Knn;
        let records = vec![fb("a", k, 3), fb("b", k, 4), fb("c", k, 3), fb("d", k, 4), fb("e", k, 1)];
        let s = eval_summary(&records);
        let t = &s.modes[0].questions[&Question::Appropriate];
        assert_eq!((t.n, t.favorable, t.unfavorable), (5, 4, 1));
        assert_eq!(t.favorable_fraction, 0.8);
        assert_eq!(t.unfavorable_fraction, 0.2);
        assert_eq!(s.modes[1].n, 0);
    }

    #[test]
    fn empty_is_all_zero() {
        let s = eval_summary(&[]);
        assert_eq!(s.total, 0);
        assert_eq!(s.modes.len(), 2);
        for m in &s.modes {
            for t in m.questions.values() {
                assert_eq!(*t, QuestionTally::default());
            }
        }
    }

    #[test]
    fn mixed_modes_partition() {
        let records = vec![
            fb("a", RecommendationMode::Knn, 4),
            fb("b", RecommendationMode::Popular, 0),
            fb("c", RecommendationMode::Popular, 2),
        ];
        let s = eval_summary(&records);
        assert_eq!(s.total, 3);
        assert_eq!(s.modes.iter().map(|m| m.n).sum::<usize>(), 3);
        assert_eq!(s.modes[1].n, 2);
    }

    #[test]
    fn seeded_assignment_is_deterministic() {
        let mut a = SessionAssigner::seeded(1);
        let mut b = SessionAssigner::seeded(1);
        for _ in 0..20 {
            assert_eq!(a.assign(0), b.assign(0));
        }
        let x = a.assign(0);
        let y = a.assign(0);
        assert_ne!(x.session_id, y.session_id);
        assert_eq!(x.session_id.len(), 32);
    }

    #[test]
    fn assignment_is_balanced() {
        let mut a = SessionAssigner::seeded(99);
        let knn = (0..10_000)
            .filter(|_| a.assign(0).mode == RecommendationMode::Knn)
            .count();
        assert!((4_800..=5_200).contains(&knn), "{knn}");
    }
}
