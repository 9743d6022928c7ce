//! Correlation analysis between coded attributes and privacy scores.
//!
//! Significance uses the usual t-transform of a Pearson coefficient,
//! `t = r·√((n−2)/(1−r²))` with `n − 2` degrees of freedom. The two-tailed
//! tail probability is evaluated as a regularized incomplete beta function,
//! `p = I_{1−r²}((n−2)/2, 1/2)`, which avoids forming `t` at all.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::coding::{age_group_for_decade, Attribute};
use crate::dataset::Dataset;
use crate::schema::SettingsSchema;
use crate::scoring::{compensated_sum, record_scores, ScoringError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 3 observations, have {0}")]
    TooFewObservations(usize),
    #[error("correlation undefined: {0} series is constant")]
    ConstantSeries(&'static str),
    #[error("correlation {0} outside [-1, 1]")]
    InvalidCorrelation(f64),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("unknown grouping attribute `{0}` (expected age_decade or concern)")]
    UnknownAttribute(String),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
}

/// Pearson product-moment correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::TooFewObservations(n));
    }
    let mx = compensated_sum(x.iter().copied()) / n as f64;
    let my = compensated_sum(y.iter().copied()) / n as f64;
    let sxx = compensated_sum(x.iter().map(|v| (v - mx) * (v - mx)));
    let syy = compensated_sum(y.iter().map(|v| (v - my) * (v - my)));
    if sxx == 0.0 {
        return Err(StatsError::ConstantSeries("x"));
    }
    if syy == 0.0 {
        return Err(StatsError::ConstantSeries("y"));
    }
    let sxy = compensated_sum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

const CF_MAX_ITER: usize = 10_000;
const CF_EPS: f64 = 1e-16;
const CF_TINY: f64 = 1e-300;

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let guard = |v: f64| if v.abs() < CF_TINY { CF_TINY } else { v };
    let mut c = 1.0;
    let mut d = 1.0 / guard(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / guard(1.0 + aa * d);
        c = guard(1.0 + aa / c);
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / guard(1.0 + aa * d);
        c = guard(1.0 + aa / c);
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < CF_EPS {
            break;
        }
    }
    h
}

fn ln_beta(a: f64, b: f64) -> f64 {
    libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b)
}

/// Regularized incomplete beta `I_x(a, b)`, taking `x` together with its
/// complement `y = 1 − x` so callers can pass an exact complement.
pub fn regularized_incomplete_beta(x: f64, y: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    let ln_x = if x > 0.5 { libm::log1p(-y) } else { libm::log(x) };
    let ln_y = if y > 0.5 { libm::log1p(-x) } else { libm::log(y) };
    let front = libm::exp(a * ln_x + b * ln_y - ln_beta(a, b));
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - front * beta_continued_fraction(y, b, a) / b
    }
}

/// Two-tailed p-value of a Pearson coefficient `r` over `n` observations.
pub fn p_value(r: f64, n: usize) -> Result<f64, StatsError> {
    if n < 3 {
        return Err(StatsError::TooFewObservations(n));
    }
    if !(-1.0..=1.0).contains(&r) {
        return Err(StatsError::InvalidCorrelation(r));
    }
    if r.abs() == 1.0 {
        return Ok(0.0);
    }
    if r == 0.0 {
        return Ok(1.0);
    }
    let df = (n - 2) as f64;
    let x = (1.0 - r) * (1.0 + r);
    let y = r * r;
    Ok(regularized_incomplete_beta(x, y, df / 2.0, 0.5).clamp(0.0, 1.0))
}

/// `**` at p ≤ 0.01, `*` at p ≤ 0.05, empty otherwise.
pub fn significance_stars(p: f64) -> &'static str {
    if p <= 0.01 {
        "**"
    } else if p <= 0.05 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub attribute: Attribute,
    pub r: f64,
    pub p: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum CorrelationEntry {
    Computed(CorrelationResult),
    Skipped { attribute: Attribute, reason: String },
}

impl CorrelationEntry {
    pub fn attribute(&self) -> Attribute {
        match self {
            CorrelationEntry::Computed(c) => c.attribute,
            CorrelationEntry::Skipped { attribute, .. } => *attribute,
        }
    }

    pub fn result(&self) -> Option<&CorrelationResult> {
        match self {
            CorrelationEntry::Computed(c) => Some(c),
            CorrelationEntry::Skipped { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub n: usize,
    pub entries: Vec<CorrelationEntry>,
}

impl CorrelationReport {
    pub fn get(&self, attribute: Attribute) -> Option<&CorrelationEntry> {
        self.entries.iter().find(|e| e.attribute() == attribute)
    }
}

/// Correlates every attribute from [`Attribute::all`] with the total score.
/// Attributes without variance are reported as skipped.
pub fn correlation_report(
    dataset: &Dataset,
    schema: &SettingsSchema,
) -> Result<CorrelationReport, StatsError> {
    if dataset.is_empty() {
        return Err(StatsError::EmptyDataset);
    }
    let scores = record_scores(dataset.records(), schema)?;
    let n = scores.len();
    let entries = Attribute::all()
        .into_iter()
        .map(|attribute| {
            let values: Vec<f64> = dataset
                .records()
                .iter()
                .map(|r| attribute.value(&r.coded))
                .collect();
            let skipped = |reason: &str| CorrelationEntry::Skipped {
                attribute,
                reason: reason.to_string(),
            };
            match pearson(&values, &scores) {
                Ok(r) => {
                    let p = p_value(r, n).expect("n ≥ 3 and |r| ≤ 1");
                    CorrelationEntry::Computed(CorrelationResult { attribute, r, p, n })
                }
                Err(StatsError::TooFewObservations(_)) => skipped("fewer than 3 records"),
                Err(StatsError::ConstantSeries("x")) => skipped("constant attribute"),
                Err(StatsError::ConstantSeries(_)) => skipped("constant privacy score"),
                Err(e) => skipped(&e.to_string()),
            }
        })
        .collect();
    Ok(CorrelationReport { n, entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupingAttribute {
    AgeDecade,
    Concern,
}

impl FromStr for GroupingAttribute {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "age_decade" | "age" => Ok(Self::AgeDecade),
            "concern" => Ok(Self::Concern),
            other => Err(StatsError::UnknownAttribute(other.into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMean {
    pub label: String,
    pub count: usize,
    pub mean_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMeansReport {
    pub attribute: GroupingAttribute,
    pub groups: Vec<GroupMean>,
}

/// Groups with fewer records than this in the 65+ bracket are folded into 55-64.
pub const OLDEST_GROUP_MERGE_BELOW: usize = 5;

/// Mean total score per discrete attribute value, ascending by value.
pub fn group_means(
    dataset: &Dataset,
    schema: &SettingsSchema,
    attribute: GroupingAttribute,
) -> Result<GroupMeansReport, StatsError> {
    if dataset.is_empty() {
        return Err(StatsError::EmptyDataset);
    }
    let scores = record_scores(dataset.records(), schema)?;
    let mut buckets: BTreeMap<u8, Vec<f64>> = BTreeMap::new();
    for (record, score) in dataset.records().iter().zip(scores) {
        let key = match attribute {
            GroupingAttribute::AgeDecade => record.coded.age_decade,
            GroupingAttribute::Concern => record.coded.concern,
        };
        buckets.entry(key).or_default().push(score);
    }

    let mut labelled: Vec<(String, Vec<f64>)> = Vec::new();
    match attribute {
        GroupingAttribute::Concern => {
            labelled.extend(buckets.into_iter().map(|(k, v)| (k.to_string(), v)));
        }
        GroupingAttribute::AgeDecade => {
            let merge = buckets
                .get(&70)
                .is_some_and(|v| v.len() < OLDEST_GROUP_MERGE_BELOW);
            let mut oldest = Vec::new();
            for (decade, values) in buckets {
                if merge && decade >= 60 {
                    oldest.extend(values);
                    continue;
                }
                let label = age_group_for_decade(decade)
                    .map(|g| g.as_str().to_string())
                    .unwrap_or_else(|| format!("{decade}"));
                labelled.push((label, values));
            }
            if merge {
                labelled.push(("55+".into(), oldest));
            }
        }
    }

    let groups = labelled
        .into_iter()
        .map(|(label, values)| GroupMean {
            label,
            count: values.len(),
            mean_score: compensated_sum(values.iter().copied()) / values.len() as f64,
        })
        .collect();
    Ok(GroupMeansReport { attribute, groups })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::tests::record;
    use crate::dataset::Provenance;
    use crate::schema::default_schema;
    use alloc::vec;
    use alloc::vec::Vec;

    #[test]
    fn pearson_examples() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        // cov = 4, var_x = var_y = 5 (sums of squares) -> 4/5.
        assert!((pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn pearson_errors() {
        assert_eq!(
            pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]),
            Err(StatsError::LengthMismatch(3, 2))
        );
        assert_eq!(
            pearson(&[1.0, 2.0], &[1.0, 2.0]),
            Err(StatsError::TooFewObservations(2))
        );
        assert_eq!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(StatsError::ConstantSeries("x"))
        );
    }

    #[test]
    fn p_value_edges() {
        assert_eq!(p_value(0.0, 100).unwrap(), 1.0);
        assert_eq!(p_value(1.0, 10).unwrap(), 0.0);
        assert_eq!(p_value(-1.0, 10).unwrap(), 0.0);
        assert!(p_value(0.5, 2).is_err());
        assert!(p_value(1.5, 20).is_err());
        assert!(p_value(f64::NAN, 20).is_err());
    }

    #[test]
    fn p_value_closed_forms() {
        // n = 3 (one degree of freedom): p = 1 − (2/π)·asin|r|.
        for r in [0.1, 0.5, 0.9, -0.3] {
            let expected = 1.0 - 2.0 / core::f64::consts::PI * libm::asin(libm::fabs(r));
            assert!((p_value(r, 3).unwrap() - expected).abs() < 1e-13, "{r}");
        }
        // n = 4 (two degrees of freedom): p = 1 − |r|.
        for r in [0.1, 0.5, 0.9, -0.7] {
            assert!((p_value(r, 4).unwrap() - (1.0 - libm::fabs(r))).abs() < 1e-13, "{r}");
        }
    }

    #[test]
    fn p_value_relative_accuracy() {
        // 40-digit references.
        let cases = [
            (0.27, 451, 5.657_723_890_325_687e-9),
            (0.09, 451, 0.056_148_450_386_364_77),
            (0.5, 30, 0.004_899_933_667_068_09),
        ];
        for (r, n, want) in cases {
            let got = p_value(r, n).unwrap();
            assert!(((got - want) / want).abs() < 1e-10, "{r} {n}: {got}");
        }
    }

    #[test]
    fn stars_follow_thresholds() {
        assert_eq!(significance_stars(0.01), "**");
        assert_eq!(significance_stars(0.04), "*");
        assert_eq!(significance_stars(0.05), "*");
        assert_eq!(significance_stars(0.051), "");
    }

    #[test]
    fn identical_records_skip_everything() {
        let schema = default_schema();
        let records = (0..10).map(|i| record(&alloc::format!("r{i}"), 2, 1)).collect();
        let d = Dataset::new(records, &schema, Provenance::Ingested).unwrap();
        let report = correlation_report(&d, &schema).unwrap();
        assert_eq!(report.entries.len(), Attribute::all().len());
        assert!(report.entries.iter().all(|e| e.result().is_none()));
    }

    #[test]
    fn empty_dataset_errors() {
        let schema = default_schema();
        let d = Dataset::new(vec![], &schema, Provenance::Ingested).unwrap();
        assert_eq!(correlation_report(&d, &schema), Err(StatsError::EmptyDataset));
        assert_eq!(
            group_means(&d, &schema, GroupingAttribute::Concern),
            Err(StatsError::EmptyDataset)
        );
        assert!("height".parse::<GroupingAttribute>().is_err());
    }

    fn aged(id: &str, decade: u8, ordinal: usize) -> crate::dataset::RespondentRecord {
        let mut r = record(id, 1, ordinal);
        r.coded.age_decade = decade;
        r
    }

    #[test]
    fn group_means_examples() {
        let schema = default_schema();
        // ordinal 3 scores 10, ordinal 0 scores 0.
        let d = Dataset::new(
            vec![aged("a", 20, 3), aged("b", 20, 0), aged("c", 30, 0)],
            &schema,
            Provenance::Ingested,
        )
        .unwrap();
        let g = group_means(&d, &schema, GroupingAttribute::AgeDecade).unwrap();
        let rows: Vec<(&str, usize, f64)> = g
            .groups
            .iter()
            .map(|g| (g.label.as_str(), g.count, g.mean_score))
            .collect();
        assert_eq!(rows, vec![("18-24", 2, 5.0), ("25-34", 1, 0.0)]);

        let d = Dataset::new(
            vec![aged("a", 60, 3), aged("b", 70, 0), aged("c", 70, 0), aged("d", 20, 0)],
            &schema,
            Provenance::Ingested,
        )
        .unwrap();
        let g = group_means(&d, &schema, GroupingAttribute::AgeDecade).unwrap();
        let labels: Vec<&str> = g.groups.iter().map(|g| g.label.as_str()).collect();
        assert_eq!(labels, vec!["18-24", "55+"]);
        assert_eq!(g.groups[1].count, 3);
        assert!((g.groups[1].mean_score - 10.0 / 3.0).abs() < 1e-12);

        let d = Dataset::new(vec![aged("a", 40, 3)], &schema, Provenance::Ingested).unwrap();
        let g = group_means(&d, &schema, GroupingAttribute::Concern).unwrap();
        assert_eq!(g.groups.len(), 1);
        assert_eq!(g.groups[0].mean_score, 10.0);
    }
}
