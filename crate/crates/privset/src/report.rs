//! Documents shared by the CLI and the HTTP service, and their text forms.

use std::fmt::Write as _;

use privset_core::dataset::{filter_satisfied, Dataset, Provenance, DEFAULT_SATISFACTION_THRESHOLD};
use privset_core::eval::{EvalSummary, Question};
use privset_core::knn::{Recommendation, RecommendedSetting};
use privset_core::schema::SettingsSchema;
use privset_core::scoring::{score_distribution, PrivacyScore, ScoreDistribution};
use privset_core::stats::{
    correlation_report, group_means, significance_stars, CorrelationEntry, GroupMeansReport,
    GroupingAttribute, StatsError,
};
use serde::Serialize;

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum CorrelationRow {
    Computed {
        attribute: String,
        r: f64,
        p: f64,
        stars: &'static str,
    },
    Skipped {
        attribute: String,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisDoc {
    pub schema_version: String,
    pub provenance: Provenance,
    pub n: usize,
    pub retained_after_default_filter: usize,
    pub correlations: Vec<CorrelationRow>,
    pub distribution: ScoreDistribution,
    pub group_means: Vec<GroupMeansReport>,
}

pub fn analyze(dataset: &Dataset, schema: &SettingsSchema) -> Result<AnalysisDoc, StatsError> {
    let report = correlation_report(dataset, schema)?;
    let correlations = report
        .entries
        .iter()
        .map(|e| match e {
            CorrelationEntry::Computed(c) => CorrelationRow::Computed {
                attribute: c.attribute.to_string(),
                r: c.r,
                p: c.p,
                stars: significance_stars(c.p),
            },
            CorrelationEntry::Skipped { attribute, reason } => CorrelationRow::Skipped {
                attribute: attribute.to_string(),
                reason: reason.clone(),
            },
        })
        .collect();
    Ok(AnalysisDoc {
        schema_version: dataset.schema_version().to_string(),
        provenance: dataset.provenance().clone(),
        n: dataset.len(),
        retained_after_default_filter: filter_satisfied(dataset, DEFAULT_SATISFACTION_THRESHOLD)
            .len(),
        correlations,
        distribution: score_distribution(dataset.records(), schema)?,
        group_means: vec![
            group_means(dataset, schema, GroupingAttribute::AgeDecade)?,
            group_means(dataset, schema, GroupingAttribute::Concern)?,
        ],
    })
}

pub fn render_analysis(doc: &AnalysisDoc) -> String {
    let mut out = String::new();
    let source = match &doc.provenance {
        Provenance::Ingested => "ingested".to_string(),
        Provenance::Synthetic { seed } => format!("synthetic, seed {seed}"),
    };
    let _ = writeln!(
        out,
        "Privacy score analysis: n={} ({source}), schema {}",
        doc.n, doc.schema_version
    );
    let pct = 100.0 * doc.retained_after_default_filter as f64 / doc.n as f64;
    let _ = writeln!(
        out,
        "Retained after default satisfaction filter: {} ({pct:.1}%)",
        doc.retained_after_default_filter
    );
    out.push('\n');
    let _ = writeln!(out, "{:<18} {:>7} {:>10}", "attribute", "r", "p");
    for row in &doc.correlations {
        match row {
            CorrelationRow::Computed {
                attribute,
                r,
                p,
                stars,
            } => {
                let line = format!("{attribute:<18} {r:>7.3} {:>10} {stars}", format_p(*p));
                let _ = writeln!(out, "{}", line.trim_end());
            }
            CorrelationRow::Skipped { attribute, reason } => {
                let _ = writeln!(out, "{attribute:<18} skipped: {reason}");
            }
        }
    }
    let _ = writeln!(out, "* p <= 0.05, ** p <= 0.01");
    out.push('\n');
    let d = &doc.distribution;
    let _ = writeln!(
        out,
        "Score distribution: mean {:.2}, sd {:.2}, median {:.2}",
        d.mean, d.stddev, d.median
    );
    for bin in &d.histogram {
        let line = format!(
            "  {:>4.1}-{:<4.1} {:>5} {}",
            bin.lower,
            bin.upper,
            bin.count,
            "#".repeat(bin_bar(bin.count, d.n))
        );
        let _ = writeln!(out, "{}", line.trim_end());
    }
    for g in &doc.group_means {
        out.push('\n');
        let title = match g.attribute {
            GroupingAttribute::AgeDecade => "Mean score by age group",
            GroupingAttribute::Concern => "Mean score by privacy concern",
        };
        let _ = writeln!(out, "{title}");
        for group in &g.groups {
            let _ = writeln!(
                out,
                "  {:<6} n={:<5} {:.2}",
                group.label, group.count, group.mean_score
            );
        }
    }
    out
}

fn format_p(p: f64) -> String {
    if p >= 0.001 {
        format!("{p:.3}")
    } else {
        format!("{p:.2e}")
    }
}

fn bin_bar(count: usize, n: usize) -> usize {
    if n == 0 {
        0
    } else {
        (count * 50).div_ceil(n)
    }
}

/// What clients see of a recommendation. The mode and the neighbor ids are
/// withheld so the two arms look identical and respondents stay private.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecommendationBody {
    pub settings: Vec<RecommendedSetting>,
    pub total_score: PrivacyScore,
}

impl From<&Recommendation> for RecommendationBody {
    fn from(rec: &Recommendation) -> Self {
        Self {
            settings: rec.settings.clone(),
            total_score: rec.total_grade_score,
        }
    }
}

pub fn render_eval(summary: &EvalSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Feedback records: {}", summary.total);
    let _ = writeln!(
        out,
        "{:<8} {:<12} {:>5} {:>9} {:>9}",
        "mode", "question", "n", ">=3", "<=1"
    );
    for mode in &summary.modes {
        for q in Question::ALL {
            let t = &mode.questions[&q];
            let _ = writeln!(
                out,
                "{:<8} {:<12} {:>5} {:>8.1}% {:>8.1}%",
                mode.mode.as_str(),
                q.as_str(),
                t.n,
                100.0 * t.favorable_fraction,
                100.0 * t.unfavorable_fraction
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use privset_core::eval::eval_summary;
    use privset_core::knn::popular_recommend;
    use privset_core::schema::default_schema;
    use privset_core::synth::{synth_generate, SynthConfig};

    fn dataset(cfg: SynthConfig) -> (Dataset, SettingsSchema) {
        let schema = default_schema();
        (synth_generate(&cfg, &schema).unwrap().dataset, schema)
    }

    #[test]
    fn planted_concern_row_has_two_stars() {
        let (d, schema) = dataset(SynthConfig::reference(42, 451));
        let doc = analyze(&d, &schema).unwrap();
        let concern = doc
            .correlations
            .iter()
            .find_map(|r| match r {
                CorrelationRow::Computed {
                    attribute, stars, ..
                } if attribute == "concern" => Some(*stars),
                _ => None,
            })
            .unwrap();
        assert_eq!(concern, "**");
        let text = render_analysis(&doc);
        assert!(text.contains("concern"));
        assert!(text.lines().any(|l| l.starts_with("concern") && l.ends_with("**")));
        assert_eq!(doc.group_means.len(), 2);
    }

    #[test]
    fn null_dataset_has_no_stars() {
        let (d, schema) = dataset(SynthConfig::null(5, 300));
        let doc = analyze(&d, &schema).unwrap();
        let starred = doc.correlations.iter().filter(|r| {
            matches!(r, CorrelationRow::Computed { stars, .. } if !stars.is_empty())
        });
        // Thirteen tests at the 5% level: allow the odd false positive but
        // not a pattern.
        assert!(starred.count() <= 1);
    }

    #[test]
    fn p_formatting() {
        assert_eq!(format_p(0.5), "0.500");
        assert_eq!(format_p(0.001), "0.001");
        assert_eq!(format_p(4.24e-10), "4.24e-10");
        assert_eq!(format_p(9.999e-5), "1.00e-4");
    }

    #[test]
    fn body_hides_mode_and_neighbors() {
        let (d, schema) = dataset(SynthConfig::reference(1, 100));
        let rec = popular_recommend(&d, &schema).unwrap();
        let json = to_json(&RecommendationBody::from(&rec));
        assert!(!json.contains("popular"));
        assert!(!json.contains("neighbor"));
        assert!(json.contains("\"color\""));
    }

    #[test]
    fn eval_text_lists_both_modes() {
        let text = render_eval(&eval_summary(&[]));
        assert!(text.contains("knn"));
        assert!(text.contains("popular"));
        assert_eq!(text.lines().count(), 2 + 8);
    }
}
