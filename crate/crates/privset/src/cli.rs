//! Command line front end. Exit codes: 0 success, 1 user error, 2 internal
//! error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use privset_core::coding::RawIntake;
use privset_core::dataset::{filter_satisfied, DEFAULT_SATISFACTION_THRESHOLD};
use privset_core::eval::{eval_summary, SessionAssigner};
use privset_core::knn::{KnnConfig, RecommendationMode, DEFAULT_K};
use privset_core::scoring::{total_score, SettingsChoiceVector};
use privset_core::synth::{
    reference_effects, synth_generate, PlantedEffect, SynthConfig, REFERENCE_DISSATISFIED_FRACTION,
};
use rand_core::SeedableRng;

use crate::feedback::{read_log, FeedbackStore};
use crate::files::{self, Error};
use crate::report::{self, RecommendationBody};
use crate::service::{self, AppState, RecommendFailure};
use crate::{ingest, snapshot};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USER: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "privset", version, about = "Privacy-settings scoring, recommendation and analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Doc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Knn,
    Popular,
}

impl From<Mode> for RecommendationMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Knn => RecommendationMode::Knn,
            Mode::Popular => RecommendationMode::Popular,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic respondent dataset snapshot.
    Synth {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 451)]
        n: usize,
        /// Planted effect `attribute:+|-:strength`; repeatable. Defaults to
        /// the reference effects when none is given.
        #[arg(long = "plant", value_parser = parse_plant)]
        plant: Vec<PlantedEffect>,
        /// Plant nothing (null model).
        #[arg(long, conflicts_with = "plant")]
        no_effects: bool,
        #[arg(long, default_value_t = REFERENCE_DISSATISFIED_FRACTION)]
        dissatisfied_fraction: f64,
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate a CSV survey export and write a snapshot of its valid rows.
    Ingest {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long)]
        questionnaire: Option<PathBuf>,
        /// Fail instead of skipping invalid rows.
        #[arg(long)]
        strict: bool,
    },
    /// Correlation report and score distribution of a snapshot.
    Analyze {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Total privacy score of a choices document.
    Score {
        #[arg(long)]
        choices: PathBuf,
        #[arg(long)]
        schema: Option<PathBuf>,
    },
    /// Recommend settings for an intake document.
    Recommend {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        intake: PathBuf,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long)]
        questionnaire: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = "PRIVSET_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "PRIVSET_HOST", default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "PRIVSET_DATA")]
        data: Option<PathBuf>,
        #[arg(long, env = "PRIVSET_SCHEMA")]
        schema: Option<PathBuf>,
        #[arg(long, env = "PRIVSET_QUESTIONNAIRE")]
        questionnaire: Option<PathBuf>,
        #[arg(long, env = "PRIVSET_FEEDBACK", default_value = "feedback.jsonl")]
        feedback: PathBuf,
        /// Seed for session assignment; random when absent.
        #[arg(long, env = "PRIVSET_SEED")]
        seed: Option<u64>,
        #[arg(long, env = "PRIVSET_K", default_value_t = DEFAULT_K)]
        k: usize,
    },
    /// Per-mode feedback proportions.
    EvalReport {
        #[arg(long)]
        feedback: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

fn parse_plant(s: &str) -> Result<PlantedEffect, String> {
    s.parse().map_err(|e: privset_core::synth::SynthError| e.to_string())
}

fn user(message: impl Into<String>) -> Error {
    Error::Invalid(message.into())
}

fn knn_config(k: usize) -> Result<KnnConfig, Error> {
    if k == 0 {
        return Err(user("--k must be at least 1"));
    }
    Ok(KnnConfig {
        k,
        ..KnnConfig::default()
    })
}

fn emit(out: &mut dyn Write, text: &str, path: Option<&Path>) -> Result<(), Error> {
    match path {
        Some(p) => files::write_atomic(p, text.as_bytes()),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Error::Internal(format!("writing output: {e}"))),
    }
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Error> {
    match command {
        Command::Synth {
            seed,
            n,
            plant,
            no_effects,
            dissatisfied_fraction,
            schema,
            out: path,
        } => {
            let schema = files::load_schema(schema.as_deref())?;
            let planted_effects = if no_effects {
                Vec::new()
            } else if plant.is_empty() {
                reference_effects()
            } else {
                plant
            };
            let config = SynthConfig {
                seed,
                n,
                dissatisfied_fraction,
                planted_effects,
            };
            let synth = synth_generate(&config, &schema).map_err(|e| user(e.to_string()))?;
            for w in &synth.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            snapshot::save(&path, &synth.dataset)?;
            let kept = filter_satisfied(&synth.dataset, DEFAULT_SATISFACTION_THRESHOLD).len();
            let total = synth.dataset.len();
            let pct = if total == 0 { 0.0 } else { 100.0 * kept as f64 / total as f64 };
            emit(
                out,
                &format!(
                    "wrote {total} records to {}\nretained after default filter: {kept}/{total} ({pct:.1}%)\n",
                    path.display()
                ),
                None,
            )
        }
        Command::Ingest {
            csv,
            out: path,
            schema,
            questionnaire,
            strict,
        } => {
            let schema = files::load_schema(schema.as_deref())?;
            let questionnaire = files::load_questionnaire(questionnaire.as_deref())?;
            let source = std::fs::File::open(&csv).map_err(|e| Error::io(&csv, e))?;
            let outcome = ingest::ingest_csv(source, &schema, &questionnaire)
                .map_err(|e| Error::parse(&csv, e))?;
            for e in &outcome.errors {
                let _ = writeln!(err, "{}: {e}", csv.display());
            }
            if strict && !outcome.errors.is_empty() {
                return Err(user(format!("{} invalid rows", outcome.errors.len())));
            }
            snapshot::save(&path, &outcome.dataset)?;
            emit(
                out,
                &format!(
                    "ingested {} records ({} rejected) into {}\n",
                    outcome.dataset.len(),
                    outcome.errors.len(),
                    path.display()
                ),
                None,
            )
        }
        Command::Analyze {
            data,
            format,
            schema,
            out: path,
        } => {
            let schema = files::load_schema(schema.as_deref())?;
            let dataset = snapshot::load(&data, &schema)?;
            let doc = report::analyze(&dataset, &schema).map_err(|e| user(e.to_string()))?;
            let text = match format {
                Format::Text => report::render_analysis(&doc),
                Format::Doc => report::to_json(&doc),
            };
            emit(out, &text, path.as_deref())
        }
        Command::Score { choices, schema } => {
            let schema = files::load_schema(schema.as_deref())?;
            let choices: SettingsChoiceVector = files::read_json(&choices)?;
            let score = total_score(&choices, &schema).map_err(|e| user(e.to_string()))?;
            emit(out, &format!("{:.2}\n", score.value()), None)
        }
        Command::Recommend {
            data,
            mode,
            intake,
            k,
            schema,
            questionnaire,
        } => {
            let schema = files::load_schema(schema.as_deref())?;
            let questionnaire = files::load_questionnaire(questionnaire.as_deref())?;
            let dataset = snapshot::load(&data, &schema)?;
            let intake: RawIntake = files::read_json(&intake)?;
            let rec = service::recommend(
                mode.into(),
                &intake,
                &dataset,
                &schema,
                &questionnaire,
                &knn_config(k)?,
            )
            .map_err(|e| match e {
                RecommendFailure::Intake(_) => user(e.to_string()),
                RecommendFailure::Recommend(inner) => user(inner.to_string()),
            })?;
            emit(out, &report::to_json(&RecommendationBody::from(&rec)), None)
        }
        Command::Serve {
            port,
            host,
            data,
            schema,
            questionnaire,
            feedback,
            seed,
            k,
        } => {
            let schema = files::load_schema(schema.as_deref())?;
            let questionnaire = files::load_questionnaire(questionnaire.as_deref())?;
            let dataset = data.map(|p| snapshot::load(&p, &schema)).transpose()?;
            let store = FeedbackStore::open(&feedback)?;
            let assigner = match seed {
                Some(s) => SessionAssigner::seeded(s),
                None => SessionAssigner::from_rng(rand_chacha::ChaCha8Rng::from_os_rng()),
            };
            let state = Arc::new(AppState::new(
                Some(schema),
                questionnaire,
                dataset,
                store,
                assigner,
                knn_config(k)?,
            ));
            let runtime = tokio::runtime::Runtime::new()
                .map_err(|e| Error::Internal(format!("starting runtime: {e}")))?;
            runtime.block_on(async {
                let listener = tokio::net::TcpListener::bind((host.as_str(), port))
                    .await
                    .map_err(|e| user(format!("cannot bind {host}:{port}: {e}")))?;
                let addr = listener
                    .local_addr()
                    .map_err(|e| Error::Internal(e.to_string()))?;
                let _ = writeln!(out, "listening on {addr}");
                let _ = out.flush();
                service::serve(listener, state)
                    .await
                    .map_err(|e| Error::Internal(format!("server: {e}")))
            })
        }
        Command::EvalReport { feedback, format } => {
            let records = read_log(&feedback)?;
            let summary = eval_summary(&records);
            let text = match format {
                Format::Text => report::render_eval(&summary),
                Format::Doc => report::to_json(&summary),
            };
            emit(out, &text, None)
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USER } else { EXIT_OK };
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_user_error() {
                EXIT_USER
            } else {
                EXIT_INTERNAL
            }
        }
    }
}
