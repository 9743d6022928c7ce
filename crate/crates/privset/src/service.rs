//! HTTP API: schema, A/B sessions, recommendations, feedback and statistics.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use privset_core::coding::{IntakeError, IntakeErrors, Questionnaire, RawIntake};
use privset_core::dataset::Dataset;
use privset_core::eval::{eval_summary, FeedbackRecord, Ratings, SessionAssigner, SessionAssignment};
use privset_core::knn::{
    knn_recommend, popular_recommend, KnnConfig, Recommendation, RecommendError,
    RecommendationMode,
};
use privset_core::schema::SettingsSchema;
use privset_core::coding::build_feature_vector;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::feedback::FeedbackStore;
use crate::report::{self, RecommendationBody};

#[derive(Debug)]
pub enum RecommendFailure {
    Intake(IntakeErrors),
    Recommend(RecommendError),
}

impl std::fmt::Display for RecommendFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RecommendFailure::Intake(e) => write!(f, "invalid intake: {e}"),
            RecommendFailure::Recommend(e) => e.fmt(f),
        }
    }
}

/// The one recommendation path used by both the CLI and the service. The
/// intake is validated in both modes so the two arms accept the same input.
pub fn recommend(
    mode: RecommendationMode,
    intake: &RawIntake,
    dataset: &Dataset,
    schema: &SettingsSchema,
    questionnaire: &Questionnaire,
    knn: &KnnConfig,
) -> Result<Recommendation, RecommendFailure> {
    let profile = intake
        .code_for_recommendation(questionnaire)
        .map_err(RecommendFailure::Intake)?;
    let result = match mode {
        RecommendationMode::Knn => {
            let query = build_feature_vector(&profile, knn.normalization)
                .expect("coded intake lies in range");
            knn_recommend(&query, dataset, knn, schema)
        }
        RecommendationMode::Popular => popular_recommend(dataset, schema),
    };
    result.map_err(RecommendFailure::Recommend)
}

struct Session {
    assignment: SessionAssignment,
    recommended: bool,
}

pub struct AppState {
    schema: Option<Arc<SettingsSchema>>,
    questionnaire: Arc<Questionnaire>,
    dataset: RwLock<Option<Arc<Dataset>>>,
    sessions: RwLock<HashMap<String, Session>>,
    assigner: Mutex<SessionAssigner>,
    feedback: FeedbackStore,
    knn: KnnConfig,
}

impl AppState {
    pub fn new(
        schema: Option<SettingsSchema>,
        questionnaire: Questionnaire,
        dataset: Option<Dataset>,
        feedback: FeedbackStore,
        assigner: SessionAssigner,
        knn: KnnConfig,
    ) -> Self {
        Self {
            schema: schema.map(Arc::new),
            questionnaire: Arc::new(questionnaire),
            dataset: RwLock::new(dataset.map(Arc::new)),
            sessions: RwLock::new(HashMap::new()),
            assigner: Mutex::new(assigner),
            feedback,
            knn,
        }
    }

    /// Replaces the active dataset. Requests already running keep the
    /// snapshot they started with.
    pub fn swap_dataset(&self, dataset: Option<Dataset>) {
        *self.dataset.write().expect("dataset lock") = dataset.map(Arc::new);
    }

    pub fn dataset(&self) -> Option<Arc<Dataset>> {
        self.dataset.read().expect("dataset lock").clone()
    }

    fn session_mode(&self, id: &str) -> Option<(RecommendationMode, bool)> {
        self.sessions
            .read()
            .expect("session lock")
            .get(id)
            .map(|s| (s.assignment.mode, s.recommended))
    }
}

#[derive(Debug)]
struct ApiError {
    status: StatusCode,
    message: String,
    fields: Vec<IntakeError>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
            fields: Vec::new(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn fields(errors: IntakeErrors) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            message: errors.to_string(),
            fields: errors.0,
        }
    }

    fn field(field: &str, message: impl Into<String>) -> Self {
        Self::fields(IntakeErrors::single(field, message))
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    #[serde(skip_serializing_if = "<[_]>::is_empty")]
    fields: &'a [IntakeError],
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        json_response(
            self.status,
            &ErrorBody {
                error: &self.message,
                fields: &self.fields,
            },
        )
    }
}

fn json_response<T: Serialize>(status: StatusCode, value: &T) -> Response {
    (
        status,
        [(header::CONTENT_TYPE, "application/json")],
        report::to_json(value),
    )
        .into_response()
}

fn ok<T: Serialize>(value: &T) -> Response {
    json_response(StatusCode::OK, value)
}

fn parse_object(body: &Bytes) -> Result<Map<String, Value>, ApiError> {
    match serde_json::from_slice::<Value>(body) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(ApiError::bad_request("request body must be a JSON object")),
        Err(e) => Err(ApiError::bad_request(format!("invalid JSON: {e}"))),
    }
}

fn session_id(body: &Map<String, Value>) -> Result<String, ApiError> {
    match body.get("session_id") {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(ApiError::field("session_id", "must be a string")),
        None => Err(ApiError::field("session_id", "is required")),
    }
}

fn unknown_session(id: &str) -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, format!("unknown session `{id}`"))
}

fn no_dataset() -> ApiError {
    ApiError::new(StatusCode::CONFLICT, "no dataset loaded")
}

fn schema_of(state: &AppState) -> Result<Arc<SettingsSchema>, ApiError> {
    state
        .schema
        .clone()
        .ok_or_else(|| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "no schema configured"))
}

async fn health() -> &'static str {
    "ok"
}

async fn get_schema(State(state): State<Arc<AppState>>) -> Result<Response, ApiError> {
    Ok(ok(&*schema_of(&state)?))
}

async fn get_questionnaire(State(state): State<Arc<AppState>>) -> Response {
    ok(&*state.questionnaire)
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

async fn create_session(State(state): State<Arc<AppState>>) -> Response {
    let assignment = state.assigner.lock().expect("assigner lock").assign(unix_now());
    state.sessions.write().expect("session lock").insert(
        assignment.session_id.clone(),
        Session {
            assignment: assignment.clone(),
            recommended: false,
        },
    );
    tracing::info!(session = %assignment.session_id, mode = assignment.mode.as_str(), "session created");
    ok(&assignment)
}

async fn post_recommend(
    State(state): State<Arc<AppState>>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let body = parse_object(&body)?;
    let id = session_id(&body)?;
    let intake: RawIntake = match body.get("intake") {
        None => return Err(ApiError::field("intake", "is required")),
        Some(v) => serde_json::from_value(v.clone())
            .map_err(|e| ApiError::field("intake", e.to_string()))?,
    };
    let (mode, _) = state.session_mode(&id).ok_or_else(|| unknown_session(&id))?;
    let schema = schema_of(&state)?;
    let dataset = state.dataset().ok_or_else(no_dataset)?;
    let rec = recommend(mode, &intake, &dataset, &schema, &state.questionnaire, &state.knn)
        .map_err(|e| match e {
            RecommendFailure::Intake(errors) => ApiError::fields(errors),
            RecommendFailure::Recommend(e @ RecommendError::InsufficientData { .. })
            | RecommendFailure::Recommend(e @ RecommendError::EmptyDataset) => {
                ApiError::new(StatusCode::CONFLICT, e.to_string())
            }
            RecommendFailure::Recommend(e) => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
            }
        })?;
    if let Some(s) = state.sessions.write().expect("session lock").get_mut(&id) {
        s.recommended = true;
    }
    tracing::info!(session = %id, mode = mode.as_str(), neighbors = ?rec.neighbor_ids, "recommendation served");
    Ok(ok(&RecommendationBody::from(&rec)))
}

fn ratings_from(body: &Map<String, Value>) -> Result<Ratings, ApiError> {
    let obj = match body.get("ratings") {
        Some(Value::Object(o)) => o,
        Some(_) => return Err(ApiError::field("ratings", "must be an object")),
        None => return Err(ApiError::field("ratings", "is required")),
    };
    let mut errors = IntakeErrors::default();
    let mut values = [0i64; 4];
    for (slot, key) in values
        .iter_mut()
        .zip(["appropriate", "private", "intend_use", "prefer_tool"])
    {
        match obj.get(key).map(Value::as_i64) {
            Some(Some(v)) => *slot = v,
            Some(None) => errors.push(key, "must be an integer"),
            None => errors.push(key, "is required"),
        }
    }
    if !errors.is_empty() {
        return Err(ApiError::fields(errors));
    }
    Ratings::new(values[0], values[1], values[2], values[3])
        .map_err(|e| ApiError::field(e.field, format!("out of range (0..=4): {}", e.value)))
}

async fn post_feedback(
    State(state): State<Arc<AppState>>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let body = parse_object(&body)?;
    let id = session_id(&body)?;
    let ratings = ratings_from(&body)?;
    let comment = match body.get("comment") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(ApiError::field("comment", "must be a string")),
    };
    let (mode, recommended) = state.session_mode(&id).ok_or_else(|| unknown_session(&id))?;
    if !recommended {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "session has not received a recommendation yet",
        ));
    }
    // The mode comes from the session, never from the client.
    let record = FeedbackRecord {
        session_id: id.clone(),
        mode,
        ratings,
        comment,
    };
    state
        .feedback
        .submit(record)
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    Ok(ok(&serde_json::json!({ "status": "stored", "session_id": id })))
}

async fn get_stats(State(state): State<Arc<AppState>>) -> Result<Response, ApiError> {
    let dataset = state.dataset().ok_or_else(no_dataset)?;
    let schema = schema_of(&state)?;
    let doc = report::analyze(&dataset, &schema)
        .map_err(|e| ApiError::new(StatusCode::CONFLICT, e.to_string()))?;
    Ok(ok(&doc))
}

async fn get_eval(State(state): State<Arc<AppState>>) -> Response {
    ok(&eval_summary(&state.feedback.records()))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/api/schema", get(get_schema))
        .route("/api/questionnaire", get(get_questionnaire))
        .route("/api/session", post(create_session))
        .route("/api/recommend", post(post_recommend))
        .route("/api/feedback", post(post_feedback))
        .route("/api/stats", get(get_stats))
        .route("/api/eval", get(get_eval))
        .with_state(state)
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = terminate => {},
    }
    tracing::info!("shutting down");
}

/// Serves until interrupted or terminated.
pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown_signal())
        .await
}
