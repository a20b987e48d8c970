use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use polyqa_core::dialog::{DialogError, DialogTurn, FeedbackEvent, QaOutcome, Resolution, SourcedCandidate};
use polyqa_core::extractor::protocol::{decode_request, encode_response, WireError, EXTRACT_PATH};
use polyqa_core::extractor::{ExtractError, Extractor};
use polyqa_core::ingest::KnowledgeSource;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::AppState;

type Shared = State<Arc<AppState>>;

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(WireError { error: self.1 })).into_response()
    }
}

impl From<DialogError> for ApiError {
    fn from(e: DialogError) -> Self {
        let status = match e {
            DialogError::UnknownTurn { .. } => StatusCode::NOT_FOUND,
            DialogError::EmptyStore => StatusCode::SERVICE_UNAVAILABLE,
            DialogError::AllSourcesFailed(_) => StatusCode::BAD_GATEWAY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

fn unprocessable(message: impl Into<String>) -> ApiError {
    ApiError(StatusCode::UNPROCESSABLE_ENTITY, message.into())
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    if body.is_empty() {
        return Err(unprocessable("empty request body"));
    }
    serde_json::from_slice(body).map_err(|e| unprocessable(format!("malformed request: {e}")))
}

fn require_sources(state: &AppState) -> Result<(), ApiError> {
    if state.store.read().expect("store lock poisoned").is_empty() {
        return Err(ApiError(StatusCode::SERVICE_UNAVAILABLE, "no knowledge source ingested yet".into()));
    }
    Ok(())
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, format!("worker failed: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub source_id: String,
    pub url: String,
    pub start_char: usize,
    pub end_char: usize,
    pub text: String,
    pub score: f64,
}

impl From<&SourcedCandidate> for Attribution {
    fn from(sc: &SourcedCandidate) -> Self {
        Self {
            source_id: sc.source_id.clone(),
            url: sc.source_url.clone(),
            start_char: sc.candidate.start_char,
            end_char: sc.candidate.end_char,
            text: sc.candidate.text.clone(),
            score: sc.candidate.score,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub session_id: String,
    pub turn_id: u64,
    pub response_text: String,
    /// `scripted`, `qa` or `no_answer`.
    pub resolution: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intent_id: Option<String>,
    /// Present exactly when `resolution` is `qa`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribution: Option<Attribution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub follows_feedback_on: Option<u64>,
}

impl From<&DialogTurn> for ChatResponse {
    fn from(t: &DialogTurn) -> Self {
        let (intent_id, attribution) = match &t.resolution {
            Resolution::Scripted { intent_id } => (Some(intent_id.clone()), None),
            Resolution::Qa(sc) => (None, Some(Attribution::from(sc))),
            Resolution::NoAnswer => (None, None),
        };
        Self {
            session_id: t.session_id.clone(),
            turn_id: t.turn_id,
            response_text: t.response_text.clone(),
            resolution: t.resolution.kind().to_string(),
            intent_id,
            attribution,
            follows_feedback_on: t.follows_feedback_on,
        }
    }
}

#[derive(Deserialize)]
struct ChatRequest {
    session_id: String,
    utterance: String,
}

async fn chat(State(state): Shared, body: Bytes) -> Result<Json<ChatResponse>, ApiError> {
    let req: ChatRequest = parse_body(&body)?;
    if req.session_id.trim().is_empty() {
        return Err(unprocessable("session_id must not be empty"));
    }
    require_sources(&state)?;
    let turn = blocking(move || state.engine.handle_message(&req.session_id, &req.utterance)).await??;
    Ok(Json(ChatResponse::from(&turn)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackResponse {
    pub recorded: bool,
    pub follow_up: Option<ChatResponse>,
}

async fn feedback(State(state): Shared, body: Bytes) -> Result<Json<FeedbackResponse>, ApiError> {
    let event: FeedbackEvent = parse_body(&body)?;
    let follow_up = blocking(move || state.engine.handle_feedback(&event)).await??;
    Ok(Json(FeedbackResponse { recorded: true, follow_up: follow_up.as_ref().map(ChatResponse::from) }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QaResponse {
    Answer {
        answer: String,
        score: f64,
        source_id: String,
        source_url: String,
        start_char: usize,
        end_char: usize,
    },
    NoAnswer {
        no_answer: bool,
    },
}

#[derive(Deserialize)]
struct QaRequest {
    question: String,
}

async fn qa(State(state): Shared, body: Bytes) -> Result<Json<QaResponse>, ApiError> {
    let req: QaRequest = parse_body(&body)?;
    if req.question.trim().is_empty() {
        return Err(unprocessable("question must not be empty"));
    }
    require_sources(&state)?;
    let outcome = blocking(move || state.engine.answer(&req.question)).await??;
    Ok(Json(match outcome {
        QaOutcome::Answer { best, .. } => QaResponse::Answer {
            answer: best.candidate.text,
            score: best.candidate.score,
            source_id: best.source_id,
            source_url: best.source_url,
            start_char: best.candidate.start_char,
            end_char: best.candidate.end_char,
        },
        QaOutcome::NoAnswer => QaResponse::NoAnswer { no_answer: true },
    }))
}

async fn ingest(State(state): Shared) -> Result<Response, ApiError> {
    let report = blocking(move || state.ingest()).await?;
    Ok(Json(report).into_response())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSummary {
    #[serde(flatten)]
    pub source: KnowledgeSource,
    pub chars: usize,
}

async fn sources(State(state): Shared) -> Json<Vec<SourceSummary>> {
    let store = state.store.read().expect("store lock poisoned");
    Json(
        store
            .iter()
            .map(|s| SourceSummary { source: s.clone(), chars: s.text.chars().count() })
            .collect(),
    )
}

#[derive(Serialize)]
struct SourceDetail<'a> {
    #[serde(flatten)]
    source: &'a KnowledgeSource,
    text: &'a str,
}

async fn source(State(state): Shared, Path(id): Path<String>) -> Result<Response, ApiError> {
    let store = state.store.read().expect("store lock poisoned");
    let s = store.get(&id).ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("unknown source {id:?}")))?;
    Ok(Json(SourceDetail { source: s, text: &s.text }).into_response())
}

async fn healthz() -> &'static str {
    "ok"
}

async fn extract(State(state): Shared, body: Bytes) -> Result<Response, ApiError> {
    let req = decode_request(&body).map_err(|e| unprocessable(e.to_string()))?;
    let candidates = blocking(move || state.baseline().extract(&req)).await?.map_err(|e| match e {
        ExtractError::InvalidRequest(m) => unprocessable(m),
        other => ApiError(StatusCode::INTERNAL_SERVER_ERROR, other.to_string()),
    })?;
    Ok(([(header::CONTENT_TYPE, "application/json")], encode_response(&candidates)).into_response())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/chat", post(chat))
        .route("/feedback", post(feedback))
        .route("/qa", post(qa))
        .route("/ingest", post(ingest))
        .route("/sources", get(sources))
        .route("/sources/{id}", get(source))
        .route("/healthz", get(healthz))
        .route(EXTRACT_PATH, post(extract))
        .with_state(state)
}
