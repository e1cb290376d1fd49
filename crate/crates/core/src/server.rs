//! JSON HTTP service hosting review sessions.
//!
//! | method | path                              | effect                                  |
//! |--------|-----------------------------------|-----------------------------------------|
//! | POST   | `/sessions`                       | create a session, returns its id        |
//! | POST   | `/sessions/import`                | create a session from a snapshot        |
//! | GET    | `/sessions/{id}`                  | session summary                         |
//! | DELETE | `/sessions/{id}`                  | drop the session                        |
//! | GET    | `/sessions/{id}/suggestions?top=N`| pending Top-N suggestions               |
//! | POST   | `/sessions/{id}/confirmations`    | confirm a pair and rescore              |
//! | POST   | `/sessions/{id}/rejections`       | suppress a pair                         |
//! | GET    | `/sessions/{id}/matrix[?format=csv]` | full score matrix                    |
//! | GET    | `/sessions/{id}/report`           | evaluation against supplied truth       |
//! | GET    | `/sessions/{id}/snapshot`         | exportable session state                |
//!
//! Mutations on one session are serialized behind a per-session write lock.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{StatusCode, header};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::RwLock;

use crate::ensemble::Suggestion;
use crate::error::Error;
use crate::evaluation::GroundTruth;
use crate::ingest::{load_dataset, read_dataset};
use crate::model::{Dataset, KnownPair, MatcherConfig, ScoreMatrix};
use crate::schema::RuleSet;
use crate::session::{Decision, MatchSession, SessionSnapshot};

type SessionHandle = Arc<RwLock<MatchSession>>;

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, SessionHandle>>>,
}

impl AppState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers an already-built session, returning its id.
    pub async fn insert(&self, session: MatchSession) -> String {
        let id = session.id().to_string();
        self.sessions
            .write()
            .await
            .insert(id.clone(), Arc::new(RwLock::new(session)));
        id
    }

    async fn get(&self, id: &str) -> Result<SessionHandle, ApiError> {
        self.sessions
            .read()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown session `{id}`")))
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::DuplicateConfirmation { .. } => StatusCode::CONFLICT,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        ApiError::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, format!("invalid request body: {e}")))
}

#[derive(Debug, Default, Deserialize)]
pub struct CreateSessionRequest {
    pub source_path: Option<String>,
    pub source_csv: Option<String>,
    pub source_name: Option<String>,
    pub dest_path: Option<String>,
    pub dest_csv: Option<String>,
    pub dest_name: Option<String>,
    #[serde(default)]
    pub config: MatcherConfig,
    #[serde(default)]
    pub rules: RuleSet,
    #[serde(default)]
    pub known: Vec<KnownPair>,
    pub truth: Option<Vec<PairRequest>>,
    pub truth_path: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairRequest {
    pub source_attr: String,
    pub dest_attr: String,
}

fn dataset_from(
    path: &Option<String>,
    csv: &Option<String>,
    name: &Option<String>,
    default_name: &str,
) -> Result<Dataset, ApiError> {
    let name = name.clone().unwrap_or_else(|| default_name.to_string());
    match (path, csv) {
        (Some(p), None) => Ok(load_dataset(p, &name)?),
        (None, Some(text)) => Ok(read_dataset(text.as_bytes(), &name)?),
        _ => Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            format!("exactly one of {default_name}_path or {default_name}_csv is required"),
        )),
    }
}

fn build_session(req: CreateSessionRequest) -> Result<MatchSession, ApiError> {
    let source = dataset_from(&req.source_path, &req.source_csv, &req.source_name, "source")?;
    let dest = dataset_from(&req.dest_path, &req.dest_csv, &req.dest_name, "dest")?;
    let truth = match (req.truth, req.truth_path) {
        (Some(rows), _) => Some(GroundTruth::new(
            rows.into_iter().map(|r| (r.source_attr, r.dest_attr)),
        )?),
        (None, Some(path)) => Some(GroundTruth::load(path)?),
        (None, None) => None,
    };
    let id = uuid::Uuid::new_v4().simple().to_string();
    Ok(MatchSession::new(
        id, source, dest, req.config, req.rules, req.known, truth,
    )?)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CandidateView {
    pub dest_attr: String,
    #[serde(rename = "final")]
    pub final_score: f64,
    pub dk: f64,
    pub lin: f64,
    pub uni: f64,
    pub mul: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SuggestionView {
    pub source_attr: String,
    pub candidates: Vec<CandidateView>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SuggestionsResponse {
    pub session_id: String,
    pub top: usize,
    pub suggestions: Vec<SuggestionView>,
    pub confirmed: Vec<KnownPair>,
    pub rejected: Vec<PairRequest>,
}

fn suggestion_views(matrix: &ScoreMatrix, suggestions: Vec<Suggestion>) -> Vec<SuggestionView> {
    suggestions
        .into_iter()
        .map(|s| SuggestionView {
            candidates: s
                .ranked
                .iter()
                .map(|c| {
                    let p = matrix
                        .get(&s.source_attr, &c.dest_attr)
                        .expect("ranked pair is in the matrix");
                    CandidateView {
                        dest_attr: c.dest_attr.clone(),
                        final_score: p.final_score,
                        dk: p.dk,
                        lin: p.lin,
                        uni: p.uni,
                        mul: p.mul,
                    }
                })
                .collect(),
            source_attr: s.source_attr,
        })
        .collect()
}

fn suggestions_response(session: &MatchSession, top: usize) -> SuggestionsResponse {
    SuggestionsResponse {
        session_id: session.id().to_string(),
        top,
        suggestions: suggestion_views(session.matrix(), session.suggestions(top)),
        confirmed: session.known().to_vec(),
        rejected: session
            .rejected()
            .map(|(s, d)| PairRequest {
                source_attr: s.clone(),
                dest_attr: d.clone(),
            })
            .collect(),
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionSummary {
    pub id: String,
    pub source: String,
    pub dest: String,
    pub source_attrs: Vec<String>,
    pub dest_attrs: Vec<String>,
    pub config: MatcherConfig,
    pub known: Vec<KnownPair>,
    pub decisions: Vec<Decision>,
    pub config_fingerprint: String,
}

fn summary(s: &MatchSession) -> SessionSummary {
    SessionSummary {
        id: s.id().to_string(),
        source: s.source().name().to_string(),
        dest: s.dest().name().to_string(),
        source_attrs: s.source().names().map(str::to_string).collect(),
        dest_attrs: s.dest().names().map(str::to_string).collect(),
        config: s.config().clone(),
        known: s.known().to_vec(),
        decisions: s.decisions().to_vec(),
        config_fingerprint: s.matrix().config_fingerprint.clone(),
    }
}

async fn create_session(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateSessionRequest = parse_body(&body)?;
    let session = tokio::task::spawn_blocking(move || build_session(req))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let body = summary(&session);
    state.insert(session).await;
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

async fn import_session(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let mut snapshot: SessionSnapshot = parse_body(&body)?;
    snapshot.id = uuid::Uuid::new_v4().simple().to_string();
    let session = tokio::task::spawn_blocking(move || MatchSession::from_snapshot(snapshot))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let body = summary(&session);
    state.insert(session).await;
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionSummary>, ApiError> {
    let handle = state.get(&id).await?;
    let s = handle.read().await;
    Ok(Json(summary(&s)))
}

async fn delete_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    match state.sessions.write().await.remove(&id) {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(ApiError::new(StatusCode::NOT_FOUND, format!("unknown session `{id}`"))),
    }
}

#[derive(Debug, Deserialize)]
pub struct TopQuery {
    pub top: Option<usize>,
}

fn resolve_top(q: &TopQuery, session: &MatchSession) -> Result<usize, ApiError> {
    match q.top {
        Some(0) => Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "top must be at least 1")),
        Some(n) => Ok(n),
        None => Ok(session.config().top_n),
    }
}

async fn get_suggestions(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<TopQuery>,
) -> Result<Json<SuggestionsResponse>, ApiError> {
    let handle = state.get(&id).await?;
    let s = handle.read().await;
    let top = resolve_top(&q, &s)?;
    Ok(Json(suggestions_response(&s, top)))
}

async fn post_confirmation(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<TopQuery>,
    body: Bytes,
) -> Result<Json<SuggestionsResponse>, ApiError> {
    let pair: PairRequest = parse_body(&body)?;
    let handle = state.get(&id).await?;
    let mut s = handle.write().await;
    let top = resolve_top(&q, &s)?;
    s.confirm(&pair.source_attr, &pair.dest_attr)?;
    Ok(Json(suggestions_response(&s, top)))
}

async fn post_rejection(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<TopQuery>,
    body: Bytes,
) -> Result<Json<SuggestionsResponse>, ApiError> {
    let pair: PairRequest = parse_body(&body)?;
    let handle = state.get(&id).await?;
    let mut s = handle.write().await;
    let top = resolve_top(&q, &s)?;
    s.reject(&pair.source_attr, &pair.dest_attr)?;
    Ok(Json(suggestions_response(&s, top)))
}

#[derive(Debug, Deserialize)]
pub struct FormatQuery {
    pub format: Option<String>,
}

async fn get_matrix(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<FormatQuery>,
) -> Result<Response, ApiError> {
    let handle = state.get(&id).await?;
    let s = handle.read().await;
    match q.format.as_deref() {
        None | Some("json") => Ok(Json(s.matrix().clone()).into_response()),
        Some("csv") => Ok((
            [(header::CONTENT_TYPE, "text/csv; charset=utf-8")],
            s.matrix().to_csv_string(),
        )
            .into_response()),
        Some(other) => Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            format!("unsupported format `{other}`"),
        )),
    }
}

async fn get_report(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let handle = state.get(&id).await?;
    let s = handle.read().await;
    match s.report() {
        Some(r) => Ok(Json(r?).into_response()),
        None => Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "session has no ground truth",
        )),
    }
}

async fn get_snapshot(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionSnapshot>, ApiError> {
    let handle = state.get(&id).await?;
    let s = handle.read().await;
    Ok(Json(s.snapshot()))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/import", post(import_session))
        .route("/sessions/{id}", get(get_session).delete(delete_session))
        .route("/sessions/{id}/suggestions", get(get_suggestions))
        .route("/sessions/{id}/confirmations", post(post_confirmation))
        .route("/sessions/{id}/rejections", post(post_rejection))
        .route("/sessions/{id}/matrix", get(get_matrix))
        .route("/sessions/{id}/report", get(get_report))
        .route("/sessions/{id}/snapshot", get(get_snapshot))
        .with_state(state)
}

/// Serves the API until ctrl-c.
pub async fn serve(addr: SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
