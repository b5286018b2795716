//! JSON/HTTP service over in-memory design sessions.
//!
//! Requests to one session are serialized by a per-session lock; distinct
//! sessions proceed independently.

use std::collections::hash_map::RandomState;
use std::collections::HashMap;
use std::hash::{BuildHasher, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use privarch_core::adsl::{
    parse_architecture, parse_knowledge, parse_requirements, print_architecture, print_requirements, ParseError,
    ParseErrors,
};
use privarch_core::engine::EngineError;
use privarch_core::explorer::{ExploreError, Library, PetApplication, Session, Step, Suggestion};
use privarch_core::model::Knowledge;

use crate::report::CheckReport;
use crate::view::LocationView;
use crate::SCHEMA_VERSION;

type Shared = Arc<tokio::sync::Mutex<Session>>;

pub struct AppState {
    sessions: Mutex<HashMap<String, Shared>>,
    library: Arc<Library>,
    counter: AtomicU64,
    salt: u64,
}

impl AppState {
    pub fn new(library: Library) -> Self {
        AppState {
            sessions: Mutex::new(HashMap::new()),
            library: Arc::new(library),
            counter: AtomicU64::new(0),
            salt: RandomState::new().build_hasher().finish(),
        }
    }

    fn fresh_id(&self) -> String {
        let n = self.counter.fetch_add(1, Ordering::Relaxed);
        format!("{:08x}-{n}", self.salt as u32)
    }

    fn session(&self, id: &str) -> Result<Shared, ApiError> {
        let map = self.sessions.lock().expect("session map lock");
        map.get(id).cloned().ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown session `{id}`")))
    }
}

pub fn router() -> Router {
    router_with(Library::builtin())
}

pub fn router_with(library: Library) -> Router {
    let state = Arc::new(AppState::new(library));
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(state_of))
        .route("/sessions/{id}/facts", post(add_facts))
        .route("/sessions/{id}/suggestions", get(suggestions))
        .route("/sessions/{id}/apply", post(apply))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/view", get(view))
        .route("/sessions/{id}/trace", get(trace))
        .route("/sessions/{id}/export", get(export))
        .with_state(state)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    errors: Vec<ParseError>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, message: message.into(), errors: Vec::new() }
    }

    fn parse(what: &str, errors: ParseErrors) -> Self {
        ApiError { status: StatusCode::BAD_REQUEST, message: format!("{what} does not parse"), errors: errors.0 }
    }
}

impl From<ExploreError> for ApiError {
    fn from(e: ExploreError) -> Self {
        let status = match &e {
            ExploreError::Precondition(_) | ExploreError::EmptyHistory | ExploreError::Instantiation { .. } => {
                StatusCode::CONFLICT
            }
            ExploreError::UnknownPattern(_) | ExploreError::Substitution(_) => StatusCode::BAD_REQUEST,
            ExploreError::Engine(EngineError::ResourceLimit { .. }) => StatusCode::UNPROCESSABLE_ENTITY,
            ExploreError::Engine(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.to_string())
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        ExploreError::Engine(e).into()
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({
            "schema_version": SCHEMA_VERSION,
            "error": self.message,
            "errors": self.errors,
        });
        (self.status, Json(body)).into_response()
    }
}

type ApiResult = Result<Json<Value>, ApiError>;

/// Runs `f` on the locked session off the async executor.
async fn with_session<T: Send + 'static>(
    shared: Shared,
    f: impl FnOnce(&mut Session) -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    let mut guard = shared.lock_owned().await;
    tokio::task::spawn_blocking(move || f(&mut guard))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
}

fn summary(id: &str, s: &Session) -> Value {
    let report = CheckReport::new(&s.architecture().name, s.assessment());
    json!({
        "schema_version": SCHEMA_VERSION,
        "session_id": id,
        "status": report.status,
        "outcome": report.outcome,
        "provisional": report.provisional,
        "verdicts": report.verdicts,
        "defects": report.defects,
    })
}

fn full(id: &str, s: &Session) -> Value {
    let mut doc = summary(id, s);
    doc["architecture"] = Value::String(print_architecture(s.architecture()));
    doc["requirements"] = Value::String(print_requirements(s.requirements()));
    doc["history"] = serde_json::to_value(s.history()).expect("history serializes");
    doc
}

#[derive(Debug, Deserialize)]
pub struct CreateRequest {
    #[serde(alias = "arch-text", alias = "arch")]
    pub arch_text: String,
    #[serde(alias = "reqs-text", alias = "reqs", default)]
    pub reqs_text: String,
    #[serde(default)]
    pub n: Option<u32>,
}

async fn create(State(st): State<Arc<AppState>>, Json(req): Json<CreateRequest>) -> ApiResult {
    let opts = crate::parse_options(None, req.n).map_err(|m| ApiError::new(StatusCode::BAD_REQUEST, m))?;
    let arch = parse_architecture(&req.arch_text, &opts).map_err(|e| ApiError::parse("architecture", e))?;
    let reqs = parse_requirements(&req.reqs_text, &arch, &opts).map_err(|e| ApiError::parse("requirements", e))?;
    let session = tokio::task::spawn_blocking(move || Session::new(arch, reqs))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let id = st.fresh_id();
    let doc = summary(&id, &session);
    st.sessions.lock().expect("session map lock").insert(id, Arc::new(tokio::sync::Mutex::new(session)));
    Ok(Json(doc))
}

async fn state_of(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let shared = st.session(&id)?;
    let s = shared.lock().await;
    Ok(Json(full(&id, &s)))
}

#[derive(Debug, Deserialize)]
pub struct FactsRequest {
    #[serde(alias = "fact-text", alias = "fact")]
    pub fact_text: String,
}

async fn add_facts(State(st): State<Arc<AppState>>, Path(id): Path<String>, Json(req): Json<FactsRequest>) -> ApiResult {
    let shared = st.session(&id)?;
    let doc = with_session(shared, move |s| {
        let mut facts = Vec::new();
        for part in req.fact_text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            match parse_knowledge(part, s.architecture()).map_err(|e| ApiError::parse("fact", e))? {
                Knowledge::Fact(f) => facts.push(f),
                Knowledge::Modal(_) => {
                    return Err(ApiError::new(StatusCode::BAD_REQUEST, "only facts can be added to a session"))
                }
            }
        }
        if facts.is_empty() {
            return Err(ApiError::new(StatusCode::BAD_REQUEST, "no fact given"));
        }
        *s = s.add_facts(facts)?;
        Ok(full(&id, s))
    })
    .await?;
    Ok(Json(doc))
}

#[derive(Debug, Serialize)]
struct IndexedSuggestion {
    index: usize,
    #[serde(flatten)]
    suggestion: Suggestion,
}

async fn suggestions(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let shared = st.session(&id)?;
    let lib = Arc::clone(&st.library);
    let doc = with_session(shared, move |s| {
        let list: Vec<IndexedSuggestion> = s
            .suggest(&lib)?
            .into_iter()
            .enumerate()
            .map(|(index, suggestion)| IndexedSuggestion { index, suggestion })
            .collect();
        Ok(json!({ "schema_version": SCHEMA_VERSION, "session_id": id, "suggestions": list }))
    })
    .await?;
    Ok(Json(doc))
}

#[derive(Debug, Deserialize)]
pub struct ApplyRequest {
    #[serde(alias = "suggestion-index", alias = "suggestion_index", default)]
    pub suggestion: Option<usize>,
    #[serde(default)]
    pub application: Option<PetApplication>,
}

async fn apply(State(st): State<Arc<AppState>>, Path(id): Path<String>, Json(req): Json<ApplyRequest>) -> ApiResult {
    let shared = st.session(&id)?;
    let lib = Arc::clone(&st.library);
    let doc = with_session(shared, move |s| {
        let app = match (req.suggestion, req.application) {
            (Some(_), Some(_)) => {
                return Err(ApiError::new(StatusCode::BAD_REQUEST, "give either a suggestion index or an application"))
            }
            (None, Some(app)) => app,
            (Some(k), None) => {
                let mut list = s.suggest(&lib)?;
                if k >= list.len() {
                    return Err(ApiError::new(
                        StatusCode::CONFLICT,
                        format!("suggestion {k} does not exist; {} available", list.len()),
                    ));
                }
                list.swap_remove(k).application
            }
            (None, None) => {
                return Err(ApiError::new(StatusCode::BAD_REQUEST, "missing `suggestion` or `application`"))
            }
        };
        *s = s.apply(&lib, &app)?;
        Ok(full(&id, s))
    })
    .await?;
    Ok(Json(doc))
}

async fn undo(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let shared = st.session(&id)?;
    let doc = with_session(shared, move |s| {
        *s = s.undo()?;
        Ok(full(&id, s))
    })
    .await?;
    Ok(Json(doc))
}

async fn view(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let shared = st.session(&id)?;
    let s = shared.lock().await;
    let v = LocationView::of(s.architecture());
    Ok(Json(serde_json::to_value(v).expect("views serialize")))
}

#[derive(Debug, Deserialize)]
pub struct TraceQuery {
    pub fact: String,
    #[serde(default)]
    pub agent: Option<String>,
}

async fn trace(State(st): State<Arc<AppState>>, Path(id): Path<String>, Query(q): Query<TraceQuery>) -> ApiResult {
    let shared = st.session(&id)?;
    let doc = with_session(shared, move |s| {
        let arch = s.architecture();
        let k = parse_knowledge(&q.fact, arch).map_err(|e| ApiError::parse("fact", e))?;
        let agent = match &q.agent {
            Some(name) => Some(
                arch.agent(name)
                    .cloned()
                    .ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, format!("unknown agent `{name}`")))?,
            ),
            None => None,
        };
        let found = crate::explain(arch, &s.requirements().terms(), &k, agent.as_ref())?;
        let (agent, tree) = match found {
            Some((a, t)) => (Some(a), Some(t)),
            None => (agent, None),
        };
        Ok(json!({
            "schema_version": SCHEMA_VERSION,
            "fact": k.to_string(),
            "agent": agent,
            "derivable": tree.is_some(),
            "tree": tree,
        }))
    })
    .await?;
    Ok(Json(doc))
}

async fn export(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let shared = st.session(&id)?;
    let s = shared.lock().await;
    let history: &[Step] = s.history();
    Ok(Json(json!({
        "schema_version": SCHEMA_VERSION,
        "session_id": id,
        "initial": print_architecture(s.initial()),
        "architecture": print_architecture(s.architecture()),
        "requirements": print_requirements(s.requirements()),
        "history": history,
    })))
}
