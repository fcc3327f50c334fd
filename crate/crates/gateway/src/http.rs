//! JSON HTTP API over an engine snapshot.
//!
//! | method | path            | purpose                                   |
//! |--------|-----------------|-------------------------------------------|
//! | GET    | `/search`       | `q`, `rank`, `expand`, `brad_mode`, `k`   |
//! | GET    | `/suggest`      | `term`, `m`                               |
//! | GET    | `/topics`       | assessment topics                         |
//! | GET    | `/pool`         | `topic`, `seed`: shuffled assessment pool |
//! | POST   | `/assessments`  | record one judgment                       |
//! | GET    | `/eval/report`  | evaluation report over stored judgments   |
//! | GET    | `/health`       | liveness and snapshot summary             |
//!
//! Errors are returned as `{"error": {"code": ..., "message": ...}}`.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::json;

use scirank_core::engine::{service_names, Engine, EngineError, SearchRequest};
use scirank_core::evalkit::{self, EvalReport, Judgment, JudgmentStore, Pool, Topic, Upsert};
use scirank_core::index::SearchError;

/// Structured API error.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    fn not_found(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "code": self.code, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Search(SearchError::EmptyQuery) => {
                ApiError::bad_request("empty_query", "empty query")
            }
            EngineError::Search(SearchError::ZeroK) => {
                ApiError::bad_request("invalid_k", "k must be at least 1")
            }
            other => ApiError::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                "internal",
                other.to_string(),
            ),
        }
    }
}

impl From<evalkit::EvalError> for ApiError {
    fn from(e: evalkit::EvalError) -> Self {
        ApiError::bad_request("evaluation", e.to_string())
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

struct Assessments {
    store: JudgmentStore,
    log: Option<File>,
}

/// Shared server state. The engine snapshot is swapped atomically; judgment
/// writes are serialized through one mutex.
pub struct AppState {
    engine: RwLock<Option<Arc<Engine>>>,
    topics: RwLock<Vec<Topic>>,
    assessments: Mutex<Assessments>,
    k: usize,
    seed: u64,
}

impl AppState {
    pub fn new(engine: Option<Engine>, topics: Vec<Topic>, k: usize, seed: u64) -> Self {
        AppState {
            engine: RwLock::new(engine.map(Arc::new)),
            topics: RwLock::new(topics),
            assessments: Mutex::new(Assessments {
                store: JudgmentStore::new(),
                log: None,
            }),
            k,
            seed,
        }
    }

    /// Load prior judgments and append new ones to `path`.
    pub fn with_assessment_log(
        self,
        prior: Vec<Judgment>,
        path: &std::path::Path,
    ) -> std::io::Result<Self> {
        let log = OpenOptions::new().create(true).append(true).open(path)?;
        {
            let mut a = self.assessments.lock().unwrap();
            a.store = JudgmentStore::from_judgments(prior);
            a.log = Some(log);
        }
        Ok(self)
    }

    pub fn swap_engine(&self, engine: Engine) {
        *self.engine.write().unwrap() = Some(Arc::new(engine));
    }

    fn engine(&self) -> Result<Arc<Engine>, ApiError> {
        self.engine.read().unwrap().clone().ok_or_else(|| {
            ApiError::new(
                StatusCode::SERVICE_UNAVAILABLE,
                "index_not_built",
                "index not built",
            )
        })
    }

    fn topic(&self, id: &str) -> Result<Topic, ApiError> {
        self.topics
            .read()
            .unwrap()
            .iter()
            .find(|t| t.id == id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("unknown_topic", format!("unknown topic {id:?}")))
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/search", get(search))
        .route("/suggest", get(suggest))
        .route("/topics", get(topics))
        .route("/pool", get(pool))
        .route("/assessments", post(record_assessment))
        .route("/eval/report", get(report))
        .route("/health", get(health))
        .with_state(state)
}

type Params = Query<HashMap<String, String>>;

fn parse_param<T: std::str::FromStr>(
    params: &HashMap<String, String>,
    name: &str,
) -> Result<Option<T>, ApiError>
where
    T::Err: std::fmt::Display,
{
    params
        .get(name)
        .map(|raw| {
            raw.parse::<T>()
                .map_err(|e| ApiError::bad_request("invalid_parameter", format!("{name}: {e}")))
        })
        .transpose()
}

/// Build a search request from query parameters.
pub fn search_request(params: &HashMap<String, String>) -> Result<SearchRequest, ApiError> {
    let q = params
        .get("q")
        .filter(|q| !q.trim().is_empty())
        .ok_or_else(|| ApiError::bad_request("empty_query", "empty query"))?;
    let mut req = SearchRequest::new(q.clone());
    if let Some(rank) = parse_param(params, "rank")? {
        req.rank = rank;
    }
    if let Some(expand) = parse_param(params, "expand")? {
        req.expand = expand;
    }
    if let Some(mode) = parse_param(params, "brad_mode")? {
        req.brad_mode = mode;
    }
    if let Some(k) = parse_param::<usize>(params, "k")? {
        if k == 0 {
            return Err(ApiError::bad_request("invalid_k", "k must be at least 1"));
        }
        req.k = k;
    }
    if let Some(terms) = params.get("expand_terms") {
        req.expand_terms = terms
            .split('|')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(String::from)
            .collect();
    }
    Ok(req)
}

async fn search(
    State(state): State<Arc<AppState>>,
    Query(params): Params,
) -> Result<Response, ApiError> {
    let req = search_request(&params)?;
    let engine = state.engine()?;
    let resp = engine.search(&req)?;
    Ok(Json(resp).into_response())
}

#[derive(Serialize)]
struct SuggestResponse {
    term: String,
    suggestions: Vec<scirank_core::coword::Suggestion>,
}

async fn suggest(
    State(state): State<Arc<AppState>>,
    Query(params): Params,
) -> ApiResult<SuggestResponse> {
    let term = params
        .get("term")
        .filter(|t| !t.trim().is_empty())
        .ok_or_else(|| ApiError::bad_request("missing_term", "term is required"))?;
    let m = parse_param::<usize>(&params, "m")?.unwrap_or(4);
    if m == 0 {
        return Err(ApiError::bad_request("invalid_m", "m must be at least 1"));
    }
    let engine = state.engine()?;
    Ok(Json(SuggestResponse {
        term: term.clone(),
        suggestions: engine.suggest(term, m),
    }))
}

async fn topics(State(state): State<Arc<AppState>>) -> Json<Vec<Topic>> {
    Json(state.topics.read().unwrap().clone())
}

fn topic_pool(state: &AppState, topic: &Topic, seed: u64) -> Result<Pool, ApiError> {
    let engine = state.engine()?;
    let runs = engine.run_topics(std::slice::from_ref(topic), state.k)?;
    Ok(evalkit::pool(
        topic,
        &runs[&topic.id],
        &service_names(),
        state.k,
        seed,
    )?)
}

/// Pool documents with titles only; no service attribution.
#[derive(Serialize)]
struct PoolResponse {
    topic: Topic,
    seed: u64,
    size: usize,
    docs: Vec<PoolDoc>,
}

#[derive(Serialize)]
struct PoolDoc {
    doc_id: String,
    title: String,
    #[serde(rename = "abstract")]
    abstract_text: Option<String>,
}

async fn pool(
    State(state): State<Arc<AppState>>,
    Query(params): Params,
) -> ApiResult<PoolResponse> {
    let id = params
        .get("topic")
        .ok_or_else(|| ApiError::bad_request("missing_topic", "topic is required"))?;
    let topic = state.topic(id)?;
    let seed = parse_param::<u64>(&params, "seed")?.unwrap_or(state.seed);
    let pool = topic_pool(&state, &topic, seed)?;
    let engine = state.engine()?;
    let docs = pool
        .doc_ids
        .iter()
        .filter_map(|id| engine.corpus().get(id))
        .map(|r| PoolDoc {
            doc_id: r.id.clone(),
            title: r.title.clone(),
            abstract_text: r.abstract_text.clone(),
        })
        .collect();
    Ok(Json(PoolResponse {
        topic,
        seed,
        size: pool.size(),
        docs,
    }))
}

#[derive(Debug, Serialize, serde::Deserialize, PartialEq)]
pub struct AssessmentAck {
    pub status: Upsert,
    pub judgment: Judgment,
}

async fn record_assessment(
    State(state): State<Arc<AppState>>,
    body: Result<Json<Judgment>, axum::extract::rejection::JsonRejection>,
) -> ApiResult<AssessmentAck> {
    let Json(judgment) = body.map_err(|e| ApiError::bad_request("invalid_body", e.body_text()))?;
    if judgment.rater_id.trim().is_empty() {
        return Err(ApiError::bad_request(
            "missing_rater",
            "rater_id must be non-empty",
        ));
    }
    state.topic(&judgment.topic_id)?;
    let engine = state.engine()?;
    if engine.corpus().get(&judgment.doc_id).is_none() {
        return Err(ApiError::not_found(
            "unknown_doc",
            format!("unknown doc {:?}", judgment.doc_id),
        ));
    }

    let mut a = state.assessments.lock().unwrap();
    if let Some(log) = a.log.as_mut() {
        let line = serde_json::to_string(&judgment).expect("judgment serializes");
        writeln!(log, "{line}")
            .and_then(|_| log.sync_data())
            .map_err(|e| {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "storage", e.to_string())
            })?;
    }
    let status = a.store.upsert(judgment.clone());
    Ok(Json(AssessmentAck { status, judgment }))
}

async fn report(
    State(state): State<Arc<AppState>>,
    Query(params): Params,
) -> ApiResult<EvalReport> {
    let seed = parse_param::<u64>(&params, "seed")?.unwrap_or(state.seed);
    let engine = state.engine()?;
    let topics = state.topics.read().unwrap().clone();
    let runs = engine.run_topics(&topics, state.k)?;
    let judgments = state.assessments.lock().unwrap().store.all();
    Ok(Json(evalkit::build_report(
        &topics,
        &runs,
        &service_names(),
        &judgments,
        state.k,
        seed,
    )?))
}

async fn health(State(state): State<Arc<AppState>>) -> Json<serde_json::Value> {
    let engine = state.engine.read().unwrap().clone();
    Json(json!({
        "status": "ok",
        "index_built": engine.is_some(),
        "documents": engine.as_ref().map_or(0, |e| e.corpus().len()),
        "topics": state.topics.read().unwrap().len(),
        "judgments": state.assessments.lock().unwrap().store.len(),
    }))
}

pub async fn serve(state: Arc<AppState>, addr: std::net::SocketAddr) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
