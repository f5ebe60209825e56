//! HTTP interface. Bodies are JSON except the judgment file endpoints,
//! which use the plain judgment format.
//!
//! Assessor role (`x-trelkit-token: <assessor or operator token>`):
//!
//! ```text
//! GET  /assignments/{assessor}
//! GET  /assignments/{assessor}/{topic}/next
//! GET  /assignments/{assessor}/{topic}/history
//! GET  /assignments/{assessor}/{topic}/documents/{doc}
//! POST /judgments
//! GET  /documents/{doc}/search?q=
//! ```
//!
//! Operator role (`x-trelkit-token: <operator token>`):
//!
//! ```text
//! POST /pools      GET /export?topic=     POST /ingest
//! GET  /qc?format=csv                     GET  /audit
//! ```

use std::collections::BTreeMap;
use std::io::Write as _;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use parking_lot::RwLock;
use serde::Deserialize;
use serde_json::json;
use tower_http::services::ServeDir;
use trelkit_core::collection::parse_pools;

use crate::config::ServiceConfig;
use crate::service::{JudgingService, Submission};
use crate::Error;

pub const TOKEN_HEADER: &str = "x-trelkit-token";

pub struct AppState {
    pub service: RwLock<JudgingService>,
    assessor_token: Option<String>,
    operator_token: Option<String>,
}

impl AppState {
    pub fn new(service: JudgingService, config: &ServiceConfig) -> Self {
        Self {
            service: RwLock::new(service),
            assessor_token: config.assessor_token.clone(),
            operator_token: config.operator_token.clone(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Assessor,
    Operator,
}

fn authorize(state: &AppState, headers: &HeaderMap, role: Role) -> Result<(), Error> {
    let given = headers.get(TOKEN_HEADER).and_then(|v| v.to_str().ok());
    let matches = |t: &Option<String>| t.as_deref().is_some_and(|t| Some(t) == given);
    let open = state.operator_token.is_none()
        && (role == Role::Operator || state.assessor_token.is_none());
    if open || matches(&state.operator_token) || (role == Role::Assessor && matches(&state.assessor_token)) {
        Ok(())
    } else {
        Err(Error::Unauthorized)
    }
}

impl IntoResponse for Error {
    fn into_response(self) -> Response {
        let status = match &self {
            Error::NotFound(_) => StatusCode::NOT_FOUND,
            Error::Conflict(_) => StatusCode::CONFLICT,
            Error::Invalid(_) | Error::Core(trelkit_core::Error::Parse { .. }) => StatusCode::UNPROCESSABLE_ENTITY,
            Error::Core(trelkit_core::Error::Validation(_)) => StatusCode::UNPROCESSABLE_ENTITY,
            Error::Unauthorized => StatusCode::UNAUTHORIZED,
            Error::Config(_) => StatusCode::SERVICE_UNAVAILABLE,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(json!({ "error": self.to_string() }))).into_response()
    }
}

type Shared = State<Arc<AppState>>;
type Reply = Result<Response, Error>;

async fn topics(State(s): Shared, h: HeaderMap, Path(assessor): Path<String>) -> Reply {
    authorize(&s, &h, Role::Assessor)?;
    let topics = s.service.read().topics_for(&assessor)?;
    Ok(Json(json!({ "assessor_id": assessor, "topics": topics })).into_response())
}

async fn next(State(s): Shared, h: HeaderMap, Path((assessor, topic)): Path<(String, String)>) -> Reply {
    authorize(&s, &h, Role::Assessor)?;
    Ok(Json(s.service.read().next(&assessor, &topic)?).into_response())
}

async fn history(State(s): Shared, h: HeaderMap, Path((assessor, topic)): Path<(String, String)>) -> Reply {
    authorize(&s, &h, Role::Assessor)?;
    Ok(Json(s.service.read().history(&assessor, &topic)?).into_response())
}

async fn judged_document(
    State(s): Shared,
    h: HeaderMap,
    Path((assessor, topic, doc)): Path<(String, String, String)>,
) -> Reply {
    authorize(&s, &h, Role::Assessor)?;
    Ok(Json(s.service.read().judged_document(&assessor, &topic, &doc)?).into_response())
}

async fn submit(State(s): Shared, h: HeaderMap, Json(body): Json<Submission>) -> Reply {
    authorize(&s, &h, Role::Assessor)?;
    Ok(Json(s.service.write().submit(&body)?).into_response())
}

#[derive(Deserialize)]
struct SearchQuery {
    #[serde(default)]
    q: String,
}

async fn search(State(s): Shared, h: HeaderMap, Path(doc): Path<String>, Query(q): Query<SearchQuery>) -> Reply {
    authorize(&s, &h, Role::Assessor)?;
    Ok(Json(s.service.read().search(&doc, &q.q)?).into_response())
}

#[derive(Deserialize)]
struct PoolUpload {
    /// Pool file content.
    pools: String,
    /// Assessors to assign, by topic.
    #[serde(default)]
    assessors: BTreeMap<String, Vec<String>>,
}

async fn upload_pools(State(s): Shared, h: HeaderMap, Json(body): Json<PoolUpload>) -> Reply {
    authorize(&s, &h, Role::Operator)?;
    let pools = parse_pools(&body.pools)?;
    let n = pools.len();
    let created = s.service.write().upload_pools(pools, &body.assessors)?;
    Ok(Json(json!({ "pools": n, "assignments_created": created })).into_response())
}

#[derive(Deserialize)]
struct ExportQuery {
    topic: Option<String>,
}

fn plain(text: String) -> Response {
    ([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], text).into_response()
}

async fn export(State(s): Shared, h: HeaderMap, Query(q): Query<ExportQuery>) -> Reply {
    authorize(&s, &h, Role::Operator)?;
    Ok(plain(s.service.read().export(q.topic.as_deref())))
}

async fn ingest(State(s): Shared, h: HeaderMap, body: String) -> Reply {
    authorize(&s, &h, Role::Operator)?;
    let n = s.service.write().ingest(&body)?;
    Ok(Json(json!({ "judgments": n })).into_response())
}

#[derive(Deserialize)]
struct QcQuery {
    format: Option<String>,
}

async fn qc(State(s): Shared, h: HeaderMap, Query(q): Query<QcQuery>) -> Reply {
    authorize(&s, &h, Role::Operator)?;
    let report = s.service.read().qc()?;
    Ok(match q.format.as_deref() {
        Some("csv") => plain(report.to_csv()),
        _ => Json(report).into_response(),
    })
}

async fn audit(State(s): Shared, h: HeaderMap) -> Reply {
    authorize(&s, &h, Role::Operator)?;
    Ok(Json(s.service.read().audit().to_vec()).into_response())
}

pub fn router(state: Arc<AppState>, ui_dir: Option<&std::path::Path>) -> Router {
    let api = Router::new()
        .route("/assignments/{assessor}", get(topics))
        .route("/assignments/{assessor}/{topic}/next", get(next))
        .route("/assignments/{assessor}/{topic}/history", get(history))
        .route("/assignments/{assessor}/{topic}/documents/{doc}", get(judged_document))
        .route("/judgments", post(submit))
        .route("/documents/{doc}/search", get(search))
        .route("/pools", post(upload_pools))
        .route("/export", get(export))
        .route("/ingest", post(ingest))
        .route("/qc", get(qc))
        .route("/audit", get(audit))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

pub fn app(config: &ServiceConfig) -> crate::Result<Router> {
    let service = JudgingService::open(config)?;
    let state = Arc::new(AppState::new(service, config));
    Ok(router(state, config.ui_dir.as_deref()))
}

/// Serves until interrupted. The bound address is printed first, so a
/// `listen` port of 0 can be discovered by the caller.
pub async fn serve(config: &ServiceConfig) -> crate::Result<()> {
    let app = app(config)?;
    let listener = tokio::net::TcpListener::bind(&config.listen).await?;
    let mut out = std::io::stdout();
    writeln!(out, "listening on {}", listener.local_addr()?)?;
    out.flush()?;
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
