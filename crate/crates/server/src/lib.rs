//! Stateless HTTP/JSON API over an immutable [`Engine`].
//!
//! | method | path                  | body / query                          |
//! |--------|-----------------------|---------------------------------------|
//! | POST   | `/api/search`         | `QueryRequest` JSON                   |
//! | GET    | `/api/timeline`       | `q`, `model`, `time`, `entities`, ... |
//! | GET    | `/api/entities`       | same as timeline                      |
//! | GET    | `/api/document/{id}`  |                                       |
//! | GET    | `/api/health`         |                                       |
//!
//! Every endpoint also accepts `k`, `alpha`, `gamma` and `burst_k` as query
//! parameters. Errors are returned as `{"error": "..."}`.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use expedition_core::engine::QueryRequest;
use expedition_core::{Engine, MonthSpan, RankError, RetrievalModel};
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            message: message.into(),
        }
    }

    fn not_found(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::NOT_FOUND,
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorBody { error: self.message })).into_response()
    }
}

impl From<RankError> for ApiError {
    fn from(e: RankError) -> Self {
        ApiError::bad_request(e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

/// Query-string form of a request. List values are comma separated.
#[derive(Debug, Default, Deserialize)]
pub struct QueryParams {
    pub q: Option<String>,
    pub model: Option<String>,
    /// `YYYY-MM..YYYY-MM` or a single `YYYY-MM`.
    pub time: Option<String>,
    pub entities: Option<String>,
    pub types: Option<String>,
    pub prev: Option<String>,
    pub k: Option<usize>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub burst_k: Option<f64>,
}

fn list(s: &Option<String>) -> impl Iterator<Item = String> + '_ {
    s.iter()
        .flat_map(|s| s.split(','))
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
}

impl QueryParams {
    pub fn into_request(self) -> Result<QueryRequest, ApiError> {
        let model = match &self.model {
            Some(m) => m
                .parse::<RetrievalModel>()
                .map_err(|e| ApiError::bad_request(e.to_string()))?,
            None => RetrievalModel::default(),
        };
        let mut req = QueryRequest::new(self.q.clone().unwrap_or_default(), model);
        if let Some(t) = &self.time {
            let span: MonthSpan = t.parse().map_err(|e: expedition_core::ParseError| ApiError::bad_request(e.to_string()))?;
            req.constraints.time = Some(span);
        }
        req.constraints.entities = list(&self.entities).collect();
        req.constraints.article_types = list(&self.types).collect();
        req.prev = list(&self.prev).collect();
        self.apply_overrides(&mut req);
        Ok(req)
    }

    fn apply_overrides(&self, req: &mut QueryRequest) {
        req.k = self.k.or(req.k);
        req.alpha = self.alpha.or(req.alpha);
        req.gamma = self.gamma.or(req.gamma);
        req.burst_k = self.burst_k.or(req.burst_k);
    }
}

type AppState = Arc<Engine>;

/// Builds the API router with permissive CORS for browser clients.
pub fn router(engine: Arc<Engine>) -> Router {
    Router::new()
        .route("/api/search", post(search))
        .route("/api/timeline", get(timeline))
        .route("/api/entities", get(entities))
        .route("/api/document/{id}", get(document))
        .route("/api/health", get(health))
        .layer(CorsLayer::permissive())
        .with_state(engine)
}

/// Runs engine work off the async workers.
async fn blocking<T, F>(engine: AppState, f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce(&Engine) -> Result<T, ApiError> + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&engine))
        .await
        .map_err(|e| ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            message: e.to_string(),
        })?
}

async fn search(
    State(engine): State<AppState>,
    params: Result<Query<QueryParams>, QueryRejection>,
    body: Result<Json<QueryRequest>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Query(params) = params?;
    let Json(mut req) = body?;
    params.apply_overrides(&mut req);
    let res = blocking(engine, move |e| Ok(e.search(&req)?)).await?;
    Ok(Json(res).into_response())
}

async fn timeline(
    State(engine): State<AppState>,
    params: Result<Query<QueryParams>, QueryRejection>,
) -> Result<Response, ApiError> {
    let req = params?.0.into_request()?;
    let res = blocking(engine, move |e| Ok(e.timeline(&req)?)).await?;
    Ok(Json(res).into_response())
}

async fn entities(
    State(engine): State<AppState>,
    params: Result<Query<QueryParams>, QueryRejection>,
) -> Result<Response, ApiError> {
    let req = params?.0.into_request()?;
    let res = blocking(engine, move |e| Ok(e.selectors(&req)?)).await?;
    Ok(Json(res).into_response())
}

async fn document(State(engine): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let res = blocking(engine, move |e| {
        e.document(&id)
            .ok_or_else(|| ApiError::not_found(format!("unknown document `{id}`")))
    })
    .await?;
    Ok(Json(res).into_response())
}

async fn health(State(engine): State<AppState>) -> Response {
    Json(engine.health()).into_response()
}

/// Binds `addr`, reports the bound address through `on_ready`, and serves
/// until the process ends.
pub async fn serve(engine: Arc<Engine>, addr: SocketAddr, on_ready: impl FnOnce(SocketAddr)) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    tracing::info!(%local, "listening");
    on_ready(local);
    axum::serve(listener, router(engine)).await
}
