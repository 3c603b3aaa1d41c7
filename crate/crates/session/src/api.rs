use std::future::Future;
use std::path::Path;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;
use tower_http::services::ServeDir;

use crate::error::SessionError;
use crate::session::{CreateSession, CycleRequest, SessionManager};

/// Error body `{code, message, pointer?}`.
#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pointer: Option<String>,
}

pub struct ApiError(pub SessionError);

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        Self(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            SessionError::NotFound(_) => StatusCode::NOT_FOUND,
            SessionError::Conflict(_) => StatusCode::CONFLICT,
            SessionError::Validation { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            SessionError::Cancelled => StatusCode::GONE,
            SessionError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let pointer = match &self.0 {
            SessionError::Validation { pointer, .. } => pointer.clone(),
            _ => None,
        };
        let body = ErrorBody {
            code: self.0.code(),
            message: self.0.to_string(),
            pointer,
        };
        (status, Json(body)).into_response()
    }
}

/// RFC 6901 pointer for a serde path.
pub fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

/// Deserializes JSON, reporting the failing location as a pointer.
pub fn parse_json<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, SessionError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = json_pointer(e.path());
        SessionError::validation(e.inner().to_string(), Some(&pointer))
    })
}

type Shared = Arc<SessionManager>;

async fn healthz() -> Json<serde_json::Value> {
    Json(json!({
        "status": "ok",
        "name": "prefmoo",
        "version": env!("CARGO_PKG_VERSION"),
    }))
}

async fn create(State(m): State<Shared>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateSession = parse_json(&body)?;
    let snap = tokio::task::spawn_blocking(move || m.create(req))
        .await
        .map_err(|e| SessionError::Internal(e.to_string()))??;
    Ok((StatusCode::CREATED, Json(snap)).into_response())
}

async fn show(State(m): State<Shared>, UrlPath(id): UrlPath<String>) -> Result<Response, ApiError> {
    Ok(Json(m.get(&id)?).into_response())
}

async fn remove(State(m): State<Shared>, UrlPath(id): UrlPath<String>) -> Result<Response, ApiError> {
    m.delete(&id)?;
    Ok(Json(json!({ "deleted": id })).into_response())
}

async fn start_cycle(
    State(m): State<Shared>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let req: CycleRequest = parse_json(&body)?;
    let ticket = m.begin_cycle(&id, req)?;
    let index = ticket.index();
    tokio::task::spawn_blocking(move || {
        // Outcome is visible through the session snapshot.
        let _ = ticket.execute();
    });
    Ok((StatusCode::ACCEPTED, Json(json!({ "session": id, "cycle": index }))).into_response())
}

async fn show_cycle(
    State(m): State<Shared>,
    UrlPath((id, k)): UrlPath<(String, usize)>,
) -> Result<Response, ApiError> {
    Ok(Json(m.cycle(&id, k)?).into_response())
}

/// HTTP routes; unmatched paths fall through to `static_dir` when given.
pub fn router(manager: Shared, static_dir: Option<&Path>) -> Router {
    let app = Router::new()
        .route("/healthz", get(healthz))
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(show).delete(remove))
        .route("/sessions/{id}/cycles", post(start_cycle))
        .route("/sessions/{id}/cycles/{k}", get(show_cycle))
        .with_state(manager);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

/// Serves until `shutdown` resolves, then cancels running cycles.
pub async fn serve<F>(listener: tokio::net::TcpListener, manager: Shared, static_dir: Option<&Path>, shutdown: F) -> std::io::Result<()>
where
    F: Future<Output = ()> + Send + 'static,
{
    let app = router(manager.clone(), static_dir);
    let result = axum::serve(listener, app).with_graceful_shutdown(shutdown).await;
    manager.cancel_all();
    result
}
