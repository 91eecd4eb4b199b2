//! In-memory session service. Each session owns a tree and the operations
//! applied to it; requests on one session are serialized by its mutex.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderValue, Method as HttpMethod, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use rbsa_core::{RbError, Trace, Tree, TreeDoc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::Mutex;
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::commands::{run_delete, trace_body, Method};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Operation {
    Insert { key: i64 },
    Delete { key: i64, method: Method },
}

#[derive(Debug, Clone, Default)]
pub struct Session {
    pub tree: Tree,
    pub history: Vec<(Operation, Option<Trace>)>,
}

impl Session {
    /// Traces in the order they were recorded.
    pub fn traces(&self) -> impl Iterator<Item = &Trace> {
        self.history.iter().filter_map(|(_, t)| t.as_ref())
    }

    /// Rebuild the tree from an empty one by replaying `history`.
    pub fn replay(&self) -> Result<Tree, RbError> {
        let mut t = Tree::new();
        for (op, _) in &self.history {
            match *op {
                Operation::Insert { key } => t.insert(key)?,
                Operation::Delete { key, method } => {
                    run_delete(&mut t, key, method, false)?;
                }
            }
        }
        Ok(t)
    }
}

#[derive(Default)]
pub struct AppState {
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    next: AtomicU64,
}

impl AppState {
    fn add(&self, session: Session) -> String {
        let id = format!("s{}", self.next.fetch_add(1, Ordering::Relaxed) + 1);
        self.sessions
            .write()
            .expect("session map poisoned")
            .insert(id.clone(), Arc::new(Mutex::new(session)));
        id
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("unknown session {id}")))
    }
}

#[derive(Debug)]
pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<RbError> for ApiError {
    fn from(e: RbError) -> Self {
        let status = match e {
            RbError::KeyNotFound(_) => StatusCode::UNPROCESSABLE_ENTITY,
            RbError::DuplicateKey(_) | RbError::MalformedDocument(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    let text: &[u8] = if body.is_empty() { b"{}" } else { body };
    serde_json::from_slice(text).map_err(|e| ApiError(StatusCode::BAD_REQUEST, e.to_string()))
}

fn trace_response(trace: &Trace) -> Response {
    (
        [(header::CONTENT_TYPE, "application/json")],
        trace_body(trace),
    )
        .into_response()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateBody {
    #[serde(default)]
    keys: Vec<i64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InsertBody {
    key: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DeleteBody {
    key: i64,
    #[serde(default)]
    method: Method,
    #[serde(default)]
    snapshots: bool,
}

#[derive(Serialize)]
struct SessionView {
    id: String,
    tree: TreeDoc,
}

type Shared = Arc<AppState>;

async fn create(State(app): State<Shared>, body: Bytes) -> Result<Json<SessionView>, ApiError> {
    let body: CreateBody = parse(&body)?;
    let mut session = Session::default();
    for key in body.keys {
        session.tree.insert(key)?;
        session.history.push((Operation::Insert { key }, None));
    }
    let tree = TreeDoc::from_tree(&session.tree);
    let id = app.add(session);
    Ok(Json(SessionView { id, tree }))
}

async fn insert(
    State(app): State<Shared>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<TreeDoc>, ApiError> {
    let body: InsertBody = parse(&body)?;
    let session = app.get(&id)?;
    let mut s = session.lock().await;
    s.tree.insert(body.key)?;
    s.history.push((Operation::Insert { key: body.key }, None));
    Ok(Json(TreeDoc::from_tree(&s.tree)))
}

async fn delete(
    State(app): State<Shared>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let body: DeleteBody = parse(&body)?;
    let session = app.get(&id)?;
    let mut s = session.lock().await;
    let trace = run_delete(&mut s.tree, body.key, body.method, body.snapshots)?;
    let response = trace_response(&trace);
    let op = Operation::Delete {
        key: body.key,
        method: body.method,
    };
    s.history.push((op, Some(trace)));
    Ok(response)
}

async fn fork(
    State(app): State<Shared>,
    Path(id): Path<String>,
) -> Result<Json<SessionView>, ApiError> {
    let copy = app.get(&id)?.lock().await.clone();
    let tree = TreeDoc::from_tree(&copy.tree);
    let id = app.add(copy);
    Ok(Json(SessionView { id, tree }))
}

async fn tree(
    State(app): State<Shared>,
    Path(id): Path<String>,
) -> Result<Json<TreeDoc>, ApiError> {
    let session = app.get(&id)?;
    let s = session.lock().await;
    Ok(Json(TreeDoc::from_tree(&s.tree)))
}

async fn trace(
    State(app): State<Shared>,
    Path((id, n)): Path<(String, usize)>,
) -> Result<Response, ApiError> {
    let session = app.get(&id)?;
    let s = session.lock().await;
    let found = s.traces().nth(n).map(trace_response);
    found.ok_or_else(|| {
        ApiError(
            StatusCode::NOT_FOUND,
            format!("session {id} has no trace {n}"),
        )
    })
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok", "trace": rbsa_core::trace::TRACE_VERSION }))
}

fn local_origin(origin: &HeaderValue) -> bool {
    let Ok(o) = origin.to_str() else { return false };
    let rest = o
        .strip_prefix("http://")
        .or_else(|| o.strip_prefix("https://"));
    rest.is_some_and(|r| {
        let host = r.split(':').next().unwrap_or("");
        matches!(host, "localhost" | "127.0.0.1" | "[::1]")
    })
}

pub fn router(state: Shared) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(AllowOrigin::predicate(|o, _| local_origin(o)))
        .allow_methods([HttpMethod::GET, HttpMethod::POST])
        .allow_headers([header::CONTENT_TYPE]);
    Router::new()
        .route("/health", get(health))
        .route("/session", post(create))
        .route("/session/:id/insert", post(insert))
        .route("/session/:id/delete", post(delete))
        .route("/session/:id/fork", post(fork))
        .route("/session/:id/tree", get(tree))
        .route("/session/:id/trace/:n", get(trace))
        .layer(cors)
        .with_state(state)
}

pub fn app() -> Router {
    router(Arc::new(AppState::default()))
}

/// Binds first so a busy port is reported before the runtime blocks.
pub async fn bind(port: u16) -> std::io::Result<tokio::net::TcpListener> {
    tokio::net::TcpListener::bind(SocketAddr::from(([127, 0, 0, 1], port))).await
}

pub async fn serve(listener: tokio::net::TcpListener) -> std::io::Result<()> {
    axum::serve(listener, app()).await
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn only_local_origins_pass() {
        for (o, ok) in [
            ("http://localhost:5173", true),
            ("http://127.0.0.1", true),
            ("https://localhost", true),
            ("http://example.com", false),
            ("http://localhost.example.com", false),
        ] {
            assert_eq!(local_origin(&HeaderValue::from_static(o)), ok, "{o}");
        }
    }

    #[test]
    fn history_replays_to_tree() {
        let mut s = Session::default();
        for k in [30, 20, 40, 35, 10] {
            s.tree.insert(k).unwrap();
            s.history.push((Operation::Insert { key: k }, None));
        }
        for (k, method) in [(20, Method::Sa), (40, Method::Ta)] {
            let t = run_delete(&mut s.tree, k, method, false).unwrap();
            s.history
                .push((Operation::Delete { key: k, method }, Some(t)));
        }
        assert!(s.replay().unwrap().same_as(&s.tree));
        assert_eq!(s.traces().count(), 2);
    }
}
