//! Session HTTP service.
//!
//! Each session has a single writer: commands queue on a per-session lock
//! and are applied to a copy of the state on a blocking thread. Readers
//! only touch the last published snapshot, so they never wait for a tick.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};
use std::time::Duration;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chiwalk_core::session::{Command, EventRecord, SessionConfig, SessionState};
use chiwalk_core::world::Scenario;
use chiwalk_core::Error;
use serde::{Deserialize, Serialize};
use tokio::sync::{watch, Mutex};

/// Upper bound on how long `/events` holds a request open.
pub const MAX_POLL_MS: u64 = 60_000;
pub const DEFAULT_POLL_MS: u64 = 25_000;

struct Session {
    writer: Mutex<()>,
    snapshot: RwLock<Arc<SessionState>>,
    /// Carries the log length after each applied command.
    seq: watch::Sender<u64>,
}

impl Session {
    fn current(&self) -> Arc<SessionState> {
        self.snapshot.read().expect("snapshot lock").clone()
    }
}

#[derive(Default)]
pub struct Store {
    sessions: RwLock<HashMap<u64, Arc<Session>>>,
    next_id: AtomicU64,
}

pub type AppState = Arc<Store>;

pub fn router() -> Router {
    router_with(Arc::new(Store::default()))
}

pub fn router_with(store: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}/state", get(state))
        .route("/sessions/{id}/command", post(command))
        .route("/sessions/{id}/suggestions", get(suggestions))
        .route("/sessions/{id}/events", get(events))
        .with_state(store)
}

pub async fn serve(port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router()).await
}

#[derive(Debug, Serialize)]
struct ApiError {
    error: String,
    kind: &'static str,
}

fn error(status: StatusCode, kind: &'static str, msg: impl Into<String>) -> Response {
    (status, Json(ApiError { error: msg.into(), kind })).into_response()
}

fn engine_error(e: Error) -> Response {
    let (status, kind) = match &e {
        Error::SessionClosed => (StatusCode::CONFLICT, "session_closed"),
        Error::ComponentLocked(_) => (StatusCode::CONFLICT, "component_locked"),
        Error::UnknownComponent(_) => (StatusCode::NOT_FOUND, "unknown_component"),
        Error::MalformedCommand(_) => (StatusCode::BAD_REQUEST, "malformed_command"),
        Error::VersionMismatch { .. } => (StatusCode::BAD_REQUEST, "version_mismatch"),
        Error::InvalidParameter { .. } | Error::DegenerateArea { .. } => (StatusCode::BAD_REQUEST, "invalid_parameter"),
        _ => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
    };
    error(status, kind, e.to_string())
}

fn json_text(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn lookup(store: &Store, id: u64) -> Result<Arc<Session>, Response> {
    store
        .sessions
        .read()
        .expect("store lock")
        .get(&id)
        .cloned()
        .ok_or_else(|| error(StatusCode::NOT_FOUND, "unknown_session", format!("no session {id}")))
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ScenarioSpec {
    /// `builtin:<name>` or a path on the server.
    Named(String),
    Inline(Box<Scenario>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    #[serde(default)]
    pub scenario: Option<ScenarioSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub config: Option<SessionConfig>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Created {
    pub id: u64,
    pub format: String,
}

async fn create(State(store): State<AppState>, body: String) -> Response {
    let req: CreateSession = if body.trim().is_empty() {
        CreateSession::default()
    } else {
        match serde_json::from_str(&body) {
            Ok(r) => r,
            Err(e) => return error(StatusCode::BAD_REQUEST, "malformed_request", e.to_string()),
        }
    };
    let scenario = match req.scenario.unwrap_or(ScenarioSpec::Named("builtin:office17".into())) {
        ScenarioSpec::Named(s) => Scenario::resolve(&s, req.seed),
        ScenarioSpec::Inline(s) => s.validate().map(|_| *s),
    };
    let built = scenario.and_then(|sc| {
        let config = req.config.unwrap_or_else(|| SessionConfig::for_scenario(&sc));
        SessionState::new(sc, req.seed, config)
    });
    let state = match built {
        Ok(s) => s,
        Err(e) => return engine_error(e),
    };
    let id = store.next_id.fetch_add(1, Ordering::Relaxed);
    let format = state.format.clone();
    let session = Session { writer: Mutex::new(()), snapshot: RwLock::new(Arc::new(state)), seq: watch::channel(0).0 };
    store.sessions.write().expect("store lock").insert(id, Arc::new(session));
    (StatusCode::CREATED, Json(Created { id, format })).into_response()
}

async fn state(State(store): State<AppState>, Path(id): Path<u64>) -> Response {
    let session = match lookup(&store, id) {
        Ok(s) => s,
        Err(r) => return r,
    };
    match session.current().to_canonical_json() {
        Ok(body) => json_text(body),
        Err(e) => engine_error(e),
    }
}

async fn command(State(store): State<AppState>, Path(id): Path<u64>, body: String) -> Response {
    let session = match lookup(&store, id) {
        Ok(s) => s,
        Err(r) => return r,
    };
    let cmd: Command = match serde_json::from_str(&body) {
        Ok(c) => c,
        Err(e) => return error(StatusCode::BAD_REQUEST, "malformed_command", e.to_string()),
    };
    let _guard = session.writer.lock().await;
    let mut next = (*session.current()).clone();
    let applied = tokio::task::spawn_blocking(move || next.tick(cmd).map(|delta| (next, delta))).await;
    match applied {
        Ok(Ok((next, delta))) => {
            let seq = next.seq();
            *session.snapshot.write().expect("snapshot lock") = Arc::new(next);
            session.seq.send_replace(seq);
            Json(delta).into_response()
        }
        Ok(Err(e)) => engine_error(e),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()),
    }
}

async fn suggestions(State(store): State<AppState>, Path(id): Path<u64>) -> Response {
    let session = match lookup(&store, id) {
        Ok(s) => s,
        Err(r) => return r,
    };
    let snap = session.current();
    match tokio::task::spawn_blocking(move || snap.suggestions()).await {
        Ok(s) => Json(s).into_response(),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()),
    }
}

#[derive(Debug, Deserialize)]
pub struct EventsQuery {
    #[serde(default)]
    pub since: u64,
    pub timeout_ms: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EventPage {
    pub events: Vec<EventRecord>,
    /// Pass as `since` on the next poll.
    pub next: u64,
    pub closed: bool,
}

fn page(state: &SessionState, since: u64) -> EventPage {
    let from = (since as usize).min(state.log.len());
    EventPage { events: state.log[from..].to_vec(), next: state.seq(), closed: state.closed }
}

/// Returns log entries from index `since`. With nothing new it waits for
/// the next command or the timeout, whichever comes first.
async fn events(State(store): State<AppState>, Path(id): Path<u64>, Query(q): Query<EventsQuery>) -> Response {
    let session = match lookup(&store, id) {
        Ok(s) => s,
        Err(r) => return r,
    };
    let mut rx = session.seq.subscribe();
    let snap = session.current();
    if snap.seq() > q.since || snap.closed {
        return Json(page(&snap, q.since)).into_response();
    }
    let wait = Duration::from_millis(q.timeout_ms.unwrap_or(DEFAULT_POLL_MS).min(MAX_POLL_MS));
    let _ = tokio::time::timeout(wait, rx.wait_for(|&seq| seq > q.since)).await;
    Json(page(&session.current(), q.since)).into_response()
}
