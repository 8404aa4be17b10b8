use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use chromashape::optimizer::{Constraints, PaletteRecord};
use chromashape::seed::splitmix64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::service::{merge_constraints, Engine, GenerateRequest, SwapRequest};

pub const SESSION_HEADER: &str = "x-session-id";

/// Swap state for one client.
#[derive(Debug, Clone, Default)]
pub struct SessionState {
    /// Only the exclusion sets are used; they grow and are applied to every
    /// later request of the session.
    pub exclusions: Constraints,
    /// Constraints of the last request.
    pub snapshot: Constraints,
    pub palette: Option<PaletteRecord>,
}

impl SessionState {
    fn absorb(&mut self, c: &Constraints) {
        self.exclusions.excluded_colors.extend(&c.excluded_colors);
        self.exclusions.excluded_shapes.extend(&c.excluded_shapes);
        self.exclusions.excluded_markers.extend(&c.excluded_markers);
        self.snapshot = c.clone();
    }
}

struct SessionSlot {
    state: Arc<tokio::sync::Mutex<SessionState>>,
    touched: Instant,
}

/// In-memory sessions with idle eviction.
pub struct Sessions {
    ttl: Duration,
    counter: AtomicU64,
    salt: u64,
    slots: Mutex<HashMap<String, SessionSlot>>,
}

impl Sessions {
    pub fn new(ttl: Duration) -> Self {
        let salt = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0);
        Sessions {
            ttl,
            counter: AtomicU64::new(0),
            salt,
            slots: Mutex::new(HashMap::new()),
        }
    }

    fn evict(&self, slots: &mut HashMap<String, SessionSlot>) {
        let ttl = self.ttl;
        slots.retain(|_, s| s.touched.elapsed() < ttl);
    }

    pub fn create(&self) -> (String, Arc<tokio::sync::Mutex<SessionState>>) {
        let k = self.counter.fetch_add(1, Ordering::Relaxed);
        let id = format!("{:016x}", splitmix64(self.salt ^ splitmix64(k)));
        let state = Arc::new(tokio::sync::Mutex::new(SessionState::default()));
        let mut slots = self.slots.lock().expect("session map");
        self.evict(&mut slots);
        slots.insert(
            id.clone(),
            SessionSlot {
                state: state.clone(),
                touched: Instant::now(),
            },
        );
        (id, state)
    }

    pub fn get(&self, id: &str) -> Option<Arc<tokio::sync::Mutex<SessionState>>> {
        let mut slots = self.slots.lock().expect("session map");
        self.evict(&mut slots);
        slots.get_mut(id).map(|s| {
            s.touched = Instant::now();
            s.state.clone()
        })
    }

    pub fn len(&self) -> usize {
        self.slots.lock().expect("session map").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone)]
pub struct AppState {
    pub engine: Arc<Engine>,
    pub sessions: Arc<Sessions>,
}

impl AppState {
    pub fn new(engine: Engine) -> Self {
        let ttl = Duration::from_secs(engine.config.session_ttl_secs);
        AppState {
            engine: Arc::new(engine),
            sessions: Arc::new(Sessions::new(ttl)),
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/colors", get(colors))
        .route("/api/shapes", get(shapes))
        .route("/api/matrix", get(matrix))
        .route("/api/palettes/generate", post(generate))
        .route("/api/palettes/swap", post(swap))
        .route("/api/stimulus/preview", get(preview))
        .with_state(state)
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        let body = serde_json::json!({ "error": self });
        (
            status,
            [(header::CONTENT_TYPE, "application/json")],
            body.to_string(),
        )
            .into_response()
    }
}

fn json<T: Serialize>(value: &T) -> Result<Response, ApiError> {
    let body = serde_json::to_string(value).map_err(|e| ApiError::internal(e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, "application/json")], body).into_response())
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::malformed(&e))
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
}

/// Existing session named by the header, or a fresh one.
fn session_for(
    state: &AppState,
    headers: &HeaderMap,
) -> Result<(String, Arc<tokio::sync::Mutex<SessionState>>), ApiError> {
    match headers.get(SESSION_HEADER) {
        Some(v) => {
            let id = v
                .to_str()
                .map_err(|_| ApiError::bad_request(SESSION_HEADER, "session id must be ASCII"))?
                .to_owned();
            let s = state.sessions.get(&id).ok_or_else(|| {
                ApiError::new(
                    404,
                    "unknown_session",
                    Some(SESSION_HEADER.into()),
                    format!("no session {id:?}"),
                )
            })?;
            Ok((id, s))
        }
        None => Ok(state.sessions.create()),
    }
}

fn with_session(mut resp: Response, id: &str) -> Response {
    if let Ok(v) = HeaderValue::from_str(id) {
        resp.headers_mut().insert(SESSION_HEADER, v);
    }
    resp
}

async fn colors(State(state): State<AppState>) -> Result<Response, ApiError> {
    json(&state.engine.colors())
}

async fn shapes(State(state): State<AppState>) -> Result<Response, ApiError> {
    json(&state.engine.shapes())
}

#[derive(Debug, Deserialize)]
struct MatrixQuery {
    axis: Option<String>,
    bin: Option<String>,
}

async fn matrix(
    State(state): State<AppState>,
    Query(q): Query<MatrixQuery>,
) -> Result<Response, ApiError> {
    let axis = q
        .axis
        .ok_or_else(|| ApiError::bad_request("axis", "missing axis"))?;
    let bin = q.bin.unwrap_or_else(|| "all".to_owned());
    json(&state.engine.matrix(&axis, &bin)?)
}

async fn generate(
    State(state): State<AppState>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let req: GenerateRequest = parse_body(&body)?;
    let (id, session) = session_for(&state, &headers)?;
    let mut guard = session.lock_owned().await;
    let engine = state.engine.clone();
    let extra = guard.exclusions.clone();
    let (req, resp) =
        blocking(move || engine.generate(&req, Some(&extra)).map(|r| (req, r))).await?;
    let mut applied = req.constraints;
    merge_constraints(&mut applied, &guard.exclusions);
    guard.absorb(&applied);
    guard.palette = resp.palettes.first().cloned();
    Ok(with_session(json(&resp)?, &id))
}

async fn swap(
    State(state): State<AppState>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let req: SwapRequest = parse_body(&body)?;
    let (id, session) = session_for(&state, &headers)?;
    let mut guard = session.lock_owned().await;
    let engine = state.engine.clone();
    let extra = guard.exclusions.clone();
    let resp = blocking(move || engine.swap(&req, Some(&extra))).await?;
    guard.absorb(&resp.constraints);
    guard.palette = Some(resp.palette.clone());
    Ok(with_session(json(&resp)?, &id))
}

#[derive(Debug, Deserialize)]
struct PreviewQuery {
    colors: Option<String>,
    shapes: Option<String>,
    seed: Option<u64>,
}

fn split_list(s: Option<&str>) -> Vec<String> {
    s.map(|s| {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::to_owned)
            .collect()
    })
    .unwrap_or_default()
}

async fn preview(
    State(state): State<AppState>,
    Query(q): Query<PreviewQuery>,
) -> Result<Response, ApiError> {
    let colors = split_list(q.colors.as_deref());
    let shapes = split_list(q.shapes.as_deref());
    let engine = state.engine.clone();
    let svg = blocking(move || engine.preview(&colors, &shapes, q.seed.unwrap_or(0))).await?;
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], svg).into_response())
}

/// Serves the API until interrupted.
pub async fn serve(state: AppState, addr: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
