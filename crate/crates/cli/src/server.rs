//! JSON-over-HTTP session service used by the correction UI.
//!
//! Every pipeline call runs on the blocking pool. Sessions live in memory
//! and, when a store is configured, are written through after each
//! mutation and loaded lazily on first access.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use base64::Engine as _;
use serde::Deserialize;

use cellmatch_core::pipeline::EngineConfig;
use cellmatch_core::session::{Session, SessionStore};
use cellmatch_core::{Error, Side};

type Shared = Arc<Mutex<Session>>;

#[derive(Default)]
pub struct AppState {
    sessions: RwLock<HashMap<String, Shared>>,
    store: Option<SessionStore>,
}

impl AppState {
    pub fn new(store: Option<SessionStore>) -> Arc<Self> {
        Arc::new(Self {
            sessions: RwLock::default(),
            store,
        })
    }

    fn lookup(&self, id: &str) -> Result<Shared, ApiError> {
        if let Some(s) = self.sessions.read().expect("session map").get(id) {
            return Ok(s.clone());
        }
        let store = self.store.as_ref().filter(|s| s.contains(id)).ok_or_else(|| not_found(id))?;
        let session = store.load(id)?;
        let mut map = self.sessions.write().expect("session map");
        Ok(map
            .entry(id.to_string())
            .or_insert_with(|| Arc::new(Mutex::new(session)))
            .clone())
    }

    fn persist(&self, session: &Session) -> Result<(), ApiError> {
        if let Some(store) = &self.store {
            store.save(session)?;
        }
        Ok(())
    }

    fn ids(&self) -> Result<Vec<String>, ApiError> {
        let mut ids: Vec<String> = self.sessions.read().expect("session map").keys().cloned().collect();
        if let Some(store) = &self.store {
            ids.extend(store.ids()?);
        }
        ids.sort();
        ids.dedup();
        Ok(ids)
    }
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }
}

fn not_found(id: &str) -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, format!("no session {id:?}"))
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Format(_) | Error::Parameter(_) | Error::Config(_) => StatusCode::BAD_REQUEST,
            Error::NoRegions(_) | Error::UnknownRegion { .. } | Error::UndefinedMetric(_) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            Error::PinConflict(_) => StatusCode::CONFLICT,
            Error::NotPinned(_) => StatusCode::NOT_FOUND,
            Error::Store { .. } | Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            log::error!("{}", self.message);
        }
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
}

fn parse<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("invalid body: {e}")))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/pins", post(add_pin))
        .route("/sessions/{id}/pins/{a}", delete(remove_pin))
        .route("/sessions/{id}/strokes", get(get_strokes))
        .route("/sessions/{id}/inbetween", get(get_inbetween))
        .route("/sessions/{id}/overlay/{file}", get(get_overlay))
        .with_state(state)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateBody {
    a: String,
    b: String,
    #[serde(default)]
    config: Option<EngineConfig>,
}

async fn create_session(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let body: CreateBody = parse(&body)?;
    let decode = |field: &str, text: &str| {
        base64::engine::general_purpose::STANDARD
            .decode(text)
            .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("field {field}: {e}")))
    };
    let (png_a, png_b) = (decode("a", &body.a)?, decode("b", &body.b)?);
    let config = body.config.unwrap_or_default();
    config.validate()?;
    let st = state.clone();
    let view = blocking(move || {
        let session = Session::create(png_a, png_b, &config)?;
        st.persist(&session)?;
        let view = session.state();
        st.sessions
            .write()
            .expect("session map")
            .insert(session.id().to_string(), Arc::new(Mutex::new(session)));
        Ok(view)
    })
    .await?;
    log::info!("created session {}", view.id);
    Ok((StatusCode::CREATED, Json(view)).into_response())
}

async fn list_sessions(State(state): State<Arc<AppState>>) -> Result<Response, ApiError> {
    let ids = blocking(move || state.ids()).await?;
    Ok(Json(serde_json::json!({ "sessions": ids })).into_response())
}

/// Runs `f` against a session on the blocking pool.
async fn with_session<T: Send + 'static>(
    state: Arc<AppState>,
    id: String,
    f: impl FnOnce(&AppState, &mut Session) -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    blocking(move || {
        let shared = state.lookup(&id)?;
        let mut session = shared.lock().expect("session lock");
        f(&state, &mut session)
    })
    .await
}

async fn get_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let view = with_session(state, id, |_, s| Ok(s.state())).await?;
    Ok(Json(view).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PinBody {
    a: u32,
    b: u32,
}

async fn add_pin(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let pin: PinBody = parse(&body)?;
    let view = with_session(state, id, move |st, s| {
        s.pin(pin.a, pin.b)?;
        st.persist(s)?;
        Ok(s.state())
    })
    .await?;
    Ok(Json(view).into_response())
}

async fn remove_pin(
    State(state): State<Arc<AppState>>,
    Path((id, a)): Path<(String, u32)>,
) -> Result<Response, ApiError> {
    let view = with_session(state, id, move |st, s| {
        s.unpin(a)?;
        st.persist(s)?;
        Ok(s.state())
    })
    .await?;
    Ok(Json(view).into_response())
}

async fn get_strokes(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let doc = with_session(state, id, |_, s| {
        let analysis = s.analysis();
        Ok(serde_json::json!({
            "strokes_a": analysis.a.strokes,
            "strokes_b": analysis.b.strokes,
            "matching": analysis.strokes,
        }))
    })
    .await?;
    Ok(Json(doc).into_response())
}

#[derive(Deserialize)]
struct InbetweenQuery {
    t: Option<f64>,
    frames: Option<usize>,
}

async fn get_inbetween(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<InbetweenQuery>,
) -> Result<Response, ApiError> {
    let (t, frames) = (q.t.unwrap_or(0.5), q.frames.unwrap_or(1));
    let svg = with_session(state, id, move |_, s| Ok(s.inbetween_svg(t, frames)?)).await?;
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], svg).into_response())
}

async fn get_overlay(
    State(state): State<Arc<AppState>>,
    Path((id, file)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let side = match file.as_str() {
        "a.png" => Side::A,
        "b.png" => Side::B,
        _ => return Err(ApiError::new(StatusCode::NOT_FOUND, format!("no overlay {file:?}"))),
    };
    let png = with_session(state, id, move |_, s| Ok(s.overlay_png(side)?)).await?;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}

/// Binds `addr` and serves until ctrl-c.
pub async fn serve(addr: &str, state: Arc<AppState>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
