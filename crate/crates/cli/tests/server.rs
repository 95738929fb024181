mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use base64::Engine as _;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use cellmatch_cli::server::{router, AppState};
use cellmatch_core::session::SessionStore;
use common::{blank_png, png, robot_pair};

struct Reply {
    status: StatusCode,
    content_type: Option<String>,
    body: Vec<u8>,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|_| panic!("not json: {}", String::from_utf8_lossy(&self.body)))
    }
}

async fn send(state: &Arc<AppState>, method: Method, uri: &str, body: Option<Value>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header(header::CONTENT_TYPE, "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = router(state.clone()).oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let content_type = resp
        .headers()
        .get(header::CONTENT_TYPE)
        .map(|v| v.to_str().unwrap().to_string());
    let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    Reply {
        status,
        content_type,
        body,
    }
}

fn b64(bytes: &[u8]) -> String {
    base64::engine::general_purpose::STANDARD.encode(bytes)
}

fn create_body() -> Value {
    let (a, b) = robot_pair();
    json!({ "a": b64(&png(&a)), "b": b64(&png(&b)) })
}

async fn create(state: &Arc<AppState>) -> Value {
    let reply = send(state, Method::POST, "/sessions", Some(create_body())).await;
    assert_eq!(reply.status, StatusCode::CREATED, "{}", String::from_utf8_lossy(&reply.body));
    reply.json()
}

/// An A region and a B region that the matcher did not pair together.
fn foreign_pair(state: &Value) -> (u64, u64) {
    let regions_a = state["regions_a"].as_array().unwrap();
    let regions_b = state["regions_b"].as_array().unwrap();
    let a = regions_a.iter().find(|r| !r["is_background"].as_bool().unwrap()).unwrap();
    let partner = a["partner"].as_u64();
    let b = regions_b
        .iter()
        .find(|r| !r["is_background"].as_bool().unwrap() && r["id"].as_u64() != partner)
        .unwrap();
    (a["id"].as_u64().unwrap(), b["id"].as_u64().unwrap())
}

#[tokio::test]
async fn create_and_fetch_session() {
    let state = AppState::new(None);
    let created = create(&state).await;
    assert_eq!(created["schema_version"], 1);
    let id = created["id"].as_str().unwrap();
    assert!(created["regions_a"].as_array().unwrap().len() >= 15);
    assert_eq!(created["correspondence"]["mode"], "SCD");

    let fetched = send(&state, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(fetched.status, StatusCode::OK);
    assert_eq!(fetched.json(), created);

    let list = send(&state, Method::GET, "/sessions", None).await;
    assert_eq!(list.json()["sessions"], json!([id]));
}

#[tokio::test]
async fn create_honors_config() {
    let state = AppState::new(None);
    let mut body = create_body();
    body["config"] = json!({ "mode": "S" });
    let reply = send(&state, Method::POST, "/sessions", Some(body)).await;
    assert_eq!(reply.status, StatusCode::CREATED);
    assert_eq!(reply.json()["correspondence"]["mode"], "S");
}

#[tokio::test]
async fn create_rejects_bad_input() {
    let state = AppState::new(None);
    let cases = [
        (json!({ "a": "x" }), StatusCode::BAD_REQUEST),
        (json!({ "a": "%%%", "b": "%%%" }), StatusCode::BAD_REQUEST),
        (json!({ "a": b64(b"junk"), "b": b64(b"junk") }), StatusCode::BAD_REQUEST),
        (json!({ "a": b64(&blank_png()), "b": b64(&blank_png()) }), StatusCode::UNPROCESSABLE_ENTITY),
    ];
    for (body, expected) in cases {
        let reply = send(&state, Method::POST, "/sessions", Some(body.clone())).await;
        assert_eq!(reply.status, expected, "{body}");
        assert!(reply.json()["error"].is_string());
    }
    let mut body = create_body();
    body["config"] = json!({ "median_kernel": 4 });
    assert_eq!(send(&state, Method::POST, "/sessions", Some(body)).await.status, StatusCode::BAD_REQUEST);
    let mut body = create_body();
    body["config"] = json!({ "no_such_key": 1 });
    assert_eq!(send(&state, Method::POST, "/sessions", Some(body)).await.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn pin_and_unpin() {
    let state = AppState::new(None);
    let created = create(&state).await;
    let id = created["id"].as_str().unwrap();
    let (a, b) = foreign_pair(&created);
    let pins = format!("/sessions/{id}/pins");

    let pinned = send(&state, Method::POST, &pins, Some(json!({ "a": a, "b": b }))).await;
    assert_eq!(pinned.status, StatusCode::OK);
    let view = pinned.json();
    assert_eq!(view["pins"], json!([{ "a": a, "b": b }]));
    let region = view["regions_a"].as_array().unwrap().iter().find(|r| r["id"] == a).unwrap().clone();
    assert_eq!(region["partner"], b);
    assert_eq!(region["provenance"], "PINNED");
    assert_ne!(view["state_hash"], created["state_hash"]);

    let conflict = send(&state, Method::POST, &pins, Some(json!({ "a": a, "b": b }))).await;
    assert_eq!(conflict.status, StatusCode::CONFLICT);
    let unknown = send(&state, Method::POST, &pins, Some(json!({ "a": 9999, "b": b }))).await;
    assert_eq!(unknown.status, StatusCode::UNPROCESSABLE_ENTITY);
    let malformed = send(&state, Method::POST, &pins, Some(json!({ "a": "one" }))).await;
    assert_eq!(malformed.status, StatusCode::BAD_REQUEST);

    let unpinned = send(&state, Method::DELETE, &format!("{pins}/{a}"), None).await;
    assert_eq!(unpinned.status, StatusCode::OK);
    let view = unpinned.json();
    assert_eq!(view["pins"], json!([]));
    assert_eq!(view["correspondence"], created["correspondence"]);
    assert_eq!(view["events"], 2);

    let again = send(&state, Method::DELETE, &format!("{pins}/{a}"), None).await;
    assert_eq!(again.status, StatusCode::NOT_FOUND);
    assert!(again.json()["error"].as_str().unwrap().contains("not pinned"));
}

#[tokio::test]
async fn renders_strokes_inbetweens_and_overlays() {
    let state = AppState::new(None);
    let created = create(&state).await;
    let id = created["id"].as_str().unwrap();

    let strokes = send(&state, Method::GET, &format!("/sessions/{id}/strokes"), None).await;
    assert_eq!(strokes.status, StatusCode::OK);
    let doc = strokes.json();
    assert!(!doc["matching"]["pairs"].as_array().unwrap().is_empty());
    assert!(doc["strokes_a"]["strokes"][0]["polyline"].is_array());

    let svg = send(&state, Method::GET, &format!("/sessions/{id}/inbetween"), None).await;
    assert_eq!(svg.status, StatusCode::OK);
    assert_eq!(svg.content_type.as_deref(), Some("image/svg+xml"));
    let text = String::from_utf8(svg.body).unwrap();
    assert_eq!(text.matches("<g").count(), 1);
    assert!(text.contains(r#"data-t="0.5""#));

    let svg = send(&state, Method::GET, &format!("/sessions/{id}/inbetween?t=0.25&frames=5"), None).await;
    assert_eq!(String::from_utf8(svg.body).unwrap().matches("<g").count(), 5);
    let bad_t = send(&state, Method::GET, &format!("/sessions/{id}/inbetween?t=1.5"), None).await;
    assert_eq!(bad_t.status, StatusCode::BAD_REQUEST);
    let no_frames = send(&state, Method::GET, &format!("/sessions/{id}/inbetween?frames=0"), None).await;
    assert_eq!(no_frames.status, StatusCode::BAD_REQUEST);

    for file in ["a.png", "b.png"] {
        let png = send(&state, Method::GET, &format!("/sessions/{id}/overlay/{file}"), None).await;
        assert_eq!(png.status, StatusCode::OK);
        assert_eq!(png.content_type.as_deref(), Some("image/png"));
        assert!(png.body.starts_with(b"\x89PNG"));
    }
    let other = send(&state, Method::GET, &format!("/sessions/{id}/overlay/c.png"), None).await;
    assert_eq!(other.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn unknown_session_is_404() {
    let state = AppState::new(None);
    for (method, uri) in [
        (Method::GET, "/sessions/missing"),
        (Method::GET, "/sessions/missing/strokes"),
        (Method::GET, "/sessions/missing/inbetween"),
        (Method::GET, "/sessions/missing/overlay/a.png"),
        (Method::DELETE, "/sessions/missing/pins/1"),
        (Method::GET, "/sessions/..%2Fetc"),
    ] {
        let reply = send(&state, method, uri, None).await;
        assert_eq!(reply.status, StatusCode::NOT_FOUND, "{uri}");
    }
    let pin = send(&state, Method::POST, "/sessions/missing/pins", Some(json!({ "a": 1, "b": 1 }))).await;
    assert_eq!(pin.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn sessions_survive_restart_through_store() {
    let dir = tempfile::tempdir().unwrap();
    let first = AppState::new(Some(SessionStore::new(dir.path())));
    let created = create(&first).await;
    let id = created["id"].as_str().unwrap().to_string();
    let (a, b) = foreign_pair(&created);
    let pinned = send(&first, Method::POST, &format!("/sessions/{id}/pins"), Some(json!({ "a": a, "b": b }))).await;
    let pinned = pinned.json();

    let second = AppState::new(Some(SessionStore::new(dir.path())));
    let list = send(&second, Method::GET, "/sessions", None).await;
    assert_eq!(list.json()["sessions"], json!([id.clone()]));
    let restored = send(&second, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(restored.status, StatusCode::OK, "{}", String::from_utf8_lossy(&restored.body));
    let restored = restored.json();
    assert_eq!(restored["state_hash"], pinned["state_hash"]);
    assert_eq!(restored["correspondence"], pinned["correspondence"]);
    assert_eq!(restored, pinned);

    // A second session shares the store without disturbing the first.
    let other = create(&second).await;
    assert_ne!(other["id"], restored["id"]);
    let third = AppState::new(Some(SessionStore::new(dir.path())));
    assert_eq!(send(&third, Method::GET, "/sessions", None).await.json()["sessions"].as_array().unwrap().len(), 2);
    let again = send(&third, Method::GET, &format!("/sessions/{id}"), None).await.json();
    assert_eq!(again["state_hash"], pinned["state_hash"]);
}
