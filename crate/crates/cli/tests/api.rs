use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use chiwalk_cli::server::{router, Created, EventPage};
use chiwalk_core::session::{parse_session, SessionState, StateDelta, Suggestion};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, String) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or(Body::empty(), |b| Body::from(b.to_string())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn new_session(app: &Router) -> u64 {
    let (status, body) = call(app, "POST", "/sessions", Some(json!({"scenario": "builtin:office17", "seed": 7}))).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    serde_json::from_str::<Created>(&body).unwrap().id
}

async fn command(app: &Router, id: u64, cmd: Value) -> (StatusCode, String) {
    call(app, "POST", &format!("/sessions/{id}/command"), Some(cmd)).await
}

#[tokio::test]
async fn create_command_and_snapshot() {
    let app = router();
    let id = new_session(&app).await;
    let (s, body) = command(&app, id, json!({"type": "set_objectives", "objectives": [{"kind": "locate_aps"}]})).await;
    assert_eq!(s, StatusCode::OK, "{body}");
    let (s, body) = command(&app, id, json!({"type": "walk", "heading": 90.0, "distance": 12.0})).await;
    assert_eq!(s, StatusCode::OK, "{body}");
    let delta: StateDelta = serde_json::from_str(&body).unwrap();
    assert_eq!(delta.seq, 1);
    assert!(delta.steps_added > 0);

    let (s, snap) = call(&app, "GET", &format!("/sessions/{id}/state"), None).await;
    assert_eq!(s, StatusCode::OK);
    // the snapshot is a valid save file
    let loaded = parse_session(&snap).unwrap();
    assert_eq!(loaded.seq(), 2);
    assert_eq!(loaded.to_canonical_json().unwrap(), snap);

    let (s, body) = call(&app, "GET", &format!("/sessions/{id}/suggestions"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(matches!(serde_json::from_str::<Suggestion>(&body).unwrap(), Suggestion::Pathway { .. }));
}

#[tokio::test]
async fn reorder_changes_served_suggestion() {
    let app = router();
    let id = new_session(&app).await;
    let locate = json!({"kind": "locate_aps", "scope": {"type": "all"}, "marks": 1});
    let refine = json!({"kind": "refine_trajectories"});
    command(&app, id, json!({"type": "set_objectives", "objectives": [locate, refine]})).await;
    let (_, body) = call(&app, "GET", &format!("/sessions/{id}/suggestions"), None).await;
    assert_eq!(serde_json::from_str::<Value>(&body).unwrap()["type"], "pathway");
    command(&app, id, json!({"type": "set_objectives", "objectives": [refine, locate]})).await;
    let (_, body) = call(&app, "GET", &format!("/sessions/{id}/suggestions"), None).await;
    assert_eq!(serde_json::from_str::<Value>(&body).unwrap()["type"], "retrace");
}

#[tokio::test]
async fn errors_map_to_status_codes() {
    let app = router();
    let (s, _) = call(&app, "GET", "/sessions/99/state", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(&app, "POST", "/sessions", Some(json!({"scenario": "builtin:nowhere"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let id = new_session(&app).await;
    let (s, body) = command(&app, id, json!({"type": "fly"})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(serde_json::from_str::<Value>(&body).unwrap()["kind"], "malformed_command");
    let (s, _) = command(&app, id, json!({"type": "walk", "heading": 0.0, "distance": -3.0})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = command(&app, id, json!({"type": "lock", "id": 5})).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    command(&app, id, json!({"type": "close"})).await;
    let (s, body) = command(&app, id, json!({"type": "terminate"})).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(serde_json::from_str::<Value>(&body).unwrap()["kind"], "session_closed");
    // rejected commands never reach the log
    let (_, snap) = call(&app, "GET", &format!("/sessions/{id}/state"), None).await;
    assert_eq!(serde_json::from_str::<SessionState>(&snap).unwrap().seq(), 1);
}

#[tokio::test]
async fn events_long_poll_wakes_on_command() {
    let app = router();
    let id = new_session(&app).await;
    let (_, body) = call(&app, "GET", &format!("/sessions/{id}/events?since=0&timeout_ms=50"), None).await;
    let page: EventPage = serde_json::from_str(&body).unwrap();
    assert!(page.events.is_empty());
    assert_eq!(page.next, 0);

    let poller = {
        let app = app.clone();
        tokio::spawn(async move {
            let t = Instant::now();
            let (_, body) = call(&app, "GET", &format!("/sessions/{id}/events?since=0&timeout_ms=10000"), None).await;
            (t.elapsed(), serde_json::from_str::<EventPage>(&body).unwrap())
        })
    };
    tokio::time::sleep(Duration::from_millis(100)).await;
    command(&app, id, json!({"type": "walk", "heading": 0.0, "distance": 2.0})).await;
    let (waited, page) = poller.await.unwrap();
    assert!(waited < Duration::from_secs(5));
    assert_eq!(page.events.len(), 1);
    assert_eq!(page.next, 1);
    assert_eq!(page.events[0].seq, 0);

    command(&app, id, json!({"type": "terminate"})).await;
    let (_, body) = call(&app, "GET", &format!("/sessions/{id}/events?since=1"), None).await;
    let page: EventPage = serde_json::from_str(&body).unwrap();
    assert_eq!(page.events.len(), 1);
    assert_eq!(page.next, 2);
}

#[tokio::test]
async fn correct_and_lock_survive_inference() {
    let app = router();
    let id = new_session(&app).await;
    command(&app, id, json!({"type": "set_objectives", "objectives": [{"kind": "floor_plan", "width": 60.0, "height": 40.0}]})).await;
    for (h, d) in [(90.0, 18.0), (0.0, 30.0)] {
        command(&app, id, json!({"type": "walk", "heading": h, "distance": d})).await;
    }
    let (_, snap) = call(&app, "GET", &format!("/sessions/{id}/state"), None).await;
    let state: SessionState = serde_json::from_str(&snap).unwrap();
    let target = state.floor_components.first().expect("inference produced a component").id;
    let room = json!({"type": "area", "hull": [{"x": 3.0, "y": 3.0}, {"x": 13.0, "y": 3.0}, {"x": 13.0, "y": 16.0}, {"x": 3.0, "y": 16.0}], "rect": null});
    let (s, body) = command(&app, id, json!({"type": "correct", "id": target, "kind": "room", "geometry": room, "lock": true})).await;
    assert_eq!(s, StatusCode::OK, "{body}");
    for (h, d) in [(0.0, 10.0), (270.0, 4.0), (180.0, 20.0), (90.0, 4.0)] {
        command(&app, id, json!({"type": "walk", "heading": h, "distance": d})).await;
    }
    let (_, snap) = call(&app, "GET", &format!("/sessions/{id}/state"), None).await;
    let state: SessionState = serde_json::from_str(&snap).unwrap();
    let c = state.floor_components.iter().find(|c| c.id == target).unwrap();
    assert!(c.locked);
    assert_eq!(serde_json::to_value(&c.geometry).unwrap(), room);
    let (s, _) = command(&app, id, json!({"type": "correct", "id": target, "kind": "block", "geometry": room, "lock": false})).await;
    assert_eq!(s, StatusCode::CONFLICT);
}
