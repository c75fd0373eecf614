use std::path::Path;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use forge_core::catalog::load_catalog_dir;
use forge_core::session::{KnowledgeBase, SessionConfig};
use forge_server::{router, AppState};

fn fixture_app() -> Router {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/catalog");
    let kb = KnowledgeBase::new(load_catalog_dir(&dir).unwrap());
    router(AppState::new(kb, SessionConfig::default()))
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, value)
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    call(app, Method::GET, uri, None).await
}

async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    call(app, Method::POST, uri, Some(body)).await
}

fn assert_error(body: &Value, code: &str) {
    assert_eq!(body["code"], code, "{body}");
    assert!(body["message"].as_str().is_some_and(|m| !m.is_empty()));
}

async fn new_session(app: &Router) -> (String, u64) {
    let (status, body) = call(app, Method::POST, "/sessions", None).await;
    assert_eq!(status, StatusCode::CREATED);
    (body["id"].as_str().unwrap().to_string(), body["revision"].as_u64().unwrap())
}

async fn add(app: &Router, id: &str, rev: u64, name: &str, class: &str) -> u64 {
    let (status, body) = post(
        app,
        &format!("/sessions/{id}/sprites"),
        json!({"revision": rev, "sprite": {"name": name, "class": class}}),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    body["revision"].as_u64().unwrap()
}

#[tokio::test]
async fn catalog_listing_and_detail() {
    let app = fixture_app();
    let (status, list) = get(&app, "/catalog/games").await;
    assert_eq!(status, StatusCode::OK);
    let ids: Vec<&str> = list.as_array().unwrap().iter().map(|g| g["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["aliens", "bomber", "frogger", "hunter", "pacman", "zelda"]);

    let (status, detail) = get(&app, "/catalog/games/aliens").await;
    assert_eq!(status, StatusCode::OK);
    assert!(detail["vgdl"].as_str().unwrap().contains("ShootAvatar"));
    assert_eq!(detail["levels"].as_array().unwrap().len(), 2);

    let (status, body) = get(&app, "/catalog/games/nope").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error(&body, "unknown_game");
}

#[tokio::test]
async fn session_lifecycle() {
    let app = fixture_app();
    let (id, rev) = new_session(&app).await;
    assert_eq!(rev, 0);
    let (status, body) = get(&app, &format!("/sessions/{id}")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["config"]["min_support"], 0.2);
    assert_eq!(body["game"]["levels"][0]["rows"], 10);

    let (status, body) = call(&app, Method::DELETE, &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["deleted"], true);
    let (status, body) = get(&app, &format!("/sessions/{id}")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error(&body, "unknown_session");
    let (status, _) = call(&app, Method::DELETE, &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn create_with_config_and_game() {
    let app = fixture_app();
    let (status, body) = post(&app, "/sessions", json!({"config": {"level_rows": 4, "level_cols": 6, "k": 1}})).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(body["config"]["k"], 1);
    assert_eq!(body["game"]["levels"][0]["cols"], 6);

    let game = "BasicGame\n  SpriteSet\n    hero > ShootAvatar\n    bug > RandomNPC\n  LevelMapping\n    A > hero\n";
    let (status, body) = post(&app, "/sessions", json!({"game": game, "levels": ["A..\n...\n"]})).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    assert!(!body["pending_sprites"].as_array().unwrap().is_empty());

    let (status, body) = post(&app, "/sessions", json!({"game": "BasicGame\n  SpriteSet\n    a > \n"})).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body["code"].is_string());

    let (status, body) = post(&app, "/sessions", json!({"colour": "red"})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&body, "bad_request");
}

#[tokio::test]
async fn fresh_session_has_no_recommendations() {
    let app = fixture_app();
    let (id, _) = new_session(&app).await;
    for path in ["recommendations/sprites", "recommendations/interactions"] {
        let (status, body) = get(&app, &format!("/sessions/{id}/{path}")).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(body["items"], json!([]));
        assert_eq!(body["revision"], 0);
    }
}

#[tokio::test]
async fn full_loop_recommends_and_accepts_missile() {
    let app = fixture_app();
    let (id, rev) = new_session(&app).await;
    let rev = add(&app, &id, rev, "hero", "ShootAvatar").await;
    let rev = add(&app, &id, rev, "bug", "RandomNPC").await;

    let uri = format!("/sessions/{id}/recommendations/sprites");
    let (status, recs) = get(&app, &uri).await;
    assert_eq!(status, StatusCode::OK);
    let (_, again) = get(&app, &uri).await;
    assert_eq!(recs, again);
    let items = recs["items"].as_array().unwrap();
    let first = items.iter().find(|r| r["sprite_class"] == "Missile").expect("missile recommended");
    assert_eq!(first["confidence"], 0.75);
    let confidences: Vec<f64> = items.iter().map(|r| r["confidence"].as_f64().unwrap()).collect();
    assert!(confidences.windows(2).all(|w| w[0] >= w[1]));
    assert!(first["attributes"].is_object());
    assert!(first["closure_preview"].is_array());

    let (_, deduped) = get(&app, &format!("{uri}?dedupe=true")).await;
    let classes: Vec<&str> = deduped["items"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["sprite_class"].as_str().unwrap())
        .collect();
    let unique: std::collections::BTreeSet<_> = classes.iter().collect();
    assert_eq!(classes.len(), unique.len());

    let index = first["index"].as_u64().unwrap();
    let (status, body) = post(
        &app,
        &format!("/sessions/{id}/accept"),
        json!({"kind": "sprite", "index": index, "revision": rev}),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["revision"], rev + 1);
    assert!(body["pending_sprites"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["sprite_class"] != "Missile"));

    // Same request again: the revision moved on.
    let (status, body) = post(
        &app,
        &format!("/sessions/{id}/accept"),
        json!({"kind": "sprite", "index": index, "revision": rev}),
    )
    .await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_error(&body, "stale_revision");
}

#[tokio::test]
async fn stale_index_conflicts() {
    let app = fixture_app();
    let (id, rev) = new_session(&app).await;
    let (status, body) = post(
        &app,
        &format!("/sessions/{id}/accept"),
        json!({"kind": "interaction", "index": 7, "revision": rev}),
    )
    .await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_error(&body, "stale_recommendation");

    let (status, body) = post(&app, &format!("/sessions/{id}/accept"), json!({"kind": "sprite", "index": 0})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&body, "missing_revision");
}

#[tokio::test]
async fn interactions_filter_and_accept() {
    let app = fixture_app();
    let (id, rev) = new_session(&app).await;
    let rev = add(&app, &id, rev, "hero", "MovingAvatar").await;
    let rev = add(&app, &id, rev, "ghost", "RandomNPC").await;
    let rev = add(&app, &id, rev, "wall", "Immovable").await;

    let uri = format!("/sessions/{id}/recommendations/interactions");
    let (_, all) = get(&app, &uri).await;
    let (_, filtered) = get(&app, &format!("{uri}?filter=RandomNPC")).await;
    let filtered = filtered["items"].as_array().unwrap();
    assert!(!filtered.is_empty());
    assert!(filtered.len() < all["items"].as_array().unwrap().len());
    assert!(filtered
        .iter()
        .all(|r| r["actor_class"] == "RandomNPC" || r["other_class"] == "RandomNPC"));
    let kill = filtered
        .iter()
        .find(|r| r["actor_class"] == "MovingAvatar" && r["effect"] == "killSprite")
        .expect("avatar killed by enemy");

    let (status, body) = post(
        &app,
        &format!("/sessions/{id}/accept"),
        json!({"kind": "interaction", "index": kill["index"], "revision": rev}),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let inters = body["game"]["interactions"].as_array().unwrap();
    assert_eq!(inters.last().unwrap()["effect"], "killSprite");
}

#[tokio::test]
async fn manual_edits_place_undo_export() {
    let app = fixture_app();
    let (id, rev) = new_session(&app).await;
    let rev = add(&app, &id, rev, "hero", "MovingAvatar").await;
    let rev = add(&app, &id, rev, "ghost", "RandomNPC").await;

    let (status, body) = post(
        &app,
        &format!("/sessions/{id}/interactions"),
        json!({"revision": rev, "interaction": {"actor": "hero", "other": "ghost", "effect": "killSprite"}}),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let rev = body["revision"].as_u64().unwrap();

    let (status, body) = post(
        &app,
        &format!("/sessions/{id}/interactions"),
        json!({"revision": rev, "interaction": {"actor": "hero", "other": "nobody", "effect": "killSprite"}}),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error(&body, "unresolved_sprite");

    let (status, body) = post(&app, &format!("/sessions/{id}/place"), json!({"revision": rev, "sprite": "hero", "row": 0, "col": 0})).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let rev = body["revision"].as_u64().unwrap();

    let (status, body) = post(&app, &format!("/sessions/{id}/place"), json!({"revision": rev, "sprite": "hero", "row": 99, "col": 0})).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error(&body, "out_of_bounds");

    let (status, hints) = get(&app, &format!("/sessions/{id}/placements?sprite=ghost")).await;
    assert_eq!(status, StatusCode::OK);
    for cell in hints["cells"].as_array().unwrap() {
        let (r, c) = (cell["row"].as_u64().unwrap(), cell["col"].as_u64().unwrap());
        assert!(r < 10 && c < 10);
        assert!(r.max(c) >= 3);
    }
    let (status, body) = get(&app, &format!("/sessions/{id}/placements")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&body, "bad_request");
    let (status, body) = get(&app, &format!("/sessions/{id}/placements?sprite=nobody")).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error(&body, "unknown_sprite");

    let (status, exported) = get(&app, &format!("/sessions/{id}/export")).await;
    assert_eq!(status, StatusCode::OK);
    assert!(exported["game"].as_str().unwrap().contains("hero ghost > killSprite"));
    assert!(exported["levels"][0].as_str().unwrap().starts_with("a........."));

    let (status, body) = post(&app, &format!("/sessions/{id}/undo"), json!({"revision": rev})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["game"]["levels"][0]["cells"][0][0], ".");
    assert_eq!(body["history"].as_array().unwrap().len(), 3);
}

#[tokio::test]
async fn snapshot_resumes_session() {
    let app = fixture_app();
    let (id, rev) = new_session(&app).await;
    add(&app, &id, rev, "hero", "ShootAvatar").await;
    let (status, snap) = get(&app, &format!("/sessions/{id}/snapshot")).await;
    assert_eq!(status, StatusCode::OK);

    let other = fixture_app();
    let (status, body) = post(&other, "/sessions", json!({"snapshot": snap})).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    assert_eq!(body["id"], id.as_str());
    assert_eq!(body["revision"], 1);
}

#[tokio::test]
async fn undo_on_empty_history_and_unknown_route() {
    let app = fixture_app();
    let (id, rev) = new_session(&app).await;
    let (status, body) = post(&app, &format!("/sessions/{id}/undo"), json!({"revision": rev})).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_error(&body, "nothing_to_undo");

    let (status, body) = get(&app, "/nowhere").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error(&body, "not_found");

    let (status, body) = post(&app, &format!("/sessions/{id}/sprites"), json!({"revision": rev})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&body, "bad_request");
}

#[tokio::test]
async fn cors_headers_present() {
    let app = fixture_app();
    let req = Request::builder()
        .method(Method::OPTIONS)
        .uri("/sessions")
        .header("origin", "http://localhost:5173")
        .header("access-control-request-method", "POST")
        .body(Body::empty())
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    assert!(resp.headers().contains_key("access-control-allow-origin"));
}
