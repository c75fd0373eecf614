//! JSON API over a read-only catalog and a set of design sessions.
//!
//! Every session response carries the session's `revision`; mutating
//! requests must send the revision they were made against and are refused
//! with `409 stale_revision` otherwise.

mod error;

use std::collections::{BTreeMap, BTreeSet};
use std::net::SocketAddr;
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::cors::{Any, CorsLayer};

use forge_core::session::{DesignSession, Export, KnowledgeBase, SessionConfig, SessionError, Snapshot};
use forge_core::vgdl::{parse_game, parse_level, serialize_game, serialize_level, GameDescription, InteractionDef, SpriteDef};

pub use error::ApiError;

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    kb: KnowledgeBase,
    defaults: SessionConfig,
    sessions: RwLock<BTreeMap<String, Arc<Mutex<DesignSession>>>>,
}

impl AppState {
    /// `defaults` applies to sessions created without their own config.
    pub fn new(kb: KnowledgeBase, defaults: SessionConfig) -> Self {
        AppState {
            inner: Arc::new(Inner {
                kb,
                defaults,
                sessions: RwLock::new(BTreeMap::new()),
            }),
        }
    }

    fn kb(&self) -> &KnowledgeBase {
        &self.inner.kb
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<DesignSession>>, ApiError> {
        self.inner
            .sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::unknown_session(id))
    }

    fn insert(&self, session: DesignSession) {
        self.inner
            .sessions
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(session.id.clone(), Arc::new(Mutex::new(session)));
    }
}

fn lock(session: &Mutex<DesignSession>) -> MutexGuard<'_, DesignSession> {
    session.lock().unwrap_or_else(|e| e.into_inner())
}

pub fn router(state: AppState) -> Router {
    let cors = CorsLayer::new().allow_origin(Any).allow_methods(Any).allow_headers(Any);
    Router::new()
        .route("/catalog/games", get(list_games))
        .route("/catalog/games/{id}", get(game_detail))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session).delete(delete_session))
        .route("/sessions/{id}/recommendations/sprites", get(sprite_recommendations))
        .route("/sessions/{id}/recommendations/interactions", get(interaction_recommendations))
        .route("/sessions/{id}/placements", get(placements))
        .route("/sessions/{id}/accept", post(accept))
        .route("/sessions/{id}/sprites", post(add_sprite))
        .route("/sessions/{id}/interactions", post(add_interaction))
        .route("/sessions/{id}/place", post(place))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/export", get(export))
        .route("/sessions/{id}/snapshot", get(snapshot))
        .fallback(|| async { ApiError::not_found() })
        .layer(cors)
        .with_state(state)
}

pub async fn serve(state: AppState, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}

fn body<T: DeserializeOwned + Default>(bytes: &Bytes) -> Result<T, ApiError> {
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(bytes).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_request", e.to_string()))
}

#[derive(Serialize)]
struct GameSummary {
    id: String,
    classes: Vec<String>,
    sprites: usize,
    interactions: usize,
    levels: usize,
}

async fn list_games(State(state): State<AppState>) -> Json<Vec<GameSummary>> {
    let catalog = state.kb().catalog();
    Json(
        catalog
            .games()
            .map(|g| GameSummary {
                id: g.id.clone(),
                classes: catalog.classes_in(&g.id).into_iter().map(String::from).collect(),
                sprites: g.classed_sprites().len(),
                interactions: g.interactions.len(),
                levels: g.levels.len(),
            })
            .collect(),
    )
}

#[derive(Serialize)]
struct GameDetail {
    id: String,
    game: GameDescription,
    vgdl: String,
    levels: Vec<String>,
}

async fn game_detail(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<GameDetail> {
    let game = state.kb().catalog().require_game(&id)?;
    Ok(Json(GameDetail {
        id: game.id.clone(),
        game: game.clone(),
        vgdl: serialize_game(game),
        levels: game.levels.iter().map(serialize_level).collect(),
    }))
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct CreateSession {
    config: Option<SessionConfig>,
    /// Starting game as text, with its levels.
    game: Option<String>,
    levels: Vec<String>,
    /// A saved session to resume instead.
    snapshot: Option<Snapshot>,
}

async fn create_session(State(state): State<AppState>, bytes: Bytes) -> Result<(StatusCode, Json<DesignSession>), ApiError> {
    let req: CreateSession = body(&bytes)?;
    let config = req.config.unwrap_or_else(|| state.inner.defaults.clone());
    let session = match (req.snapshot, req.game) {
        (Some(snap), _) => DesignSession::restore(state.kb(), snap)?,
        (None, Some(text)) => {
            let mut game = parse_game(&text)?;
            game.id = "session".into();
            for level in &req.levels {
                let grid = parse_level(level, &game.mapping)?;
                game.levels.push(grid);
            }
            DesignSession::from_game(state.kb(), game, config)?
        }
        (None, None) => DesignSession::new(state.kb(), config)?,
    };
    if state.session(&session.id).is_ok() {
        return Err(ApiError::new(StatusCode::CONFLICT, "duplicate_session", format!("session `{}` exists", session.id)));
    }
    state.insert(session.clone());
    Ok((StatusCode::CREATED, Json(session)))
}

async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<DesignSession> {
    let session = state.session(&id)?;
    let guard = lock(&session);
    Ok(Json(guard.clone()))
}

#[derive(Serialize)]
struct Deleted {
    id: String,
    revision: u64,
    deleted: bool,
}

async fn delete_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Deleted> {
    let removed = state
        .inner
        .sessions
        .write()
        .unwrap_or_else(|e| e.into_inner())
        .remove(&id)
        .ok_or_else(|| ApiError::unknown_session(&id))?;
    let revision = lock(&removed).revision;
    Ok(Json(Deleted {
        id,
        revision,
        deleted: true,
    }))
}

/// A pending recommendation with its position in the session's list, which
/// is what `accept` expects even when the view is filtered.
#[derive(Serialize)]
struct Indexed<T> {
    index: usize,
    #[serde(flatten)]
    item: T,
}

#[derive(Serialize)]
struct Listing<T> {
    revision: u64,
    items: Vec<T>,
}

#[derive(Deserialize)]
struct SpriteQuery {
    #[serde(default)]
    dedupe: bool,
}

async fn sprite_recommendations(
    State(state): State<AppState>,
    Path(id): Path<String>,
    query: Result<Query<SpriteQuery>, QueryRejection>,
) -> ApiResult<Listing<Indexed<forge_core::SpriteRec>>> {
    let Query(query) = query?;
    let session = state.session(&id)?;
    let s = lock(&session);
    let mut seen = BTreeSet::new();
    let items = s
        .pending_sprites
        .iter()
        .enumerate()
        .filter(|(_, r)| !query.dedupe || seen.insert(r.sprite_class.clone()))
        .map(|(index, r)| Indexed { index, item: r.clone() })
        .collect();
    Ok(Json(Listing {
        revision: s.revision,
        items,
    }))
}

#[derive(Deserialize)]
struct InteractionQuery {
    filter: Option<String>,
}

async fn interaction_recommendations(
    State(state): State<AppState>,
    Path(id): Path<String>,
    query: Result<Query<InteractionQuery>, QueryRejection>,
) -> ApiResult<Listing<Indexed<forge_core::InteractionRec>>> {
    let Query(query) = query?;
    let session = state.session(&id)?;
    let s = lock(&session);
    let items = s
        .pending_interactions
        .iter()
        .enumerate()
        .filter(|(_, r)| query.filter.as_deref().is_none_or(|c| r.involves(c)))
        .map(|(index, r)| Indexed { index, item: r.clone() })
        .collect();
    Ok(Json(Listing {
        revision: s.revision,
        items,
    }))
}

#[derive(Deserialize)]
struct PlacementQuery {
    sprite: String,
}

#[derive(Serialize)]
struct Hints {
    revision: u64,
    sprite: String,
    cells: Vec<forge_core::Placement>,
}

async fn placements(
    State(state): State<AppState>,
    Path(id): Path<String>,
    query: Result<Query<PlacementQuery>, QueryRejection>,
) -> ApiResult<Hints> {
    let Query(query) = query?;
    let session = state.session(&id)?;
    let s = lock(&session);
    let cells = s.placement_hints(state.kb(), &query.sprite)?;
    Ok(Json(Hints {
        revision: s.revision,
        sprite: query.sprite,
        cells,
    }))
}

/// Runs `f` on the session if the request's revision is current.
fn mutate(
    state: &AppState,
    id: &str,
    revision: Option<u64>,
    f: impl FnOnce(&mut DesignSession, &KnowledgeBase) -> Result<(), SessionError>,
) -> ApiResult<DesignSession> {
    let session = state.session(id)?;
    let mut s = lock(&session);
    let revision = revision.ok_or_else(|| {
        ApiError::new(StatusCode::BAD_REQUEST, "missing_revision", "mutations must carry the session revision")
    })?;
    if revision != s.revision {
        return Err(ApiError::stale_revision(s.revision, revision));
    }
    f(&mut s, state.kb())?;
    Ok(Json(s.clone()))
}

#[derive(Deserialize, Default, Clone, Copy)]
#[serde(rename_all = "snake_case")]
enum Kind {
    #[default]
    Sprite,
    Interaction,
}

#[derive(Deserialize, Default)]
struct AcceptRequest {
    kind: Kind,
    index: usize,
    revision: Option<u64>,
}

async fn accept(State(state): State<AppState>, Path(id): Path<String>, bytes: Bytes) -> ApiResult<DesignSession> {
    let req: AcceptRequest = body(&bytes)?;
    mutate(&state, &id, req.revision, |s, kb| match req.kind {
        Kind::Sprite => s.accept_sprite(kb, req.index),
        Kind::Interaction => s.accept_interaction(kb, req.index),
    })
}

#[derive(Deserialize, Default)]
struct AddSpriteRequest {
    sprite: Option<SpriteDef>,
    revision: Option<u64>,
}

async fn add_sprite(State(state): State<AppState>, Path(id): Path<String>, bytes: Bytes) -> ApiResult<DesignSession> {
    let req: AddSpriteRequest = body(&bytes)?;
    let sprite = req
        .sprite
        .ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, "bad_request", "missing `sprite`"))?;
    mutate(&state, &id, req.revision, |s, kb| s.add_sprite(kb, sprite))
}

#[derive(Deserialize, Default)]
struct AddInteractionRequest {
    interaction: Option<InteractionDef>,
    revision: Option<u64>,
}

async fn add_interaction(State(state): State<AppState>, Path(id): Path<String>, bytes: Bytes) -> ApiResult<DesignSession> {
    let req: AddInteractionRequest = body(&bytes)?;
    let interaction = req
        .interaction
        .ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, "bad_request", "missing `interaction`"))?;
    mutate(&state, &id, req.revision, |s, kb| s.add_interaction(kb, interaction))
}

#[derive(Deserialize, Default)]
struct PlaceRequest {
    sprite: String,
    row: usize,
    col: usize,
    revision: Option<u64>,
}

async fn place(State(state): State<AppState>, Path(id): Path<String>, bytes: Bytes) -> ApiResult<DesignSession> {
    let req: PlaceRequest = body(&bytes)?;
    mutate(&state, &id, req.revision, |s, kb| s.place(kb, &req.sprite, req.row, req.col))
}

#[derive(Deserialize, Default)]
struct RevisionOnly {
    revision: Option<u64>,
}

async fn undo(State(state): State<AppState>, Path(id): Path<String>, bytes: Bytes) -> ApiResult<DesignSession> {
    let req: RevisionOnly = body(&bytes)?;
    mutate(&state, &id, req.revision, |s, kb| s.undo(kb))
}

#[derive(Serialize)]
struct ExportBody {
    revision: u64,
    #[serde(flatten)]
    export: Export,
}

async fn export(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<ExportBody> {
    let session = state.session(&id)?;
    let s = lock(&session);
    Ok(Json(ExportBody {
        revision: s.revision,
        export: s.export(),
    }))
}

async fn snapshot(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Snapshot> {
    let session = state.session(&id)?;
    let s = lock(&session);
    Ok(Json(s.snapshot()))
}
