//! The design session: a game under construction, its pending
//! recommendations, and the action history that rebuilds it.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use uuid::Uuid;

use crate::catalog::{Catalog, PairMap};
use crate::mining::{mine, MiningError};
use crate::recommender::{
    self, import_closure, recommend_interactions, recommend_placements, recommend_sprites,
    PlacementSource, RecommendError, RecommenderConfig,
};
use crate::vgdl::{
    serialize_game, serialize_level, GameDescription, InteractionDef, LevelGrid, SpriteDef, VgdlError,
    BLANK_CELL,
};
use crate::{InteractionRec, Placement, Rule, SpriteRec};

/// The read-only catalog with its derived tables, shared by all sessions.
pub struct KnowledgeBase {
    catalog: Catalog,
    pair_map: PairMap,
    rules: Mutex<BTreeMap<(u64, u64), Arc<Vec<Rule>>>>,
}

impl KnowledgeBase {
    pub fn new(catalog: Catalog) -> Self {
        let pair_map = catalog.pair_interaction_map();
        KnowledgeBase {
            catalog,
            pair_map,
            rules: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn pair_map(&self) -> &PairMap {
        &self.pair_map
    }

    /// Association rules over the catalog's sprite baskets, cached per
    /// threshold pair.
    pub fn rules(&self, min_support: f64, min_confidence: f64) -> Result<Arc<Vec<Rule>>, MiningError> {
        let key = (min_support.to_bits(), min_confidence.to_bits());
        if let Some(hit) = self.rules.lock().expect("rule cache").get(&key) {
            return Ok(hit.clone());
        }
        let baskets = self.catalog.sprite_baskets();
        let rules = if baskets.is_empty() {
            Vec::new()
        } else {
            mine(&baskets, min_support, min_confidence)?.1
        };
        let rules = Arc::new(rules);
        self.rules.lock().expect("rule cache").insert(key, rules.clone());
        Ok(rules)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub min_support: f64,
    pub min_confidence: f64,
    /// Keep only the strongest sprite recommendation per class.
    pub dedupe: bool,
    pub level_rows: usize,
    pub level_cols: usize,
    #[serde(flatten)]
    pub recommender: RecommenderConfig,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            min_support: crate::mining::DEFAULT_MIN_SUPPORT,
            min_confidence: crate::mining::DEFAULT_MIN_CONFIDENCE,
            dedupe: false,
            level_rows: 10,
            level_cols: 10,
            recommender: RecommenderConfig::default(),
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<(), SessionError> {
        for v in [self.min_support, self.min_confidence] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(MiningError::SupportOutOfRange.into());
            }
        }
        if self.level_rows == 0 || self.level_cols == 0 {
            return Err(VgdlError::EmptyLevel.into());
        }
        Ok(())
    }
}

/// One applied edit. Accepts carry the recommendation itself so that replay
/// does not depend on the pending lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    AddSprite { sprite: SpriteDef },
    AddInteraction { interaction: InteractionDef },
    AcceptSprite { recommendation: SpriteRec },
    AcceptInteraction { recommendation: InteractionRec },
    Place { sprite: String, row: usize, col: usize },
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("no pending {kind} recommendation at index {index} ({len} pending)")]
    StaleRecommendation { kind: &'static str, index: usize, len: usize },
    #[error("unknown sprite `{0}`")]
    UnknownSprite(String),
    #[error("cell ({row}, {col}) is outside the {rows}x{cols} level")]
    OutOfBounds { row: usize, col: usize, rows: usize, cols: usize },
    #[error("the game has no level")]
    NoLevel,
    #[error("no free level symbol left")]
    SymbolsExhausted,
    #[error("nothing to undo")]
    NothingToUndo,
    #[error("snapshot history does not rebuild the stored game")]
    ReplayMismatch,
    #[error(transparent)]
    Recommend(#[from] RecommendError),
    #[error(transparent)]
    Invalid(#[from] VgdlError),
    #[error(transparent)]
    Mining(#[from] MiningError),
}

impl SessionError {
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::StaleRecommendation { .. } => "stale_recommendation",
            SessionError::UnknownSprite(_) => "unknown_sprite",
            SessionError::OutOfBounds { .. } => "out_of_bounds",
            SessionError::NoLevel => "no_level",
            SessionError::SymbolsExhausted => "symbols_exhausted",
            SessionError::NothingToUndo => "nothing_to_undo",
            SessionError::ReplayMismatch => "replay_mismatch",
            SessionError::Recommend(e) => e.code(),
            SessionError::Invalid(e) => e.code(),
            SessionError::Mining(_) => "mining_error",
        }
    }
}

/// Game plus the donor each imported sprite came from.
#[derive(Debug, Clone, PartialEq)]
struct State {
    game: GameDescription,
    provenance: BTreeMap<String, String>,
}

const SYMBOLS: &str = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789+*%&$@!?^~=-_<>/|:;";

fn apply(kb: &KnowledgeBase, state: &State, action: &Action) -> Result<State, SessionError> {
    let mut next = state.clone();
    match action {
        Action::AddSprite { sprite } => {
            next.game.sprites.push(sprite.clone());
            next.game.validate()?;
        }
        Action::AddInteraction { interaction } => {
            next.game.interactions.push(interaction.clone());
            next.game.validate()?;
        }
        Action::AcceptSprite { recommendation: rec } => {
            let import = import_closure(&state.game, &rec.donor_game, &rec.donor_sprite, kb.catalog())?;
            next.game = import.game;
            for name in import.renames.into_values() {
                next.provenance.insert(name, rec.donor_game.clone());
            }
        }
        Action::AcceptInteraction { recommendation: rec } => {
            next.game = recommender::accept_interaction(&state.game, rec, kb.catalog())?;
            for name in next.game.sprite_names() {
                if !state.game.has_sprite(name) {
                    next.provenance.insert(name.to_string(), rec.donor_game.clone());
                }
            }
        }
        Action::Place { sprite, row, col } => {
            if !next.game.has_sprite(sprite) {
                return Err(SessionError::UnknownSprite(sprite.clone()));
            }
            let mapping = &mut next.game.mapping.entries;
            let symbol = match mapping
                .iter()
                .find(|(_, names)| names.len() == 1 && names[0] == *sprite)
            {
                Some((&s, _)) => s,
                None => {
                    let s = SYMBOLS
                        .chars()
                        .find(|c| *c != BLANK_CELL && !mapping.contains_key(c))
                        .ok_or(SessionError::SymbolsExhausted)?;
                    mapping.insert(s, vec![sprite.clone()]);
                    s
                }
            };
            let level = next.game.levels.first_mut().ok_or(SessionError::NoLevel)?;
            if !level.contains(*row, *col) {
                return Err(SessionError::OutOfBounds {
                    row: *row,
                    col: *col,
                    rows: level.rows,
                    cols: level.cols,
                });
            }
            level.cells[*row][*col] = symbol;
            next.game.validate()?;
        }
    }
    Ok(next)
}

fn replay(kb: &KnowledgeBase, base: &GameDescription, history: &[Action]) -> Result<State, SessionError> {
    let mut state = State {
        game: base.clone(),
        provenance: BTreeMap::new(),
    };
    for action in history {
        state = apply(kb, &state, action)?;
    }
    Ok(state)
}

/// Game text plus one text per level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Export {
    pub game: String,
    pub levels: Vec<String>,
}

/// What gets saved: enough to rebuild the session and check the rebuild.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub id: String,
    pub config: SessionConfig,
    pub base: GameDescription,
    pub history: Vec<Action>,
    pub game: GameDescription,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignSession {
    pub id: String,
    /// Bumped on every mutation.
    pub revision: u64,
    pub config: SessionConfig,
    pub game: GameDescription,
    pub pending_sprites: Vec<SpriteRec>,
    pub pending_interactions: Vec<InteractionRec>,
    pub history: Vec<Action>,
    /// Imported sprite name to the game it was taken from.
    pub provenance: BTreeMap<String, String>,
    #[serde(skip)]
    base: GameDescription,
}

impl DesignSession {
    /// Empty game with one blank level of the configured size.
    pub fn new(kb: &KnowledgeBase, config: SessionConfig) -> Result<Self, SessionError> {
        let mut game = GameDescription::empty("session");
        game.levels.push(LevelGrid::blank(config.level_rows, config.level_cols));
        Self::from_game(kb, game, config)
    }

    /// Starts from an existing game. A blank level is added when it has none.
    pub fn from_game(kb: &KnowledgeBase, mut game: GameDescription, config: SessionConfig) -> Result<Self, SessionError> {
        config.validate()?;
        if game.levels.is_empty() {
            game.levels.push(LevelGrid::blank(config.level_rows, config.level_cols));
        }
        game.validate()?;
        let mut session = DesignSession {
            id: Uuid::new_v4().to_string(),
            revision: 0,
            config,
            game: game.clone(),
            pending_sprites: Vec::new(),
            pending_interactions: Vec::new(),
            history: Vec::new(),
            provenance: BTreeMap::new(),
            base: game,
        };
        session.refresh(kb)?;
        Ok(session)
    }

    pub fn base(&self) -> &GameDescription {
        &self.base
    }

    /// Recomputes both pending lists from the current game.
    pub fn refresh(&mut self, kb: &KnowledgeBase) -> Result<(), SessionError> {
        let rules = kb.rules(self.config.min_support, self.config.min_confidence)?;
        let classes = self.game.sprite_classes().into_iter().map(String::from).collect();
        self.pending_sprites = recommend_sprites(&classes, &rules, kb.catalog(), self.config.dedupe);
        self.pending_interactions = recommend_interactions(&self.game, kb.catalog(), kb.pair_map());
        Ok(())
    }

    /// Applies `action`, records it and refreshes. On error nothing changes.
    pub fn perform(&mut self, kb: &KnowledgeBase, action: Action) -> Result<(), SessionError> {
        let state = State {
            game: self.game.clone(),
            provenance: self.provenance.clone(),
        };
        let next = apply(kb, &state, &action)?;
        let mut updated = self.clone();
        updated.game = next.game;
        updated.provenance = next.provenance;
        updated.history.push(action);
        updated.revision += 1;
        updated.refresh(kb)?;
        *self = updated;
        Ok(())
    }

    pub fn add_sprite(&mut self, kb: &KnowledgeBase, sprite: SpriteDef) -> Result<(), SessionError> {
        self.perform(kb, Action::AddSprite { sprite })
    }

    pub fn add_interaction(&mut self, kb: &KnowledgeBase, interaction: InteractionDef) -> Result<(), SessionError> {
        self.perform(kb, Action::AddInteraction { interaction })
    }

    pub fn accept_sprite(&mut self, kb: &KnowledgeBase, index: usize) -> Result<(), SessionError> {
        let recommendation = self
            .pending_sprites
            .get(index)
            .cloned()
            .ok_or(SessionError::StaleRecommendation {
                kind: "sprite",
                index,
                len: self.pending_sprites.len(),
            })?;
        self.perform(kb, Action::AcceptSprite { recommendation })
    }

    pub fn accept_interaction(&mut self, kb: &KnowledgeBase, index: usize) -> Result<(), SessionError> {
        let recommendation = self
            .pending_interactions
            .get(index)
            .cloned()
            .ok_or(SessionError::StaleRecommendation {
                kind: "interaction",
                index,
                len: self.pending_interactions.len(),
            })?;
        self.perform(kb, Action::AcceptInteraction { recommendation })
    }

    /// Puts `sprite` in a cell of the first level, giving it a level symbol
    /// if it has none of its own.
    pub fn place(&mut self, kb: &KnowledgeBase, sprite: &str, row: usize, col: usize) -> Result<(), SessionError> {
        self.perform(
            kb,
            Action::Place {
                sprite: sprite.to_string(),
                row,
                col,
            },
        )
    }

    /// Drops the last action and rebuilds the game from the base.
    pub fn undo(&mut self, kb: &KnowledgeBase) -> Result<(), SessionError> {
        let mut history = self.history.clone();
        history.pop().ok_or(SessionError::NothingToUndo)?;
        let state = replay(kb, &self.base, &history)?;
        let mut updated = self.clone();
        updated.game = state.game;
        updated.provenance = state.provenance;
        updated.history = history;
        updated.revision += 1;
        updated.refresh(kb)?;
        *self = updated;
        Ok(())
    }

    /// Whether replaying the history from the base gives the current game.
    pub fn replays(&self, kb: &KnowledgeBase) -> bool {
        replay(kb, &self.base, &self.history)
            .map(|s| s.game == self.game && s.provenance == self.provenance)
            .unwrap_or(false)
    }

    /// Cells suggested for `sprite`: from the game it was imported from, or
    /// pooled over every catalog game with its class. Empty when the game
    /// places no avatar yet.
    pub fn placement_hints(&self, kb: &KnowledgeBase, sprite: &str) -> Result<Vec<Placement>, SessionError> {
        let node = self
            .game
            .find_sprite(sprite)
            .ok_or_else(|| SessionError::UnknownSprite(sprite.to_string()))?;
        let Some(class) = node.class.as_deref() else {
            return Ok(Vec::new());
        };
        let donor = self
            .provenance
            .get(sprite)
            .filter(|d| kb.catalog().classes_in(d).contains(class));
        let source = match donor {
            Some(d) => PlacementSource::Game(d),
            None => PlacementSource::AllGames,
        };
        match recommend_placements(
            &self.game,
            class,
            source,
            kb.catalog(),
            kb.pair_map(),
            self.config.min_support,
            &self.config.recommender,
        ) {
            Err(RecommendError::NoAvatar) => Ok(Vec::new()),
            other => Ok(other?),
        }
    }

    pub fn export(&self) -> Export {
        Export {
            game: serialize_game(&self.game),
            levels: self.game.levels.iter().map(serialize_level).collect(),
        }
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            id: self.id.clone(),
            config: self.config.clone(),
            base: self.base.clone(),
            history: self.history.clone(),
            game: self.game.clone(),
        }
    }

    /// Rebuilds a session from a snapshot, refusing one whose history does
    /// not reproduce its game.
    pub fn restore(kb: &KnowledgeBase, snapshot: Snapshot) -> Result<Self, SessionError> {
        snapshot.config.validate()?;
        let state = replay(kb, &snapshot.base, &snapshot.history)?;
        if state.game != snapshot.game {
            return Err(SessionError::ReplayMismatch);
        }
        let mut session = DesignSession {
            id: snapshot.id,
            revision: snapshot.history.len() as u64,
            config: snapshot.config,
            game: state.game,
            pending_sprites: Vec::new(),
            pending_interactions: Vec::new(),
            history: snapshot.history,
            provenance: state.provenance,
            base: snapshot.base,
        };
        session.refresh(kb)?;
        Ok(session)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vgdl::{parse_game, parse_level, Value};

    fn donor(id: &str, src: &str, levels: &[&str]) -> GameDescription {
        let mut g = parse_game(src).unwrap();
        g.id = id.into();
        g.levels = levels.iter().map(|l| parse_level(l, &g.mapping).unwrap()).collect();
        g
    }

    fn kb() -> KnowledgeBase {
        let shooter = "\
BasicGame
  SpriteSet
    avatar > ShootAvatar stype=sam
    sam > Missile
    alien > RandomNPC
  InteractionSet
    avatar alien > killSprite
  LevelMapping
    A > avatar
    a > alien
";
        let walker = "\
BasicGame
  SpriteSet
    avatar > MovingAvatar
    ghost > RandomNPC
  LevelMapping
    A > avatar
    g > ghost
";
        KnowledgeBase::new(
            Catalog::build(vec![
                donor("one", shooter, &["A....\n.....\n....a\n"]),
                donor("two", shooter, &["A....\n.....\n....a\n"]),
                donor("three", walker, &["A...g\n"]),
            ])
            .unwrap(),
        )
    }

    #[test]
    fn fresh_session_is_empty() {
        let kb = kb();
        let a = DesignSession::new(&kb, SessionConfig::default()).unwrap();
        let b = DesignSession::new(&kb, SessionConfig::default()).unwrap();
        assert_ne!(a.id, b.id);
        assert!(a.pending_sprites.is_empty());
        assert!(a.pending_interactions.is_empty());
        assert_eq!((a.game.levels[0].rows, a.game.levels[0].cols), (10, 10));
        assert_eq!(a.config, SessionConfig::default());
    }

    #[test]
    fn manual_edits_refresh_and_reject_invalid() {
        let kb = kb();
        let mut s = DesignSession::new(&kb, SessionConfig::default()).unwrap();
        s.add_sprite(&kb, SpriteDef::new("hero", "ShootAvatar")).unwrap();
        assert!(s.pending_sprites.iter().any(|r| r.sprite_class == "Missile"));
        assert!(s.pending_sprites.iter().all(|r| r.rule.antecedent.iter().all(|c| c == "ShootAvatar")));

        let rev = s.revision;
        assert!(matches!(
            s.add_sprite(&kb, SpriteDef::new("hero", "Immovable")),
            Err(SessionError::Invalid(VgdlError::DuplicateSprite { .. }))
        ));
        assert!(s
            .add_interaction(&kb, InteractionDef::new("hero", "nobody", "killSprite"))
            .is_err());
        assert_eq!(s.revision, rev);
        assert_eq!(s.history.len(), 1);
    }

    #[test]
    fn accept_then_undo() {
        let kb = kb();
        let mut s = DesignSession::new(&kb, SessionConfig::default()).unwrap();
        s.add_sprite(&kb, SpriteDef::new("hero", "ShootAvatar")).unwrap();
        s.add_sprite(&kb, SpriteDef::new("bug", "RandomNPC")).unwrap();
        let before = s.game.clone();
        let i = s.pending_sprites.iter().position(|r| r.sprite_class == "Missile").unwrap();
        s.accept_sprite(&kb, i).unwrap();
        assert!(s.game.has_sprite("sam"));
        assert!(s.pending_sprites.iter().all(|r| r.sprite_class != "Missile"));
        assert_eq!(s.provenance.get("sam").map(String::as_str), Some("one"));
        assert!(s.replays(&kb));

        s.undo(&kb).unwrap();
        assert_eq!(s.game, before);
        assert!(s.provenance.is_empty());
    }

    #[test]
    fn stale_index() {
        let kb = kb();
        let mut s = DesignSession::new(&kb, SessionConfig::default()).unwrap();
        assert!(matches!(
            s.accept_sprite(&kb, 0),
            Err(SessionError::StaleRecommendation { index: 0, len: 0, .. })
        ));
        assert_eq!(s.accept_interaction(&kb, 3).unwrap_err().code(), "stale_recommendation");
        assert!(matches!(s.undo(&kb), Err(SessionError::NothingToUndo)));
    }

    #[test]
    fn interaction_accept_leaves_pending() {
        let kb = kb();
        let mut s = DesignSession::new(&kb, SessionConfig::default()).unwrap();
        s.add_sprite(&kb, SpriteDef::new("hero", "ShootAvatar")).unwrap();
        s.add_sprite(&kb, SpriteDef::new("bug", "RandomNPC")).unwrap();
        assert_eq!(s.pending_interactions.len(), 2);
        s.accept_interaction(&kb, 0).unwrap();
        assert!(s.pending_interactions.is_empty());
        assert_eq!(s.game.interactions, vec![InteractionDef::new("hero", "bug", "killSprite")]);
    }

    #[test]
    fn placing_assigns_symbols() {
        let kb = kb();
        let mut s = DesignSession::new(&kb, SessionConfig::default()).unwrap();
        s.add_sprite(&kb, SpriteDef::new("hero", "ShootAvatar")).unwrap();
        s.place(&kb, "hero", 0, 0).unwrap();
        s.place(&kb, "hero", 1, 1).unwrap();
        assert_eq!(s.game.mapping.entries.len(), 1);
        assert_eq!(s.game.levels[0].get(1, 1), Some('a'));
        assert!(matches!(
            s.place(&kb, "hero", 10, 0),
            Err(SessionError::OutOfBounds { .. })
        ));
        assert!(matches!(s.place(&kb, "ghost", 0, 0), Err(SessionError::UnknownSprite(_))));
        let out = s.export();
        assert!(out.levels[0].starts_with("a.........\n.a........\n"));
        assert!(out.game.contains("a > hero"));
    }

    #[test]
    fn hints_use_donor_levels() {
        let kb = kb();
        let mut s = DesignSession::new(
            &kb,
            SessionConfig {
                level_rows: 3,
                level_cols: 5,
                recommender: RecommenderConfig {
                    k: 2,
                    ..RecommenderConfig::default()
                },
                ..SessionConfig::default()
            },
        )
        .unwrap();
        s.add_sprite(&kb, SpriteDef::new("hero", "ShootAvatar")).unwrap();
        s.add_sprite(&kb, SpriteDef::new("bug", "RandomNPC")).unwrap();
        assert!(s.placement_hints(&kb, "bug").unwrap().is_empty());
        s.place(&kb, "hero", 0, 0).unwrap();
        // Pooled over every game with a RandomNPC: (2,4) twice, (0,4) once.
        let cells: Vec<_> = s.placement_hints(&kb, "bug").unwrap().iter().map(|p| (p.row, p.col)).collect();
        assert_eq!(cells, [(2, 4), (0, 4)]);

        let i = s.pending_sprites.iter().position(|r| r.sprite_class == "Missile").unwrap();
        s.accept_sprite(&kb, i).unwrap();
        assert!(s.placement_hints(&kb, "sam").unwrap().is_empty());
    }

    #[test]
    fn snapshot_round_trip() {
        let kb = kb();
        let mut s = DesignSession::new(&kb, SessionConfig::default()).unwrap();
        s.add_sprite(&kb, SpriteDef::new("hero", "ShootAvatar").with_param("speed", Value::Float(0.5)))
            .unwrap();
        s.accept_sprite(&kb, 0).unwrap();
        s.place(&kb, "hero", 4, 4).unwrap();
        let json = serde_json::to_string(&s.snapshot()).unwrap();
        let back = DesignSession::restore(&kb, serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.game, s.game);
        assert_eq!(back.pending_sprites, s.pending_sprites);
        assert_eq!(back.provenance, s.provenance);

        let mut tampered = s.snapshot();
        tampered.history.pop();
        assert!(matches!(
            DesignSession::restore(&kb, tampered),
            Err(SessionError::ReplayMismatch)
        ));
    }

    #[test]
    fn config_json_shape() {
        let c: SessionConfig = serde_json::from_str(r#"{"min_support": 0.5, "k": 1, "resource_classes": ["Door"]}"#).unwrap();
        assert_eq!(c.min_support, 0.5);
        assert_eq!(c.min_confidence, 0.1);
        assert_eq!(c.recommender.k, 1);
        assert_eq!(c.recommender.resource_classes.len(), 1);
        assert!(SessionConfig { min_support: 0.0, ..c }.validate().is_err());
    }
}
