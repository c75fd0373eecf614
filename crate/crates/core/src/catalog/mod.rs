//! Game design breakdown: an immutable index over many parsed games and the
//! atomic records (baskets, sprite pairs, reference closures) derived from it.

mod closure;
mod export;
mod load;
mod pairs;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vgdl::{GameDescription, SpriteDef, VgdlError};

pub use closure::{sprite_closure, sprite_references, Reference, REFERENCE_KEYS};
pub use export::{CatalogDocument, PairEntry, DOCUMENT_FORMAT};
pub use load::{load_catalog_dir, load_game_dir, GAME_FILE};
pub use pairs::{ClassPair, PairEffect, PairMap};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("game id `{0}` appears more than once")]
    DuplicateGame(String),
    #[error("game id must not be empty")]
    EmptyId,
    #[error("unknown game `{0}`")]
    UnknownGame(String),
    #[error("game `{game}` has no sprite of class `{class}`")]
    ClassAbsent { game: String, class: String },
    #[error("game `{game}` has no sprite named `{sprite}`")]
    UnknownSprite { game: String, sprite: String },
    #[error("sprite `{sprite}` in game `{game}` has `{key}={target}`, which names no declared sprite")]
    DanglingReference {
        game: String,
        sprite: String,
        key: String,
        target: String,
    },
    #[error("game `{id}` is invalid: {source}")]
    InvalidGame {
        id: String,
        #[source]
        source: VgdlError,
    },
    #[error("{}: {source}", path.display())]
    Parse {
        path: PathBuf,
        #[source]
        source: VgdlError,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CatalogError {
    pub fn code(&self) -> &'static str {
        match self {
            CatalogError::DuplicateGame(_) => "duplicate_game",
            CatalogError::EmptyId => "empty_game_id",
            CatalogError::UnknownGame(_) => "unknown_game",
            CatalogError::ClassAbsent { .. } => "class_absent",
            CatalogError::UnknownSprite { .. } => "unknown_sprite",
            CatalogError::DanglingReference { .. } => "dangling_reference",
            CatalogError::InvalidGame { source, .. } | CatalogError::Parse { source, .. } => source.code(),
            CatalogError::Io { .. } => "io_error",
        }
    }
}

/// One basket: the items contributed by a game or by a level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub tag: String,
    pub items: BTreeSet<String>,
}

impl Transaction {
    pub fn new<I, S>(tag: impl Into<String>, items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Transaction {
            tag: tag.into(),
            items: items.into_iter().map(Into::into).collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransactionSet {
    pub transactions: Vec<Transaction>,
}

impl TransactionSet {
    /// Untagged baskets; tags become the basket index.
    pub fn from_items<I, T, S>(baskets: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: IntoIterator<Item = S>,
        S: Into<String>,
    {
        TransactionSet {
            transactions: baskets
                .into_iter()
                .enumerate()
                .map(|(i, items)| Transaction::new(i.to_string(), items))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }
}

/// Item token for a level cell.
pub fn position_token(row: usize, col: usize) -> String {
    format!("r{row}c{col}")
}

/// Inverse of [`position_token`].
pub fn parse_position_token(token: &str) -> Option<(usize, usize)> {
    let rest = token.strip_prefix('r')?;
    let (row, col) = rest.split_once('c')?;
    let plain = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !plain(row) || !plain(col) {
        return None;
    }
    Some((row.parse().ok()?, col.parse().ok()?))
}

#[derive(Debug, Clone, Default)]
pub struct Catalog {
    games: BTreeMap<String, GameDescription>,
    sprite_index: BTreeMap<String, Vec<SpriteDef>>,
}

impl Catalog {
    /// Indexes a set of games. Every game is validated and ids must be unique.
    pub fn build(games: Vec<GameDescription>) -> Result<Self, CatalogError> {
        let mut catalog = Catalog::default();
        for game in games {
            if game.id.is_empty() {
                return Err(CatalogError::EmptyId);
            }
            if catalog.games.contains_key(&game.id) {
                return Err(CatalogError::DuplicateGame(game.id));
            }
            game.validate().map_err(|source| CatalogError::InvalidGame {
                id: game.id.clone(),
                source,
            })?;
            let flat = game.classed_sprites().into_iter().map(SpriteDef::detached).collect();
            catalog.sprite_index.insert(game.id.clone(), flat);
            catalog.games.insert(game.id.clone(), game);
        }
        Ok(catalog)
    }

    pub fn len(&self) -> usize {
        self.games.len()
    }

    pub fn is_empty(&self) -> bool {
        self.games.is_empty()
    }

    /// Games in id order.
    pub fn games(&self) -> impl Iterator<Item = &GameDescription> {
        self.games.values()
    }

    pub fn game(&self, id: &str) -> Option<&GameDescription> {
        self.games.get(id)
    }

    pub fn require_game(&self, id: &str) -> Result<&GameDescription, CatalogError> {
        self.games
            .get(id)
            .ok_or_else(|| CatalogError::UnknownGame(id.to_string()))
    }

    /// Classed sprites of a game, flattened and detached from their subtrees.
    pub fn sprite_index(&self, id: &str) -> Option<&[SpriteDef]> {
        self.sprite_index.get(id).map(Vec::as_slice)
    }

    /// Behavior classes present in a game.
    pub fn classes_in(&self, id: &str) -> BTreeSet<&str> {
        self.sprite_index(id)
            .unwrap_or(&[])
            .iter()
            .filter_map(|s| s.class.as_deref())
            .collect()
    }

    /// Ids of games that contain at least one sprite of `class`.
    pub fn games_with_class<'a>(&'a self, class: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.sprite_index
            .iter()
            .filter(move |(_, sprites)| sprites.iter().any(|s| s.class.as_deref() == Some(class)))
            .map(|(id, _)| id.as_str())
    }

    /// One basket per game whose items are the game's behavior classes.
    pub fn sprite_baskets(&self) -> TransactionSet {
        TransactionSet {
            transactions: self
                .sprite_index
                .keys()
                .map(|id| Transaction::new(id.clone(), self.classes_in(id)))
                .collect(),
        }
    }

    /// One basket per level of `game_id`, holding the position tokens of
    /// every cell that places a sprite of `class`.
    pub fn position_baskets(&self, game_id: &str, class: &str) -> Result<TransactionSet, CatalogError> {
        let game = self.require_game(game_id)?;
        if !self.classes_in(game_id).contains(class) {
            return Err(CatalogError::ClassAbsent {
                game: game_id.to_string(),
                class: class.to_string(),
            });
        }
        let holding: BTreeSet<char> = game
            .mapping
            .entries
            .iter()
            .filter(|(_, names)| names.iter().any(|n| game.classes_of(n).contains(class)))
            .map(|(&symbol, _)| symbol)
            .collect();
        let transactions = game
            .levels
            .iter()
            .enumerate()
            .map(|(i, level)| {
                let items = level
                    .iter_cells()
                    .filter(|(_, _, symbol)| holding.contains(symbol))
                    .map(|(r, c, _)| position_token(r, c));
                Transaction::new(format!("{game_id}/level_{i}"), items)
            })
            .collect();
        Ok(TransactionSet { transactions })
    }

    /// Sprite-class pairs mapped to the effects they trigger across the catalog.
    pub fn pair_interaction_map(&self) -> PairMap {
        PairMap::from_games(self.games())
    }
}
