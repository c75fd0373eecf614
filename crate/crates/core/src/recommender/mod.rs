//! Recommendation protocols over a catalog: sprites (with blending),
//! level placements, and interaction rules.

mod interactions;
mod placement;
mod sprites;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::CatalogError;
use crate::mining::MiningError;
use crate::vgdl::VgdlError;

pub use interactions::{accept_interaction, interaction_present, recommend_interactions, InteractionRecommendation};
pub use placement::{avatar_cell, is_harmful, recommend_placements, PlacementSource, PlacementSuggestion};
pub use sprites::{blend_sprite, import_closure, recommend_sprites, Import, SpriteRecommendation};

/// Behavior classes controlled by the player end in `Avatar`
/// (`MovingAvatar`, `ShootAvatar`, `FlakAvatar`, ...).
pub fn is_avatar_class(class: &str) -> bool {
    class.ends_with("Avatar")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecommenderConfig {
    /// Minimum Chebyshev distance between a placement and the avatar.
    pub k: usize,
    /// Effects that destroy the sprite they are applied to.
    pub destructive_effects: BTreeSet<String>,
    /// Classes treated as resources or exits when ranking harmful placements.
    pub resource_classes: BTreeSet<String>,
}

impl Default for RecommenderConfig {
    fn default() -> Self {
        RecommenderConfig {
            k: 3,
            destructive_effects: ["killSprite", "killIfFromAbove", "killIfOtherHasMore"]
                .into_iter()
                .map(String::from)
                .collect(),
            resource_classes: ["Resource", "Door", "Portal"].into_iter().map(String::from).collect(),
        }
    }
}

#[derive(Debug, Error)]
pub enum RecommendError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("result would be an invalid game: {0}")]
    Invalid(#[from] VgdlError),
    #[error(transparent)]
    Mining(#[from] MiningError),
    #[error("no level of the game places an avatar")]
    NoAvatar,
    #[error("the game has no sprite of class `{0}`")]
    ClassNotInGame(String),
    #[error("the interaction is already part of the game")]
    DuplicateInteraction,
}

impl RecommendError {
    pub fn code(&self) -> &'static str {
        match self {
            RecommendError::Catalog(e) => e.code(),
            RecommendError::Invalid(e) => e.code(),
            RecommendError::Mining(_) => "mining_error",
            RecommendError::NoAvatar => "no_avatar",
            RecommendError::ClassNotInGame(_) => "class_not_in_game",
            RecommendError::DuplicateInteraction => "duplicate_interaction",
        }
    }
}

/// Chebyshev (king-move) distance between two cells.
pub fn chebyshev(a: (usize, usize), b: (usize, usize)) -> usize {
    a.0.abs_diff(b.0).max(a.1.abs_diff(b.1))
}
