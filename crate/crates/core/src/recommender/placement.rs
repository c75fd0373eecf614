use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{chebyshev, is_avatar_class, RecommendError, RecommenderConfig};
use crate::catalog::{parse_position_token, Catalog, PairMap, TransactionSet};
use crate::mining::frequent_itemsets_up_to;
use crate::scalar::Frequency;
use crate::vgdl::{GameDescription, LevelGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementSuggestion<F> {
    pub row: usize,
    pub col: usize,
    /// Fraction of donor levels that use this cell.
    pub support: F,
    /// Chebyshev distance to the nearest resource or exit cell, when any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resource_distance: Option<usize>,
}

/// Where placement statistics come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementSource<'a> {
    /// The levels of one donor game.
    Game(&'a str),
    /// The levels of every catalog game that has the class.
    AllGames,
}

/// First level (and its first cell in row-major order) that places an
/// avatar-classed sprite.
pub fn avatar_cell(game: &GameDescription) -> Option<(&LevelGrid, (usize, usize))> {
    game.levels.iter().find_map(|level| {
        level
            .iter_cells()
            .find(|&(r, c, _)| {
                game.cell_sprites(level, r, c)
                    .iter()
                    .any(|name| game.classes_of(name).iter().any(|cl| is_avatar_class(cl)))
            })
            .map(|(r, c, _)| (level, (r, c)))
    })
}

/// Whether sprites of `class` can destroy the avatar.
///
/// The game's own interactions decide when any of them pairs an avatar
/// with `class`; otherwise the catalog's pair map is consulted. Harm means a
/// destructive effect applied to the avatar (the avatar is the actor).
pub fn is_harmful(
    class: &str,
    session: &GameDescription,
    pair_map: &PairMap,
    config: &RecommenderConfig,
) -> bool {
    let classes = session.sprite_classes();
    let avatars: Vec<&str> = classes.iter().copied().filter(|c| is_avatar_class(c)).collect();
    if avatars.is_empty() {
        return false;
    }
    let destructive = |effect: &str| config.destructive_effects.contains(effect);

    let local: Vec<(bool, &str)> = session
        .interactions
        .iter()
        .filter_map(|inter| {
        let actor = session.classes_of(&inter.actor);
        let other = session.classes_of(&inter.other);
        let avatar_acts = avatars.iter().any(|a| actor.contains(a)) && other.contains(class);
        let avatar_hit = actor.contains(class) && avatars.iter().any(|a| other.contains(a));
        (avatar_acts || avatar_hit).then_some((avatar_acts, inter.effect.as_str()))
        })
        .collect();
    if !local.is_empty() {
        return local.iter().any(|&(avatar_acts, effect)| avatar_acts && destructive(effect));
    }
    avatars.iter().any(|&avatar| {
        pair_map
            .lookup(avatar, class)
            .iter()
            .any(|e| e.actor == avatar && e.other == class && destructive(&e.effect))
    })
}

fn resource_cells(game: &GameDescription, level: &LevelGrid, config: &RecommenderConfig) -> Vec<(usize, usize)> {
    level
        .iter_cells()
        .filter(|&(r, c, _)| {
            game.cell_sprites(level, r, c).iter().any(|name| {
                game.classes_of(name)
                    .iter()
                    .any(|cl| config.resource_classes.contains(*cl))
            })
        })
        .map(|(r, c, _)| (r, c))
        .collect()
}

/// Cells where `class` is frequently placed in donor levels, filtered to the
/// session level's bounds and to at least `config.k` from the avatar.
///
/// Harmful classes are ranked by closeness to resource and exit cells;
/// everything else by support. Ties fall back to support, then row, then
/// column.
pub fn recommend_placements<F: Frequency>(
    session: &GameDescription,
    class: &str,
    source: PlacementSource<'_>,
    catalog: &Catalog,
    pair_map: &PairMap,
    min_support: F,
    config: &RecommenderConfig,
) -> Result<Vec<PlacementSuggestion<F>>, RecommendError> {
    let (level, avatar) = avatar_cell(session).ok_or(RecommendError::NoAvatar)?;

    let baskets = match source {
        PlacementSource::Game(id) => catalog.position_baskets(id, class)?,
        PlacementSource::AllGames => {
            let mut all = TransactionSet::default();
            for id in catalog.games_with_class(class) {
                all.transactions
                    .extend(catalog.position_baskets(id, class)?.transactions);
            }
            all
        }
    };
    if baskets.is_empty() {
        return Ok(Vec::new());
    }

    let resources = resource_cells(session, level, config);
    let mut out: Vec<PlacementSuggestion<F>> = frequent_itemsets_up_to(&baskets, min_support, 1)?
        .into_iter()
        .filter_map(|s| {
            let (row, col) = parse_position_token(&s.items[0])?;
            (level.contains(row, col) && chebyshev((row, col), avatar) >= config.k).then(|| {
                PlacementSuggestion {
                    row,
                    col,
                    support: s.support,
                    resource_distance: resources.iter().map(|&r| chebyshev(r, (row, col))).min(),
                }
            })
        })
        .collect();

    let by_support = |a: &PlacementSuggestion<F>, b: &PlacementSuggestion<F>| {
        b.support
            .partial_cmp(&a.support)
            .unwrap_or(Ordering::Equal)
            .then_with(|| (a.row, a.col).cmp(&(b.row, b.col)))
    };
    if is_harmful(class, session, pair_map, config) {
        out.sort_by(|a, b| {
            let da = a.resource_distance.unwrap_or(usize::MAX);
            let db = b.resource_distance.unwrap_or(usize::MAX);
            da.cmp(&db).then_with(|| by_support(a, b))
        });
    } else {
        out.sort_by(by_support);
    }
    Ok(out)
}
