use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Catalog, CatalogError, ClassPair, PairEffect, Transaction};
use crate::vgdl::GameDescription;

pub const DOCUMENT_FORMAT: u32 = 1;

/// Everything the catalog derives, in one JSON document. `games` alone is
/// enough to rebuild the catalog; the rest is for inspection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogDocument {
    pub format: u32,
    pub games: Vec<GameDescription>,
    pub sprite_baskets: Vec<Transaction>,
    /// Game id, then class, then one basket per level.
    #[serde(default)]
    pub position_baskets: BTreeMap<String, BTreeMap<String, Vec<Transaction>>>,
    #[serde(default)]
    pub pair_map: Vec<PairEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEntry {
    pub classes: ClassPair,
    pub effects: Vec<PairEffect>,
}

impl Catalog {
    pub fn document(&self) -> CatalogDocument {
        let mut position_baskets = BTreeMap::new();
        for game in self.games() {
            let per_class: BTreeMap<String, Vec<Transaction>> = self
                .classes_in(&game.id)
                .into_iter()
                .map(|class| {
                    let baskets = self.position_baskets(&game.id, class).expect("class of this game");
                    (class.to_string(), baskets.transactions)
                })
                .collect();
            position_baskets.insert(game.id.clone(), per_class);
        }
        CatalogDocument {
            format: DOCUMENT_FORMAT,
            games: self.games().cloned().collect(),
            sprite_baskets: self.sprite_baskets().transactions,
            position_baskets,
            pair_map: self
                .pair_interaction_map()
                .iter()
                .map(|(classes, effects)| PairEntry {
                    classes: classes.clone(),
                    effects: effects.to_vec(),
                })
                .collect(),
        }
    }
}

impl CatalogDocument {
    pub fn into_catalog(self) -> Result<Catalog, CatalogError> {
        Catalog::build(self.games)
    }
}
