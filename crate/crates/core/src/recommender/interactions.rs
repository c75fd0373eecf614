use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{import_closure, RecommendError};
use crate::catalog::{sprite_references, Catalog, PairMap};
use crate::scalar::Frequency;
use crate::vgdl::{GameDescription, InteractionDef, Params, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionRecommendation<F> {
    /// Class the effect applies to.
    pub actor_class: String,
    pub other_class: String,
    pub effect: String,
    #[serde(default, skip_serializing_if = "Params::is_empty")]
    pub params: Params,
    pub donor_game: String,
    /// Among catalog games containing both classes, the fraction that
    /// trigger this effect between them in this orientation.
    pub confidence: F,
}

impl<F> InteractionRecommendation<F> {
    pub fn involves(&self, class: &str) -> bool {
        self.actor_class == class || self.other_class == class
    }
}

/// Parameter lists match when keys line up in order and every value is equal
/// or both values name sprites of the same classes in their own games.
fn params_equivalent(
    session: &GameDescription,
    ours: &Params,
    donor: Option<&GameDescription>,
    theirs: &Params,
) -> bool {
    ours.len() == theirs.len()
        && ours.iter().zip(theirs.iter()).all(|((ok, ov), (tk, tv))| {
            ok == tk
                && (ov == tv
                    || match (ov, tv, donor) {
                        (Value::Ident(o), Value::Ident(t), Some(donor)) => {
                            let ours = session.classes_of(o);
                            !ours.is_empty() && ours == donor.classes_of(t)
                        }
                        _ => false,
                    })
        })
}

/// Whether the game already has an interaction equivalent to `rec`.
pub fn interaction_present<F>(
    session: &GameDescription,
    rec: &InteractionRecommendation<F>,
    catalog: &Catalog,
) -> bool {
    let donor = catalog.game(&rec.donor_game);
    session.interactions.iter().any(|inter| {
        inter.effect == rec.effect
            && session.classes_of(&inter.actor).contains(rec.actor_class.as_str())
            && session.classes_of(&inter.other).contains(rec.other_class.as_str())
            && params_equivalent(session, &inter.params, donor, &rec.params)
    })
}

/// Looks up every unordered pair (with repetition) of the game's classes in
/// the pair map and proposes each recorded effect the game lacks.
///
/// Sorted by confidence (descending), then donor game, actor class, other
/// class and effect.
pub fn recommend_interactions<F: Frequency>(
    session: &GameDescription,
    catalog: &Catalog,
    pair_map: &PairMap,
) -> Vec<InteractionRecommendation<F>> {
    let classes: Vec<&str> = session.sprite_classes().into_iter().collect();
    let containing_both = |a: &str, b: &str| {
        catalog
            .games()
            .filter(|g| {
                let present = catalog.classes_in(&g.id);
                present.contains(a) && present.contains(b)
            })
            .count()
    };

    let mut out = Vec::new();
    for (i, &a) in classes.iter().enumerate() {
        for &b in &classes[i..] {
            let entries = pair_map.lookup(a, b);
            if entries.is_empty() {
                continue;
            }
            let denominator = containing_both(a, b);
            let mut exhibiting: BTreeMap<(&str, &str, &str), BTreeSet<&str>> = BTreeMap::new();
            for e in entries {
                exhibiting
                    .entry((e.actor.as_str(), e.other.as_str(), e.effect.as_str()))
                    .or_default()
                    .insert(e.donor.as_str());
            }
            for e in entries {
                let rec = InteractionRecommendation {
                    actor_class: e.actor.clone(),
                    other_class: e.other.clone(),
                    effect: e.effect.clone(),
                    params: e.params.clone(),
                    donor_game: e.donor.clone(),
                    confidence: F::from_counts(
                        exhibiting[&(e.actor.as_str(), e.other.as_str(), e.effect.as_str())].len(),
                        denominator,
                    ),
                };
                if !interaction_present(session, &rec, catalog) {
                    out.push(rec);
                }
            }
        }
    }
    out.sort_by(|a, b| {
        b.confidence
            .partial_cmp(&a.confidence)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.donor_game.cmp(&b.donor_game))
            .then_with(|| a.actor_class.cmp(&b.actor_class))
            .then_with(|| a.other_class.cmp(&b.other_class))
            .then_with(|| a.effect.cmp(&b.effect))
    });
    out
}

fn lowest_named<'a>(game: &'a GameDescription, class: &str) -> Option<&'a str> {
    game.classed_sprites()
        .into_iter()
        .filter(|s| s.class.as_deref() == Some(class))
        .map(|s| s.name.as_str())
        .min()
}

/// Adds the recommended interaction between the lowest-named sprites of the
/// two classes. Sprites referenced by the effect's parameters are imported
/// from the donor with their closures.
pub fn accept_interaction<F>(
    session: &GameDescription,
    rec: &InteractionRecommendation<F>,
    catalog: &Catalog,
) -> Result<GameDescription, RecommendError> {
    let actor = lowest_named(session, &rec.actor_class)
        .ok_or_else(|| RecommendError::ClassNotInGame(rec.actor_class.clone()))?
        .to_string();
    let other = lowest_named(session, &rec.other_class)
        .ok_or_else(|| RecommendError::ClassNotInGame(rec.other_class.clone()))?
        .to_string();
    if interaction_present(session, rec, catalog) {
        return Err(RecommendError::DuplicateInteraction);
    }

    let donor = catalog.require_game(&rec.donor_game)?;
    let references = sprite_references(donor, &rec.effect, &rec.params)?;
    let mut game = session.clone();
    let mut renames: BTreeMap<String, String> = BTreeMap::new();
    let mut params = rec.params.clone();
    for r in references {
        if !renames.contains_key(r.target) {
            let import = import_closure(&game, &rec.donor_game, r.target, catalog)?;
            game = import.game;
            renames.extend(import.renames);
        }
        params.insert(r.key, Value::Ident(renames[r.target].clone()));
    }
    game.interactions.push(InteractionDef {
        actor,
        other,
        effect: rec.effect.clone(),
        params,
    });
    game.validate()?;
    Ok(game)
}
