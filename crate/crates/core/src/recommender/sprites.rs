use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::RecommendError;
use crate::catalog::{sprite_closure, Catalog};
use crate::mining::AssociationRule;
use crate::scalar::Frequency;
use crate::vgdl::{GameDescription, Params, SpriteDef, Value};

/// A concrete donor sprite suggested for the game under construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpriteRecommendation<F> {
    pub sprite_class: String,
    pub donor_game: String,
    pub donor_sprite: String,
    pub confidence: F,
    /// Highest-confidence rule that produced the class.
    pub rule: AssociationRule<F>,
    /// Names that blending would import, in import order.
    pub closure_preview: Vec<String>,
    /// The donor sprite's parameters, for display.
    #[serde(default)]
    pub attributes: Params,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<String>,
}

/// Suggests sprites from every rule whose antecedent lies inside
/// `session_classes`.
///
/// Each consequent class missing from the session is resolved to every donor
/// sprite of that class in the catalog. A class takes the confidence of its
/// strongest rule. With `dedupe`, only the first entry per class survives.
/// Sorted by confidence (descending), then donor game, class, and sprite.
pub fn recommend_sprites<F: Frequency>(
    session_classes: &BTreeSet<String>,
    rules: &[AssociationRule<F>],
    catalog: &Catalog,
    dedupe: bool,
) -> Vec<SpriteRecommendation<F>> {
    if session_classes.is_empty() {
        return Vec::new();
    }
    let mut best: BTreeMap<&str, &AssociationRule<F>> = BTreeMap::new();
    for rule in rules.iter().filter(|r| r.antecedent_within(session_classes)) {
        for class in rule.consequent.iter().filter(|c| !session_classes.contains(*c)) {
            best.entry(class)
                .and_modify(|cur| {
                    if rule.confidence > cur.confidence {
                        *cur = rule;
                    }
                })
                .or_insert(rule);
        }
    }

    let mut out = Vec::new();
    for (class, rule) in best {
        for donor_id in catalog.games_with_class(class) {
            let donor = catalog.game(donor_id).expect("indexed game");
            let sprites = catalog.sprite_index(donor_id).unwrap_or(&[]);
            for sprite in sprites.iter().filter(|s| s.class.as_deref() == Some(class)) {
                // A donor with a dangling reference cannot be imported atomically.
                let Ok(closure) = sprite_closure(donor, &sprite.name) else {
                    continue;
                };
                out.push(SpriteRecommendation {
                    sprite_class: class.to_string(),
                    donor_game: donor_id.to_string(),
                    donor_sprite: sprite.name.clone(),
                    confidence: rule.confidence.clone(),
                    rule: rule.clone(),
                    closure_preview: closure.into_iter().map(|s| s.name).collect(),
                    attributes: sprite.params.clone(),
                    image: sprite.image.clone(),
                });
            }
        }
    }
    out.sort_by(|a, b| {
        b.confidence
            .partial_cmp(&a.confidence)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.donor_game.cmp(&b.donor_game))
            .then_with(|| a.sprite_class.cmp(&b.sprite_class))
            .then_with(|| a.donor_sprite.cmp(&b.donor_sprite))
    });
    if dedupe {
        let mut seen = BTreeSet::new();
        out.retain(|r| seen.insert(r.sprite_class.clone()));
    }
    out
}

/// Outcome of importing a donor sprite's closure.
#[derive(Debug, Clone)]
pub struct Import {
    pub game: GameDescription,
    /// Donor name to the name used in the receiving game.
    pub renames: BTreeMap<String, String>,
}

fn name_fragment(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect()
}

fn donor_parents(donor: &GameDescription) -> BTreeMap<&str, &SpriteDef> {
    fn walk<'a>(node: &'a SpriteDef, out: &mut BTreeMap<&'a str, &'a SpriteDef>) {
        for child in &node.children {
            out.insert(child.name.as_str(), node);
            walk(child, out);
        }
    }
    let mut out = BTreeMap::new();
    for root in &donor.sprites {
        walk(root, &mut out);
    }
    out
}

/// Copies `sprite` and everything it references from `donor_id` into
/// `game`. Clashing names become `<name>_<donor>` (with a numeric suffix if
/// that is taken too) and references inside the imported set follow the
/// renames. Imported sprites land at the top level, except members of an
/// imported group, which stay nested under it.
///
/// Either the whole closure is imported or an error is returned.
pub fn import_closure(
    game: &GameDescription,
    donor_id: &str,
    sprite: &str,
    catalog: &Catalog,
) -> Result<Import, RecommendError> {
    let donor = catalog.require_game(donor_id)?;
    let closure = sprite_closure(donor, sprite)?;

    let mut taken: BTreeSet<String> = game.sprite_names().into_iter().map(String::from).collect();
    let mut renames = BTreeMap::new();
    let suffix = name_fragment(donor_id);
    for s in &closure {
        let mut name = s.name.clone();
        if taken.contains(&name) {
            let base = format!("{}_{suffix}", s.name);
            name = base.clone();
            let mut n = 2;
            while taken.contains(&name) {
                name = format!("{base}_{n}");
                n += 1;
            }
        }
        taken.insert(name.clone());
        renames.insert(s.name.clone(), name);
    }

    let parents = donor_parents(donor);
    let in_closure: BTreeSet<&str> = closure.iter().map(|s| s.name.as_str()).collect();
    let nest_under: BTreeMap<String, String> = closure
        .iter()
        .filter_map(|s| {
            let p = parents.get(s.name.as_str())?;
            (p.is_group() && in_closure.contains(p.name.as_str())).then(|| (s.name.clone(), p.name.clone()))
        })
        .collect();

    let mut copies: BTreeMap<&str, SpriteDef> = BTreeMap::new();
    for s in &closure {
        let mut copy = s.clone();
        copy.name = renames[&s.name].clone();
        for value in copy.params.values_mut() {
            if let Value::Ident(target) = value {
                if let Some(new) = renames.get(target.as_str()) {
                    *target = new.clone();
                }
            }
        }
        copies.insert(s.name.as_str(), copy);
    }

    fn assemble(
        name: &str,
        closure: &[SpriteDef],
        copies: &mut BTreeMap<&str, SpriteDef>,
        nest_under: &BTreeMap<String, String>,
    ) -> SpriteDef {
        let mut node = copies.remove(name).expect("closure member");
        for member in closure.iter().filter(|m| nest_under.get(&m.name).map(String::as_str) == Some(name)) {
            let child = assemble(&member.name, closure, copies, nest_under);
            node.children.push(child);
        }
        node
    }

    let mut result = game.clone();
    for s in closure.iter().filter(|s| !nest_under.contains_key(&s.name)) {
        let node = assemble(&s.name, &closure, &mut copies, &nest_under);
        result.sprites.push(node);
    }
    result.validate()?;
    Ok(Import { game: result, renames })
}

/// Imports a recommended sprite together with its reference closure.
pub fn blend_sprite<F>(
    session_game: &GameDescription,
    rec: &SpriteRecommendation<F>,
    catalog: &Catalog,
) -> Result<GameDescription, RecommendError> {
    import_closure(session_game, &rec.donor_game, &rec.donor_sprite, catalog).map(|i| i.game)
}
