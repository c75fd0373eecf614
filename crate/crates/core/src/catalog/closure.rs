use std::collections::BTreeSet;

use super::CatalogError;
use crate::vgdl::{GameDescription, Params, SpriteDef, Value};

/// Parameter keys that always hold a sprite reference.
pub const REFERENCE_KEYS: [&str; 3] = ["stype", "stypeMissile", "spawnType"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reference<'a> {
    pub key: &'a str,
    pub target: &'a str,
}

/// Sprite references held in `params`, in parameter order.
///
/// A conventional reference key must name a declared sprite; any other
/// identifier value counts as a reference when it happens to name one.
pub fn sprite_references<'a>(
    game: &GameDescription,
    owner: &str,
    params: &'a Params,
) -> Result<Vec<Reference<'a>>, CatalogError> {
    let mut out = Vec::new();
    for (key, value) in params.iter() {
        let target = match value {
            Value::Ident(s) if game.has_sprite(s) => Some(s.as_str()),
            _ => None,
        };
        match target {
            Some(target) => out.push(Reference { key, target }),
            None if REFERENCE_KEYS.contains(&key.as_str()) => {
                return Err(CatalogError::DanglingReference {
                    game: game.id.clone(),
                    sprite: owner.to_string(),
                    key: key.clone(),
                    target: value.to_string(),
                })
            }
            None => {}
        }
    }
    Ok(out)
}

/// Depth-first closure of a sprite over its references.
///
/// Starts with the named sprite and follows every reference transitively;
/// a reference to a grouping node pulls in the whole group. Each sprite
/// appears once, detached from its subtree.
pub fn sprite_closure(game: &GameDescription, sprite: &str) -> Result<Vec<SpriteDef>, CatalogError> {
    if !game.has_sprite(sprite) {
        return Err(CatalogError::UnknownSprite {
            game: game.id.clone(),
            sprite: sprite.to_string(),
        });
    }
    let mut visited = BTreeSet::new();
    let mut out = Vec::new();
    visit(game, sprite, &mut visited, &mut out)?;
    Ok(out)
}

fn visit(
    game: &GameDescription,
    name: &str,
    visited: &mut BTreeSet<String>,
    out: &mut Vec<SpriteDef>,
) -> Result<(), CatalogError> {
    if !visited.insert(name.to_string()) {
        return Ok(());
    }
    let node = game.find_sprite(name).ok_or_else(|| CatalogError::UnknownSprite {
        game: game.id.clone(),
        sprite: name.to_string(),
    })?;
    out.push(node.detached());
    if node.is_group() {
        for child in &node.children {
            visit(game, &child.name, visited, out)?;
        }
    }
    for r in sprite_references(game, &node.name, &node.params)? {
        visit(game, r.target, visited, out)?;
    }
    Ok(())
}
