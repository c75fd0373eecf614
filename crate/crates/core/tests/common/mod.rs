//! Brute-force references and generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use forge_core::catalog::{load_catalog_dir, Catalog, TransactionSet, REFERENCE_KEYS};
use forge_core::scalar::{Exact, Frequency};
use forge_core::vgdl::{parse_game, parse_level, serialize_game, serialize_level, GameDescription, SpriteDef, WALL_TOKEN};
use rand::Rng;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/catalog")
}

pub fn fixture_catalog() -> Catalog {
    load_catalog_dir(&fixture_dir()).expect("fixture catalog loads")
}

/// Up to `max_items` items over up to `max_tx` (possibly empty) baskets.
pub fn random_transactions(rng: &mut impl Rng, max_items: usize, max_tx: usize) -> TransactionSet {
    let n_items = rng.random_range(1..=max_items);
    let n_tx = rng.random_range(1..=max_tx);
    TransactionSet::from_items((0..n_tx).map(|_| {
        (0..n_items)
            .filter(|_| rng.random_bool(0.5))
            .map(|i| format!("i{i}"))
            .collect::<Vec<_>>()
    }))
}

/// Every non-empty subset of the item universe with its count, kept when
/// its support reaches `min_support`.
pub fn oracle_itemsets(t: &TransactionSet, min_support: Exact) -> Vec<(Vec<String>, usize)> {
    let universe: Vec<String> = t
        .transactions
        .iter()
        .flat_map(|x| x.items.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut out = Vec::new();
    for mask in 1u32..(1 << universe.len()) {
        let set: Vec<String> = (0..universe.len())
            .filter(|b| mask & (1 << b) != 0)
            .map(|b| universe[b].clone())
            .collect();
        let count = count_containing(t, &set);
        if Exact::from_counts(count, t.len()) >= min_support {
            out.push((set, count));
        }
    }
    out.sort();
    out
}

pub fn count_containing(t: &TransactionSet, set: &[String]) -> usize {
    t.transactions
        .iter()
        .filter(|x| set.iter().all(|i| x.items.contains(i)))
        .count()
}

/// Every bipartition of every frequent itemset whose confidence reaches
/// `min_confidence`: (antecedent, consequent, support, confidence).
pub fn oracle_rules(
    t: &TransactionSet,
    min_support: Exact,
    min_confidence: Exact,
) -> Vec<(Vec<String>, Vec<String>, Exact, Exact)> {
    let mut out = Vec::new();
    for (set, count) in oracle_itemsets(t, min_support) {
        let k = set.len();
        for mask in 1u32..(1 << k) - 1 {
            let (mut ante, mut cons) = (Vec::new(), Vec::new());
            for (i, item) in set.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    cons.push(item.clone());
                } else {
                    ante.push(item.clone());
                }
            }
            let confidence = Exact::from_counts(count, count_containing(t, &ante));
            if confidence >= min_confidence {
                out.push((ante, cons, Exact::from_counts(count, t.len()), confidence));
            }
        }
    }
    out.sort();
    out
}

/// Behavior classes a name stands for in `game`, found by walking the raw
/// sprite tree: a classed node gives its class, a group gives those of all
/// its descendants, the wall token stands for itself.
pub fn classes_named(game: &GameDescription, name: &str) -> BTreeSet<String> {
    fn collect(node: &SpriteDef, out: &mut BTreeSet<String>) {
        if let Some(c) = &node.class {
            out.insert(c.clone());
        }
        for child in &node.children {
            collect(child, out);
        }
    }
    fn find<'a>(nodes: &'a [SpriteDef], name: &str) -> Option<&'a SpriteDef> {
        nodes
            .iter()
            .find_map(|n| if n.name == name { Some(n) } else { find(&n.children, name) })
    }
    let mut out = BTreeSet::new();
    if name == WALL_TOKEN {
        out.insert(WALL_TOKEN.to_string());
    } else if let Some(node) = find(&game.sprites, name) {
        collect(node, &mut out);
    }
    out
}

pub fn all_classes(game: &GameDescription) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for top in &game.sprites {
        out.extend(classes_named(game, &top.name));
    }
    out
}

/// Text round trip: the game and its levels come back structurally equal.
pub fn round_trips(game: &GameDescription) -> Result<(), String> {
    let text = serialize_game(game);
    let mut back = parse_game(&text).map_err(|e| format!("reparse failed: {e}\n{text}"))?;
    back.id = game.id.clone();
    for level in &game.levels {
        let grid = parse_level(&serialize_level(level), &back.mapping).map_err(|e| format!("level reparse: {e}"))?;
        back.levels.push(grid);
    }
    if &back == game {
        Ok(())
    } else {
        Err(format!("round trip changed the game:\n{text}"))
    }
}

/// Every conventional reference parameter of `sprite` names a sprite of `game`.
pub fn references_resolve(game: &GameDescription, sprite: &SpriteDef) -> bool {
    REFERENCE_KEYS.iter().all(|key| match sprite.params.get(key) {
        Some(v) => v.as_ident().is_some_and(|t| game.has_sprite(t)),
        None => true,
    })
}
