//! The game description language: data model, parser, and canonical writer.
//!
//! A game is a tree of sprite definitions plus flat lists of interactions,
//! level-mapping entries and termination conditions. Levels are rectangular
//! character grids stored in sidecar files and resolved through the
//! mapping.

mod error;
mod level;
mod parser;
mod writer;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

pub use error::{At, VgdlError};
pub use level::{parse_level, serialize_level};
pub use parser::parse_game;
pub use writer::serialize_game;

/// Reserved interaction endpoint standing for the level boundary.
pub const WALL_TOKEN: &str = "EOS";

/// Level cell character that never needs a mapping entry.
pub const BLANK_CELL: char = '.';

/// Param key carrying a sprite's image asset.
pub const IMAGE_KEY: &str = "img";

/// Param key that holds a termination's win flag.
pub const WIN_KEY: &str = "win";

/// Scalar parameter value. Parsing tries integer, then decimal, then
/// boolean, and falls back to a bare identifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Ident(String),
}

impl Value {
    pub fn infer(token: &str) -> Value {
        if let Ok(i) = token.parse::<i64>() {
            return Value::Int(i);
        }
        if looks_decimal(token) {
            if let Ok(f) = token.parse::<f64>() {
                if f.is_finite() {
                    return Value::Float(f);
                }
            }
        }
        match token {
            "true" => Value::Bool(true),
            "false" => Value::Bool(false),
            _ => Value::Ident(token.to_string()),
        }
    }

    pub fn as_ident(&self) -> Option<&str> {
        match self {
            Value::Ident(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

fn looks_decimal(token: &str) -> bool {
    token.bytes().any(|b| b.is_ascii_digit())
        && token.bytes().any(|b| matches!(b, b'.' | b'e' | b'E'))
        && token
            .bytes()
            .all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'e' | b'E' | b'+' | b'-'))
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            // Debug keeps a fractional part (`1.0`), so the token re-infers as a decimal.
            Value::Float(x) => write!(f, "{x:?}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Ident(s) => f.write_str(s),
        }
    }
}

/// Insertion-ordered parameter map. Equality is order-sensitive.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Params(IndexMap<String, Value>);

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.get(key)
    }

    /// Appends or overwrites `key`; returns the previous value.
    pub fn insert(&mut self, key: impl Into<String>, value: Value) -> Option<Value> {
        self.0.insert(key.into(), value)
    }

    pub fn remove(&mut self, key: &str) -> Option<Value> {
        self.0.shift_remove(key)
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.0.iter()
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut Value> {
        self.0.values_mut()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl PartialEq for Params {
    fn eq(&self, other: &Self) -> bool {
        self.0.len() == other.0.len() && self.0.iter().eq(other.0.iter())
    }
}

impl<K: Into<String>> FromIterator<(K, Value)> for Params {
    fn from_iter<I: IntoIterator<Item = (K, Value)>>(iter: I) -> Self {
        Params(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

/// One node of the sprite tree. Nodes without a class are grouping nodes:
/// aliases for their descendants that carry no parameters of their own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpriteDef {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    #[serde(default, skip_serializing_if = "Params::is_empty")]
    pub params: Params,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<SpriteDef>,
}

impl SpriteDef {
    pub fn new(name: impl Into<String>, class: impl Into<String>) -> Self {
        SpriteDef {
            name: name.into(),
            class: Some(class.into()),
            params: Params::new(),
            image: None,
            children: Vec::new(),
        }
    }

    pub fn group(name: impl Into<String>, children: Vec<SpriteDef>) -> Self {
        SpriteDef {
            name: name.into(),
            class: None,
            params: Params::new(),
            image: None,
            children,
        }
    }

    pub fn with_param(mut self, key: &str, value: Value) -> Self {
        self.params.insert(key, value);
        self
    }

    pub fn is_group(&self) -> bool {
        self.class.is_none()
    }

    /// Preorder traversal of this node and all descendants.
    pub fn walk<'a>(&'a self, out: &mut Vec<&'a SpriteDef>) {
        out.push(self);
        for child in &self.children {
            child.walk(out);
        }
    }

    /// Copy of this node without its subtree.
    pub fn detached(&self) -> SpriteDef {
        SpriteDef {
            children: Vec::new(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionDef {
    pub actor: String,
    pub other: String,
    pub effect: String,
    #[serde(default, skip_serializing_if = "Params::is_empty")]
    pub params: Params,
}

impl InteractionDef {
    pub fn new(actor: impl Into<String>, other: impl Into<String>, effect: impl Into<String>) -> Self {
        InteractionDef {
            actor: actor.into(),
            other: other.into(),
            effect: effect.into(),
            params: Params::new(),
        }
    }
}

/// Level symbol to sprite names.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LevelMapping {
    pub entries: BTreeMap<char, Vec<String>>,
}

impl LevelMapping {
    pub fn get(&self, symbol: char) -> Option<&[String]> {
        self.entries.get(&symbol).map(Vec::as_slice)
    }

    pub fn contains(&self, symbol: char) -> bool {
        self.entries.contains_key(&symbol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminationDef {
    pub class: String,
    #[serde(default, skip_serializing_if = "Params::is_empty")]
    pub params: Params,
    pub wins: bool,
}

/// A rectangular grid of level symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelGrid {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<Vec<char>>,
}

impl LevelGrid {
    pub fn blank(rows: usize, cols: usize) -> Self {
        LevelGrid {
            rows,
            cols,
            cells: vec![vec![BLANK_CELL; cols]; rows],
        }
    }

    pub fn get(&self, row: usize, col: usize) -> Option<char> {
        self.cells.get(row).and_then(|r| r.get(col)).copied()
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        row < self.rows && col < self.cols
    }

    /// Row-major iteration over `(row, col, symbol)`.
    pub fn iter_cells(&self) -> impl Iterator<Item = (usize, usize, char)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().enumerate().map(move |(c, &ch)| (r, c, ch)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameDescription {
    pub id: String,
    /// Parameters on the `BasicGame` header line.
    #[serde(default, skip_serializing_if = "Params::is_empty")]
    pub params: Params,
    pub sprites: Vec<SpriteDef>,
    pub interactions: Vec<InteractionDef>,
    pub mapping: LevelMapping,
    pub terminations: Vec<TerminationDef>,
    #[serde(default)]
    pub levels: Vec<LevelGrid>,
}

impl GameDescription {
    pub fn empty(id: impl Into<String>) -> Self {
        GameDescription {
            id: id.into(),
            params: Params::new(),
            sprites: Vec::new(),
            interactions: Vec::new(),
            mapping: LevelMapping::default(),
            terminations: Vec::new(),
            levels: Vec::new(),
        }
    }

    /// Every node of the sprite tree in preorder.
    pub fn sprite_nodes(&self) -> Vec<&SpriteDef> {
        let mut out = Vec::new();
        for root in &self.sprites {
            root.walk(&mut out);
        }
        out
    }

    /// Nodes that carry a behavior class, in preorder.
    pub fn classed_sprites(&self) -> Vec<&SpriteDef> {
        self.sprite_nodes().into_iter().filter(|s| !s.is_group()).collect()
    }

    pub fn find_sprite(&self, name: &str) -> Option<&SpriteDef> {
        fn find<'a>(nodes: &'a [SpriteDef], name: &str) -> Option<&'a SpriteDef> {
            nodes.iter().find_map(|n| {
                if n.name == name {
                    Some(n)
                } else {
                    find(&n.children, name)
                }
            })
        }
        find(&self.sprites, name)
    }

    pub fn has_sprite(&self, name: &str) -> bool {
        self.find_sprite(name).is_some()
    }

    pub fn sprite_names(&self) -> BTreeSet<&str> {
        self.sprite_nodes().into_iter().map(|s| s.name.as_str()).collect()
    }

    /// The classed sprites a name stands for: the node itself when it has a
    /// class, plus every classed descendant. Empty for unknown names.
    pub fn resolve_classed(&self, name: &str) -> Vec<&SpriteDef> {
        let Some(node) = self.find_sprite(name) else {
            return Vec::new();
        };
        let mut all = Vec::new();
        node.walk(&mut all);
        all.into_iter().filter(|s| !s.is_group()).collect()
    }

    /// Behavior classes a name stands for (see [`Self::resolve_classed`]).
    pub fn classes_of(&self, name: &str) -> BTreeSet<&str> {
        self.resolve_classed(name)
            .into_iter()
            .filter_map(|s| s.class.as_deref())
            .collect()
    }

    pub fn sprite_classes(&self) -> BTreeSet<&str> {
        self.classed_sprites()
            .into_iter()
            .filter_map(|s| s.class.as_deref())
            .collect()
    }

    /// Sprite names placed on a level cell. Blank and unmapped cells hold nothing.
    pub fn cell_sprites(&self, level: &LevelGrid, row: usize, col: usize) -> &[String] {
        match level.get(row, col) {
            Some(BLANK_CELL) | None => &[],
            Some(ch) => self.mapping.get(ch).unwrap_or(&[]),
        }
    }

    /// Checks every structural invariant of a game.
    pub fn validate(&self) -> Result<(), VgdlError> {
        let mut seen = BTreeSet::new();
        for node in self.sprite_nodes() {
            if !is_identifier(&node.name) {
                return Err(VgdlError::InvalidName {
                    name: node.name.clone(),
                    at: At::none(),
                });
            }
            if !seen.insert(node.name.as_str()) {
                return Err(VgdlError::DuplicateSprite {
                    name: node.name.clone(),
                    at: At::none(),
                });
            }
            if node.is_group() {
                if node.children.is_empty() {
                    return Err(VgdlError::EmptyGroup {
                        name: node.name.clone(),
                        at: At::none(),
                    });
                }
                if !node.params.is_empty() || node.image.is_some() {
                    return Err(VgdlError::GroupWithParams {
                        name: node.name.clone(),
                        at: At::none(),
                    });
                }
            }
        }
        for inter in &self.interactions {
            for end in [&inter.actor, &inter.other] {
                if end != WALL_TOKEN && !seen.contains(end.as_str()) {
                    return Err(VgdlError::UnresolvedSprite {
                        name: end.clone(),
                        context: "InteractionSet",
                        at: At::none(),
                    });
                }
            }
        }
        for (&symbol, names) in &self.mapping.entries {
            if symbol == BLANK_CELL || symbol.is_whitespace() {
                return Err(VgdlError::ReservedSymbol { symbol, at: At::none() });
            }
            for name in names {
                if !seen.contains(name.as_str()) {
                    return Err(VgdlError::UnresolvedSprite {
                        name: name.clone(),
                        context: "LevelMapping",
                        at: At::none(),
                    });
                }
            }
        }
        for level in &self.levels {
            level::check_grid(level, &self.mapping)?;
        }
        Ok(())
    }
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
