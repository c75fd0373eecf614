use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::vgdl::{GameDescription, Params, WALL_TOKEN};

/// Unordered pair of behavior classes, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClassPair(String, String);

impl ClassPair {
    pub fn new(a: impl Into<String>, b: impl Into<String>) -> Self {
        let (a, b) = (a.into(), b.into());
        if a <= b {
            ClassPair(a, b)
        } else {
            ClassPair(b, a)
        }
    }

    pub fn first(&self) -> &str {
        &self.0
    }

    pub fn second(&self) -> &str {
        &self.1
    }
}

/// An effect seen between two classes in one donor game. `actor` is the
/// class the effect is applied to; `other` is the class it collided with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEffect {
    pub actor: String,
    pub other: String,
    pub effect: String,
    #[serde(default, skip_serializing_if = "Params::is_empty")]
    pub params: Params,
    pub donor: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairMap {
    entries: BTreeMap<ClassPair, Vec<PairEffect>>,
}

impl PairMap {
    /// Resolves every interaction to class space (grouping endpoints expand
    /// to all classed descendants; the wall token keeps its own name).
    pub fn from_games<'a>(games: impl IntoIterator<Item = &'a GameDescription>) -> Self {
        let mut map = PairMap::default();
        for game in games {
            let classes = |name: &str| -> Vec<String> {
                if name == WALL_TOKEN {
                    vec![WALL_TOKEN.to_string()]
                } else {
                    game.classes_of(name).into_iter().map(str::to_string).collect()
                }
            };
            for inter in &game.interactions {
                for actor in classes(&inter.actor) {
                    for other in classes(&inter.other) {
                        map.insert(PairEffect {
                            actor: actor.clone(),
                            other,
                            effect: inter.effect.clone(),
                            params: inter.params.clone(),
                            donor: game.id.clone(),
                        });
                    }
                }
            }
        }
        map
    }

    fn insert(&mut self, entry: PairEffect) {
        let list = self
            .entries
            .entry(ClassPair::new(entry.actor.as_str(), entry.other.as_str()))
            .or_default();
        if !list.contains(&entry) {
            list.push(entry);
        }
    }

    /// Effects recorded for a pair, in either order.
    pub fn lookup(&self, a: &str, b: &str) -> &[PairEffect] {
        self.entries
            .get(&ClassPair::new(a, b))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ClassPair, &[PairEffect])> {
        self.entries.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
