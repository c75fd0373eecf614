mod common;

use std::collections::BTreeSet;

use common::*;
use forge_core::mining::mine;
use forge_core::recommender::{
    chebyshev, recommend_interactions, recommend_placements, recommend_sprites, PlacementSource, RecommenderConfig,
};
use forge_core::scalar::Exact;
use forge_core::session::{DesignSession, KnowledgeBase, SessionConfig};
use forge_core::vgdl::{SpriteDef, Value};

fn set(v: &[&str]) -> BTreeSet<String> {
    v.iter().map(|s| s.to_string()).collect()
}

#[test]
fn fixtures_load_and_round_trip() {
    let catalog = fixture_catalog();
    let ids: Vec<&str> = catalog.games().map(|g| g.id.as_str()).collect();
    assert_eq!(ids, ["aliens", "bomber", "frogger", "hunter", "pacman", "zelda"]);
    for g in catalog.games() {
        assert!(!g.levels.is_empty(), "{} has no levels", g.id);
        round_trips(g).unwrap();
    }
    assert_eq!(catalog.sprite_baskets().len(), 6);
}

#[test]
fn expected_rules_are_mined() {
    let catalog = fixture_catalog();
    let (_, rules) = mine(&catalog.sprite_baskets(), Exact::new(1, 5), Exact::new(1, 2)).unwrap();
    let conf = |ante: &[&str], cons: &[&str]| {
        rules
            .iter()
            .find(|r| r.antecedent == ante && r.consequent == cons)
            .map(|r| r.confidence)
    };
    assert_eq!(conf(&["RandomNPC", "ShootAvatar"], &["Missile"]), Some(Exact::new(3, 4)));
    assert_eq!(conf(&["Immovable", "ShootAvatar"], &["Door"]), Some(Exact::new(3, 4)));
    assert_eq!(conf(&["RandomNPC", "ShootAvatar"], &["Immovable"]), Some(Exact::new(1, 1)));
}

#[test]
fn blending_the_aliens_avatar_brings_its_missile() {
    let catalog = fixture_catalog();
    let (_, rules) = mine(&catalog.sprite_baskets(), Exact::new(1, 5), Exact::new(1, 10)).unwrap();
    let recs = recommend_sprites(&set(&["RandomNPC", "Immovable"]), &rules, &catalog, false);
    let rec = recs
        .iter()
        .find(|r| r.donor_game == "aliens" && r.donor_sprite == "avatar")
        .expect("aliens avatar recommended");
    assert_eq!(rec.closure_preview, ["avatar", "sam"]);

    let kb = KnowledgeBase::new(catalog);
    let mut s = DesignSession::new(&kb, SessionConfig::default()).unwrap();
    s.add_sprite(&kb, SpriteDef::new("bug", "RandomNPC")).unwrap();
    s.add_sprite(&kb, SpriteDef::new("sam", "Immovable")).unwrap();
    let index = s
        .pending_sprites
        .iter()
        .position(|r| r.donor_game == "aliens" && r.donor_sprite == "avatar")
        .unwrap();
    s.accept_sprite(&kb, index).unwrap();

    // The local `sam` keeps its name; the donor's missile is renamed and the
    // avatar's reference follows it.
    let avatar = s.game.find_sprite("avatar").unwrap();
    let target = avatar.params.get("stype").and_then(Value::as_ident).unwrap().to_string();
    assert_ne!(target, "sam");
    assert_eq!(s.game.find_sprite(&target).unwrap().class.as_deref(), Some("Missile"));
    assert_eq!(s.game.find_sprite("sam").unwrap().class.as_deref(), Some("Immovable"));
    assert_eq!(s.provenance.get(&target).map(String::as_str), Some("aliens"));
    round_trips(&s.game).unwrap();
}

#[test]
fn zelda_transform_is_recommended_with_its_target() {
    let catalog = fixture_catalog();
    let pm = catalog.pair_interaction_map();
    let mut session = forge_core::vgdl::GameDescription::empty("s");
    session.sprites.push(SpriteDef::new("hero", "ShootAvatar"));
    session.sprites.push(SpriteDef::new("key", "Resource"));
    let recs = recommend_interactions::<Exact>(&session, &catalog, &pm);
    let transform = recs
        .iter()
        .find(|r| r.effect == "transformTo")
        .expect("transform recommended");
    assert_eq!(transform.donor_game, "zelda");
    assert_eq!((transform.actor_class.as_str(), transform.other_class.as_str()), ("ShootAvatar", "Resource"));

    let kb = KnowledgeBase::new(catalog);
    let mut s = DesignSession::from_game(&kb, session, SessionConfig::default()).unwrap();
    let index = s.pending_interactions.iter().position(|r| r.effect == "transformTo").unwrap();
    s.accept_interaction(&kb, index).unwrap();
    let added = s.game.interactions.iter().find(|i| i.effect == "transformTo").unwrap();
    assert_eq!((added.actor.as_str(), added.other.as_str()), ("hero", "key"));
    let target = added.params.get("stype").and_then(Value::as_ident).unwrap();
    assert_eq!(s.game.find_sprite(target).unwrap().class.as_deref(), Some("ShootAvatar"));
    s.game.validate().unwrap();
}

#[test]
fn bomber_enemy_placements_keep_their_distance() {
    let catalog = fixture_catalog();
    let pm = catalog.pair_interaction_map();
    let bomber = catalog.game("bomber").unwrap().clone();
    let config = RecommenderConfig { k: 2, ..RecommenderConfig::default() };
    let cells = recommend_placements(
        &bomber,
        "RandomNPC",
        PlacementSource::Game("bomber"),
        &catalog,
        &pm,
        Exact::new(1, 5),
        &config,
    )
    .unwrap();
    assert!(!cells.is_empty());
    let level = &bomber.levels[0];
    let avatar = level.iter_cells().find(|&(_, _, ch)| ch == 'A').map(|(r, c, _)| (r, c)).unwrap();
    for p in &cells {
        assert!(level.contains(p.row, p.col));
        assert!(chebyshev((p.row, p.col), avatar) >= 2);
        assert!(p.support >= Exact::new(1, 5));
    }
    // Enemies kill the avatar, so suggestions lead with cells near the exit.
    let dists: Vec<usize> = cells.iter().filter_map(|p| p.resource_distance).collect();
    assert!(dists.windows(2).all(|w| w[0] <= w[1]));
}
