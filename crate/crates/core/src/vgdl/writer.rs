use std::fmt::Write;

use super::{GameDescription, Params, SpriteDef, IMAGE_KEY, WIN_KEY};

const INDENT: &str = "  ";

fn push_params(out: &mut String, params: &Params) {
    for (k, v) in params.iter() {
        let _ = write!(out, " {k}={v}");
    }
}

fn push_sprite(out: &mut String, sprite: &SpriteDef, depth: usize) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
    out.push_str(&sprite.name);
    out.push_str(" >");
    if let Some(class) = &sprite.class {
        out.push(' ');
        out.push_str(class);
    }
    push_params(out, &sprite.params);
    if let Some(img) = &sprite.image {
        let _ = write!(out, " {IMAGE_KEY}={img}");
    }
    out.push('\n');
    for child in &sprite.children {
        push_sprite(out, child, depth + 1);
    }
}

/// Canonical text for a game: two-space indentation, all four sections
/// present, parameters in stored order. Levels are written separately with
/// [`super::serialize_level`].
pub fn serialize_game(game: &GameDescription) -> String {
    let mut out = String::from("BasicGame");
    push_params(&mut out, &game.params);
    out.push('\n');

    out.push_str(INDENT);
    out.push_str("SpriteSet\n");
    for sprite in &game.sprites {
        push_sprite(&mut out, sprite, 2);
    }

    out.push_str(INDENT);
    out.push_str("InteractionSet\n");
    for inter in &game.interactions {
        let _ = write!(out, "{INDENT}{INDENT}{} {} > {}", inter.actor, inter.other, inter.effect);
        push_params(&mut out, &inter.params);
        out.push('\n');
    }

    out.push_str(INDENT);
    out.push_str("LevelMapping\n");
    for (symbol, names) in &game.mapping.entries {
        let _ = writeln!(out, "{INDENT}{INDENT}{symbol} > {}", names.join(" "));
    }

    out.push_str(INDENT);
    out.push_str("TerminationSet\n");
    for term in &game.terminations {
        let _ = write!(out, "{INDENT}{INDENT}{}", term.class);
        push_params(&mut out, &term.params);
        let _ = writeln!(out, " {WIN_KEY}={}", term.wins);
    }
    out
}
