use std::collections::BTreeMap;

use super::{
    is_identifier, At, GameDescription, InteractionDef, Params, SpriteDef,
    TerminationDef, Value, VgdlError, BLANK_CELL, IMAGE_KEY, WALL_TOKEN, WIN_KEY,
};

const ROOT: &str = "BasicGame";

#[derive(Debug, Clone, Copy)]
struct Line<'a> {
    number: usize,
    indent: usize,
    text: &'a str,
}

#[derive(Debug)]
struct Block<'a> {
    line: Line<'a>,
    children: Vec<Block<'a>>,
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    column: usize,
    text: &'a str,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> VgdlError {
    VgdlError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// `#` starts a comment when it begins a token.
fn strip_comment(s: &str) -> &str {
    let mut prev_ws = true;
    for (i, c) in s.char_indices() {
        if c == '#' && prev_ws {
            return &s[..i];
        }
        prev_ws = c.is_whitespace();
    }
    s
}

fn split_lines(source: &str) -> Result<Vec<Line<'_>>, VgdlError> {
    let mut out = Vec::new();
    for (i, raw) in source.lines().enumerate() {
        let number = i + 1;
        let content = strip_comment(raw.trim_end_matches('\r')).trim_end();
        if content.trim_start().is_empty() {
            continue;
        }
        let lead = &content[..content.len() - content.trim_start().len()];
        if let Some(pos) = lead.find(|c: char| c != ' ') {
            return Err(VgdlError::Indentation {
                line: number,
                message: format!(
                    "only spaces may indent a line, found {:?} at column {}",
                    lead[pos..].chars().next().unwrap_or(' '),
                    pos + 1
                ),
            });
        }
        out.push(Line {
            number,
            indent: lead.len(),
            text: content.trim_start(),
        });
    }
    Ok(out)
}

/// Nests lines by indentation. The indent of the first indented line fixes
/// the per-level width; every line must sit at a whole multiple of it and at
/// most one level deeper than its predecessor.
fn build_blocks(lines: Vec<Line<'_>>) -> Result<Vec<Block<'_>>, VgdlError> {
    let mut unit: Option<usize> = None;
    let mut stack: Vec<Block> = Vec::new();
    let mut roots = Vec::new();

    fn close<'a>(stack: &mut Vec<Block<'a>>, roots: &mut Vec<Block<'a>>) {
        let block = stack.pop().expect("non-empty stack");
        match stack.last_mut() {
            Some(parent) => parent.children.push(block),
            None => roots.push(block),
        }
    }

    for line in lines {
        let depth = if line.indent == 0 {
            0
        } else {
            let width = *unit.get_or_insert(line.indent);
            if line.indent % width != 0 {
                return Err(VgdlError::Indentation {
                    line: line.number,
                    message: format!(
                        "{} spaces is not a multiple of the {width}-space indentation unit",
                        line.indent
                    ),
                });
            }
            line.indent / width
        };
        if depth > stack.len() {
            return Err(VgdlError::Indentation {
                line: line.number,
                message: "line is indented deeper than one level below its parent".into(),
            });
        }
        while stack.len() > depth {
            close(&mut stack, &mut roots);
        }
        stack.push(Block {
            line,
            children: Vec::new(),
        });
    }
    while !stack.is_empty() {
        close(&mut stack, &mut roots);
    }
    Ok(roots)
}

fn tokenize(s: &str, base_column: usize) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in s.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(st)) => {
                out.push(Token {
                    column: base_column + st,
                    text: &s[st..i],
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(st) = start {
        out.push(Token {
            column: base_column + st,
            text: &s[st..],
        });
    }
    out
}

/// Splits a line at its first `>` into the tokens before and after it.
fn split_arrow<'a>(line: &Line<'a>) -> Result<(Vec<Token<'a>>, Vec<Token<'a>>), VgdlError> {
    let base = line.indent + 1;
    let Some(pos) = line.text.find('>') else {
        return Err(syntax(line.number, base, "expected `>`"));
    };
    let left = tokenize(&line.text[..pos], base);
    let right = tokenize(&line.text[pos + 1..], base + pos + 1);
    if left.is_empty() {
        return Err(syntax(line.number, base, "missing name before `>`"));
    }
    Ok((left, right))
}

fn parse_params(tokens: &[Token<'_>], line: usize) -> Result<Params, VgdlError> {
    let mut params = Params::new();
    for tok in tokens {
        let Some((key, value)) = tok.text.split_once('=') else {
            return Err(syntax(
                line,
                tok.column,
                format!("expected `key=value`, found `{}`", tok.text),
            ));
        };
        if !is_identifier(key) {
            return Err(syntax(line, tok.column, format!("invalid parameter name `{key}`")));
        }
        if value.is_empty() {
            return Err(syntax(
                line,
                tok.column + key.len() + 1,
                format!("parameter `{key}` has no value"),
            ));
        }
        if params.insert(key, Value::infer(value)).is_some() {
            return Err(VgdlError::DuplicateParam {
                key: key.to_string(),
                at: At::line(line),
            });
        }
    }
    Ok(params)
}

fn expect_identifier(tok: &Token<'_>, line: usize, what: &str) -> Result<String, VgdlError> {
    if is_identifier(tok.text) {
        Ok(tok.text.to_string())
    } else {
        Err(syntax(line, tok.column, format!("invalid {what} `{}`", tok.text)))
    }
}

struct GameBuilder {
    game: GameDescription,
    declared: BTreeMap<String, usize>,
    interaction_lines: Vec<usize>,
    mapping_lines: BTreeMap<char, usize>,
}

impl GameBuilder {
    fn sprite(&mut self, block: &Block<'_>) -> Result<SpriteDef, VgdlError> {
        let line = block.line;
        let (left, right) = split_arrow(&line)?;
        if left.len() != 1 {
            return Err(syntax(line.number, left[1].column, "a sprite line declares exactly one name"));
        }
        let name = expect_identifier(&left[0], line.number, "sprite name")?;
        if self.declared.contains_key(&name) {
            return Err(VgdlError::DuplicateSprite {
                name,
                at: At::line(line.number),
            });
        }
        self.declared.insert(name.clone(), line.number);

        let (class, rest) = match right.first() {
            Some(tok) if !tok.text.contains('=') => {
                (Some(expect_identifier(tok, line.number, "class name")?), &right[1..])
            }
            _ => (None, &right[..]),
        };
        let mut params = parse_params(rest, line.number)?;
        let image = match params.remove(IMAGE_KEY) {
            Some(v) => Some(v.to_string()),
            None => None,
        };
        if class.is_none() && (!params.is_empty() || image.is_some()) {
            return Err(VgdlError::GroupWithParams {
                name,
                at: At::line(line.number),
            });
        }
        let children = block
            .children
            .iter()
            .map(|c| self.sprite(c))
            .collect::<Result<Vec<_>, _>>()?;
        if class.is_none() && children.is_empty() {
            return Err(VgdlError::EmptyGroup {
                name,
                at: At::line(line.number),
            });
        }
        Ok(SpriteDef {
            name,
            class,
            params,
            image,
            children,
        })
    }

    fn interaction(&mut self, line: Line<'_>) -> Result<(), VgdlError> {
        let (left, right) = split_arrow(&line)?;
        if left.len() < 2 {
            return Err(syntax(
                line.number,
                left[0].column,
                "an interaction needs two sprite types before `>`",
            ));
        }
        let Some(effect_tok) = right.first() else {
            return Err(syntax(line.number, line.indent + line.text.len() + 1, "missing effect"));
        };
        let effect = expect_identifier(effect_tok, line.number, "effect name")?;
        let params = parse_params(&right[1..], line.number)?;
        let actor = expect_identifier(&left[0], line.number, "sprite type")?;
        // `a b c > e` is shorthand for `a b > e` and `a c > e`.
        for other in &left[1..] {
            let other = expect_identifier(other, line.number, "sprite type")?;
            self.game.interactions.push(InteractionDef {
                actor: actor.clone(),
                other,
                effect: effect.clone(),
                params: params.clone(),
            });
            self.interaction_lines.push(line.number);
        }
        Ok(())
    }

    fn mapping(&mut self, line: Line<'_>) -> Result<(), VgdlError> {
        let (left, right) = split_arrow(&line)?;
        let mut chars = left[0].text.chars();
        let (Some(symbol), None, 1) = (chars.next(), chars.next(), left.len()) else {
            return Err(syntax(line.number, left[0].column, "a level symbol is a single character"));
        };
        if symbol == BLANK_CELL {
            return Err(VgdlError::ReservedSymbol {
                symbol,
                at: At::line(line.number),
            });
        }
        if right.is_empty() {
            return Err(syntax(line.number, left[0].column, "mapping lists no sprites"));
        }
        if self.game.mapping.contains(symbol) {
            return Err(syntax(
                line.number,
                left[0].column,
                format!("symbol `{symbol}` is mapped more than once"),
            ));
        }
        let names = right
            .iter()
            .map(|t| expect_identifier(t, line.number, "sprite name"))
            .collect::<Result<Vec<_>, _>>()?;
        self.game.mapping.entries.insert(symbol, names);
        self.mapping_lines.insert(symbol, line.number);
        Ok(())
    }

    fn termination(&mut self, line: Line<'_>) -> Result<(), VgdlError> {
        let tokens = tokenize(line.text, line.indent + 1);
        let class = expect_identifier(&tokens[0], line.number, "termination class")?;
        let mut params = parse_params(&tokens[1..], line.number)?;
        let wins = match params.remove(WIN_KEY) {
            Some(Value::Bool(b)) => b,
            Some(other) => {
                return Err(syntax(
                    line.number,
                    line.indent + 1,
                    format!("`win` must be true or false, found `{other}`"),
                ))
            }
            None => return Err(syntax(line.number, line.indent + 1, "termination is missing `win=`")),
        };
        self.game.terminations.push(TerminationDef { class, params, wins });
        Ok(())
    }

    fn resolve(&self) -> Result<(), VgdlError> {
        for (inter, &line) in self.game.interactions.iter().zip(&self.interaction_lines) {
            for end in [&inter.actor, &inter.other] {
                if end != WALL_TOKEN && !self.declared.contains_key(end) {
                    return Err(VgdlError::UnresolvedSprite {
                        name: end.clone(),
                        context: "InteractionSet",
                        at: At::line(line),
                    });
                }
            }
        }
        for (symbol, names) in &self.game.mapping.entries {
            for name in names {
                if !self.declared.contains_key(name) {
                    return Err(VgdlError::UnresolvedSprite {
                        name: name.clone(),
                        context: "LevelMapping",
                        at: At::line(self.mapping_lines[symbol]),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Parses a game description. The returned game has an empty id and no
/// levels; callers attach both.
pub fn parse_game(source: &str) -> Result<GameDescription, VgdlError> {
    let roots = build_blocks(split_lines(source)?)?;
    let root = match roots.as_slice() {
        [root] => root,
        [] => return Err(syntax(1, 1, "empty game description")),
        [_, second, ..] => {
            return Err(syntax(second.line.number, 1, "only one top-level block is allowed"))
        }
    };
    let header = tokenize(root.line.text, 1);
    if header[0].text != ROOT {
        return Err(syntax(
            root.line.number,
            1,
            format!("expected `{ROOT}`, found `{}`", header[0].text),
        ));
    }

    let mut builder = GameBuilder {
        game: GameDescription::empty(""),
        declared: BTreeMap::new(),
        interaction_lines: Vec::new(),
        mapping_lines: BTreeMap::new(),
    };
    builder.game.params = parse_params(&header[1..], root.line.number)?;

    let mut seen_sections: Vec<&str> = Vec::new();
    for section in &root.children {
        let line = section.line;
        let name = line.text;
        if seen_sections.contains(&name) {
            return Err(syntax(line.number, line.indent + 1, format!("section `{name}` appears twice")));
        }
        match name {
            "SpriteSet" => {
                for child in &section.children {
                    let sprite = builder.sprite(child)?;
                    builder.game.sprites.push(sprite);
                }
            }
            "InteractionSet" | "LevelMapping" | "TerminationSet" => {
                for child in &section.children {
                    if let Some(nested) = child.children.first() {
                        return Err(VgdlError::Indentation {
                            line: nested.line.number,
                            message: format!("entries of `{name}` cannot have nested lines"),
                        });
                    }
                    match name {
                        "InteractionSet" => builder.interaction(child.line)?,
                        "LevelMapping" => builder.mapping(child.line)?,
                        _ => builder.termination(child.line)?,
                    }
                }
            }
            other => {
                return Err(syntax(line.number, line.indent + 1, format!("unknown section `{other}`")))
            }
        }
        seen_sections.push(name);
    }
    builder.resolve()?;
    builder.game.validate()?;
    Ok(builder.game)
}
