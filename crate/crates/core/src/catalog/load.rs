use std::fs;
use std::path::{Path, PathBuf};

use super::{Catalog, CatalogError};
use crate::vgdl::{parse_game, parse_level, GameDescription};

/// Game description file inside a game directory.
pub const GAME_FILE: &str = "game.vgd";

fn read(path: &Path) -> Result<String, CatalogError> {
    fs::read_to_string(path).map_err(|source| CatalogError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn level_number(file_name: &str) -> Option<usize> {
    file_name
        .strip_prefix("level_")?
        .strip_suffix(".txt")?
        .parse()
        .ok()
}

/// Loads `<dir>/game.vgd` and its `level_<n>.txt` files (in numeric order).
/// The directory name becomes the game id.
pub fn load_game_dir(dir: &Path) -> Result<GameDescription, CatalogError> {
    let id = dir
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or(CatalogError::EmptyId)?
        .to_string();
    let game_path = dir.join(GAME_FILE);
    let mut game = parse_game(&read(&game_path)?).map_err(|source| CatalogError::Parse {
        path: game_path,
        source,
    })?;
    game.id = id;

    let entries = fs::read_dir(dir).map_err(|source| CatalogError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut levels: Vec<(usize, PathBuf)> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| CatalogError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        if let Some(n) = entry.file_name().to_str().and_then(level_number) {
            levels.push((n, entry.path()));
        }
    }
    levels.sort();
    for (_, path) in levels {
        let grid = parse_level(&read(&path)?, &game.mapping).map_err(|source| CatalogError::Parse {
            path: path.clone(),
            source,
        })?;
        game.levels.push(grid);
    }
    Ok(game)
}

/// Loads every subdirectory of `root` that contains a game file.
pub fn load_catalog_dir(root: &Path) -> Result<Catalog, CatalogError> {
    let entries = fs::read_dir(root).map_err(|source| CatalogError::Io {
        path: root.to_path_buf(),
        source,
    })?;
    let mut dirs = Vec::new();
    for entry in entries {
        let path = entry
            .map_err(|source| CatalogError::Io {
                path: root.to_path_buf(),
                source,
            })?
            .path();
        if path.join(GAME_FILE).is_file() {
            dirs.push(path);
        }
    }
    dirs.sort();
    let games = dirs
        .iter()
        .map(|d| load_game_dir(d))
        .collect::<Result<Vec<_>, _>>()?;
    Catalog::build(games)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_file_names() {
        assert_eq!(level_number("level_0.txt"), Some(0));
        assert_eq!(level_number("level_12.txt"), Some(12));
        assert_eq!(level_number("level_x.txt"), None);
        assert_eq!(level_number("game.vgd"), None);
    }
}
