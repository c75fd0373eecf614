use super::{LevelGrid, LevelMapping, VgdlError, BLANK_CELL};

/// Parses a level file: one row per line, one symbol per cell.
///
/// Trailing blank lines and `\r` line endings are ignored.
pub fn parse_level(source: &str, mapping: &LevelMapping) -> Result<LevelGrid, VgdlError> {
    let mut lines: Vec<&str> = source.lines().map(|l| l.trim_end_matches('\r')).collect();
    while lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    if lines.is_empty() {
        return Err(VgdlError::EmptyLevel);
    }
    let cells: Vec<Vec<char>> = lines.iter().map(|l| l.chars().collect()).collect();
    let grid = LevelGrid {
        rows: cells.len(),
        cols: cells[0].len(),
        cells,
    };
    check_grid(&grid, mapping)?;
    Ok(grid)
}

pub(crate) fn check_grid(grid: &LevelGrid, mapping: &LevelMapping) -> Result<(), VgdlError> {
    if grid.rows == 0 || grid.cols == 0 {
        return Err(VgdlError::EmptyLevel);
    }
    if grid.cells.len() != grid.rows {
        return Err(VgdlError::GridShape {
            rows: grid.rows,
            cols: grid.cols,
        });
    }
    for (r, row) in grid.cells.iter().enumerate() {
        if row.len() != grid.cols {
            return Err(VgdlError::RaggedRows {
                row: r,
                expected: grid.cols,
                found: row.len(),
            });
        }
        for (c, &symbol) in row.iter().enumerate() {
            if symbol != BLANK_CELL && !mapping.contains(symbol) {
                return Err(VgdlError::UnmappedSymbol { symbol, row: r, col: c });
            }
        }
    }
    Ok(())
}

pub fn serialize_level(grid: &LevelGrid) -> String {
    let mut out = String::with_capacity(grid.rows * (grid.cols + 1));
    for row in &grid.cells {
        out.extend(row.iter());
        out.push('\n');
    }
    out
}
