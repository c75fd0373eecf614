use std::fmt;

use thiserror::Error;

/// Optional source line attached to semantic errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct At(pub Option<usize>);

impl At {
    pub fn none() -> Self {
        At(None)
    }

    pub fn line(line: usize) -> Self {
        At(Some(line))
    }
}

impl fmt::Display for At {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(line) => write!(f, " (line {line})"),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VgdlError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("inconsistent indentation at line {line}: {message}")]
    Indentation { line: usize, message: String },
    #[error("sprite `{name}` is declared more than once{at}")]
    DuplicateSprite { name: String, at: At },
    #[error("parameter `{key}` is given more than once{at}")]
    DuplicateParam { key: String, at: At },
    #[error("`{name}` is not a valid sprite name{at}")]
    InvalidName { name: String, at: At },
    #[error("sprite `{name}` has neither a class nor children{at}")]
    EmptyGroup { name: String, at: At },
    #[error("grouping node `{name}` cannot carry parameters{at}")]
    GroupWithParams { name: String, at: At },
    #[error("{context} refers to undeclared sprite `{name}`{at}")]
    UnresolvedSprite {
        name: String,
        context: &'static str,
        at: At,
    },
    #[error("symbol `{symbol}` is reserved and cannot be mapped{at}")]
    ReservedSymbol { symbol: char, at: At },
    #[error("level is empty")]
    EmptyLevel,
    #[error("level row {row} has {found} cells, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("level symbol `{symbol}` at row {row}, column {col} has no mapping entry")]
    UnmappedSymbol { symbol: char, row: usize, col: usize },
    #[error("level dimensions {rows}x{cols} disagree with its cells")]
    GridShape { rows: usize, cols: usize },
}

impl VgdlError {
    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            VgdlError::Syntax { .. } => "syntax_error",
            VgdlError::Indentation { .. } => "inconsistent_indentation",
            VgdlError::DuplicateSprite { .. } => "duplicate_sprite",
            VgdlError::DuplicateParam { .. } => "duplicate_param",
            VgdlError::InvalidName { .. } => "invalid_name",
            VgdlError::EmptyGroup { .. } => "empty_group",
            VgdlError::GroupWithParams { .. } => "group_with_params",
            VgdlError::UnresolvedSprite { .. } => "unresolved_sprite",
            VgdlError::ReservedSymbol { .. } => "reserved_symbol",
            VgdlError::EmptyLevel => "empty_level",
            VgdlError::RaggedRows { .. } => "ragged_rows",
            VgdlError::UnmappedSymbol { .. } => "unmapped_symbol",
            VgdlError::GridShape { .. } => "grid_shape",
        }
    }
}
