//! Text formats: architecture documents (TOML), calibration records (CSV),
//! and sweep / comparison outputs (CSV).

use std::fmt;

use crate::bn::Finding;

mod arch_doc;
mod calibration_csv;
mod sweep_csv;

pub(crate) use arch_doc::cpt_block;
pub use arch_doc::{parse_architecture, parse_architecture_unchecked, serialize_architecture};
pub use calibration_csv::parse_calibration_csv;
pub use sweep_csv::{write_comparison_csv, write_sweep_csv};

/// 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl Location {
    pub const START: Location = Location { line: 1, column: 1 };

    pub(crate) fn from_offset(text: &str, offset: usize) -> Location {
        let offset = offset.min(text.len());
        let before = &text.as_bytes()[..offset];
        let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
        let line_start = before
            .iter()
            .rposition(|&b| b == b'\n')
            .map_or(0, |p| p + 1);
        let column = String::from_utf8_lossy(&before[line_start..])
            .chars()
            .count()
            + 1;
        Location { line, column }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// A semantic finding tied to the place in the document it came from.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Diagnostic {
    pub location: Location,
    #[serde(flatten)]
    pub finding: Finding,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("{location}: syntax error: {message}")]
    Syntax { location: Location, message: String },

    #[error("{location}: schema error: {message}")]
    Schema { location: Location, message: String },

    #[error("{}", render_semantic(.0))]
    Semantic(Vec<Diagnostic>),

    /// CSV problem at a 1-based row (the header is row 1) and named column.
    #[error("row {row}, column {column}: {message}")]
    Csv {
        row: usize,
        column: String,
        message: String,
    },
}

impl ParseError {
    pub fn kind(&self) -> &'static str {
        match self {
            ParseError::Syntax { .. } => "syntax",
            ParseError::Schema { .. } => "schema",
            ParseError::Semantic(_) => "semantic",
            ParseError::Csv { .. } => "csv",
        }
    }

    /// Location of the first problem.
    pub fn location(&self) -> Location {
        match self {
            ParseError::Syntax { location, .. } | ParseError::Schema { location, .. } => *location,
            ParseError::Semantic(d) => d.first().map_or(Location::START, |d| d.location),
            ParseError::Csv { row, .. } => Location {
                line: *row,
                column: 1,
            },
        }
    }
}

fn render_semantic(diagnostics: &[Diagnostic]) -> String {
    diagnostics
        .iter()
        .map(|d| format!("{}: {}", d.location, d.finding))
        .collect::<Vec<_>>()
        .join("\n")
}
