//! Reading and writing problems in LP and MPS text formats.
//!
//! # LP dialect
//!
//! ```text
//! \Problem name: e1
//! Minimize
//!  o1: x1
//!  max o2: - x2 + [ x1 ^ 2 + 2 x1 * x2 ] / 2
//! Subject To
//!  c1: x1 + x2 >= 1
//! Bounds
//!  0 <= x1 <= 1
//!  x2 free
//! Generals
//!  x1
//! End
//! ```
//!
//! Every `name: expr` row of the objective section is a separate objective.
//! A leading `min`/`max` sets the sense of one row; the section header sets
//! the default. Quadratic monomials go inside brackets, optionally divided by
//! a constant. Variables mentioned only in objectives get bounds `[0, +inf)`.
//!
//! # MPS dialect
//!
//! Free-format MPS where every `N` row is an objective, in file order. An
//! `OBJSENSE` section (`MIN`/`MAX`) applies to all objectives. Integer
//! columns are bracketed by `INTORG`/`INTEND` markers and default to
//! `[0, +inf)`.

mod lp;
mod mps;
mod writer;

use std::fmt;

use thiserror::Error;

use crate::model::Problem;

pub use lp::parse_lp;
pub use mps::parse_mps;
pub use writer::{serialize_problem, WriteError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceLocation {
    pub file: String,
    /// 1-based.
    pub line: usize,
    /// 1-based, in characters.
    pub column: usize,
}

impl SourceLocation {
    pub fn new(line: usize, column: usize) -> Self {
        Self {
            file: "<input>".into(),
            line: line.max(1),
            column: column.max(1),
        }
    }
}

impl fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{location}: {message}")]
pub struct ParseError {
    pub location: SourceLocation,
    pub message: String,
}

impl ParseError {
    pub(crate) fn at(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            location: SourceLocation::new(line, column),
            message: message.into(),
        }
    }

    pub fn with_file(mut self, file: impl Into<String>) -> Self {
        self.location.file = file.into();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Lp,
    Mps,
}

impl Format {
    /// Guesses from a file extension (`.lp`, `.mps`, `.mop`).
    pub fn from_extension(path: &str) -> Option<Self> {
        let ext = path.rsplit_once('.')?.1.to_ascii_lowercase();
        match ext.as_str() {
            "lp" => Some(Format::Lp),
            "mps" | "mop" => Some(Format::Mps),
            _ => None,
        }
    }

    /// Guesses from content: MPS files open with a `NAME` or `ROWS` header.
    pub fn sniff(text: &str) -> Self {
        let first = text
            .lines()
            .map(str::trim_end)
            .find(|l| !l.trim().is_empty() && !l.starts_with('*'));
        match first.and_then(|l| l.split_whitespace().next()) {
            Some(w) if ["NAME", "ROWS", "OBJSENSE"].contains(&w.to_ascii_uppercase().as_str()) => Format::Mps,
            _ => Format::Lp,
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Lp => "lp",
            Format::Mps => "mps",
        })
    }
}

pub fn parse_str(text: &str, format: Format) -> Result<Problem, ParseError> {
    match format {
        Format::Lp => parse_lp(text),
        Format::Mps => parse_mps(text),
    }
}

/// Parses raw file contents. Invalid UTF-8 is reported at the offending byte.
/// `format = None` sniffs the content.
pub fn parse_bytes(bytes: &[u8], format: Option<Format>) -> Result<Problem, ParseError> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let valid = &bytes[..e.valid_up_to()];
        let line = valid.iter().filter(|&&b| b == b'\n').count() + 1;
        let line_start = valid.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
        let column = String::from_utf8_lossy(&valid[line_start..]).chars().count() + 1;
        ParseError::at(line, column, "invalid UTF-8")
    })?;
    parse_str(text, format.unwrap_or_else(|| Format::sniff(text)))
}

/// 1-based character column of byte offset `at` within `line`.
pub(crate) fn column_of(line: &str, at: usize) -> usize {
    line[..at].chars().count() + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_detection() {
        assert_eq!(Format::from_extension("a/b.LP"), Some(Format::Lp));
        assert_eq!(Format::from_extension("x.mps"), Some(Format::Mps));
        assert_eq!(Format::from_extension("x"), None);
        assert_eq!(Format::sniff("* c\nNAME foo\nROWS\n"), Format::Mps);
        assert_eq!(Format::sniff("Minimize\n o: x\n"), Format::Lp);
    }

    #[test]
    fn invalid_utf8_located() {
        let err = parse_bytes(b"Minimize\n o: x\xff\n", None).unwrap_err();
        assert_eq!((err.location.line, err.location.column), (2, 6));
    }

    #[test]
    fn error_display_has_location() {
        let e = ParseError::at(3, 7, "boom").with_file("f.lp");
        assert_eq!(e.to_string(), "f.lp:3:7: boom");
    }
}
