//! The TMC catalog text format: tokenizer, parser, canonical serializer, and
//! multi-catalog merge.
//!
//! A document is a sequence of declarations (`source`, `threat`, `tree`,
//! `asset`, `embrace`, `assoc`, `incident`) holding `key: value;` pairs.
//! Parsing never panics; every failure carries a line and column. The
//! serializer emits one canonical form (LF, two-space indent, fixed block and
//! key order), so formatting a catalog twice is a fixed point.

mod lexer;
mod merge;
mod parser;
mod serializer;

pub use merge::{merge_catalogs, DuplicateCandidate, Merged, MergeError};
pub use parser::{parse_catalog, parse_catalog_with_warnings, ParseOutcome, UnknownKey};
pub use serializer::{serialize_catalog, SerializeError};

use thiserror::Error;

use crate::model::Id;

/// Why a document failed to parse.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: expected {expected}, found {found}")]
    Syntax {
        line: u32,
        column: u32,
        expected: String,
        found: String,
    },
    #[error(
        "duplicate {kind} id {id}: declared on line {first_line} and again on line {second_line}"
    )]
    DuplicateId {
        kind: &'static str,
        id: Id,
        first_line: u32,
        second_line: u32,
    },
}

impl ParseError {
    pub fn line(&self) -> u32 {
        match self {
            ParseError::Syntax { line, .. } => *line,
            ParseError::DuplicateId { second_line, .. } => *second_line,
        }
    }
}
