// SPDX-License-Identifier: Apache-2.0

//! Parsers for the three textual inputs: models, marks and scenarios.
//!
//! All three share one tokenizer. Parsing stops at the first syntax error,
//! which carries the location of the offending token.

mod lexer;
mod parser;
pub mod pretty;

use std::fmt;

use crate::ir::{ElementPath, Model};
use crate::partition::MarkSet;
use crate::scenario::Scenario;

pub use lexer::{tokenize, Tok, Token};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SourceLoc {
    pub file: String,
    /// 1-based.
    pub line: u32,
    /// 1-based, counted in characters.
    pub column: u32,
}

impl fmt::Display for SourceLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{loc}: expected {expected}, found {found}")]
pub struct ParseError {
    pub loc: SourceLoc,
    pub expected: String,
    pub found: String,
}

/// Failure to read a marks file.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MarksError {
    #[error(transparent)]
    Syntax(#[from] ParseError),
    #[error("{loc}: E_DUP_MARK mark `{key}` is already placed on `{path}`")]
    DuplicateMark {
        loc: SourceLoc,
        key: String,
        path: ElementPath,
    },
}

impl MarksError {
    pub fn loc(&self) -> &SourceLoc {
        match self {
            MarksError::Syntax(e) => &e.loc,
            MarksError::DuplicateMark { loc, .. } => loc,
        }
    }
}

/// Parses model source. `file` only labels locations.
pub fn parse_model(file: &str, text: &str) -> Result<Model, ParseError> {
    parser::Parser::new(file, text)?.model()
}

pub fn parse_marks(file: &str, text: &str) -> Result<MarkSet, MarksError> {
    parser::Parser::new(file, text)?.marks()
}

pub fn parse_scenario(file: &str, text: &str) -> Result<Scenario, ParseError> {
    parser::Parser::new(file, text)?.scenario()
}
