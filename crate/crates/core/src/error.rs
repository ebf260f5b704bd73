use std::fmt;

use crate::model::Dialect;

/// Location of a parse problem, 1-based line and column.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub col: usize,
    pub len: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub span: Span,
    pub message: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.span.line, self.span.col, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(" or "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("axiom `{axiom}` is not admitted by dialect {dialect}")]
    Dialect { axiom: String, dialect: Dialect },
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("invalid database: {0}")]
    InvalidDatabase(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("database is inconsistent with the ontology")]
    Inconsistent,
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
    #[error("budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
