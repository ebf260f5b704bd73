//! Ontology-mediated queries over Horn description logics.

pub mod entailment;
pub mod chase;
pub mod cli;
pub mod dllitef;
pub mod error;
pub mod eval;
pub mod gen;
pub mod graphalg;
pub mod homtools;
pub mod model;
pub mod pebble;
pub mod surface;
pub mod treelike;

pub use error::{Error, ParseError, Result, Span};
