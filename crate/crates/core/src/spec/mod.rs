//! Model-specification language.
//!
//! ```text
//! model   := term ("+" term)*
//! term    := feature modifier? "(" component ("," binding)* ")"
//! modifier:= "$" | "@"
//! binding := name "=" (number | "?")
//! ```
//!
//! `$` fits one coefficient per component level, `@` (intercepts only) fits
//! shrunken per-level intercepts, and `?` leaves a nonlinear parameter free
//! for the outer optimizer. Components `Student`, `KC` and `Item` name the
//! canonical columns; any other identifier (or a double-quoted name) refers
//! to an extra dataset column.

mod ast;
mod parse;
pub mod presets;
pub(crate) mod validate;

pub use ast::{Binding, Component, FreeParam, ModelSpec, Scope, Term};
pub use parse::parse_model;
pub use validate::{validate, ValidatedSpec};

use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecError {
    #[error("model specification is empty")]
    Empty,
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown feature {name:?} at {pos}; known features: {catalog}")]
    UnknownFeature {
        pos: usize,
        name: String,
        catalog: String,
    },
    #[error("'@' at {pos} applies only to intercept, not {feature}")]
    RandomScope { pos: usize, feature: String },
    #[error("'$' at {pos} is not allowed on numeric covariates")]
    NumericScope { pos: usize },
    #[error(
        "term {term} ({feature}): missing parameters {missing:?}, unexpected parameters {extra:?}"
    )]
    Arity {
        term: usize,
        feature: String,
        missing: Vec<String>,
        extra: Vec<String>,
    },
    #[error("term {term} ({feature}): parameter {name} given twice")]
    DuplicateParam {
        term: usize,
        feature: String,
        name: String,
    },
    #[error("term {term} ({feature}): {name} = {value} outside its bounds")]
    OutOfBounds {
        term: usize,
        feature: String,
        name: String,
        value: f64,
    },
    #[error("term {term} repeats an earlier term ({feature} over {component})")]
    DuplicateTerm {
        term: usize,
        feature: String,
        component: String,
    },
    #[error("unknown preset {0:?}; presets are table2:1..12 and table3:1..6")]
    UnknownPreset(String),
}
