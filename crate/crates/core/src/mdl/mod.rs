//! Two-part MDL machinery and the semantic language.
//!
//! A model's complexity `K` is the bit length of its canonical serialization,
//! and its loss on a list of (context, symbol) pairs is the cross-entropy in
//! bits. On top of those two numbers sit the language complexity
//! `min loss + K`, the structure function `min { loss : K <= t }` and the
//! Lagrangian family `min loss + lambda * K`.

mod complexity;
mod language;
mod model;
mod repr;

use thiserror::Error;

pub use complexity::{
    cross_entropy_loss, lagrangian_complexity, language_complexity, legendre_consistency,
    legendre_consistent_with, structure_function, structure_function_report, ComplexityReport,
    StructureCurve,
};
pub use language::{ContentElement, SemanticLanguage};
pub use model::{
    pairs_from_symbols, ConditionalModel, ModelFamily, Pair, SuffixTableModel, UniformModel,
    HEADER_BITS, MAX_FAMILY_SIZE, WEIGHT_BITS,
};
pub use repr::{variable_id, MechanismGraph, MechanismNode, ReprId, Representation, MAX_NODES};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MdlError {
    #[error("model family is empty")]
    EmptyFamily,
    #[error("model family has {0} members, above the limit of {MAX_FAMILY_SIZE}")]
    FamilyTooLarge(usize),
    #[error("model id {0:?} appears twice in the family")]
    DuplicateModelId(String),
    #[error("model {model:?} assigns zero probability to pair {index}")]
    ZeroProbabilityPair { model: String, index: usize },
    #[error("no model in the family gives every pair positive probability")]
    NoFeasibleModel,
    #[error("no feasible model fits within a budget of {0} bits")]
    BudgetInfeasible(f64),
    #[error("lambda must be finite and nonnegative, got {0}")]
    InvalidLambda(f64),
    #[error("malformed representation bits: {0}")]
    MalformedBits(String),
    #[error("representation is not canonical: {0}")]
    NonCanonical(String),
    #[error("representation id {0} is already used by another entry")]
    DuplicateReprId(u16),
    #[error("language file line {line}: {message}")]
    LanguageFormat { line: usize, message: String },
}
