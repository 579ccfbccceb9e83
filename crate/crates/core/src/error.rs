use thiserror::Error;

use crate::qarith::HalfInt;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid root-of-unity order {0}: need k >= 2")]
    InvalidOrder(i64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot parse half-integer from {0:?}")]
    ParseHalfInt(String),

    #[error("operator spaces differ: {left} vs {right}")]
    SpaceMismatch { left: String, right: String },

    #[error("operator leaks out of the n1 + n2 = {subspace} subspace (weight {weight:e})")]
    SubspaceLeakage { subspace: usize, weight: f64 },

    #[error("j = 0 is the excluded k -> infinity limit")]
    UnsupportedLimit,

    #[error("alpha index {s} out of range 0..={max} for j = {j}")]
    AlphaIndex { j: HalfInt, s: i64, max: i64 },

    #[error("degenerate q-factorial [{n}]_q! at order {k}")]
    DegenerateFactorial { n: u32, k: u32 },

    #[error("expected {expected} tensor components, got {got}")]
    ComponentCount { expected: usize, got: usize },

    #[error("no admissible index: every f_r symbol vanishes, reduced element undetermined")]
    UndeterminedReducedElement,

    #[error("coupling table conflict: key {key} stored {stored:e}, offered {offered:e}")]
    CacheConflict { key: String, stored: f64, offered: f64 },

    #[error("malformed table record at line {line}: {reason}")]
    TableFormat { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
