use thiserror::Error;

use crate::halfint::HalfInt;

#[derive(Debug, Error)]
pub enum Error {
    #[error("projection {m} is out of range or has the wrong parity for j = {j}")]
    Projection { j: HalfInt, m: HalfInt },

    #[error("spin must be at least 1/2, got {0}")]
    Spin(HalfInt),

    #[error("multipole order {order} outside 1..={max}")]
    Order { order: i64, max: i64 },

    #[error("tensor index K = {k}, q = {q} out of range for S = {s}")]
    TensorIndex { s: HalfInt, k: i64, q: i64 },

    #[error("cannot parse half-integer from {0:?}")]
    ParseHalfInt(String),

    #[error("amplitude vector has length {got}, expected {expected}")]
    Length { expected: usize, got: usize },

    #[error("state vector is zero")]
    ZeroState,

    #[error("no tabulated minimal state for S = {0}")]
    NotTabulated(HalfInt),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
