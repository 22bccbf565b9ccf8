use thiserror::Error;

/// Failures raised by the geometric routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    Dimension { op: &'static str, detail: String },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("tolerances must be strictly positive")]
    BadTolerance,

    #[error("subspace is not invariant (residual {residual:.3e})")]
    NotInvariant { residual: f64 },

    #[error("inner subspace not contained in outer (residual {residual:.3e})")]
    NotIncluded { residual: f64 },

    #[error("subspace is not output-nulling (residual {residual:.3e})")]
    NotOutputNulling { residual: f64 },

    #[error("subspace is not input-containing (residual {residual:.3e})")]
    NotInputContaining { residual: f64 },

    #[error("target spectrum has {got} values, {expected} are assignable")]
    TargetSize { expected: usize, got: usize },

    #[error("target spectrum is not closed under conjugation")]
    NotConjugateClosed,

    #[error("target spectrum cannot be split: {0}")]
    TargetSplit(String),

    #[error("no gain exists: {0}")]
    NoGain(String),

    #[error("no well-posed gain found after {tries} tries")]
    SearchExhausted { tries: usize },

    #[error("interconnection is ill-posed (|det| = {det:.3e})")]
    IllPosed { det: f64 },

    #[error("not a solution triple: {0}")]
    InvalidTriple(String),

    #[error("problem is not solvable: {0}")]
    Unsolvable(String),

    #[error("minimal fixed-pole set undefined: {0}")]
    Undefined(String),

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
