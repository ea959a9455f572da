//! Exact computation in metric Diophantine approximation over the local
//! field F_q((X⁻¹)).
//!
//! Values are exact Laurent polynomials or truncated Laurent series with a
//! tracked leading degree, so every absolute value entering a predicate is
//! exact. Haar measures of definable sets are computed exactly by refining
//! ultrametric balls until the predicate is constant on each cell.

pub mod dioph;
pub mod ffield;
pub mod goodfn;
pub mod latdyn;
pub mod ubiq;
pub mod ultracalc;

use thiserror::Error;

pub use ffield::{AbsValue, Ball, FieldError, FieldSpec, Laurent, Measure, Poly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("difference quotient needs pairwise distinct points")]
    CoincidentPoints,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
