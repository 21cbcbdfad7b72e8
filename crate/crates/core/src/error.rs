use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("weight list is empty")]
    EmptyList,
    #[error("weight #{index} is not positive: {value}")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("weights sum to {sum}, expected 1 within 1e-9")]
    SumNotOne { sum: f64 },
    #[error("profile must have at least one box")]
    ZeroBoxes,
    #[error("functional returned a non-finite value {value} at x = {at}")]
    NonFiniteFunctional { at: f64, value: f64 },
    #[error("negative input {0}")]
    NegativeInput(f64),
    #[error("argument out of range: {0}")]
    Range(String),
    #[error("index {0} exceeds the supported maximum of 1024")]
    FactorialOverflow(usize),
    #[error("covariance requires distinct indices, got r = t = {0}")]
    EqualIndices(usize),
    #[error("largest weight {q1} exceeds the applicability limit {limit}")]
    Applicability { q1: f64, limit: f64 },
    #[error("enumeration would visit {count} compositions (limit {limit})")]
    TooLarge { count: f64, limit: f64 },
    #[error("cannot parse profile {origin}: {message}")]
    Parse { origin: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
}

pub(crate) fn range_err(msg: impl Into<String>) -> Error {
    Error::Range(msg.into())
}
