use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OvlError {
    #[error("domain error: {what} = {value} ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("sample is empty")]
    EmptySample,

    #[error("cannot form a ratio from {first} and {second} estimates")]
    MethodMismatch { first: String, second: String },

    #[error("variance formulas require n2 >= 3, got n2 = {n2}")]
    DegenerateDesign { n2: usize },

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("formula is singular at R = {ratio}")]
    Singular { ratio: f64 },

    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing table cells: {}", .0.join(", "))]
    MissingCells(Vec<String>),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = OvlError> = std::result::Result<T, E>;

pub(crate) fn domain(what: &'static str, value: f64, expected: &'static str) -> OvlError {
    OvlError::Domain {
        what,
        value,
        expected,
    }
}
