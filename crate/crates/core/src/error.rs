use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("division by a non-monomial in exact mode: {0}")]
    NonMonomialDivision(String),
    #[error("the symbol pi is not representable in this scalar mode")]
    PiUnavailable,
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operator O_{0} is required but was not supplied")]
    MissingOperator(usize),
    #[error("invalid jets: {}", .0.join(", "))]
    InvalidJets(Vec<String>),
    #[error("operation requires Kahler jets")]
    NotKahler,
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("pole inside the contour at {0}")]
    PoleInsideContour(String),
    #[error("pole order {found} at zero exceeds the bound {bound} (r = {r})")]
    PoleOrder { r: usize, found: usize, bound: usize },
    #[error("degree bound violated: degree {degree} > {bound}")]
    DegreeBound { degree: usize, bound: usize },
    #[error("inconsistent linear constraints: {0}")]
    Inconsistent(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
