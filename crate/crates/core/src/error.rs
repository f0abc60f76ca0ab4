use num_rational::Rational64;
use thiserror::Error;

pub type Q = Rational64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("precision exhausted: need valuation information beyond {0}; increase --precision")]
    PrecisionExhausted(Q),
    #[error("inverse of a non-unit (valuation {0})")]
    NonUnitInverse(Q),
    #[error("{what} cap exceeded: requested {requested}, maximum {max}")]
    CapExceeded {
        what: &'static str,
        requested: i64,
        max: i64,
    },
    #[error("root finding stalled on a wildly ramified cluster; supply the factors or roots explicitly")]
    WildRootObstruction,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invariant failure: {0}")]
    InvariantFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
