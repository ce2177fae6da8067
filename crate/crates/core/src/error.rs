use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A model or rate-function parameter violates its domain.
    #[error("invalid parameter `{field}`: {reason} (got {value})")]
    InvalidParameters {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// Every state is a fixed point (zero clamped error under the coupled model).
    #[error("fixed point undefined: error is zero so every state is fixed")]
    UndefinedFixedPoint,

    #[error("numeric overflow at trial {trial}: |x| = {x:e} exceeds {limit:e}")]
    NumericOverflow { trial: usize, x: f64, limit: f64 },

    #[error("non-contractive family at e = {e}: f = {f} with g = {g} has no fixed point")]
    NonContractiveFamily { e: f64, f: f64, g: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_finite(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameters {
            field,
            value,
            reason: "must be finite",
        })
    }
}
