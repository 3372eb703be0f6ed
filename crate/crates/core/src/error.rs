use thiserror::Error;

/// Errors produced anywhere in the engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("undeclared variable `{name}` at offset {offset}")]
    UndeclaredVariable { name: String, offset: usize },

    #[error("non-smooth primitive `{name}` at offset {offset} is not supported")]
    NonSmooth { name: String, offset: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("requested jet order {requested} exceeds the maximum {max}")]
    OrderTooHigh { requested: usize, max: usize },

    #[error("singular metric (condition number {condition:.3e})")]
    SingularMetric { condition: f64 },

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("point {0:?} left the chart")]
    LeftChart(Vec<f64>),

    #[error("fiber vector collapsed below the zero-section floor (|y| = {norm:.3e})")]
    ZeroSection { norm: f64 },

    #[error("zero velocity encountered at t = {0}")]
    ZeroVelocity(f64),

    #[error("bounding-radius scan failed: {0}")]
    BoundingScan(String),

    #[error("fiber acceptance rate {rate:.4} is below 1%")]
    LowAcceptance { rate: f64 },

    #[error("support violation: {0}")]
    SupportViolation(String),

    #[error("degenerate plane: the two vectors are linearly dependent")]
    DegeneratePlane,

    #[error("prerequisite not met: {0}")]
    Prerequisite(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// True for failures of the numerics (domain errors, singular metrics, ...)
    /// as opposed to malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::SingularMetric { .. }
                | Error::LeftChart(_)
                | Error::ZeroSection { .. }
                | Error::ZeroVelocity(_)
                | Error::BoundingScan(_)
                | Error::LowAcceptance { .. }
                | Error::DegeneratePlane
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
