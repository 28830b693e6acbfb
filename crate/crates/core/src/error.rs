use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("alpha = {alpha} lies within the guard band |alpha - 1| < {guard}")]
    AlphaNearOne { alpha: f64, guard: f64 },

    #[error("T(alpha) is only defined for alpha > 0, got {alpha}")]
    TAlphaUndefined { alpha: f64 },

    #[error("argument {x} is outside the open unit interval")]
    OutOfDomain { x: f64 },

    #[error("point ({x}, {y}) is outside the admissible domain")]
    OutOfDomain2 { x: f64, y: f64 },

    #[error("x = {x} lies outside the tabulated hull [{lo}, {hi}]")]
    TabulatedExtrapolation { x: f64, lo: f64, hi: f64 },

    #[error("non-finite value in {context} at ({x}, {y})")]
    NonFiniteValue {
        context: &'static str,
        x: f64,
        y: f64,
    },

    #[error("the alpha = 0 case has no power-type constant c")]
    ZeroAlphaHasNoC,

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("degenerate basis for alpha = {alpha}: |alpha| must exceed 0.01")]
    DegenerateBasis { alpha: f64 },

    #[error("candidate {candidate} does not match the alpha = {alpha} case")]
    CaseMismatch { candidate: &'static str, alpha: f64 },

    #[error("slack sequence has {got} entries, {needed} required")]
    InsufficientSlackSequence { needed: usize, got: usize },

    #[error("invalid {field}: {message}")]
    Invalid {
        field: &'static str,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        Error::Invalid {
            field,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
