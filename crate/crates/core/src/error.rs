use thiserror::Error;

use crate::solver::SolveResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Value iteration hit `max_iterations` before the error bound was met.
    /// The last iterate is kept so callers can still look at it.
    #[error("value iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        partial: Box<SolveResult>,
    },

    #[error("grid has {cells} cells; limit for this operation is {limit}")]
    GridTooLarge { cells: usize, limit: usize },

    #[error("no single stationary policy attains the cell-wise maximum (gap {gap:e})")]
    NoUniformMaximizer { gap: f64 },

    #[error("unknown topic code `{code}` in ad `{ad_id}`")]
    UnknownTopic { code: String, ad_id: String },

    #[error("kappa undefined: chance agreement is 1")]
    UndefinedKappa,

    #[error("{0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
