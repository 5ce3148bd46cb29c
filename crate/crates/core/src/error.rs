use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a documented precondition. `field` names the
    /// offending parameter.
    #[error("invalid {field}: {reason}")]
    Validation { field: &'static str, reason: String },

    /// Simultaneous iteration or polishing did not reach the residual target.
    #[error("root finding for order {order} did not converge after {iterations} iterations (worst residual {worst_residual:e})")]
    NonConvergence {
        order: usize,
        iterations: usize,
        worst_residual: f64,
        residuals: Vec<f64>,
    },

    #[error("grid of {requested} pixels exceeds the budget of {budget} pixels")]
    GridTooLarge { requested: usize, budget: usize },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field,
            reason: reason.into(),
        }
    }
}
