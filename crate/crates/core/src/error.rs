use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid objective: {0}")]
    InvalidObjective(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An iterative numerical procedure failed; `index` is the iteration,
    /// integration step or record at which it happened.
    #[error("numeric failure in {context} at index {index}: {detail}")]
    Numeric {
        context: &'static str,
        index: usize,
        detail: String,
    },

    /// The trigger bound is nonnegative at `t = 0`, so no positive stepsize
    /// can be certified. The caller has to shrink the displacement.
    #[error("trigger infeasible: bound at t = 0 is {constant:e} (a = {a:e})")]
    TriggerInfeasible { constant: f64, a: f64 },

    /// A run aborted; `index` is the iteration whose record could not be produced.
    #[error("{algorithm} failed at iteration {index}: {source}")]
    Run {
        algorithm: String,
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn numeric(context: &'static str, index: usize, detail: impl Into<String>) -> Self {
        Error::Numeric {
            context,
            index,
            detail: detail.into(),
        }
    }
}
