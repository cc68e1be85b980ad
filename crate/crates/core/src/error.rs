use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("unknown value `{value}` for variable `{var}`")]
    UnknownValue { var: String, value: String },

    #[error("scope mismatch: {0}")]
    ScopeMismatch(String),

    #[error("invalid valuation: {0}")]
    InvalidValuation(String),

    #[error("scope with {configs} configurations exceeds the dense limit of {limit}")]
    DenseLimit { configs: usize, limit: usize },

    #[error("not decombinable: {0}")]
    NotDecombinable(String),

    #[error("total conflict: all mass lies on the empty set")]
    TotalConflict,

    #[error("invalid hypergraph: {0}")]
    InvalidHypergraph(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("generator gave up after {attempts} attempts (seed {seed})")]
    RetryExhausted { seed: u64, attempts: usize },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by arithmetic on otherwise well-formed input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::DenseLimit { .. }
                | Error::NotDecombinable(_)
                | Error::TotalConflict
                | Error::SizeLimit(_)
                | Error::Numeric(_)
                | Error::RetryExhausted { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
