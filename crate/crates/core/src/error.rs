use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Invalid input: unknown paths or tags, bad angles, malformed circuits.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("states or unitaries built on different mode registries")]
    RegistryMismatch,

    /// A numerical invariant (norm, unitarity, trace) drifted past tolerance.
    #[error("numerical invariant violated: {0}")]
    Numerical(String),

    #[error("detection pattern has zero support (probability {probability:e})")]
    ZeroSupport { probability: f64 },

    /// A density matrix does not satisfy an analysis precondition.
    #[error("analysis error: {0}")]
    Analysis(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn analysis(msg: impl Into<String>) -> Self {
        Error::Analysis(msg.into())
    }
}
