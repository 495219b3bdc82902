use thiserror::Error;

/// Errors raised by the models, the oracles and the config layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the domain of the formula it feeds.
    #[error("domain error: {name} = {value} ({reason})")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The herald probability vanishes, so the fidelity ratio is 0/0.
    #[error("undefined fidelity: {0}")]
    UndefinedFidelity(String),

    /// The weak-interaction model is being pushed past where it holds.
    #[error("model validity: {0}")]
    ModelValidity(String),

    /// The Fock cutoff cannot hold the orbit of the generator.
    #[error("truncation: ket {ket} couples to {reached}, outside cutoff {cutoff}")]
    Truncation {
        ket: String,
        reached: String,
        cutoff: usize,
    },

    #[error("insufficient statistics: {0}")]
    InsufficientStatistics(String),

    /// Malformed state or basis handed to the Fock-space layer.
    #[error("input error: {0}")]
    Input(String),

    /// Config parse or unit failure; names the offending key.
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain { name, value, reason }
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
