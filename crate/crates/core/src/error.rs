use thiserror::Error;

pub type Result<T> = std::result::Result<T, ModelError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// A configuration value violates its documented bound. `key` is the
    /// dotted path of the offending entry.
    #[error("invalid configuration at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{name}={value} lies outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("architecture infeasible: s={s} is below S(x)={required} (shortfall {shortfall})")]
    Infeasible { s: f64, required: f64, shortfall: f64 },

    #[error("no crossing: {0}")]
    NoCrossing(String),

    #[error("assumption violated: {0}")]
    AssumptionViolation(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error("{0}")]
    Io(String),
}

impl ModelError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        ModelError::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for ModelError {
    fn from(e: std::io::Error) -> Self {
        ModelError::Io(e.to_string())
    }
}
