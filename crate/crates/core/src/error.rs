//! Error types for the simulation pipeline.

use thiserror::Error;

/// Top-level error for simulation and CLI runs.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("fit error: {0}")]
    Fit(#[from] FitError),
    #[error("physics error: {0}")]
    Physics(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl SimError {
    pub fn physics(msg: impl Into<String>) -> Self {
        SimError::Physics(msg.into())
    }

    /// Process exit code for the CLI: 2 config, 3 runtime, 4 fit.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config(_) => 2,
            SimError::Fit(_) => 4,
            SimError::Physics(_) | SimError::Io(_) => 3,
        }
    }
}

/// Configuration loading and validation errors.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("no noise preset for b_field = {requested}; available: {available}")]
    UnknownPreset { requested: String, available: String },
}

impl ConfigError {
    pub fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

/// Nonlinear least-squares failures.
#[derive(Debug, Error)]
pub enum FitError {
    #[error("fit did not converge after {iterations} iterations (model {model}); initial guess {initial:?}, last chi2 {chi2}")]
    NonConvergence {
        model: String,
        iterations: usize,
        initial: Vec<f64>,
        chi2: f64,
    },
    #[error("degenerate data for {model} fit: {reason}")]
    Degenerate { model: String, reason: String },
    #[error("non-identifiable parameter in {model} fit: {reason}")]
    NonIdentifiable { model: String, reason: String },
    #[error("{0}")]
    InvalidInput(String),
}
