use rbinit_core::InitError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    /// Invalid scenario, settings or input file contents.
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("filter error: {0}")]
    Filter(#[from] InitError),
}

impl SimError {
    /// True for errors caused by the inputs rather than by a run.
    pub fn is_config(&self) -> bool {
        match self {
            SimError::Config(_) | SimError::Io(_) | SimError::Parse { .. } => true,
            SimError::Filter(e) => matches!(e, InitError::InvalidConfig(_) | InitError::InvalidHypotheses(_)),
        }
    }
}
