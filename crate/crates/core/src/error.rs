use thiserror::Error;

/// Errors raised anywhere in the lab.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("strategy error: {message} (state: {state})")]
    Strategy { message: String, state: String },

    #[error("internal state error: {0}")]
    InternalState(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("degenerate law: {0}")]
    DegenerateLaw(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("path {path} failed (seed {seed}): {source}")]
    Path {
        path: u64,
        seed: u64,
        #[source]
        source: Box<LabError>,
    },
}

impl LabError {
    /// True when the root cause is an overflow, looking through path wrappers.
    pub fn is_overflow(&self) -> bool {
        match self {
            LabError::Overflow(_) => true,
            LabError::Path { source, .. } => source.is_overflow(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn ensure_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(LabError::Domain(format!("{name} must be finite, got {x}")))
    }
}
