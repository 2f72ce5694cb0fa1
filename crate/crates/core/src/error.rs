use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("pump parameter is zero; the conversion phase is undefined")]
    DegeneratePump,

    #[error("singular cavity system (|det| = {det:e})")]
    SingularSystem { det: f64 },

    #[error("integration diverged at step {step} (|amplitude| = {magnitude:e})")]
    Unstable { step: usize, magnitude: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("empty sweep grid")]
    EmptyGrid,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::SingularSystem { .. } | Error::Unstable { .. })
    }
}
