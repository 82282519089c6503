use alloc::string::String;

/// Failure modes of the simulation core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A model or experiment parameter is out of range.
    #[error("invalid `{field}`: {reason}")]
    Config { field: &'static str, reason: String },

    /// A statistic is undefined on the realized data (zero normalizer).
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    /// A step was handed fewer uniforms than its family consumes.
    #[error("draw supply exhausted: step needs {needed} uniforms, got {got}")]
    DrawsExhausted { needed: usize, got: usize },

    #[error("quadrature did not converge: achieved relative error {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    /// A moment required by the computation is infinite for this model.
    #[error("moment E|X|^{order} is infinite for {what}")]
    InfiniteMoment { order: f64, what: &'static str },

    #[error("too many degenerate paths: {degenerate} of {total} exceeds the abort fraction")]
    Aborted { degenerate: usize, total: usize },

    /// Caller violated a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    /// Whether the error stems from configuration rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. })
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
