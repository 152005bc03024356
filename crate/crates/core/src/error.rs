use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("shape error in {op}: {detail}")]
    Shape { op: &'static str, detail: String },

    /// A standing assumption on the input failed (negative entries,
    /// reducibility, permutation matrices, zero rows in a presenting matrix).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("polynomials live over different presenting matrices")]
    PresentationMismatch,

    #[error("link {index}: {source}")]
    Link {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    /// An internal invariant failed; indicates a bug or a verifier gap.
    #[error("consistency error: {0}")]
    Consistency(String),
}

impl Error {
    pub(crate) fn shape(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Shape {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors that mean the caller's input violated an assumption
    /// (as opposed to malformed input text).
    pub fn is_domain(&self) -> bool {
        match self {
            Error::Domain(_) => true,
            Error::Link { source, .. } => source.is_domain(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
