use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid tree shape: {0}")]
    InvalidShape(String),

    #[error("shape mismatch: {0} vs {1}")]
    ShapeMismatch(String, String),

    #[error("vertex {vertex} out of range for depth {depth}")]
    VertexOutOfRange { vertex: String, depth: u32 },

    #[error("automorphism does not fix level {level} pointwise")]
    NotInStabilizer { level: u32 },

    #[error("invalid defining vector: {0}")]
    InvalidVector(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("{what} exceeded cap {cap} (reached {partial})")]
    CapExceeded {
        what: &'static str,
        cap: usize,
        partial: usize,
    },

    #[error("{what} did not stabilize up to depth {max_depth}")]
    Unstable { what: &'static str, max_depth: u32 },

    #[error("construction failed: {0}")]
    Construction(String),
}

impl Error {
    pub fn is_cap(&self) -> bool {
        matches!(self, Error::CapExceeded { .. } | Error::Unstable { .. })
    }
}
