use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid norm parameters: {0}")]
    InvalidNorm(String),

    #[error("metric tensor undefined at the zero vector")]
    ZeroVector,

    #[error("{what} = {value} lies outside the admissible domain {domain}")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        domain: String,
    },

    #[error("invalid model problem: {0}")]
    InvalidModel(String),

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("eigenvalue solver failed: {0}")]
    Solver(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("nodes {from} and {to} are not connected")]
    Disconnected { from: usize, to: usize },

    #[error("unsupported curvature certificate: {0}")]
    UnsupportedCertificate(String),

    #[error("rayleigh quotient undefined: function is constant")]
    ConstantFunction,

    #[error("rank-deficient stencil at node {0}")]
    RankDeficient(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("case {id}: {source}")]
    Case { id: String, source: Box<Error> },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
