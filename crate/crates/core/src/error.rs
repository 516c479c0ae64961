use thiserror::Error;

/// Errors raised anywhere in the quadrature / layer-potential stack.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("pole: {0}")]
    Pole(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence after {iterations} iterations: {what}")]
    NoConvergence { what: String, iterations: usize },

    #[error("singular quadratic form (det = 0)")]
    SingularForm,

    #[error("inadmissible quadratic form: {0}")]
    Inadmissible(String),

    #[error("branch error: {0}")]
    Branch(String),

    #[error("geometry error at v = ({v1}, {v2}): {msg}")]
    Geometry { v1: f64, v2: f64, msg: String },

    #[error("stencil error: {0}")]
    Stencil(String),

    #[error("unsupported singularity power: {0}")]
    UnsupportedPower(String),

    #[error("target too close to surface: {0}")]
    Proximity(String),

    #[error("node budget exceeded: {nodes} > {budget}")]
    NodeBudget { nodes: usize, budget: usize },

    #[error("solver failure: {msg} (residual history: {history:?})")]
    Solver { msg: String, history: Vec<f64> },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
