use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("node index {index} out of range for a graph with {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("need at least {min} nodes, got {got}")]
    TooFewNodes { min: usize, got: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("clique set rejected: {0}")]
    CliqueSet(String),
    #[error("block ({row}, {col}) must vanish but has max-abs {norm:e}")]
    Pattern { row: usize, col: usize, norm: f64 },
    #[error("not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("not symmetric: {0}")]
    NotSymmetric(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("duplicate variable name `{0}`")]
    DuplicateName(String),
    #[error("closed loop is not Hurwitz (spectral abscissa {0:e})")]
    NotHurwitz(f64),
    #[error("eigenvalue computation did not converge")]
    Eigen,
    #[error("could not bracket the H-infinity norm")]
    Bracket,
    #[error("{0}")]
    Invalid(String),
}
