//! Error type shared by every module in the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A requested frequency lies beyond what the quadrature grid can resolve
    /// under the eight-nodes-per-oscillation rule. The caller must enlarge the grid.
    #[error(
        "resolution exceeded: frequency {requested:.6} beyond resolvable bandwidth \
         {limit:.6} of a {nodes}-node grid; enlarge the grid"
    )]
    ResolutionExceeded {
        requested: f64,
        limit: f64,
        nodes: usize,
    },

    #[error("eigensolver did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("root bracket error: {0}")]
    BracketError(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("numerical consistency violated: {0}")]
    NumericalConsistency(String),

    #[error("singular point: {0}")]
    SingularPoint(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unreachable accuracy: {0}")]
    UnreachableAccuracy(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    /// A confidence interval whose width reaches 2π covers the whole torus.
    #[error("degenerate interval: {0}")]
    DegenerateInterval(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit-code classification for the CLI: 2 for bad input or resolution
    /// problems, 1 for internal numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_)
            | Error::ResolutionExceeded { .. }
            | Error::OutOfRange(_)
            | Error::DegenerateInput(_)
            | Error::InsufficientData(_)
            | Error::UnreachableAccuracy(_)
            | Error::DegenerateInterval(_) => 2,
            Error::ConvergenceFailure(_)
            | Error::BracketError(_)
            | Error::NumericalConsistency(_)
            | Error::SingularPoint(_) => 1,
        }
    }
}
