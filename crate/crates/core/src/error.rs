use thiserror::Error;

/// Errors raised by the solver and verifier routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid Pucci parameters: {0}")]
    InvalidParams(String),
    #[error("invalid nonlinearity: {0}")]
    InvalidNonlinearity(String),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("landscape error: {0}")]
    Landscape(String),
    #[error("amplitude {alpha} is the equilibrium s_inf = {s_inf}")]
    Equilibrium { alpha: f64, s_inf: f64 },
    #[error("integration blew up at x = {x}")]
    IntegrationBlowUp { x: f64 },
    #[error("domain too small: {0}")]
    DomainTooSmall(String),
    #[error("sign-pattern iteration stalled after {iterations} iterations")]
    SolverStall {
        iterations: usize,
        /// Number of nodes whose coefficient flipped at each iteration.
        flips: Vec<usize>,
    },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("decay fit failed: {0}")]
    Fit(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("certificate not applicable: {0}")]
    NotApplicable(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
