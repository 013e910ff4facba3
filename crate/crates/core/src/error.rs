use thiserror::Error;

/// Errors raised by the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("unknown boundary kind `{0}` (expected `periodic` or `channel`)")]
    UnknownBoundary(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("pressure operator has {zero_modes} zero modes, expected exactly 1")]
    SingularPoisson { zero_modes: usize },

    #[error("grid too large for dense materialization: n_u = {n_u} exceeds {limit}")]
    TooLarge { n_u: usize, limit: usize },

    #[error("node {node} at y = {y} lies within the kernel radius {radius} of a no-slip wall")]
    WallProximity { node: usize, y: f64, radius: f64 },

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("non-finite state at t = {t}: {what}")]
    NonFinite { t: f64, what: &'static str },

    #[error("reduced mass matrix M0 is singular beyond regularization (closest nodes {i} and {j}, distance {distance:e})")]
    SingularReduced { i: usize, j: usize, distance: f64 },

    #[error("displacement ({dx}, {dy}) outside the kernel table extent {extent}")]
    TableCoverage { dx: f64, dy: f64, extent: f64 },

    #[error("kernel table was sampled for a different grid: {0}")]
    TableMismatch(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("kernel table cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension {
            context,
            expected,
            got,
        })
    }
}
