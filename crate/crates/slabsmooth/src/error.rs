use thiserror::Error;

/// Errors produced by dataset ingestion, basis construction, and fitting.
#[derive(Error, Debug)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row}, column '{column}': {message}")]
    Input {
        row: usize,
        column: String,
        message: String,
    },

    #[error("need at least {needed} data points, got {got}")]
    TooFewPoints { got: usize, needed: usize },

    #[error("{context}: need n > {bound}, got n = {n}")]
    SizeError {
        context: &'static str,
        n: usize,
        bound: usize,
    },

    #[error(
        "rank deficiency{}: {distinct} distinct x values cannot support a degree-{degree} basis (need at least {})",
        point.map(|i| format!(" at point {i}")).unwrap_or_default(),
        degree + 1
    )]
    RankDeficient {
        distinct: usize,
        degree: usize,
        point: Option<usize>,
    },

    #[error(
        "degenerate fit: residual variance is zero (responses lie exactly in the basis span); \
         reduce the degree or treat the fit as exact"
    )]
    DegenerateFit,

    #[error("basis is not orthogonal: max |B'B - nI| entry is {max_dev:.3e} (limit {limit:.3e})")]
    NonOrthogonalBasis { max_dev: f64, limit: f64 },

    #[error("chain produced a non-finite state at sweep {sweep}")]
    NonFiniteState { sweep: usize },

    #[error("quadrature did not converge: successive refinements differ by {delta:.3e}")]
    QuadraturePrecision { delta: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("local fit failed at {failed} of {total} points (first: point {first_index}: {first_message})")]
    TooManyFailures {
        failed: usize,
        total: usize,
        first_index: usize,
        first_message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    /// Shorthand used by config validators across the crate.
    pub(crate) fn require(cond: bool, msg: &str) -> Result<()> {
        if cond {
            Ok(())
        } else {
            Err(Error::invalid(msg))
        }
    }
}
