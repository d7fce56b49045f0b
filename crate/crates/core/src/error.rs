use thiserror::Error;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Numerical,
    Guard,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("interval list is empty")]
    NoIntervals,
    #[error("endpoint of interval {index} is not finite")]
    NonFinite { index: usize },
    #[error("interval {index} is empty: beta ({beta}) <= alpha ({alpha})")]
    EmptyInterval { index: usize, alpha: f64, beta: f64 },
    #[error("intervals {first} and {second} overlap")]
    OverlappingIntervals { first: usize, second: usize },
    #[error("moving interval {moved} next to interval {anchor} collides with interval {hit}")]
    MoveCollision { moved: usize, anchor: usize, hit: usize },
    #[error("index {index} out of range for {len} intervals")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("matrix is not unitary: entry ({row}, {col}) of B*B deviates from identity by {deviation:.3e}")]
    NotUnitary { row: usize, col: usize, deviation: f64 },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {what} has size {got}, expected {expected}")]
    DimensionMismatch { what: &'static str, got: usize, expected: usize },
    #[error("boundary vectors span only a {rank}-dimensional subspace of C^{n}")]
    DeficientSpan { rank: usize, n: usize },
    #[error("no single boundary matrix fits all samples (worst residual {residual:.3e} at lambda = {lambda})")]
    Inconsistent { lambda: f64, residual: f64 },
    #[error("matrix structure does not match: {0}")]
    WrongStructure(String),
    #[error("intervals do not all have the same length")]
    NotEqualLength,

    #[error("x = {x} is not inside any interval")]
    XNotInOmega { x: f64 },
    #[error("x + t = {y} is not inside any interval")]
    XPlusTNotInOmega { y: f64 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("function is not a combination of eigenfunctions: {0}")]
    NotEigenCombination(String),
    #[error("not spectral: witness lambda = {witness}; {detail}")]
    NotSpectral { witness: f64, detail: String },
    #[error("theta_0 is inconsistent across the spectrum (spread {spread:.3e})")]
    InconsistentTheta { spread: f64 },

    #[error("iteration did not converge: {0}")]
    ConvergenceFailure(String),
    #[error("root count residual {residual:.3e} on [{lo}, {hi}] is not near an integer; a root may have been missed")]
    SuspectedMissedRoot { lo: f64, hi: f64, residual: f64 },

    #[error("{what}: {} exceeds the cap {cap} (predicted bound {estimate:.3e})", show_count(*count))]
    GuardExceeded { what: &'static str, count: usize, cap: usize, estimate: f64 },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::ConvergenceFailure(_) | Error::SuspectedMissedRoot { .. } => ErrorClass::Numerical,
            Error::GuardExceeded { .. } => ErrorClass::Guard,
            _ => ErrorClass::Validation,
        }
    }
}

fn show_count(count: usize) -> String {
    if count >= 1_000_000_000_000 {
        format!("{:.3e}", count as f64)
    } else {
        count.to_string()
    }
}

pub type Result<T> = std::result::Result<T, Error>;
