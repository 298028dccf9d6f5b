//! Crate-wide error type.

use num_complex::Complex64;

#[derive(Debug)]
pub enum Error {
    /// An argument violated a documented precondition.
    InvalidArgument(String),
    /// A moment integral failed to converge within the refinement cap.
    QuadratureDivergence {
        interval: usize,
        subinterval: usize,
        mode: usize,
        degree: usize,
        rel_change: f64,
    },
    /// The iterative solver exhausted its iteration budget. Carries the best
    /// iterate found and its relative residual.
    NoConvergence {
        iterations: usize,
        residual: f64,
        best: Vec<Complex64>,
    },
    /// The per-mode 2x2 interface system of the exact sphere solution was
    /// numerically singular at this mode.
    MieResonance { mode: usize },
    /// A cache or table file did not match the requested parameters.
    CacheMismatch(String),
    /// Malformed input file.
    Parse(String),
    Io(std::io::Error),
}

impl std::fmt::Display for Error {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::QuadratureDivergence {
                interval,
                subinterval,
                mode,
                degree,
                rel_change,
            } => write!(
                f,
                "moment quadrature did not converge at interval {interval}, \
                 subinterval {subinterval}, mode {mode}, degree {degree} \
                 (last relative change {rel_change:.3e})"
            ),
            Error::NoConvergence {
                iterations,
                residual,
                ..
            } => write!(
                f,
                "solver did not reach tolerance after {iterations} iterations \
                 (best relative residual {residual:.3e})"
            ),
            Error::MieResonance { mode } => {
                write!(f, "singular interface system at mode {mode}")
            }
            Error::CacheMismatch(msg) => write!(f, "cache mismatch: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
