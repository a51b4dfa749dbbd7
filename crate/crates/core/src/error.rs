//! Error type shared by every module.
//!
//! All analytic operations carry explicit domain guards (pole distances,
//! convergence-region predicates, range caps).  Violations surface as typed
//! errors naming the offending quantity rather than as NaNs deep inside a sum.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MdsError {
    /// An argument landed within the guard distance of a pole of the named
    /// factor (gamma factors, `zeta2`, matrix denominators, ...).
    #[error("pole proximity in {what}: argument {arg} within {dist:.3e} of a pole")]
    PoleProximity { what: String, arg: String, dist: f64 },

    /// The point sits too close to one of the polar lines `s = 1`, `w = 1`,
    /// `s + w = 3/2` of the continued family.
    #[error("polar line {line}: distance {dist:.3e} below guard {guard:.3e}")]
    PolarLine { line: String, dist: f64, guard: f64 },

    /// No series representation converges at the requested point.
    #[error("no convergent representation at (s, w) = ({s}, {w})")]
    NoRepresentation { s: String, w: String },

    /// A truncated sum could not meet the requested tail tolerance.
    #[error("insufficient convergence: tail bound {tail:.3e} above tolerance {tol:.3e}")]
    InsufficientConvergence { tail: f64, tol: f64 },

    /// The group orbit of the requested point found no evaluable image.
    #[error("no orbit image of ({s}, {w}) lands in a convergent region")]
    NoOrbitImage { s: String, w: String },

    /// Two orbit points coincide to within the degeneracy guard.
    #[error("degenerate orbit: images {a} and {b} within {dist:.3e}")]
    DegenerateOrbit { a: String, b: String, dist: f64 },

    /// Adaptive quadrature failed to stabilize within its doubling budget.
    #[error("quadrature did not converge: last delta {delta:.3e} above {tol:.3e}")]
    QuadratureNonConvergence { delta: f64, tol: f64 },

    /// An argument or enumeration exceeded its supported range.
    #[error("range cap exceeded in {what}: got {got}, supported {cap}")]
    RangeCap { what: String, got: String, cap: String },

    /// Invalid argument (zero denominator, even decomposition input, bad
    /// window, out-of-range contour abscissa, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Cache file malformed or with a foreign version tag.
    #[error("cache format error: {0}")]
    CacheFormat(String),

    /// I/O while reading or writing a cache or report file.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for MdsError {
    fn from(e: std::io::Error) -> Self {
        MdsError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, MdsError>;
