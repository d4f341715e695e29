use alloc::string::String;
use core::fmt;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Input too small or geometrically degenerate (fewer than two samples,
    /// collinear 2D cloud, ...).
    Degenerate(String),
    /// A grid or sample sequence violates its invariants.
    InvalidInput(String),
    /// Query point outside the domain of a sampled envelope.
    OutOfDomain { value: f64, lo: f64, hi: f64 },
    /// Query point outside the projected hull of a 2D cloud.
    OutsideHull { x: f64, y: f64 },
    /// No admissible grid path joins the endpoints.
    Infeasible(String),
    /// A numerical certificate could not be produced.
    CertificateFailure(String),
    /// Internal consistency check tripped; indicates a bug rather than bad input.
    Inconsistent(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Degenerate(msg) => write!(f, "degenerate input: {msg}"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::OutOfDomain { value, lo, hi } => {
                write!(f, "{value} lies outside the sampled domain [{lo}, {hi}]")
            }
            Error::OutsideHull { x, y } => {
                write!(f, "({x}, {y}) lies outside the projected hull of the cloud")
            }
            Error::Infeasible(msg) => write!(f, "infeasible: {msg}"),
            Error::CertificateFailure(msg) => write!(f, "certificate failure: {msg}"),
            Error::Inconsistent(msg) => write!(f, "internal inconsistency: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
