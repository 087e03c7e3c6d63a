use core::fmt;

/// Errors raised by the numerical core.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A chart point with `|x| >= 1`.
    OutsideChart { norm: f64 },
    /// A finite-difference stencil would leave the open ball.
    StencilOutsideBall { radius: f64, reach: f64 },
    /// A non-finite value showed up where a finite one is required.
    NonFinite { what: &'static str },
    /// Refinement did not reach the requested agreement.
    NotConverged { what: &'static str, change: f64, tolerance: f64 },
    /// Dimension without an implementation (angular rules exist for 2 and 3).
    UnsupportedDimension(usize),
    /// Structurally invalid input.
    InvalidInput(&'static str),
    /// Two time profiles that do not share the same initial value.
    InitialValueMismatch { f1: f64, f2: f64 },
    /// A profile that violates the energy inequality.
    Inadmissible { time: f64, margin: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::OutsideChart { norm } => {
                write!(f, "point with |x| = {norm} lies outside the unit ball")
            }
            Error::StencilOutsideBall { radius, reach } => {
                write!(f, "finite-difference stencil of reach {reach} at |x| = {radius} leaves the unit ball")
            }
            Error::NonFinite { what } => write!(f, "non-finite value in {what}"),
            Error::NotConverged { what, change, tolerance } => write!(
                f,
                "{what} did not converge: last refinement changed the value by {change:e} (tolerance {tolerance:e})"
            ),
            Error::UnsupportedDimension(n) => write!(f, "dimension {n} is not supported"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::InitialValueMismatch { f1, f2 } => {
                write!(f, "profiles disagree at t = 0 (f1(0) = {f1}, f2(0) = {f2}); not the same Cauchy problem")
            }
            Error::Inadmissible { time, margin } => {
                write!(f, "energy inequality violated at t = {time} (margin {margin:e})")
            }
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;

impl core::error::Error for Error {}
