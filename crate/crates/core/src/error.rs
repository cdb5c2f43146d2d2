use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors reported by the engines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A geometry invariant failed; the message names it.
    InvalidGeometry(&'static str),
    /// A parameter is outside its legal range.
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    /// The Lambert W argument lies below the branch point `-1/e`.
    LambertDomain(f64),
    /// A bisection bracket does not change sign.
    NoSignChange { lo: f64, hi: f64 },
    /// An iteration ran out of steps before meeting its tolerance.
    ToleranceNotReached { iterations: usize, width: f64 },
    /// Time relaxation did not reach a steady state before `max_time`.
    NotConverged { time: f64, max_rate: f64 },
    /// A density left `[0, 1]` during time stepping; the step is too large.
    BoundViolation { site: usize, time: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGeometry(what) => write!(f, "invalid geometry: {what}"),
            Error::OutOfRange { name, value, range } => {
                write!(f, "{name} = {value} is outside the legal range {range}")
            }
            Error::LambertDomain(x) => {
                write!(f, "Lambert W argument {x} is below the branch point -1/e")
            }
            Error::NoSignChange { lo, hi } => {
                write!(f, "no sign change on bisection bracket [{lo}, {hi}]")
            }
            Error::ToleranceNotReached { iterations, width } => write!(
                f,
                "tolerance not reached after {iterations} iterations (bracket width {width:e})"
            ),
            Error::NotConverged { time, max_rate } => write!(
                f,
                "relaxation not converged at t = {time} (max |drho/dt| = {max_rate:e})"
            ),
            Error::BoundViolation { site, time } => write!(
                f,
                "density bound violated at site {site}, t = {time}; reduce the time step"
            ),
        }
    }
}

impl core::error::Error for Error {}
