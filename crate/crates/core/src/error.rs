use thiserror::Error;

/// Everything that can go wrong while evaluating a bound or running a simulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numeric domain error: {0}")]
    NumericDomain(String),

    #[error("argument out of domain: {0}")]
    OutOfDomain(String),

    #[error("s = {s} is not below exp(b^2/2) = {limit} (b = {b}); the drifted-passage exponent is complex")]
    AlphaComplex { s: f64, b: f64, limit: f64 },

    #[error("s = {s} puts sqrt(2 log s) = {c} at or beyond pi/2; cos is not positive")]
    CosineDomain { s: f64, c: f64 },

    #[error("s = {s} gives ratio e^alpha / cos c = {ratio}, outside (1, 2)")]
    A2Ratio { s: f64, ratio: f64 },

    #[error("geometric pgf diverges at r = {0} (need r < 2)")]
    DivergentPgf(f64),

    #[error("tail integral does not decay: {0}")]
    TailDivergence(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("simulation horizon too short: {unfinished} of {n_paths} paths had not finished")]
    HorizonTooShort { unfinished: usize, n_paths: usize },

    #[error("{flagged} of {n_paths} simulated paths blew up or left the clamp window")]
    FlaggedPaths { flagged: usize, n_paths: usize },

    #[error("assumption A1 violated: {0}")]
    A1Violation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for the family of errors raised when `s` is outside the feasible range.
    pub fn is_infeasible_s(&self) -> bool {
        matches!(
            self,
            Error::AlphaComplex { .. }
                | Error::CosineDomain { .. }
                | Error::A2Ratio { .. }
                | Error::DivergentPgf(_)
        ) || matches!(self, Error::OutOfDomain(m) if m.starts_with("s "))
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            e if e.is_infeasible_s() => 2,
            Error::TailDivergence(_) => 3,
            Error::HorizonTooShort { .. } | Error::FlaggedPaths { .. } => 4,
            Error::A1Violation(_) => 5,
            Error::InvalidParameter(_) | Error::Config(_) => 1,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
