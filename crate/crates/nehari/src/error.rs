use thiserror::Error;

use crate::extremal::ExtremalReport;
use crate::solver::SolveReport;

/// Crate-wide error type.
///
/// Every failure mode carries enough context to be reported on the command
/// line; [`Error::exit_code`] maps variants onto the process exit contract
/// (0 success, 2 validation, 3 non-convergence, 4 hypothesis violation).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid exponents: {0}")]
    InvalidExponents(String),

    #[error("invalid fiber coefficients: {0}")]
    InvalidCoefficients(String),

    #[error("fiber evaluation overflowed at t = {t:e}")]
    Overflow { t: f64 },

    #[error("upper fiber bracket exceeded 2^60 * t_m without a sign change")]
    BracketCap,

    #[error("evaluation produced a non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("hypothesis ({name}) violated: {detail}")]
    HypothesisViolation { name: &'static str, detail: String },

    #[error("no Nehari projection along this ray at lambda = {lambda} (fiber case III)")]
    NoProjection { lambda: f64 },

    #[error("degenerate fiber direction at lambda = {lambda} (fiber case II)")]
    DegenerateDirection { lambda: f64 },

    #[error("branch empty at lambda = {lambda}: no sampled ray admits a Nehari projection")]
    EmptyBranch { lambda: f64 },

    #[error("extremal ascent did not converge (best lambda* so far {best_lambda})")]
    ExtremalNonConvergence {
        best_lambda: f64,
        best: Box<ExtremalReport>,
    },

    #[error("branch minimization did not converge at lambda = {lambda}")]
    SolveNonConvergence { lambda: f64, best: Box<SolveReport> },

    #[error("continuation toward lambda* lost convergence at step {step}")]
    ContinuationFailure { step: usize },

    #[error("solution verification failed: {check} ({detail})")]
    VerificationFailure { check: &'static str, detail: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("missing dependency: {0}")]
    Dependency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit code for the CLI: 2 validation, 3 non-convergence, 4 hypothesis
    /// violation, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidExponents(_)
            | Error::InvalidCoefficients(_)
            | Error::InvalidGrid(_)
            | Error::InvalidModel(_)
            | Error::Config(_)
            | Error::Dependency(_) => 2,
            Error::ExtremalNonConvergence { .. }
            | Error::SolveNonConvergence { .. }
            | Error::EmptyBranch { .. }
            | Error::NoProjection { .. }
            | Error::DegenerateDirection { .. }
            | Error::ContinuationFailure { .. } => 3,
            Error::HypothesisViolation { .. } => 4,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
