use thiserror::Error;

/// Errors raised by the solvers, oracles and simulator.
///
/// Contract infeasibility is never an error: solvers report it through
/// [`SolvedContract::feasible`](crate::dra::SolvedContract).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("falsification weight beta must be positive, got {0}")]
    NonPositiveBeta(f64),

    #[error("customer index {index} out of range for {n} customers")]
    CustomerIndex { index: usize, n: usize },

    #[error("scenario must contain at least one customer")]
    NoCustomers,

    #[error("the Cournot bonus requires a common beta across customers")]
    HeterogeneousBeta,

    #[error("{0}")]
    Unsupported(&'static str),

    #[error("degenerate contract system for N={n}, beta={beta}, gamma={gamma} (determinant {det:e})")]
    DegenerateSystem {
        n: usize,
        beta: f64,
        gamma: f64,
        det: f64,
    },

    #[error("gamma exceeds bound: gamma={gamma} > {bound}")]
    GammaExceedsBound { gamma: f64, bound: f64 },

    #[error("invalid search interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("objective is not finite at {at}")]
    NonFinite { at: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
