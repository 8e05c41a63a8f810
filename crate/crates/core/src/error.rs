use thiserror::Error;

use crate::model::SchemeKind;

/// Errors raised by the laser-noise engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("atom count must be at least 1, got {0}")]
    NoAtoms(u64),

    #[error("parameter `{name}` must be nonnegative, got {value}")]
    NegativeRate { name: &'static str, value: f64 },

    #[error("parameter `{name}` must be finite, got {value}")]
    NonFiniteRate { name: &'static str, value: f64 },

    #[error("detector absorption constant must be positive, got {0}")]
    NonPositiveAlpha(f64),

    #[error("parameter `{name}` must be positive for the {scheme:?} scheme")]
    Degenerate { name: &'static str, scheme: SchemeKind },

    #[error("operation is only defined for the {expected:?} scheme, got {got:?}")]
    UnsupportedScheme { expected: SchemeKind, got: SchemeKind },

    #[error("steady state is inconsistent: {0}")]
    InconsistentSteadyState(String),

    #[error("total event rate vanished at t = {time}")]
    FrozenChain { time: f64 },

    #[error("non-finite time step at t = {time}")]
    NonFiniteStep { time: f64 },

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("need at least {needed} detection events, got {got}")]
    TooFewEvents { needed: usize, got: usize },

    #[error("mean photon number is zero; Fano factor undefined")]
    ZeroMean,

    #[error("spectra are defined on different frequency grids")]
    GridMismatch,

    #[error("nothing to aggregate")]
    EmptyInput,

    #[error("linearized system is singular at omega = {omega}")]
    SingularSystem { omega: f64 },

    #[error("closed form `{case}` does not apply: {reason}")]
    CaseMismatch { case: &'static str, reason: String },

    #[error("quadrature did not converge: estimate {estimate}, error {error}")]
    QuadratureFailed { estimate: f64, error: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
