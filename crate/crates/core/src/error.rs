use alloc::string::String;
use core::fmt;

use crate::domain::ClassTag;

/// Which end of the parameter interval `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Endpoint {
    /// `s = 0`, where the first radius vanishes.
    Left,
    /// `s = 1`, where the second radius vanishes.
    Right,
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Left => f.write_str("s=0"),
            Endpoint::Right => f.write_str("s=1"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("integral diverges at {0}")]
    Divergent(Endpoint),

    #[error("integrand is not finite at s={0}")]
    NonFinite(f64),

    #[error("quadrature did not converge (estimate {estimate:e}, error {error:e})")]
    NoConvergence { estimate: f64, error: f64 },

    #[error("kernel denominator {0:e} is too small; point is too close to the boundary")]
    NearSingular(f64),

    #[error("invalid generator profile: {0}")]
    InvalidProfile(String),

    #[error("classification inconclusive: {0}")]
    Inconclusive(String),

    #[error("operation requires class P or R, domain is {0:?}; use piece-norm sweeps instead")]
    UnsupportedClass(ClassTag),

    #[error("measure is not admissible: integral I_{k} diverges at {endpoint}")]
    NotAdmissible { k: i32, endpoint: Endpoint },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain_err(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
