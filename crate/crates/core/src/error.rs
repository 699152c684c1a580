use thiserror::Error;

use crate::space::SpaceDescriptor;

#[derive(Debug, Error)]
pub enum Error {
    #[error("descriptor mismatch: {left:?} vs {right:?}")]
    DescriptorMismatch {
        left: SpaceDescriptor,
        right: SpaceDescriptor,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Jacobi eigendecomposition did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    EigenNotConverged { sweeps: usize, off_norm: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("conjugate of this potential is not available in closed form")]
    ConjugateUnavailable,

    #[error("no (minimal) subgradient available at this point: {0}")]
    NotDifferentiable(String),

    #[error("non-finite iterate at step {step}")]
    NonFinite { step: usize },

    #[error("chain {chain}: {source}")]
    Chain {
        chain: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("fixed-point iteration did not converge: {0}")]
    NonConvergent(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
