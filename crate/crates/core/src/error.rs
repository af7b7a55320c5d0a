use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("time {t} lies outside the interval [{start}, {end}]")]
    OutsideInterval { t: f64, start: f64, end: f64 },

    #[error("operator of degree {expected_degree} on step {expected_k} applied to a trajectory of degree {degree} on step {k}")]
    OperatorMismatch {
        expected_degree: usize,
        expected_k: f64,
        degree: usize,
        k: f64,
    },

    #[error("singular matrix while factorizing the dG time operator of degree {0}")]
    SingularOperator(usize),

    #[error("subspace basis is not orthonormal (deviation {0:e})")]
    NonOrthonormalBasis(f64),

    /// The Picard iteration did not settle. Usually the step is too large for
    /// the map to contract; the caller should shrink it.
    #[error("fixed-point iteration did not converge after {iterations} iterations (last change {last_delta:e})")]
    NonConvergence { iterations: usize, last_delta: f64 },

    #[error("growth hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("step {index}: {source}")]
    AtStep {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_step(self, index: usize) -> Self {
        Error::AtStep {
            index,
            source: Box::new(self),
        }
    }

    /// Strips any [`Error::AtStep`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            e => e,
        }
    }
}
