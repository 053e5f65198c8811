use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("{name} = {value} is outside the valid domain ({constraint})")]
    Domain {
        name: &'static str,
        value: f64,
        constraint: String,
    },

    #[error("probability vector is not normalized: entries sum to {sum}")]
    NotNormalized { sum: f64 },

    #[error("unknown {kind} `{name}`; valid values are: {valid}")]
    UnknownName {
        kind: &'static str,
        name: String,
        valid: &'static str,
    },

    #[error("rate function has no positive-rate region: rate(q = 0) = {rate_at_zero}")]
    NoPositiveRate { rate_at_zero: f64 },

    #[error("tolerance search is not bracketed: rate({lo}) = {rate_lo}, rate({hi}) = {rate_hi}")]
    NotBracketed {
        lo: f64,
        hi: f64,
        rate_lo: f64,
        rate_hi: f64,
    },

    #[error("aperture quadrature did not converge: estimate {estimate}, last change {error}")]
    QuadratureNotConverged { estimate: f64, error: f64 },

    #[error("non-finite value in {term}")]
    NonFinite { term: &'static str },

    #[error("internal consistency failure: {0}")]
    Consistency(&'static str),

    #[error("sample {index}: {source}")]
    Sample { index: u64, source: Box<Error> },
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, constraint: impl Into<String>) -> Self {
        Error::Domain {
            name,
            value,
            constraint: constraint.into(),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::NotBracketed { .. }
            | Error::QuadratureNotConverged { .. }
            | Error::NonFinite { .. }
            | Error::Consistency(_) => true,
            Error::Sample { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}
