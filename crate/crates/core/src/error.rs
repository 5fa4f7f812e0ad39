use thiserror::Error;

/// Errors raised by the noise-limit computations.
///
/// Numeric payloads are stored as `f64` regardless of the scalar type used in
/// the computation so that the error type stays non-generic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoiseError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("frequency {omega} outside tabulated range [{lo}, {hi}]")]
    Range { omega: f64, lo: f64, hi: f64 },

    #[error("probe is lossless (Im χ⁻¹ = 0): threshold is infinite, use the QCRB branch")]
    LosslessProbe,

    #[error("back-action PSD {s_ff} violates the meter FDT bound ħ|Im K| = {bound}")]
    FdtViolation { s_ff: f64, bound: f64 },

    #[error("no feasible meter triad found in the search region")]
    EmptyFeasibleRegion,

    #[error("saturating-triad sampler failed after {retries} retries")]
    Sampler { retries: usize },
}

pub type Result<T> = std::result::Result<T, NoiseError>;

pub(crate) fn domain(msg: impl Into<String>) -> NoiseError {
    NoiseError::Domain(msg.into())
}
