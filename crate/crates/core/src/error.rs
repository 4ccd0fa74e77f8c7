//! Error type shared across the crate.

/// Unified error for model construction, sampling and analysis.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Conditional digit masses sum to less than one, so no sampler exists.
    #[error("improper model: {0}")]
    ImproperModel(String),

    /// An argument left the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration file or parameter set is structurally invalid.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A sampled or accumulated value exceeded the representable cap.
    #[error("value cap exceeded: {0}")]
    CapExceeded(String),

    /// The exact backend cannot reach the requested chain length.
    #[error(
        "exact backend envelope exceeded: requested n = {requested}, feasible n <= {limit}; {hint}"
    )]
    EnvelopeExceeded {
        requested: u64,
        limit: u64,
        hint: String,
    },

    /// A lattice operation was requested on a model without a certified lattice.
    #[error("lattice certification missing: {0}")]
    CertificationMissing(String),

    /// An operation was called on a stream with the wrong backend.
    #[error("backend mismatch: {0}")]
    BackendMismatch(String),

    /// Numerical integration stopped short of the requested tolerance.
    #[error("quadrature tolerance not met: achieved {achieved:.3e}, requested {requested:.3e}")]
    QuadratureTolerance { achieved: f64, requested: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
