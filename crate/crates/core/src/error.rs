use thiserror::Error;

/// Errors surfaced by the numeric guards.
///
/// Most operations are total on valid systems; the variants here are the
/// guard rails the library refuses to cross silently.
#[derive(Debug, Clone, Error)]
pub enum LabError {
    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("invalid environment: {0}")]
    InvalidEnvironment(String),

    #[error(
        "word of length {len} has {count} inverse branches, above the cap {cap}; \
         use letter-by-letter operator composition instead"
    )]
    BranchCapExceeded { len: usize, count: u128, cap: u128 },

    #[error("operator denominator not strictly positive (min {min:.3e}); system definition is broken")]
    NonpositiveDenominator { min: f64 },

    #[error("input is not a probability measure (total mass {mass:.12})")]
    NotProbability { mass: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("power iteration did not converge within {0} iterations")]
    EigenNoConvergence(usize),

    #[error("degenerate system: {0}")]
    Degenerate(String),

    #[error("transport solver failed: {0}")]
    Transport(String),
}
