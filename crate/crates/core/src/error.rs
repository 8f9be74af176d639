use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dense operator on {dimension} states needs {entries} entries, above the limit of {limit}")]
    DimensionOverflow {
        dimension: usize,
        entries: usize,
        limit: usize,
    },

    #[error("mode index {mode} out of range for {num_modes} modes")]
    ModeOutOfRange { mode: usize, num_modes: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("value outside the domain of {what}: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("initial state violates {condition}: worst entry {worst:.3e} at {location}")]
    Precondition {
        condition: &'static str,
        worst: f64,
        location: String,
    },

    #[error("operation needs the {expected} interaction, got {got}")]
    VariantMismatch { expected: &'static str, got: String },

    #[error("{what} limited to size {limit}, got {size}")]
    SizeGuard {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("quadrature did not converge on [{a}, {b}]: error estimate {estimate:.3e}")]
    Quadrature { a: f64, b: f64, estimate: f64 },

    #[error("result not stable under cutoff refinement: shift {shift:.3e} exceeds {tolerance:.1e}")]
    Convergence { shift: f64, tolerance: f64 },
}
