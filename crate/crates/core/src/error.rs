use thiserror::Error;

/// Errors raised by the numerical and symbolic operations of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FreudError {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("operation defined only for d = {expected}, got d = {got}")]
    UnsupportedDegree { expected: usize, got: usize },

    #[error("single-band cubic has {} admissible roots: {roots:?}", roots.len())]
    Ambiguous { roots: Vec<f64> },

    #[error("precision error: {reason} (suggested minimum {suggested_bits} bits)")]
    Precision {
        reason: String,
        suggested_bits: u32,
        /// Largest index certified before the precision budget ran out.
        certified_up_to: Option<usize>,
    },

    #[error("index {index} outside table range 0..={max}")]
    Range { index: i64, max: usize },

    #[error("singular Freud step at mu = {mu}: linear coefficient vanishes")]
    SingularStep { mu: usize },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = FreudError> = std::result::Result<T, E>;
