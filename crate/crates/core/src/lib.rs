//! Orthogonal polynomials for even polynomial weights `exp(-N V(x))`.

pub mod bands;
pub mod error;
pub mod ladder;
pub mod potential;
pub mod recurrence;
pub mod scalar;
pub mod spectra;

pub use error::{FreudError, Result};
pub use potential::Potential;
pub use recurrence::{Method, PrecisionSchedule, RecurrenceTable};
pub use scalar::{Mp, Real};
pub use spectra::{DensityCurve, Grid, MomentSet};

/// Recurrence table in MPFR arithmetic, the reference representation.
pub type Table = RecurrenceTable<Mp>;
/// Recurrence table in hardware double precision.
pub type Table64 = RecurrenceTable<f64>;
