//! Dyadic-series refinements of the weighted Young inequality and its reverse.
//!
//! The crate works at three levels:
//!
//! - positive scalars ([`scalar`]),
//! - positive definite matrices under the Loewner order ([`operator`]),
//! - Hilbert-Schmidt norms of matrix products ([`hilbert_schmidt`]).
//!
//! Every refinement is driven by the coefficient sequence in [`schedule`],
//! computed in exact rational arithmetic so that dyadic weights (for which the
//! refinement series terminates and the inequality becomes an equality) are
//! detected exactly. The spectral substrate lives in [`matrix`].

pub mod error;
pub mod hilbert_schmidt;
pub mod matrix;
pub mod matrix_io;
pub mod operator;
pub mod scalar;
pub mod schedule;
pub mod verdict;

pub use error::{Error, Result};
pub use matrix::{EigenDecomposition, HermitianMatrix, LoewnerVerdict, Positivity, C64};
pub use schedule::{DyadicSchedule, RationalWeight, ScheduleEntry, DEFAULT_DEPTH};
pub use verdict::{InequalityVerdict, VerdictKind};

/// Default relative tolerance used when comparing the two sides of an inequality.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
