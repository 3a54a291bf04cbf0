//! Numerical tolerances shared across the crate.

/// Absolute tolerance for coefficient comparisons against zero.
pub const COEFF: f64 = 1e-12;

/// Relative tolerance for symmetry of coefficient arrays.
pub const SYMMETRY: f64 = 1e-12;

/// Relative tolerance (times the coefficient scale) for the spectrum to be
/// considered nonnegative.
pub const PSD: f64 = 1e-10;

/// Slack for sampled inequalities between form values.
pub const SAMPLE: f64 = 1e-10;

/// Default entrywise tolerance for semigroup comparisons.
pub const SEMIGROUP: f64 = 1e-12;
