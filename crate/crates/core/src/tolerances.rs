//! Shared numerical thresholds.

/// Relative factor in the default freeness threshold `1e-8 * max(|S|, 1)^d`.
pub const FREE_TOL_FACTOR: f64 = 1e-8;

/// Condition number above which a block inverse is refused.
pub const MAX_CONDITION: f64 = 1e12;

/// Bisection stopping width for exceptional-time roots.
pub const ROOT_TOL: f64 = 1e-10;

/// Fourier coefficients below this fraction of the largest one are dropped
/// when a sampled field is turned into a trigonometric series.
pub const TRIG_CUTOFF: f64 = 1e-14;

/// Window energy allowed outside an STFT patch.
pub const WINDOW_LEAK: f64 = 1e-20;
