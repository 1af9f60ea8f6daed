//! Shared tolerances.

/// Identities that hold exactly in the symbolic pipeline (float roundoff only).
pub const SYMBOLIC: f64 = 1e-9;
/// Comparisons against a finite-difference oracle.
pub const FD_ORACLE: f64 = 1e-6;
/// Default threshold for "nonzero" verdicts.
pub const VERDICT: f64 = 1e-6;
/// Frame invariants of the Rosen to Brinkmann conversion.
pub const FRAME: f64 = 1e-8;

/// `residual / max(1, scale)`.
pub fn relative(residual: f64, scale: f64) -> f64 {
    residual / scale.abs().max(1.0)
}
