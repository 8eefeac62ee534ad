//! Centralized tolerance tiers.
//!
//! Three tiers cover every comparison in the crate:
//!
//! * [`TIER_FIBER`] — pure fiber algebra (jet arithmetic against jet
//!   arithmetic, contraction identities). Only rounding accumulates.
//! * [`TIER_ANALYTIC`] — comparisons that mix x- and y-differentiation paths
//!   (spray cross-checks, scalar-field fits). Longer chains of exact
//!   arithmetic, so one extra order of headroom per aggregation stage.
//! * [`TIER_FD`] — anything checked against a finite-difference oracle;
//!   dominated by truncation error of the stencil, not by the implementation.

/// Pure fiber-algebra comparisons.
pub const TIER_FIBER: f64 = 1e-10;

/// Mixed x/y analytic pipelines.
pub const TIER_ANALYTIC: f64 = 1e-7;

/// Finite-difference oracles.
pub const TIER_FD: f64 = 1e-4;

/// Agreement between analytic x-derivatives and central differences.
pub const X_DERIVATIVE_FD: f64 = 1e-6;

/// Scalar τ-fit of the covariant-derivative ansatz.
pub const TAU_FIT: f64 = 1e-8;

/// Parallel / Killing conditions on covariant data (entrywise).
pub const COVARIANT_ZERO: f64 = 1e-9;

/// Douglas-tensor vanishing corroboration.
pub const DOUGLAS_ZERO: f64 = 1e-7;

/// Rational-identity audit residual.
pub const IDENTITY_AUDIT: f64 = 1e-6;

/// φ-family ODE residual on the dense s-grid.
pub const ODE_RESIDUAL: f64 = 1e-10;

/// Absolute threshold factor for denominator-vanishing guards,
/// scaled by operand magnitude at the call site.
pub const SINGULAR_GUARD: f64 = 1e-14;

/// Pivot rejection ratio for symmetric factorization.
pub const PIVOT_REJECT: f64 = 1e-12;
