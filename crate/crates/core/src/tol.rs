//! Numerical tolerances shared across modules.
//!
//! Scenario files may override the ones marked "default"; the rest are
//! structural and fixed.

/// Normalization check for `Σ w_i n_i = 1`.
pub const NORMALIZATION: f64 = 1e-12;
/// Relative hermiticity tolerance for operators.
pub const HERMITIAN: f64 = 1e-12;
/// Relative positivity tolerance (min eigenvalue ≥ -POSITIVE·‖x‖).
pub const POSITIVE: f64 = 1e-10;
/// Projection checks: idempotency and self-adjointness.
pub const PROJECTION: f64 = 1e-10;
/// Eigenvalues of a projection must sit within this of {0, 1}.
pub const PROJECTION_SPECTRUM: f64 = 1e-8;
/// Relative gap under which neighbouring eigenvalues are merged.
pub const CLUSTER_GAP: f64 = 1e-10;
/// Absolute snap width at spectral-interval endpoints.
pub const INTERVAL_EDGE: f64 = 1e-10;
/// Relative threshold defining the support of a positive operator.
pub const SUPPORT: f64 = 1e-10;
/// Order relation slack, scaled by ‖x‖ + ‖y‖ + 1.
pub const ORDER: f64 = 1e-9;
/// Unitarity check for conjugation maps.
pub const UNITARY: f64 = 1e-10;
/// Commutator norm threshold for generator families.
pub const COMMUTING: f64 = 1e-10;
/// Product threshold for the Lamperti check.
pub const LAMPERTI: f64 = 1e-9;
/// Slack on kernel row sums.
pub const KERNEL_ROW: f64 = 1e-12;
/// Slack on contraction verdicts (‖Λ(1)‖ ≤ 1 + CONTRACTION).
pub const CONTRACTION: f64 = 1e-9;
/// Off-block mass tolerated when a Kraus map is restricted to the algebra.
pub const OFF_BLOCK: f64 = 1e-12;

/// Default singular-value threshold for fixed spaces.
pub const FIXED_SPACE: f64 = 1e-9;
/// Default final-norm tolerance for weak-wandering certificates.
pub const DECAY: f64 = 1e-6;
/// Default measure tolerance δ for in-measure verdicts.
pub const DELTA: f64 = 1e-6;
/// Default number of trailing schedule points used by tail tests.
pub const TAIL_WINDOW: usize = 5;
/// Log-log slope a decaying certificate must reach.
pub const DECAY_SLOPE: f64 = -0.9;
/// Mass below which no invariant state exists.
pub const ABSENT_STATE: f64 = 1e-12;
/// Agreement required between independently computed supports.
pub const UNIQUENESS: f64 = 1e-8;
/// Invariance residuals reported by the decomposition.
pub const INVARIANCE: f64 = 1e-9;
