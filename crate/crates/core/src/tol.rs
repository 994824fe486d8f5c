//! Central numeric tolerances.
//!
//! Every fixed tolerance used by the crate lives here so that validation,
//! cross-checks, and the verification suites agree on the same numbers.
//! The values fall into three tiers: structural checks on states at
//! `1e-12`, spectral/reconstruction checks at `1e-10`, and cross-route
//! agreement checks (quadrature vs closed form, spectral vs modular,
//! derivative residuals) at `1e-8`/`1e-9`.

/// Entrywise bound on `|M - M^dagger|` for a matrix to count as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Allowed deviation of a density-matrix trace from 1.
pub const TRACE_TOL: f64 = 1e-12;

/// Allowed deviation of a pure-state norm from 1.
pub const NORM_TOL: f64 = 1e-12;

/// Most negative eigenvalue tolerated by the positive-semidefinite check.
pub const PSD_TOL: f64 = 1e-10;

/// Eigenvalues within this distance of zero are clamped to exactly zero
/// before any division or support decision.
pub const EIG_CLAMP: f64 = 1e-12;

/// Squared overlaps below this threshold are treated as exact zeros when
/// they multiply a divergent `f(0+)` term.
pub const OVERLAP_TOL: f64 = 1e-14;

/// Bound on `|V diag(lambda) V^dagger - M|` for spectral reconstructions
/// and on `1 - fidelity` for Schmidt reconstructions.
pub const RECONSTRUCT_TOL: f64 = 1e-10;

/// Agreement required between the integral representation of `f` and its
/// closed form, and between closed-form and quadrature `H_f`.
pub const REPRESENTATION_TOL: f64 = 1e-8;

/// Agreement required between the spectral and modular-operator routes.
pub const SPECTRAL_MODULAR_TOL: f64 = 1e-9;

/// Agreement required between `G_f(p, p)` and `H_f(p)`.
pub const DIAGONAL_TOL: f64 = 1e-10;

/// Slack added to the `G_f <= H_f(sqrt(pq))` grid check to absorb
/// quadrature noise.
pub const GRID_SLACK: f64 = 1e-10;

/// Slack added to the Cauchy-Schwarz grid check `G_f(p,q)^2 <= H_f(p) H_f(q)`.
pub const CS_SLACK: f64 = 1e-12;

/// Residual allowed in `f(1) = 0` when a generator function is built.
pub const F_AT_ONE_TOL: f64 = 1e-12;

/// Total variation below which a sampled `H_f` profile counts as constant.
pub const CLASSIFY_FLAT_TOL: f64 = 1e-7;

/// Margin required between consecutive samples for a strict
/// monotonicity classification.
pub const CLASSIFY_MONOTONE_MARGIN: f64 = 1e-9;

/// Width of the bisection bracket at which the two-qubit solver stops.
pub const BISECT_TOL: f64 = 1e-12;

/// Residual `|rhs(q) - p|` accepted from the two-qubit solver.
pub const SOLVE_Q_RESIDUAL: f64 = 1e-10;

/// Residual accepted from the closed-form stationarity derivatives of the
/// two-qubit theorem and from the certificate threshold.
pub const DERIVATIVE_TOL: f64 = 1e-8;

/// A certificate passes when its sampled minimum directional derivative
/// stays above this threshold.
pub const CERTIFICATE_THRESHOLD: f64 = -1e-8;

/// The brute-force oracle may exceed the analytic entanglement by at most
/// this much on certified inputs.
pub const ORACLE_GAP_ABOVE: f64 = 1e-3;

/// The brute-force oracle must never undercut the analytic entanglement
/// by more than this.
pub const ORACLE_GAP_BELOW: f64 = 1e-6;

/// Finite stand-in for an infinite objective during separable-ensemble
/// optimization.
pub const OBJECTIVE_PENALTY: f64 = 1e6;

/// Matched tolerance for equality checks between two closed-form results
/// (for example `closest_two_qubit(1/2)` against `closest_maxent(2)`).
pub const CLOSED_FORM_TOL: f64 = 1e-10;
