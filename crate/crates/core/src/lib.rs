//! Numerical toolkit for quasi-relative entropies between finite-dimensional
//! quantum states and for closest-separable-state computations on pure
//! entangled states.
//!
//! A quasi-relative entropy is the trace functional
//!
//! ```text
//! S_f(rho || sigma) = Tr( f(Delta_{sigma,rho}) rho )
//! ```
//!
//! built from an operator convex, operator monotone decreasing function `f`
//! with `f(1) = 0` and the relative modular operator
//! `Delta_{sigma,rho}(X) = sigma X rho^{-1}`. The crate provides:
//!
//! - [`qstate`]: density matrices, pure states, Schmidt decompositions,
//!   partial traces, seeded random states, and the PPT test;
//! - [`fgen`]: the generator-function registry (`-log` and the power
//!   families) together with the integral-representation machinery
//!   (`H_f`, `G_f`, adaptive quadrature over the representing measure);
//! - [`qre`]: divergence evaluation by the spectral formula and by the
//!   relative modular operator, plus the named divergences (Umegaki,
//!   alpha, Renyi, Tsallis);
//! - [`closest`]: closed-form closest separable states for maximally
//!   entangled states, for pure states under a constant `H_f`, and for
//!   two-qubit pure states, with stationarity certificates;
//! - [`sepopt`]: an independent brute-force minimizer over explicit
//!   separable ensembles used as a cross-checking oracle;
//! - [`verify`]: self-check suites wired into the command-line tool.
//!
//! Infinite divergences are represented by `f64::INFINITY`, which is
//! ordered above every finite value; no API returns NaN.

#![forbid(unsafe_code)]

pub mod closest;
mod error;
pub mod fgen;
pub mod qre;
pub mod qstate;
pub mod sepopt;
pub mod tol;
pub mod verify;

pub use error::{Error, Result};
