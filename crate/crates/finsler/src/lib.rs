//! Numerical toolkit for two-dimensional Finsler geometry.
//!
//! From a Finsler function F(x, y) given as an expression in the small
//! metric DSL, the crate computes the global Berwald frame, the scalar
//! invariants 𝓘, 𝓙, K, ρ, 𝓕, the Berwald connection with its curvature,
//! and verifies the defining identities of the theory as machine-checkable
//! residuals. Everything is built on truncated multivariate Taylor jets,
//! so all derivatives are exact to floating-point roundoff — no finite
//! differencing in the main pipeline.

pub mod classify;
pub mod connection;
pub mod error;
pub mod flow;
pub mod frame;
pub mod identities;
pub mod jets;
pub mod metric;
pub mod sample;
pub mod spray;

pub use error::Error;
pub use frame::{build_frame, extract_invariants, FrameAtPoint, FrameEval, FrameVec, InvariantSet};
pub use jets::{Jet, JetError};
pub use metric::{catalog, builtin, MetricSpec, TangentPoint};
pub use spray::{jacobi_endomorphism, spray_coefficients, spray_rhs, SprayEval};
