//! Constant-coefficient nonlinear potential theory on the 2-jet space
//! J² = ℝ × ℝⁿ × S(n).
//!
//! Constraint sets are carried as signed margins (F = {m ≥ 0}); everything
//! else (duals, canonical operators, comparison checks) is built on top of
//! that single representation.

pub mod canonical;
pub mod cones;
pub mod error;
pub mod garding;
pub mod jets;
pub mod operators;
pub mod report;
pub mod sample;
pub mod subeq;
pub mod verify;

pub use error::{Error, Result};
pub use jets::{Jet, SymMatrix, Vector};
pub use report::VerificationReport;
