//! Radial standing waves of coupled semi-linear elliptic systems.
//!
//! The crate discretizes radially symmetric fields on a ball in R^N, models
//! potentials `F(u) = ½ Σ m_i² u_i² + R(u)` with polynomial `R`, and finds
//! solutions of
//!
//! ```text
//! -Δu_i + D_iF(u) = ω_i² u_i,    ω_i ‖u_i‖² = C_i
//! ```
//!
//! by minimizing the charge-constrained energy. Diagnostics check the
//! hypotheses on `F`, the hylomorphy margins, and the properties of the
//! symmetric-decreasing rearrangement.

pub mod conditions;
pub mod error;
pub mod functional;
pub mod grid;
pub mod potential;
pub mod rearrange;
pub mod solver;

pub use error::{Error, Result};
pub use functional::{ChargeVector, FieldSet, Frequencies};
pub use grid::{Profile, RadialGrid};
pub use potential::{ConditionReport, GrowthData, Monomial, PotentialSpec};
