//! Numerical toolkit for quasiperiodically forced circle homeomorphisms.
//!
//! - [`families`]: lifts `(θ, x) ↦ (θ + ω, F_θ(x))` and the named families
//!   (rigid translation, forced Arnold map, Harper map).
//! - [`rotnum`]: fibered rotation numbers, vertical perturbation, deviations,
//!   mode-locking probes and rational-dependence witnesses.
//! - [`graphs`]: graphs over the circle, invariant strips, curve iteration
//!   and annulus witnesses for locking.
//! - [`harper`]: Schrödinger cocycles, integrated density of states and gap
//!   labels.
//! - [`scan`]: parameter sweeps, plateau detection and tongue boundaries.

// `!(x > 0.0)` is how NaN gets rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod families;
pub mod graphs;
pub mod harper;
pub mod rotnum;
pub mod scan;

pub use error::{Error, Result};
pub use families::{FamilySpec, QpfLift, GOLDEN_MEAN};
pub use rotnum::{Estimator, Method, RotationEstimate};
