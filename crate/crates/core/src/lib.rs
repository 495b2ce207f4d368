//! Poisson approximation by Stein's method of exchangeable pairs.
//!
//! The crate is organised around the objects a certification run needs:
//!
//! * [`stein`]: the Poisson characterizing operator, its pseudo-inverse, the
//!   classical bounds on that inverse and an exact-enumeration check of the
//!   exchangeable-pair identity.
//! * [`exact`]: exact laws and moments for Poisson-binomial trials, matching,
//!   occupancy (birthday / coupon collector) and monochromatic colourings.
//! * [`pairs`]: exchangeable-pair samplers, their analytic one-step transition
//!   probabilities and exact or Monte Carlo verification of those formulas.
//! * [`bounds`]: every closed-form total-variation bound, evaluated.
//! * [`multivariate`]: joint and configuration-level approximation.
//! * [`harness`]: sweep specifications, certification records and the
//!   CSV/JSON report format shared with the CLI.
//!
//! All probabilities are `f64`. Laws with a truncated support carry their
//! missing mass explicitly in a `tail` field, and [`tv_distance`] charges that
//! tail in full, so every reported distance is an upper bound.

// `!(x > 0.0)` is used on purpose: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
mod error;
pub mod exact;
pub mod harness;
pub mod multivariate;
pub mod pairs;
mod perm;
mod pmf;
pub mod rational;
pub mod stein;

pub use bounds::{BoundKind, BoundReport, Convention};
pub use error::{Error, Result};
pub use perm::{for_each_permutation, Permutations};
pub use pmf::{tv_distance, Pmf};
pub use stein::{FnTable, SteinParams};
