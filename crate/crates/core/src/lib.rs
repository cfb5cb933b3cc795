//! Approximate message passing (AMP) for the LASSO.
//!
//! The crate is organised around four pieces:
//!
//! * [`kernels`]: closed-form soft-thresholding risk, its threshold
//!   derivative and detection probabilities over point-mass priors;
//! * [`state_evolution`]: the scalar fixed-point system that predicts the
//!   asymptotic MSE and active-set size of the LASSO along its λ path, the
//!   λ ↔ β ↔ γ calibration maps, and AMP state-evolution trajectories;
//! * [`problem`], [`amp`], [`lasso`]: seeded random instances, the AMP
//!   iteration with fixed-detection / fixed-false-alarm thresholding, and a
//!   reference accelerated proximal-gradient LASSO solver with KKT residuals;
//! * [`experiments`]: phase-transition and λ-sweep harnesses emitting CSV.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod amp;
pub mod experiments;
pub mod kernels;
pub mod lasso;
mod linalg;
pub mod problem;
pub mod state_evolution;

pub use kernels::Prior;
