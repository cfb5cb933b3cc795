//! Experiment harnesses behind the command-line tool: the theoretical
//! phase-transition curve, Monte Carlo phase-transition grids, empirical λ
//! sweeps against state evolution, risk curves, and their CSV writers.

pub mod csv;
mod phase;
mod stojnic;
mod sweep;

use thiserror::Error;

use crate::amp::AmpError;
use crate::kernels::{risk, risk_derivative, Prior};
use crate::problem::ProblemError;
use crate::state_evolution::SeError;

pub use phase::{phase_transition_grid, phase_trial, PhaseCell, PhaseGrid, PhaseGridConfig};
pub use stojnic::{rho_of_delta, stojnic_curve, stojnic_point, z_of_delta};
pub use sweep::{lambda_sweep_empirical, SweepConfig, SweepRow, SweepSolver};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("out of range: {0}")]
    Range(String),
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error(transparent)]
    Se(#[from] SeError),
    #[error(transparent)]
    Amp(#[from] AmpError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// `count` equi-spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| {
                if i + 1 == count {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

/// `count` equi-spaced points in `(0, hi]`: `hi·i/count` for `i = 1..=count`.
pub fn open_grid(hi: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|i| hi * i as f64 / count as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskCurveRow {
    pub tau: f64,
    pub risk: f64,
    pub risk_derivative: f64,
}

/// Soft-thresholding risk and its τ-derivative over a threshold grid.
pub fn risk_curve(prior: &Prior, sigma: f64, taus: &[f64]) -> Vec<RiskCurveRow> {
    taus.iter()
        .map(|&tau| RiskCurveRow {
            tau,
            risk: risk(prior, sigma, tau),
            risk_derivative: risk_derivative(prior, sigma, tau),
        })
        .collect()
}
