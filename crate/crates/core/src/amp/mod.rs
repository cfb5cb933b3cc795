//! The AMP iteration
//!
//! ```text
//! z^t     = y − A x^t + (|I^t|/n) z^{t−1}
//! x^{t+1} = η(x^t + Aᵀz^t; τ^t)
//! ```
//!
//! started from `x⁰ = 0`, `z⁻¹ = 0`, with `I^t` the support of `x^t`.
//! Runs are single-threaded and bitwise deterministic.

mod gaussianity;
mod threshold;

use ndarray::{Array1, Zip};
use thiserror::Error;

use crate::kernels::soft_threshold;
use crate::linalg::{norm, transpose_dot};
use crate::problem::ProblemInstance;

pub use gaussianity::{gaussianity_stats, GaussianityStats, StatsError, MIN_SAMPLES};
pub use threshold::{
    detection_rank, fixed_detection_tau, fixed_false_alarm_tau, median_abs_sigma, NoiseEstimator,
    ThresholdPolicy,
};

/// `‖x^t‖₂ > DIVERGENCE_FACTOR·‖y‖₂` aborts the run.
pub const DIVERGENCE_FACTOR: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AmpError {
    #[error("invalid threshold policy {0:?}")]
    InvalidPolicy(ThresholdPolicy),
    #[error("detection rank {rank} outside 1..={len}")]
    Rank { rank: usize, len: usize },
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error("AMP diverged at iteration {t}: ||x|| = {norm:e}")]
    Divergence { t: usize, norm: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmpOptions {
    pub max_iter: usize,
    /// Stop once `‖x^{t+1} − x^t‖₂ / max(‖x^t‖₂, 1e-12)` drops below this.
    pub conv_tol: f64,
    pub noise_estimator: NoiseEstimator,
    /// Compute kurtosis/KS of `v^t` every iteration (needs a sort of `v^t`).
    pub gaussianity: bool,
    /// `θ ∈ (0, 1]`: `x^{t+1} = θ·η(u^t; τ^t) + (1 − θ)·x^t`, with the Onsager
    /// coefficient taken from the support of `η(u^t; τ^t)`. `1` is plain AMP.
    /// Fixed points do not depend on `θ`.
    pub damping: f64,
}

impl Default for AmpOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            conv_tol: 1e-10,
            noise_estimator: NoiseEstimator::ResidualNorm,
            gaussianity: true,
            damping: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmpState {
    /// Iterations executed.
    pub t: usize,
    /// Last denoiser output `η(x^t + Aᵀz^t; τ^t)`; equals the iterate when undamped.
    pub x: Array1<f64>,
    pub z: Array1<f64>,
    /// Last threshold applied.
    pub tau: f64,
    /// Support size of the last denoiser output.
    pub active_count: usize,
}

/// One traced iteration `t`: the threshold `τ^t`, the residual `z^t` and
/// the resulting `x^{t+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmpTraceRow {
    pub t: usize,
    pub tau: f64,
    /// Support size of `η(x^t + Aᵀz^t; τ^t)`; `‖x^{t+1}‖₀` when undamped.
    pub active_count: usize,
    /// `|I^t|/n`, the coefficient applied to `z^{t−1}` (without damping).
    pub onsager: f64,
    /// `‖z^t‖₂/√n`.
    pub residual_norm: f64,
    /// `(1/N)‖x^{t+1} − x_o‖₂²`.
    pub mse: f64,
    /// `(1/N)‖v^t‖₂²` with `v^t = x^t + Aᵀz^t − x_o`.
    pub effective_noise_var: f64,
    pub gaussianity: Option<GaussianityStats>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AmpTrace {
    pub rows: Vec<AmpTraceRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmpRun {
    pub state: AmpState,
    pub trace: AmpTrace,
    pub converged: bool,
}

fn count_nonzero(x: &Array1<f64>) -> usize {
    x.iter().filter(|v| **v != 0.0).count()
}

/// Runs AMP on `instance` until the relative change of `x` falls below
/// `options.conv_tol` or `options.max_iter` iterations have been executed.
pub fn amp_run(
    instance: &ProblemInstance,
    policy: ThresholdPolicy,
    options: &AmpOptions,
) -> Result<AmpRun, AmpError> {
    policy.validate()?;
    if options.max_iter == 0 {
        return Err(AmpError::InvalidOptions("max_iter must be >= 1".into()));
    }
    let theta = options.damping;
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(AmpError::InvalidOptions(format!(
            "damping {theta} not in (0, 1]"
        )));
    }
    let (n, big_n) = (instance.n_rows(), instance.n_cols());
    if let ThresholdPolicy::FixedDetection { gamma } = policy {
        let rank = detection_rank(gamma, n);
        if rank == 0 || rank > big_n {
            return Err(AmpError::Rank { rank, len: big_n });
        }
    }
    let a = &instance.a;
    let y = &instance.y;
    let y_norm = norm(y);

    let mut x = Array1::<f64>::zeros(big_n);
    let mut z_prev = Array1::<f64>::zeros(n);
    let mut z = Array1::<f64>::zeros(n);
    let mut u = Array1::<f64>::zeros(big_n);
    let mut x_next = Array1::<f64>::zeros(big_n);
    let mut denoised = Array1::<f64>::zeros(if theta < 1.0 { big_n } else { 0 });
    let mut scratch = Vec::with_capacity(big_n);
    let mut active = 0usize;
    let mut tau = 0.0;
    let mut converged = false;
    let mut trace = AmpTrace::default();

    for t in 0..options.max_iter {
        let onsager = active as f64 / n as f64;
        let ax = a.dot(&x);
        Zip::from(&mut z)
            .and(y)
            .and(&ax)
            .and(&z_prev)
            .for_each(|z, &y, &ax, &zp| *z = y - ax + onsager * zp);

        transpose_dot(a, z.view(), &mut u);
        u += &x;

        tau = match policy {
            ThresholdPolicy::FixedDetection { gamma } => {
                threshold::fixed_detection_tau_with(u.view(), gamma, n, &mut scratch)?
            }
            ThresholdPolicy::FixedFalseAlarm { beta } => match options.noise_estimator {
                NoiseEstimator::ResidualNorm => fixed_false_alarm_tau(z.view(), beta),
                NoiseEstimator::MedianAbsolute => beta * median_abs_sigma(u.view()),
            },
            ThresholdPolicy::FixedThreshold { tau } => tau,
        };
        Zip::from(&mut x_next)
            .and(&u)
            .for_each(|xn, &ui| *xn = soft_threshold(ui, tau));
        let denoised_active = count_nonzero(&x_next);
        if theta < 1.0 {
            denoised.assign(&x_next);
            Zip::from(&mut x_next)
                .and(&x)
                .for_each(|xn, &xo| *xn = theta * *xn + (1.0 - theta) * xo);
        }

        let next_norm = norm(&x_next);
        if !next_norm.is_finite() || next_norm > DIVERGENCE_FACTOR * y_norm {
            return Err(AmpError::Divergence {
                t: t + 1,
                norm: next_norm,
            });
        }

        let v = &u - &instance.x_o;
        let gaussianity = if options.gaussianity {
            gaussianity_stats(v.view()).ok()
        } else {
            None
        };
        let err = &x_next - &instance.x_o;
        trace.rows.push(AmpTraceRow {
            t,
            tau,
            active_count: denoised_active,
            onsager,
            residual_norm: norm(&z) / (n as f64).sqrt(),
            mse: err.dot(&err) / big_n as f64,
            effective_noise_var: v.dot(&v) / big_n as f64,
            gaussianity,
        });

        let change = norm(&(&x_next - &x)) / norm(&x).max(1e-12);
        std::mem::swap(&mut x, &mut x_next);
        std::mem::swap(&mut z, &mut z_prev);
        active = denoised_active;
        if change < options.conv_tol {
            converged = true;
            break;
        }
    }

    if theta < 1.0 && !trace.rows.is_empty() {
        x = denoised;
    }
    Ok(AmpRun {
        state: AmpState {
            t: trace.rows.len(),
            x,
            z: z_prev,
            tau,
            active_count: active,
        },
        trace,
        converged,
    })
}
