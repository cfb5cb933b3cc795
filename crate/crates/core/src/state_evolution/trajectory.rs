use super::{tau_for_detection, SeModel};
use crate::amp::ThresholdPolicy;
use crate::kernels::{detection_prob, risk};

/// One step of the state-evolution recursion.
///
/// `sigma` is the predicted standard deviation of the effective noise
/// `v^t = x^t + Aᵀz^t − x_o`, `tau` the threshold applied at step `t`, and
/// `mse`/`detection` the predicted `(1/N)‖x^{t+1} − x_o‖²` and `‖x^{t+1}‖₀/N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeStep {
    pub t: usize,
    pub sigma: f64,
    pub tau: f64,
    pub mse: f64,
    pub detection: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeTrajectory {
    pub steps: Vec<SeStep>,
}

impl SeTrajectory {
    pub fn last(&self) -> &SeStep {
        self.steps.last().expect("trajectory is never empty")
    }
}

/// Runs `σ²_{t+1} = σ_w² + (1/δ)·E[(η(X + σ_t Z; τ_t) − X)²]` for
/// `t = 0..=t_max`.
///
/// AMP starts from `x⁰ = 0`, whose error is `E[X²]`, so
/// `σ_0² = σ_w² + E[X²]/δ`; in the noiseless case this is `E[X²]/δ`.
pub fn se_trajectory(model: &SeModel, policy: &ThresholdPolicy, t_max: usize) -> SeTrajectory {
    let prior = model.prior();
    let mut sigma_sq = model.null_sigma_sq();
    let mut steps = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        let sigma = sigma_sq.sqrt();
        let tau = match *policy {
            ThresholdPolicy::FixedDetection { gamma } => {
                tau_for_detection(prior, sigma, gamma * model.delta())
            }
            ThresholdPolicy::FixedFalseAlarm { beta } => beta * sigma,
            ThresholdPolicy::FixedThreshold { tau } => tau,
        };
        let mse = risk(prior, sigma, tau);
        steps.push(SeStep {
            t,
            sigma,
            tau,
            mse,
            detection: detection_prob(prior, sigma, tau),
        });
        sigma_sq = model.sigma_w_sq() + mse / model.delta();
    }
    SeTrajectory { steps }
}
