//! Scalar state evolution for the LASSO and for AMP.
//!
//! For a fixed `β`, the effective noise level `σ̂` of the LASSO solution is the
//! unique fixed point of
//!
//! ```text
//! σ̂² = σ_w² + (1/δ)·E[(η(X + σ̂Z; βσ̂) − X)²]
//! ```
//!
//! and the corresponding regularization parameter is
//! `λ = βσ̂·(1 − P(|X + σ̂Z| > βσ̂)/δ)`. Writing `γ = P(|X + σ̂Z| > βσ̂)/δ` and
//! `τ = βσ̂` gives the fixed-detection form `λ = τ(1 − γ)`.
//!
//! Everything here is a pure function of an [`SeModel`].

mod calibrate;
mod trajectory;

use thiserror::Error;

use crate::kernels::{detection_prob, normalized_atom_risk, psi_map, risk, Prior, PsiParams};

pub use calibrate::{
    beta_of_lambda, calibrate_gamma, calibrate_gamma_alternating, lambda_of_beta, lasso_path,
    min_beta, tau_for_detection, zero_lambda_beta,
};
pub use trajectory::{se_trajectory, SeStep, SeTrajectory};

/// Relative residual target for `|Ψ(σ²) − σ²|`.
pub const FIXED_POINT_TOL: f64 = 1e-13;
/// Iteration cap for any scalar fixed-point solve.
pub const MAX_FIXED_POINT_ITERS: usize = 10_000;
/// Upper end of every bracket on `β`.
pub const BETA_MAX: f64 = 50.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("fixed-point iteration did not converge ({0})")]
    NonConvergence(String),
    #[error("beta = {beta} gives negative lambda (detection/delta = {gamma}); increase beta")]
    NegativeLambda { beta: f64, gamma: f64 },
    #[error("no bracket for target {target} in beta range [{lo}, {hi}]")]
    BracketFailure { target: f64, lo: f64, hi: f64 },
}

/// Undersampling ratio, noise variance and signal prior.
#[derive(Debug, Clone, PartialEq)]
pub struct SeModel {
    delta: f64,
    sigma_w_sq: f64,
    prior: Prior,
}

impl SeModel {
    /// `delta ∈ (0, 1)`, `sigma_w_sq > 0`.
    pub fn new(delta: f64, sigma_w_sq: f64, prior: Prior) -> Result<Self, SeError> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(SeError::InvalidModel(format!(
                "delta = {delta} not in (0, 1)"
            )));
        }
        if !(sigma_w_sq > 0.0 && sigma_w_sq.is_finite()) {
            return Err(SeError::InvalidModel(format!(
                "sigma_w_sq = {sigma_w_sq} must be > 0"
            )));
        }
        Ok(Self {
            delta,
            sigma_w_sq,
            prior,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn sigma_w_sq(&self) -> f64 {
        self.sigma_w_sq
    }

    pub fn prior(&self) -> &Prior {
        &self.prior
    }

    pub fn psi_params(&self, beta: f64) -> PsiParams {
        PsiParams {
            delta: self.delta,
            sigma_w_sq: self.sigma_w_sq,
            prior: self.prior.clone(),
            beta,
        }
    }

    /// `σ_w² + E[X²]/δ`, the value of Ψ when everything is thresholded away.
    pub fn null_sigma_sq(&self) -> f64 {
        self.sigma_w_sq + self.prior.second_moment() / self.delta
    }

    /// Assembles a full [`SePoint`] from an effective noise level and threshold.
    pub fn point(&self, sigma_hat: f64, tau: f64) -> SePoint {
        let detection = detection_prob(&self.prior, sigma_hat, tau);
        let gamma = detection / self.delta;
        SePoint {
            sigma_hat,
            beta: tau / sigma_hat,
            tau,
            lambda: tau * (1.0 - gamma),
            gamma,
            mse: risk(&self.prior, sigma_hat, tau),
            detection,
        }
    }
}

/// A solution of the coupled fixed-point system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SePoint {
    pub sigma_hat: f64,
    pub beta: f64,
    /// `β·σ̂`
    pub tau: f64,
    pub lambda: f64,
    /// detection / δ
    pub gamma: f64,
    /// `E[(η(X + σ̂Z; τ) − X)²]`
    pub mse: f64,
    /// `P(|X + σ̂Z| > τ)`
    pub detection: f64,
}

impl SePoint {
    /// `|σ̂² − σ_w² − mse/δ| / max(1, σ̂²)`.
    pub fn noise_residual(&self, model: &SeModel) -> f64 {
        let s2 = self.sigma_hat * self.sigma_hat;
        (s2 - model.sigma_w_sq - self.mse / model.delta).abs() / s2.max(1.0)
    }

    /// `|λ − βσ̂(1 − P(|X+σ̂Z| > βσ̂)/δ)| / max(1, σ̂²)`.
    pub fn lambda_residual(&self, model: &SeModel) -> f64 {
        let s2 = self.sigma_hat * self.sigma_hat;
        let det = detection_prob(&model.prior, self.sigma_hat, self.beta * self.sigma_hat);
        let lam = self.beta * self.sigma_hat * (1.0 - det / model.delta);
        (self.lambda - lam).abs() / s2.max(1.0)
    }

    /// MSE restated through the noise equation: `δ(σ̂² − σ_w²)`.
    pub fn mse_from_sigma(&self, model: &SeModel) -> f64 {
        model.delta * (self.sigma_hat * self.sigma_hat - model.sigma_w_sq)
    }
}

/// Steffensen-accelerated iteration of `s ↦ map(s)` on `(0, ∞)`.
///
/// Stops once `|map(s) − s| ≤ tol·max(1, s)` and returns that `s`.
pub(crate) fn scalar_fixed_point(
    mut map: impl FnMut(f64) -> f64,
    start: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64, SeError> {
    let mut s0 = start;
    let mut evals = 0;
    while evals < max_iter {
        let s1 = map(s0);
        evals += 1;
        if !s1.is_finite() {
            return Err(SeError::NonConvergence(format!("map diverged from {s0}")));
        }
        if (s1 - s0).abs() <= tol * s0.max(1.0) {
            return Ok(s0);
        }
        let s2 = map(s1);
        evals += 1;
        if (s2 - s1).abs() <= tol * s1.max(1.0) {
            return Ok(s1);
        }
        let denom = s2 - 2.0 * s1 + s0;
        let accel = s0 - (s1 - s0) * (s1 - s0) / denom;
        s0 = if denom != 0.0 && accel.is_finite() && accel > 0.0 {
            accel
        } else {
            s2
        };
    }
    Err(SeError::NonConvergence(format!(
        "{max_iter} iterations exceeded, last iterate {s0}"
    )))
}

/// Unique fixed point `σ̂²` of Ψ for the given `β`, started from `init_sigma_sq`.
pub fn solve_sigma_sq_from(model: &SeModel, beta: f64, init_sigma_sq: f64) -> Result<f64, SeError> {
    if !(beta >= 0.0) {
        return Err(SeError::InvalidArgument(format!(
            "beta = {beta} must be >= 0"
        )));
    }
    if !(init_sigma_sq > 0.0) {
        return Err(SeError::InvalidArgument(format!(
            "initial sigma^2 = {init_sigma_sq} must be > 0"
        )));
    }
    // Ψ is concave with asymptotic slope r(β; 0)/δ; at or above one there is
    // no finite fixed point.
    let slope = normalized_atom_risk(0.0, beta) / model.delta;
    if slope >= 1.0 {
        return Err(SeError::NonConvergence(format!(
            "beta = {beta} is below the stability limit (asymptotic slope {slope})"
        )));
    }
    let params = model.psi_params(beta);
    scalar_fixed_point(
        |s| psi_map(s.max(f64::MIN_POSITIVE), &params),
        init_sigma_sq,
        FIXED_POINT_TOL,
        MAX_FIXED_POINT_ITERS,
    )
}

/// `σ̂` (not squared) for the given `β`.
pub fn solve_sigma_for_beta(model: &SeModel, beta: f64) -> Result<f64, SeError> {
    solve_sigma_sq_from(model, beta, model.null_sigma_sq()).map(f64::sqrt)
}

/// Counts strict sign changes of a sequence, ignoring entries with
/// `|v| ≤ margin`. Returns `(count, first_sign, last_sign)`.
pub fn sign_changes(values: impl IntoIterator<Item = f64>, margin: f64) -> (usize, i8, i8) {
    let mut count = 0;
    let mut first = 0i8;
    let mut last = 0i8;
    for v in values {
        let s = if v > margin {
            1
        } else if v < -margin {
            -1
        } else {
            continue;
        };
        if first == 0 {
            first = s;
        } else if s != last {
            count += 1;
        }
        last = s;
    }
    (count, first, last)
}
