//! Closed-form soft-thresholding risk, its threshold derivative, the
//! detection probability, and the Ψ map, all taken over a point-mass
//! mixture prior and independent Gaussian noise.
//!
//! Two coordinate systems appear here:
//!
//! * **absolute**: signal atom `x`, noise level `σ`, threshold `θ`, and the
//!   error `E_Z[(η(x + σZ; θ) − x)²]`;
//! * **normalized**: `μ = x/σ`, `t = θ/σ`, and `r(t; μ) = E_Z[(η(μ + Z; t) − μ)²]`.
//!
//! They are related by `risk_abs(x, σ, θ) = σ² · r(θ/σ; x/σ)` and
//! `∂risk_abs/∂θ = σ · ∂r/∂t`. The normalized form is what the fixed-point
//! equations use (`Ψ(σ²) = σ_w² + σ²/δ · E_μ r(β; X/σ)`).

use super::normal::{std_normal_cdf, std_normal_pdf, std_normal_sf, upper_partial_expectation};
use super::prior::Prior;

/// Soft thresholding `η(a; τ) = sign(a)·(|a| − τ)₊`.
#[inline]
pub fn soft_threshold(a: f64, tau: f64) -> f64 {
    if a > tau {
        a - tau
    } else if a < -tau {
        a + tau
    } else {
        0.0
    }
}

/// `P(lo < Z < hi)` for `lo ≤ hi`, evaluated on whichever tail keeps precision.
#[inline]
fn interval_prob(lo: f64, hi: f64) -> f64 {
    if lo >= 0.0 {
        std_normal_sf(lo) - std_normal_sf(hi)
    } else if hi <= 0.0 {
        std_normal_cdf(hi) - std_normal_cdf(lo)
    } else {
        1.0 - std_normal_sf(hi) - std_normal_cdf(lo)
    }
}

/// Normalized risk `r(t; μ) = E[(η(μ + Z; t) − μ)²]`.
///
/// Splits the expectation over `{μ+Z ≥ t}`, `{μ+Z ≤ −t}` and the dead zone:
/// with `a = t − μ`, `b = −t − μ`,
/// `r = (1+t²)Q(a) − (t+μ)φ(a) + (1+t²)Φ(b) − (t−μ)φ(b) + μ²·P(b < Z < a)`.
pub fn normalized_atom_risk(mu: f64, t: f64) -> f64 {
    let a = t - mu;
    let b = -t - mu;
    let c = 1.0 + t * t;
    let upper = c * std_normal_sf(a) - (t + mu) * std_normal_pdf(a);
    let lower = c * std_normal_cdf(b) - (t - mu) * std_normal_pdf(b);
    let dead = mu * mu * interval_prob(b, a);
    (upper.max(0.0) + lower.max(0.0) + dead).max(0.0)
}

/// `∂r(t; μ)/∂t`.
///
/// From `∂r/∂t = 2t(Q(t+μ) + Q(t−μ)) − 2(φ(t+μ) + φ(t−μ))`, rearranged as
/// `2[μ·P(t−|μ| < Z < t+|μ|) − G(t+μ) − G(t−μ)]` with
/// `G(a) = ∫_a^∞ (z−a)φ(z)dz` so that the sign stays reliable deep in the tail.
/// At `μ = 0` this is `−4G(t) < 0`; at `t = 0` it is `−4φ(μ) < 0`.
pub fn normalized_atom_risk_derivative(mu: f64, t: f64) -> f64 {
    let m = mu.abs();
    let spread = m * interval_prob(t - m, t + m);
    2.0 * (spread - upper_partial_expectation(t + m) - upper_partial_expectation(t - m))
}

/// Absolute-scale error of one atom: `E_Z[(η(x + σZ; θ) − x)²]`.
pub fn atom_risk(x: f64, sigma: f64, theta: f64) -> f64 {
    debug_assert!(sigma > 0.0 && theta >= 0.0);
    sigma * sigma * normalized_atom_risk(x / sigma, theta / sigma)
}

/// Absolute-scale mixture risk `E_{X,Z}[(η(X + σZ; θ) − X)²]`.
///
/// With `σ = 1` this is the normalized `r(θ; G)` for `G` = law of the atoms.
pub fn risk(prior: &Prior, sigma: f64, theta: f64) -> f64 {
    prior
        .atoms()
        .iter()
        .map(|a| a.weight * atom_risk(a.value, sigma, theta))
        .sum()
}

/// `∂/∂θ` of [`risk`] in absolute scale, i.e. `σ · E_X[∂r/∂t (θ/σ; X/σ)]`.
pub fn risk_derivative(prior: &Prior, sigma: f64, theta: f64) -> f64 {
    debug_assert!(sigma > 0.0 && theta >= 0.0);
    let t = theta / sigma;
    sigma
        * prior
            .atoms()
            .iter()
            .map(|a| a.weight * normalized_atom_risk_derivative(a.value / sigma, t))
            .sum::<f64>()
}

/// `P(|X + σZ| > θ)`.
pub fn detection_prob(prior: &Prior, sigma: f64, theta: f64) -> f64 {
    debug_assert!(sigma > 0.0 && theta >= 0.0);
    let p: f64 = prior
        .atoms()
        .iter()
        .map(|a| {
            a.weight
                * (std_normal_sf((theta - a.value) / sigma)
                    + std_normal_cdf((-theta - a.value) / sigma))
        })
        .sum();
    p.clamp(0.0, 1.0)
}

/// Parameters of the Ψ map; see [`psi_map`].
#[derive(Debug, Clone, PartialEq)]
pub struct PsiParams {
    pub delta: f64,
    pub sigma_w_sq: f64,
    pub prior: Prior,
    pub beta: f64,
}

impl PsiParams {
    pub fn new(delta: f64, sigma_w_sq: f64, prior: Prior, beta: f64) -> Option<Self> {
        (delta > 0.0 && delta <= 1.0 && sigma_w_sq >= 0.0 && beta >= 0.0).then_some(Self {
            delta,
            sigma_w_sq,
            prior,
            beta,
        })
    }
}

/// `Ψ(σ²) = σ_w² + (1/δ)·E[(η(X + σZ; βσ) − X)²]`.
pub fn psi_map(sigma_sq: f64, p: &PsiParams) -> f64 {
    debug_assert!(sigma_sq > 0.0);
    let sigma = sigma_sq.sqrt();
    p.sigma_w_sq + risk(&p.prior, sigma, p.beta * sigma) / p.delta
}
