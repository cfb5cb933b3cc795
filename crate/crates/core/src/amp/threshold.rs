use ndarray::ArrayView1;

use super::AmpError;

/// How AMP picks `τ^t` each iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdPolicy {
    /// `τ^t` = the `⌊γn⌋`-th largest magnitude of `x^t + Aᵀz^t`.
    FixedDetection { gamma: f64 },
    /// `τ^t = β·σ̂^t` with `σ̂^t` estimated from the current iterate.
    FixedFalseAlarm { beta: f64 },
    /// Constant threshold.
    FixedThreshold { tau: f64 },
}

impl ThresholdPolicy {
    pub fn validate(&self) -> Result<(), AmpError> {
        let ok = match *self {
            ThresholdPolicy::FixedDetection { gamma } => gamma > 0.0 && gamma <= 1.0,
            ThresholdPolicy::FixedFalseAlarm { beta } => beta > 0.0 && beta.is_finite(),
            ThresholdPolicy::FixedThreshold { tau } => tau >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(AmpError::InvalidPolicy(*self))
        }
    }
}

/// Effective-noise estimator used by [`ThresholdPolicy::FixedFalseAlarm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseEstimator {
    /// `‖z^t‖₂/√n`
    #[default]
    ResidualNorm,
    /// `median|x^t + Aᵀz^t| / 0.6745`; biased upward by the signal.
    MedianAbsolute,
}

/// `⌊γn⌋`, robust to `γn` landing a rounding error below an integer.
pub fn detection_rank(gamma: f64, n: usize) -> usize {
    (gamma * n as f64 + 1e-9).floor() as usize
}

/// The `⌊γn⌋`-th largest `|uᵢ|`.
///
/// Uses introselect (`select_nth_unstable_by`), linear time on average. Only
/// the selected magnitude is returned, so how ties are ordered does not
/// affect the result. With continuous data exactly `⌊γn⌋ − 1` entries
/// exceed the returned value, and the marginal entry is set to zero by
/// `η(±τ; τ) = 0`.
pub fn fixed_detection_tau(u: ArrayView1<f64>, gamma: f64, n: usize) -> Result<f64, AmpError> {
    let mut scratch = Vec::with_capacity(u.len());
    fixed_detection_tau_with(u, gamma, n, &mut scratch)
}

pub(crate) fn fixed_detection_tau_with(
    u: ArrayView1<f64>,
    gamma: f64,
    n: usize,
    scratch: &mut Vec<f64>,
) -> Result<f64, AmpError> {
    let rank = detection_rank(gamma, n);
    if rank == 0 || rank > u.len() {
        return Err(AmpError::Rank { rank, len: u.len() });
    }
    scratch.clear();
    scratch.extend(u.iter().map(|v| v.abs()));
    let idx = scratch.len() - rank;
    let (_, kth, _) = scratch.select_nth_unstable_by(idx, f64::total_cmp);
    Ok(*kth)
}

/// `β·σ̂` with `σ̂ = ‖z‖₂/√n`.
pub fn fixed_false_alarm_tau(z: ArrayView1<f64>, beta: f64) -> f64 {
    let n = z.len().max(1) as f64;
    beta * (z.dot(&z) / n).sqrt()
}

/// `median|u| / 0.6745`.
pub fn median_abs_sigma(u: ArrayView1<f64>) -> f64 {
    if u.is_empty() {
        return 0.0;
    }
    let mut m: Vec<f64> = u.iter().map(|v| v.abs()).collect();
    let mid = m.len() / 2;
    let (_, med, _) = m.select_nth_unstable_by(mid, f64::total_cmp);
    *med / 0.6745
}
