use ndarray::ArrayView1;
use thiserror::Error;

use crate::kernels::std_normal_cdf;

/// Minimum sample size accepted by [`gaussianity_stats`].
pub const MIN_SAMPLES: usize = 100;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum StatsError {
    #[error("need at least {MIN_SAMPLES} samples, got {0}")]
    TooShort(usize),
    /// Zero sample variance; no normal fit exists.
    #[error("sample has zero variance")]
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianityStats {
    pub excess_kurtosis: f64,
    /// Kolmogorov–Smirnov distance to `N(mean(v), var(v))`.
    pub ks_distance: f64,
}

/// Excess kurtosis and KS distance of `v` to its moment-matched normal.
pub fn gaussianity_stats(v: ArrayView1<f64>) -> Result<GaussianityStats, StatsError> {
    let n = v.len();
    if n < MIN_SAMPLES {
        return Err(StatsError::TooShort(n));
    }
    let nf = n as f64;
    let mean = v.sum() / nf;
    let (m2, m4) = v.iter().fold((0.0, 0.0), |(m2, m4), &x| {
        let d = (x - mean) * (x - mean);
        (m2 + d, m4 + d * d)
    });
    let (m2, m4) = (m2 / nf, m4 / nf);
    if !(m2 > 0.0) {
        return Err(StatsError::Degenerate);
    }
    let sd = m2.sqrt();
    let mut sorted = v.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let ks = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = std_normal_cdf((x - mean) / sd);
            ((i + 1) as f64 / nf - f).max(f - i as f64 / nf)
        })
        .fold(0.0, f64::max);
    Ok(GaussianityStats {
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
        ks_distance: ks,
    })
}
