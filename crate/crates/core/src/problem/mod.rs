//! Seeded compressed-sensing instances `y = A x_o + w` and the standard
//! per-coordinate observables of an estimate.

mod dump;
mod observables;
pub mod rng;

use std::fmt;

use ndarray::{Array1, Array2};
use rand::Rng;
use thiserror::Error;

use crate::kernels::Prior;
use rng::{stream_rng, GaussianStream, Stream};

pub use dump::{read_instance_dump, write_instance_dump, InstanceDump};
pub use observables::{compute_observables, Observables};

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("invalid instance config: {0}")]
    InvalidConfig(String),
    #[error("malformed instance dump: {0}")]
    Dump(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Sign of the nonzero entries of a k-sparse signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignPattern {
    Positive,
    /// Independent fair ±1 signs.
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SignalSpec {
    /// `k` entries of magnitude `amplitude` on a uniformly random support.
    Sparse {
        k: usize,
        amplitude: f64,
        signs: SignPattern,
    },
    /// Entries drawn iid from a prior.
    Iid(Prior),
}

impl SignalSpec {
    /// Prior whose law matches the empirical distribution of the signal.
    pub fn limiting_prior(&self, n_cols: usize) -> Result<Prior, ProblemError> {
        match self {
            SignalSpec::Iid(p) => Ok(p.clone()),
            SignalSpec::Sparse {
                k,
                amplitude,
                signs,
            } => {
                let eps = *k as f64 / n_cols as f64;
                let p = if *k == 0 || *amplitude == 0.0 {
                    Ok(Prior::point_mass_zero())
                } else {
                    match signs {
                        SignPattern::Positive => Prior::one_sided_sparse(eps, *amplitude),
                        SignPattern::Random => Prior::symmetric_sparse(eps, *amplitude),
                    }
                };
                p.map_err(|e| ProblemError::InvalidConfig(e.to_string()))
            }
        }
    }
}

impl fmt::Display for SignalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignalSpec::Sparse {
                k,
                amplitude,
                signs,
            } => {
                write!(f, "sparse(k={k},amplitude={amplitude},signs={signs:?})")
            }
            SignalSpec::Iid(p) => write!(f, "iid({p})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceConfig {
    pub n_rows: usize,
    pub n_cols: usize,
    pub signal: SignalSpec,
    pub noise_variance: f64,
    pub seed: u64,
}

impl InstanceConfig {
    pub fn delta(&self) -> f64 {
        self.n_rows as f64 / self.n_cols as f64
    }
}

impl fmt::Display for InstanceConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n_rows={};n_cols={};signal={};noise_variance={};seed={}",
            self.n_rows, self.n_cols, self.signal, self.noise_variance, self.seed
        )
    }
}

/// Measurement matrix, signal, noise and observations.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub a: Array2<f64>,
    pub x_o: Array1<f64>,
    pub w: Array1<f64>,
    pub y: Array1<f64>,
}

impl ProblemInstance {
    /// Assembles an instance with `y = A·x_o + w`.
    pub fn from_parts(
        a: Array2<f64>,
        x_o: Array1<f64>,
        w: Array1<f64>,
    ) -> Result<Self, ProblemError> {
        let (n, big_n) = a.dim();
        if x_o.len() != big_n || w.len() != n {
            return Err(ProblemError::Dimension(format!(
                "A is {n}x{big_n}, x_o has {}, w has {}",
                x_o.len(),
                w.len()
            )));
        }
        let y = a.dot(&x_o) + &w;
        Ok(Self { a, x_o, w, y })
    }

    pub fn n_rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.a.ncols()
    }

    /// `(min, max)` of the column ℓ₂ norms of `A`.
    pub fn column_norm_range(&self) -> (f64, f64) {
        self.a
            .columns()
            .into_iter()
            .map(|c| c.dot(&c).sqrt())
            .fold((f64::INFINITY, 0.0), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }
}

/// Draws an instance: `A_ij ~ N(0, 1/n)`, `x_o` from the signal spec, and
/// `w_i ~ N(0, noise_variance)`.
///
/// Bit-for-bit reproducible for a fixed config.
pub fn sample_instance(cfg: &InstanceConfig) -> Result<ProblemInstance, ProblemError> {
    let (n, big_n) = (cfg.n_rows, cfg.n_cols);
    if n == 0 || big_n == 0 {
        return Err(ProblemError::InvalidConfig(
            "dimensions must be >= 1".into(),
        ));
    }
    if !(cfg.noise_variance >= 0.0 && cfg.noise_variance.is_finite()) {
        return Err(ProblemError::InvalidConfig(format!(
            "noise variance {} must be >= 0",
            cfg.noise_variance
        )));
    }
    if let SignalSpec::Sparse { k, .. } = cfg.signal {
        if k > big_n {
            return Err(ProblemError::Dimension(format!(
                "k = {k} exceeds N = {big_n}"
            )));
        }
    }
    if n > big_n {
        log::warn!("n = {n} > N = {big_n}: instance is not undersampled");
    }

    let scale = 1.0 / (n as f64).sqrt();
    let mut g = GaussianStream::new(stream_rng(cfg.seed, Stream::Matrix));
    let a = Array2::from_shape_simple_fn((n, big_n), || scale * g.next_normal());

    let mut rng = stream_rng(cfg.seed, Stream::Signal);
    let mut x_o = Array1::zeros(big_n);
    match &cfg.signal {
        SignalSpec::Sparse {
            k,
            amplitude,
            signs,
        } => {
            for i in rand::seq::index::sample(&mut rng, big_n, *k).into_iter() {
                let sign = match signs {
                    SignPattern::Positive => 1.0,
                    SignPattern::Random => {
                        if rng.random::<bool>() {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                };
                x_o[i] = sign * amplitude;
            }
        }
        SignalSpec::Iid(prior) => {
            for v in x_o.iter_mut() {
                *v = prior.quantile(rng.random::<f64>());
            }
        }
    }

    let sd = cfg.noise_variance.sqrt();
    let mut g = GaussianStream::new(stream_rng(cfg.seed, Stream::Noise));
    let w = if sd > 0.0 {
        Array1::from_shape_simple_fn(n, || sd * g.next_normal())
    } else {
        Array1::zeros(n)
    };
    ProblemInstance::from_parts(a, x_o, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(k: usize, noise: f64, seed: u64) -> InstanceConfig {
        InstanceConfig {
            n_rows: 100,
            n_cols: 200,
            signal: SignalSpec::Sparse {
                k,
                amplitude: 1.0,
                signs: SignPattern::Random,
            },
            noise_variance: noise,
            seed,
        }
    }

    #[test]
    fn empty_support() {
        let inst = sample_instance(&cfg(0, 0.3, 1)).unwrap();
        assert!(inst.x_o.iter().all(|&v| v == 0.0));
        assert_eq!(inst.y, inst.w);
    }

    #[test]
    fn noiseless() {
        let inst = sample_instance(&cfg(10, 0.0, 2)).unwrap();
        assert_eq!(inst.y, inst.a.dot(&inst.x_o));
        assert_eq!(inst.x_o.iter().filter(|v| **v != 0.0).count(), 10);
        assert!(inst.x_o.iter().all(|v| v.abs() == 1.0 || *v == 0.0));
    }

    #[test]
    fn reproducible_and_matrix_independent_of_signal() {
        let a = sample_instance(&cfg(10, 0.1, 42)).unwrap();
        let b = sample_instance(&cfg(10, 0.1, 42)).unwrap();
        assert_eq!(a, b);
        let c = sample_instance(&cfg(20, 0.1, 42)).unwrap();
        assert_eq!(a.a, c.a);
        assert_eq!(a.w, c.w);
        assert_ne!(a.x_o, c.x_o);
        let d = sample_instance(&cfg(10, 0.1, 43)).unwrap();
        assert_ne!(a.a, d.a);
    }

    #[test]
    fn too_many_nonzeros() {
        assert!(matches!(
            sample_instance(&cfg(201, 0.0, 1)),
            Err(ProblemError::Dimension(_))
        ));
    }

    #[test]
    fn iid_prior_second_moment() {
        let prior = Prior::symmetric_sparse(0.2, 2.0).unwrap();
        let big_n = 20_000;
        for seed in 0..5 {
            let c = InstanceConfig {
                n_rows: 10,
                n_cols: big_n,
                signal: SignalSpec::Iid(prior.clone()),
                noise_variance: 0.0,
                seed,
            };
            let inst = sample_instance(&c).unwrap();
            let m2 = inst.x_o.dot(&inst.x_o) / big_n as f64;
            assert!((m2 - prior.second_moment()).abs() < 4.0 / (big_n as f64).sqrt());
        }
    }

    #[test]
    fn column_norms_concentrate() {
        let n = 100;
        let bound = 5.0 / (n as f64).sqrt();
        for seed in 0..100 {
            let inst = sample_instance(&InstanceConfig {
                n_rows: n,
                n_cols: 150,
                signal: SignalSpec::Sparse {
                    k: 0,
                    amplitude: 1.0,
                    signs: SignPattern::Positive,
                },
                noise_variance: 0.0,
                seed,
            })
            .unwrap();
            let (lo, hi) = inst.column_norm_range();
            assert!(
                lo >= 1.0 - bound && hi <= 1.0 + bound,
                "seed {seed}: {lo} {hi}"
            );
        }
    }

    #[test]
    fn limiting_prior_matches_sparse_spec() {
        let p = cfg(20, 0.0, 0).signal.limiting_prior(200).unwrap();
        assert!((p.zero_mass() - 0.9).abs() < 1e-15);
        assert!((p.second_moment() - 0.1).abs() < 1e-15);
    }
}
