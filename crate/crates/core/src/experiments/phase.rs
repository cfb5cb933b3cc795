use rayon::prelude::*;

use crate::amp::{amp_run, AmpOptions, ThresholdPolicy};
use crate::linalg::norm;
use crate::problem::rng::derive_seed;
use crate::problem::{sample_instance, InstanceConfig, SignPattern, SignalSpec};

use super::{linspace, rho_of_delta, ExperimentError};

/// Monte Carlo phase-transition experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGridConfig {
    /// Signal length `N`.
    pub n_signal: usize,
    pub delta_grid: Vec<f64>,
    /// `ρ` is swept over `[lo·ρ(δ), hi·ρ(δ)]`.
    pub rho_band: (f64, f64),
    pub rho_points: usize,
    pub trials: usize,
    /// Success means `‖x̂ − x_o‖₂/‖x_o‖₂ < tol`.
    pub tol: f64,
    pub max_iter: usize,
    pub gamma: f64,
    pub base_seed: u64,
}

impl Default for PhaseGridConfig {
    fn default() -> Self {
        Self {
            n_signal: 1000,
            delta_grid: linspace(0.1, 0.9, 20),
            rho_band: (0.8, 1.2),
            rho_points: 50,
            trials: 20,
            tol: 1e-2,
            max_iter: 500,
            gamma: 1.0,
            base_seed: 0,
        }
    }
}

impl PhaseGridConfig {
    fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Config(m.into()));
        if self.n_signal == 0 || self.trials == 0 || self.rho_points < 2 || self.max_iter == 0 {
            return bad("n_signal, trials, max_iter must be >= 1 and rho_points >= 2");
        }
        if self.delta_grid.is_empty() || self.delta_grid.iter().any(|d| !(*d > 0.0 && *d < 1.0)) {
            return bad("delta grid must be non-empty and inside (0, 1)");
        }
        let (lo, hi) = self.rho_band;
        if !(lo > 0.0 && hi > lo) {
            return bad("rho band must satisfy 0 < lo < hi");
        }
        if !(self.tol > 0.0) || !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("tol must be > 0 and gamma in (0, 1]");
        }
        Ok(())
    }
}

/// One `(δ, ρ)` cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCell {
    pub delta: f64,
    pub rho: f64,
    pub n: usize,
    pub k: usize,
    pub successes: usize,
    pub trials: usize,
}

impl PhaseCell {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

/// Success fractions over the per-δ ρ bands.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    pub deltas: Vec<f64>,
    /// Curve value `ρ(δ)` for each δ.
    pub curve: Vec<f64>,
    /// `cells[i][j]`: δ index `i`, band index `j` (ρ increasing).
    pub cells: Vec<Vec<PhaseCell>>,
}

/// Recovery outcome of one noiseless AMP trial.
pub fn phase_trial(
    n: usize,
    n_signal: usize,
    k: usize,
    seed: u64,
    gamma: f64,
    tol: f64,
    max_iter: usize,
) -> Result<bool, ExperimentError> {
    let inst = sample_instance(&InstanceConfig {
        n_rows: n,
        n_cols: n_signal,
        signal: SignalSpec::Sparse {
            k,
            amplitude: 1.0,
            signs: SignPattern::Random,
        },
        noise_variance: 0.0,
        seed,
    })?;
    let opts = AmpOptions {
        max_iter,
        gaussianity: false,
        ..AmpOptions::default()
    };
    let x = match amp_run(&inst, ThresholdPolicy::FixedDetection { gamma }, &opts) {
        Ok(run) => run.state.x,
        Err(crate::amp::AmpError::Divergence { .. }) => return Ok(false),
        Err(e) => return Err(e.into()),
    };
    let err = norm(&(&x - &inst.x_o));
    let scale = norm(&inst.x_o);
    Ok(if scale > 0.0 {
        err / scale < tol
    } else {
        err < tol
    })
}

/// Runs every `(δ, ρ, trial)` job. Trial seeds are
/// `derive_seed(base_seed, [i, j, trial])`, and results are reduced by index,
/// so the grid does not depend on scheduling or thread count.
pub fn phase_transition_grid(cfg: &PhaseGridConfig) -> Result<PhaseGrid, ExperimentError> {
    cfg.validate()?;
    let curve = cfg
        .delta_grid
        .iter()
        .map(|&d| rho_of_delta(d))
        .collect::<Result<Vec<_>, _>>()?;
    let mut cells: Vec<Vec<PhaseCell>> = Vec::with_capacity(cfg.delta_grid.len());
    for (&delta, &rho_c) in cfg.delta_grid.iter().zip(&curve) {
        let n = ((delta * cfg.n_signal as f64) + 1e-9).floor() as usize;
        if n == 0 {
            return Err(ExperimentError::Config(format!(
                "delta = {delta} gives n = 0"
            )));
        }
        let band = linspace(
            cfg.rho_band.0 * rho_c,
            cfg.rho_band.1 * rho_c,
            cfg.rho_points,
        );
        cells.push(
            band.into_iter()
                .map(|rho| PhaseCell {
                    delta,
                    rho,
                    n,
                    k: ((rho * n as f64) + 1e-9).floor().min(cfg.n_signal as f64) as usize,
                    successes: 0,
                    trials: cfg.trials,
                })
                .collect(),
        );
    }

    let jobs: Vec<(usize, usize, usize)> = (0..cells.len())
        .flat_map(|i| {
            (0..cfg.rho_points).flat_map(move |j| (0..cfg.trials).map(move |t| (i, j, t)))
        })
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(i, j, t)| {
            let c = &cells[i][j];
            let seed = derive_seed(cfg.base_seed, &[i as u64, j as u64, t as u64]);
            phase_trial(
                c.n,
                cfg.n_signal,
                c.k,
                seed,
                cfg.gamma,
                cfg.tol,
                cfg.max_iter,
            )
        })
        .collect::<Result<Vec<bool>, _>>()?;
    for (&(i, j, _), ok) in jobs.iter().zip(outcomes) {
        if ok {
            cells[i][j].successes += 1;
        }
    }
    Ok(PhaseGrid {
        deltas: cfg.delta_grid.clone(),
        curve,
        cells,
    })
}

impl PhaseGrid {
    /// Empirical 50% crossing along the band at δ index `i`.
    ///
    /// Takes the first band step where the success rate falls from `≥ ½` to
    /// `< ½` and interpolates linearly in ρ. `None` if the band never
    /// crosses.
    pub fn crossing_rho(&self, i: usize) -> Option<f64> {
        let row = &self.cells[i];
        row.windows(2).find_map(|w| {
            let (p0, p1) = (w[0].success_rate(), w[1].success_rate());
            (p0 >= 0.5 && p1 < 0.5)
                .then(|| w[0].rho + (p0 - 0.5) / (p0 - p1) * (w[1].rho - w[0].rho))
        })
    }

    /// Success probabilities on a `rows × deltas` display grid with ρ rows
    /// equi-spaced between the curve values at the smallest and largest δ.
    ///
    /// Each δ column is interpolated linearly in ρ from its band; outside the
    /// band the nearest band value is used. Returns `(delta, rho, p)` triples,
    /// δ-major.
    pub fn interpolated_grid(&self, rows: usize) -> Vec<(f64, f64, f64)> {
        let lo = self.curve.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.curve.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let rhos = linspace(lo, hi, rows);
        let mut out = Vec::with_capacity(rows * self.deltas.len());
        for (i, &delta) in self.deltas.iter().enumerate() {
            let band = &self.cells[i];
            for &rho in &rhos {
                out.push((delta, rho, interp_band(band, rho)));
            }
        }
        out
    }
}

fn interp_band(band: &[PhaseCell], rho: f64) -> f64 {
    let first = band.first().expect("band is never empty");
    let last = band.last().expect("band is never empty");
    if rho <= first.rho {
        return first.success_rate();
    }
    if rho >= last.rho {
        return last.success_rate();
    }
    let j = band.partition_point(|c| c.rho <= rho).max(1);
    let (a, b) = (&band[j - 1], &band[j]);
    let w = (rho - a.rho) / (b.rho - a.rho);
    (1.0 - w) * a.success_rate() + w * b.success_rate()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(deltas: Vec<f64>, band: (f64, f64)) -> PhaseGridConfig {
        PhaseGridConfig {
            n_signal: 200,
            delta_grid: deltas,
            rho_band: band,
            rho_points: 2,
            trials: 4,
            max_iter: 300,
            base_seed: 5,
            ..PhaseGridConfig::default()
        }
    }

    #[test]
    fn defaults() {
        let c = PhaseGridConfig::default();
        assert_eq!(c.n_signal, 1000);
        assert_eq!(c.delta_grid.len(), 20);
        assert_eq!(c.delta_grid[0], 0.1);
        assert!((c.delta_grid[19] - 0.9).abs() < 1e-15);
        assert_eq!((c.rho_band, c.rho_points, c.trials), ((0.8, 1.2), 50, 20));
        assert_eq!((c.tol, c.max_iter, c.gamma), (1e-2, 500, 1.0));
    }

    #[test]
    fn easy_and_hard_regimes() {
        let easy = phase_transition_grid(&tiny(vec![0.5], (0.4, 0.5))).unwrap();
        assert!(
            easy.cells[0].iter().all(|c| c.successes == c.trials),
            "{easy:?}"
        );
        let hard = phase_transition_grid(&tiny(vec![0.5], (1.5, 1.6))).unwrap();
        assert!(
            hard.cells[0].iter().all(|c| c.success_rate() <= 0.25),
            "{hard:?}"
        );
    }

    #[test]
    fn deterministic() {
        let cfg = tiny(vec![0.3, 0.6], (0.8, 1.2));
        assert_eq!(
            phase_transition_grid(&cfg).unwrap(),
            phase_transition_grid(&cfg).unwrap()
        );
    }

    #[test]
    fn crossing_and_interpolation() {
        let cell = |rho, s| PhaseCell {
            delta: 0.5,
            rho,
            n: 10,
            k: 1,
            successes: s,
            trials: 4,
        };
        let grid = PhaseGrid {
            deltas: vec![0.5],
            curve: vec![0.4],
            cells: vec![vec![cell(0.3, 4), cell(0.4, 3), cell(0.5, 1), cell(0.6, 0)]],
        };
        // 0.75 → 0.25 between 0.4 and 0.5: crosses halfway
        assert!((grid.crossing_rho(0).unwrap() - 0.45).abs() < 1e-12);
        assert_eq!(interp_band(&grid.cells[0], 0.1), 1.0);
        assert_eq!(interp_band(&grid.cells[0], 0.9), 0.0);
        assert!((interp_band(&grid.cells[0], 0.35) - 0.875).abs() < 1e-12);
        let g = grid.interpolated_grid(3);
        assert_eq!(g.len(), 3);
        assert!(g.iter().all(|&(d, r, _)| d == 0.5 && r == 0.4));
    }

    #[test]
    fn rejects_bad_config() {
        let mut c = tiny(vec![0.5], (0.8, 1.2));
        c.delta_grid = vec![1.2];
        assert!(matches!(
            phase_transition_grid(&c),
            Err(ExperimentError::Config(_))
        ));
        let mut c = tiny(vec![0.5], (1.2, 0.8));
        c.trials = 1;
        assert!(phase_transition_grid(&c).is_err());
    }
}
