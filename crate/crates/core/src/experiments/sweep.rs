use rayon::prelude::*;

use crate::amp::{amp_run, AmpOptions, ThresholdPolicy};
use crate::lasso::{kkt_residual, lasso_solve};
use crate::problem::{compute_observables, sample_instance, InstanceConfig};
use crate::state_evolution::{beta_of_lambda, SeModel};

use super::ExperimentError;

/// Which solver produces the empirical estimate at each λ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepSolver {
    /// Accelerated proximal gradient at λ.
    #[default]
    Fista,
    /// AMP with fixed detection at the γ that state evolution pairs with λ.
    Amp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub instance: InstanceConfig,
    pub lambdas: Vec<f64>,
    pub solver: SweepSolver,
    /// KKT tolerance (FISTA) or relative-change tolerance (AMP).
    pub tol: f64,
    pub max_iter: usize,
}

/// Empirical observables next to their state-evolution predictions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub empirical_mse: f64,
    pub se_mse: f64,
    pub empirical_dr: f64,
    pub se_dr: f64,
    pub kkt_residual: f64,
    pub converged: bool,
}

/// Solves one instance along `cfg.lambdas`; λ values are processed in
/// parallel and returned in input order.
pub fn lambda_sweep_empirical(cfg: &SweepConfig) -> Result<Vec<SweepRow>, ExperimentError> {
    if cfg.lambdas.is_empty() || cfg.lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(ExperimentError::Config(
            "lambda grid must be non-empty and positive".into(),
        ));
    }
    let inst = sample_instance(&cfg.instance)?;
    let prior = cfg.instance.signal.limiting_prior(cfg.instance.n_cols)?;
    let model = SeModel::new(cfg.instance.delta(), cfg.instance.noise_variance, prior)?;
    cfg.lambdas
        .par_iter()
        .map(|&lambda| {
            let se = beta_of_lambda(&model, lambda)?;
            let (x_hat, kkt, converged, zero_tol) = match cfg.solver {
                SweepSolver::Fista => {
                    let res = lasso_solve(&inst, lambda, cfg.tol, cfg.max_iter);
                    let sup = res.x_hat.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                    (res.x_hat, res.kkt_residual, res.converged, 1e-8 * sup)
                }
                SweepSolver::Amp => {
                    let opts = AmpOptions {
                        max_iter: cfg.max_iter,
                        conv_tol: cfg.tol,
                        gaussianity: false,
                        ..AmpOptions::default()
                    };
                    let run = amp_run(
                        &inst,
                        ThresholdPolicy::FixedDetection { gamma: se.gamma },
                        &opts,
                    )?;
                    let kkt = kkt_residual(&inst, lambda, &run.state.x);
                    (run.state.x, kkt, run.converged, 0.0)
                }
            };
            let obs = compute_observables(x_hat.view(), inst.x_o.view(), zero_tol)?;
            Ok(SweepRow {
                lambda,
                empirical_mse: obs.mse,
                se_mse: se.mse,
                empirical_dr: obs.dr,
                se_dr: se.detection,
                kkt_residual: kkt,
                converged,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{SignPattern, SignalSpec};

    fn cfg(solver: SweepSolver) -> SweepConfig {
        SweepConfig {
            instance: InstanceConfig {
                n_rows: 100,
                n_cols: 200,
                signal: SignalSpec::Sparse {
                    k: 10,
                    amplitude: 1.0,
                    signs: SignPattern::Random,
                },
                noise_variance: 0.05,
                seed: 3,
            },
            lambdas: vec![0.05, 0.2, 0.8],
            solver,
            tol: 1e-8,
            max_iter: 20_000,
        }
    }

    #[test]
    fn fista_rows_are_in_order_and_converged() {
        let rows = lambda_sweep_empirical(&cfg(SweepSolver::Fista)).unwrap();
        assert_eq!(
            rows.iter().map(|r| r.lambda).collect::<Vec<_>>(),
            vec![0.05, 0.2, 0.8]
        );
        assert!(rows.iter().all(|r| r.converged && r.kkt_residual <= 1e-8));
        assert!(rows.windows(2).all(|w| w[1].se_dr < w[0].se_dr));
        assert!(rows[0].empirical_dr > rows[2].empirical_dr);
    }

    #[test]
    fn amp_solver_runs() {
        let mut c = cfg(SweepSolver::Amp);
        c.tol = 1e-10;
        c.max_iter = 500;
        let rows = lambda_sweep_empirical(&c).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.empirical_mse.is_finite()));
    }

    #[test]
    fn rejects_bad_grid() {
        let mut c = cfg(SweepSolver::Fista);
        c.lambdas = vec![0.1, -1.0];
        assert!(matches!(
            lambda_sweep_empirical(&c),
            Err(ExperimentError::Config(_))
        ));
        c.lambdas.clear();
        assert!(lambda_sweep_empirical(&c).is_err());
    }
}
