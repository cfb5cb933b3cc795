//! Command-line front end: state-evolution solves and paths, empirical λ
//! sweeps, single AMP runs, phase-transition grids and risk curves, all
//! written as CSV.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver non-convergence,
//! 1 I/O failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lasso_amp::amp::{amp_run, AmpError, AmpOptions, NoiseEstimator, ThresholdPolicy};
use lasso_amp::experiments::{
    self, csv, lambda_sweep_empirical, open_grid, phase_transition_grid, ExperimentError,
    PhaseGridConfig, SweepConfig, SweepSolver,
};
use lasso_amp::problem::{
    sample_instance, write_instance_dump, InstanceConfig, ProblemError, SignPattern, SignalSpec,
};
use lasso_amp::state_evolution::{
    beta_of_lambda, calibrate_gamma, lambda_of_beta, lasso_path, SeError, SeModel,
};
use lasso_amp::Prior;

#[derive(Parser, Debug)]
#[command(
    name = "lasso-amp",
    version,
    about = "AMP, state evolution and LASSO experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
#[command(args_override_self = true)]
enum Command {
    /// Solve the state-evolution fixed point at one λ, β or γ.
    SeSolve(SeSolveArgs),
    /// State-evolution predictions along a λ grid.
    LassoPath(LassoPathArgs),
    /// Empirical λ sweep on one random instance next to state evolution.
    Sweep(SweepArgs),
    /// Run AMP on one random instance and write its trace.
    AmpRun(AmpRunArgs),
    /// Monte Carlo phase-transition grid.
    PhaseTransition(PhaseArgs),
    /// Soft-thresholding risk and its threshold derivative.
    RiskCurve(RiskCurveArgs),
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Undersampling ratio n/N.
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    /// Noise variance.
    #[arg(long = "sigma-w-sq", default_value_t = 0.2)]
    sigma_w_sq: f64,
    /// Signal prior as `weight:value,...`.
    #[arg(long, default_value = "0.9:0,0.05:1,0.05:-1")]
    prior: Prior,
}

impl ModelArgs {
    fn model(&self) -> Result<SeModel, CliError> {
        Ok(SeModel::new(
            self.delta,
            self.sigma_w_sq,
            self.prior.clone(),
        )?)
    }
}

#[derive(Args, Debug)]
#[group(id = "target", required = true, multiple = false, args = ["lambda", "beta", "gamma"])]
struct SeSolveArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Output CSV (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LassoPathArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Largest λ; the grid is `λ·i/points` for `i = 1..=points`.
    #[arg(long = "lambda", default_value_t = 1.0)]
    lambda_max: f64,
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InstanceArgs {
    /// Number of measurements.
    #[arg(long, default_value_t = 500)]
    n: usize,
    /// Signal length.
    #[arg(long = "big-n", default_value_t = 1000)]
    big_n: usize,
    /// Number of nonzeros (ignored when --prior is given).
    #[arg(long, default_value_t = 50)]
    k: usize,
    /// Magnitude of the nonzeros.
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    /// Nonzeros are all positive instead of random ±.
    #[arg(long)]
    positive: bool,
    /// Draw entries iid from this prior instead of a k-sparse signal.
    #[arg(long)]
    prior: Option<Prior>,
    /// Noise variance.
    #[arg(long = "sigma-w-sq", default_value_t = 0.0)]
    sigma_w_sq: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl InstanceArgs {
    fn config(&self) -> InstanceConfig {
        let signal = match &self.prior {
            Some(p) => SignalSpec::Iid(p.clone()),
            None => SignalSpec::Sparse {
                k: self.k,
                amplitude: self.amplitude,
                signs: if self.positive {
                    SignPattern::Positive
                } else {
                    SignPattern::Random
                },
            },
        };
        InstanceConfig {
            n_rows: self.n,
            n_cols: self.big_n,
            signal,
            noise_variance: self.sigma_w_sq,
            seed: self.seed,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SolverArg {
    Fista,
    Amp,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Largest λ; the grid is `λ·i/points` for `i = 1..=points`.
    #[arg(long = "lambda", default_value_t = 1.0)]
    lambda_max: f64,
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long, value_enum, default_value_t = SolverArg::Fista)]
    solver: SolverArg,
    /// KKT tolerance for FISTA, relative-change tolerance for AMP.
    #[arg(long)]
    tol: Option<f64>,
    /// FISTA iteration cap.
    #[arg(long = "max-iter", default_value_t = 100_000)]
    max_iter: usize,
    /// AMP iteration cap.
    #[arg(long = "amp-iters", default_value_t = 500)]
    amp_iters: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[group(id = "policy", required = true, multiple = false, args = ["gamma", "beta", "tau"])]
struct AmpRunArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Fixed detection: τ is the ⌊γn⌋-th largest magnitude.
    #[arg(long)]
    gamma: Option<f64>,
    /// Fixed false alarm: τ = β·σ̂.
    #[arg(long)]
    beta: Option<f64>,
    /// Fixed threshold.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long = "amp-iters", default_value_t = 500)]
    amp_iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Estimate σ̂ by median|u|/0.6745 instead of ‖z‖/√n.
    #[arg(long = "median-noise")]
    median_noise: bool,
    /// x ← θ·η(u; τ) + (1 − θ)·x, θ in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    damping: f64,
    /// Fail with exit code 3 if AMP does not converge within --amp-iters.
    #[arg(long = "require-convergence")]
    require_convergence: bool,
    /// Trace CSV (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the final estimate as `i,x_hat,x_o`.
    #[arg(long = "estimate-out")]
    estimate_out: Option<PathBuf>,
    /// Also write the binary instance dump.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PhaseArgs {
    /// Signal length.
    #[arg(long = "big-n", default_value_t = 1000)]
    big_n: usize,
    /// Comma-separated δ values (default: 20 equi-spaced in [0.1, 0.9]).
    #[arg(long, value_delimiter = ',')]
    delta: Vec<f64>,
    #[arg(long = "rho-points", default_value_t = 50)]
    rho_points: usize,
    #[arg(long = "band-lo", default_value_t = 0.8)]
    band_lo: f64,
    #[arg(long = "band-hi", default_value_t = 1.2)]
    band_hi: f64,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Relative-error success threshold.
    #[arg(long, default_value_t = 1e-2)]
    tol: f64,
    #[arg(long = "amp-iters", default_value_t = 500)]
    amp_iters: usize,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Raw band samples (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Interpolated display grid.
    #[arg(long = "grid-out")]
    grid_out: Option<PathBuf>,
    #[arg(long = "grid-rows", default_value_t = 20)]
    grid_rows: usize,
}

#[derive(Args, Debug)]
struct RiskCurveArgs {
    #[arg(long, default_value = "1:1")]
    prior: Prior,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long = "tau-max", default_value_t = 20.0)]
    tau_max: f64,
    #[arg(long, default_value_t = 401)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    NonConvergence(String),
    Io(io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::NonConvergence(m) => write!(f, "solver did not converge: {m}"),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<SeError> for CliError {
    fn from(e: SeError) -> Self {
        match e {
            SeError::NonConvergence(_) => CliError::NonConvergence(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<AmpError> for CliError {
    fn from(e: AmpError) -> Self {
        match e {
            AmpError::Divergence { .. } => CliError::NonConvergence(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<ProblemError> for CliError {
    fn from(e: ProblemError) -> Self {
        match e {
            ProblemError::Io(io) => CliError::Io(io),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Se(s) => s.into(),
            ExperimentError::Amp(a) => a.into(),
            ExperimentError::Problem(p) => p.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

fn with_output(
    path: Option<&Path>,
    body: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let f = File::create(p)
                .map_err(|e| CliError::Config(format!("cannot create {}: {e}", p.display())))?;
            let mut w = BufWriter::new(f);
            body(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            body(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn se_solve(args: &SeSolveArgs) -> Result<(), CliError> {
    let model = args.model.model()?;
    let point = match (args.lambda, args.beta, args.gamma) {
        (Some(l), _, _) => beta_of_lambda(&model, l)?,
        (_, Some(b), _) => lambda_of_beta(&model, b)?,
        (_, _, Some(g)) => calibrate_gamma(&model, g)?,
        _ => unreachable!("clap enforces exactly one target"),
    };
    with_output(args.out.as_deref(), |w| csv::write_se_points(w, &[point]))
}

fn lambda_grid(lambda_max: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if !(lambda_max > 0.0 && lambda_max.is_finite()) || points == 0 {
        return Err(CliError::Config(
            "need --lambda > 0 and --points >= 1".into(),
        ));
    }
    Ok(open_grid(lambda_max, points))
}

fn lasso_path_cmd(args: &LassoPathArgs) -> Result<(), CliError> {
    let model = args.model.model()?;
    let path = lasso_path(&model, &lambda_grid(args.lambda_max, args.points)?)?;
    with_output(args.out.as_deref(), |w| csv::write_se_points(w, &path))
}

fn sweep(args: &SweepArgs) -> Result<(), CliError> {
    let (solver, tol, max_iter) = match args.solver {
        SolverArg::Fista => (SweepSolver::Fista, args.tol.unwrap_or(1e-8), args.max_iter),
        SolverArg::Amp => (SweepSolver::Amp, args.tol.unwrap_or(1e-10), args.amp_iters),
    };
    let cfg = SweepConfig {
        instance: args.instance.config(),
        lambdas: lambda_grid(args.lambda_max, args.points)?,
        solver,
        tol,
        max_iter,
    };
    let rows = lambda_sweep_empirical(&cfg)?;
    let stalled = rows.iter().filter(|r| !r.converged).count();
    if stalled > 0 {
        log::warn!(
            "{stalled} of {} lambda values did not reach the tolerance",
            rows.len()
        );
    }
    with_output(args.out.as_deref(), |w| csv::write_sweep(w, &rows))
}

fn amp_run_cmd(args: &AmpRunArgs) -> Result<(), CliError> {
    let cfg = args.instance.config();
    let inst = sample_instance(&cfg)?;
    if let Some(p) = &args.dump {
        let f = File::create(p)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", p.display())))?;
        let mut w = BufWriter::new(f);
        write_instance_dump(&mut w, &cfg, &inst)?;
        w.flush()?;
    }
    let policy = match (args.gamma, args.beta, args.tau) {
        (Some(gamma), _, _) => ThresholdPolicy::FixedDetection { gamma },
        (_, Some(beta), _) => ThresholdPolicy::FixedFalseAlarm { beta },
        (_, _, Some(tau)) => ThresholdPolicy::FixedThreshold { tau },
        _ => unreachable!("clap enforces exactly one policy"),
    };
    let opts = AmpOptions {
        max_iter: args.amp_iters,
        conv_tol: args.tol,
        noise_estimator: if args.median_noise {
            NoiseEstimator::MedianAbsolute
        } else {
            NoiseEstimator::ResidualNorm
        },
        gaussianity: true,
        damping: args.damping,
    };
    let run = amp_run(&inst, policy, &opts)?;
    with_output(args.out.as_deref(), |w| csv::write_trace(w, &run.trace))?;
    if let Some(p) = &args.estimate_out {
        with_output(Some(p), |w| {
            writeln!(w, "i,x_hat,x_o")?;
            for (i, (xh, xo)) in run.state.x.iter().zip(inst.x_o.iter()).enumerate() {
                writeln!(w, "{i},{},{}", csv::fmt_f64(*xh), csv::fmt_f64(*xo))?;
            }
            Ok(())
        })?;
    }
    if !run.converged {
        let msg = format!(
            "AMP stopped after {} iterations without converging",
            run.state.t
        );
        if args.require_convergence {
            return Err(CliError::NonConvergence(msg));
        }
        log::warn!("{msg}");
    }
    Ok(())
}

fn phase_cmd(args: &PhaseArgs) -> Result<(), CliError> {
    let defaults = PhaseGridConfig::default();
    let cfg = PhaseGridConfig {
        n_signal: args.big_n,
        delta_grid: if args.delta.is_empty() {
            defaults.delta_grid
        } else {
            args.delta.clone()
        },
        rho_band: (args.band_lo, args.band_hi),
        rho_points: args.rho_points,
        trials: args.trials,
        tol: args.tol,
        max_iter: args.amp_iters,
        gamma: args.gamma,
        base_seed: args.seed,
    };
    let grid = phase_transition_grid(&cfg)?;
    for (i, (&d, &r)) in grid.deltas.iter().zip(&grid.curve).enumerate() {
        match grid.crossing_rho(i) {
            Some(c) => log::info!("delta {d}: empirical 50% crossing {c:.4}, curve {r:.4}"),
            None => log::info!("delta {d}: no 50% crossing inside the band, curve {r:.4}"),
        }
    }
    with_output(args.out.as_deref(), |w| csv::write_phase_raw(w, &grid))?;
    if let Some(p) = &args.grid_out {
        if args.grid_rows == 0 {
            return Err(CliError::Config("--grid-rows must be >= 1".into()));
        }
        let cells = grid.interpolated_grid(args.grid_rows);
        with_output(Some(p), |w| csv::write_phase_grid(w, &cells))?;
    }
    Ok(())
}

fn risk_curve_cmd(args: &RiskCurveArgs) -> Result<(), CliError> {
    if !(args.sigma > 0.0) || !(args.tau_max > 0.0) || args.points < 2 {
        return Err(CliError::Config(
            "need --sigma > 0, --tau-max > 0, --points >= 2".into(),
        ));
    }
    let taus = experiments::linspace(0.0, args.tau_max, args.points);
    let rows = experiments::risk_curve(&args.prior, args.sigma, &taus);
    with_output(args.out.as_deref(), |w| csv::write_risk_curve(w, &rows))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::SeSolve(a) => se_solve(a),
        Command::LassoPath(a) => lasso_path_cmd(a),
        Command::Sweep(a) => sweep(a),
        Command::AmpRun(a) => amp_run_cmd(a),
        Command::PhaseTransition(a) => phase_cmd(a),
        Command::RiskCurve(a) => risk_curve_cmd(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let args = match config::expand_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("lasso-amp: configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lasso-amp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
