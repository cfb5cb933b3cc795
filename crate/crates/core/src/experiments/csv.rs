//! CSV writers. Floats are written as `{:.16e}` (17 significant digits),
//! so every value round-trips exactly.

use std::io::{self, Write};

use crate::amp::AmpTrace;
use crate::state_evolution::SePoint;

use super::{PhaseGrid, RiskCurveRow, SweepRow};

/// `{:.16e}`
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub const SE_PATH_HEADER: &str = "lambda,beta,tau,gamma,sigma_hat,mse,detection";
pub const SWEEP_HEADER: &str =
    "lambda,empirical_mse,se_mse,empirical_dr,se_dr,kkt_residual,converged";
pub const TRACE_HEADER: &str = "t,tau,active_count,residual_norm,mse,kurtosis,ks";
pub const PHASE_RAW_HEADER: &str = "delta,rho,n,k,trials,successes,success_rate,curve_rho";
pub const PHASE_GRID_HEADER: &str = "delta,rho,success_prob";
pub const RISK_CURVE_HEADER: &str = "tau,risk,risk_derivative";

fn row(out: &mut (impl Write + ?Sized), fields: &[String]) -> io::Result<()> {
    writeln!(out, "{}", fields.join(","))
}

pub fn write_se_points(out: &mut (impl Write + ?Sized), points: &[SePoint]) -> io::Result<()> {
    writeln!(out, "{SE_PATH_HEADER}")?;
    for p in points {
        let vals = [
            p.lambda,
            p.beta,
            p.tau,
            p.gamma,
            p.sigma_hat,
            p.mse,
            p.detection,
        ];
        row(out, &vals.map(fmt_f64))?;
    }
    Ok(())
}

pub fn write_sweep(out: &mut (impl Write + ?Sized), rows: &[SweepRow]) -> io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in rows {
        let mut f = [
            r.lambda,
            r.empirical_mse,
            r.se_mse,
            r.empirical_dr,
            r.se_dr,
            r.kkt_residual,
        ]
        .map(fmt_f64)
        .to_vec();
        f.push(r.converged.to_string());
        row(out, &f)?;
    }
    Ok(())
}

/// Iterations without Gaussianity statistics get `NaN` in the last two columns.
pub fn write_trace(out: &mut (impl Write + ?Sized), trace: &AmpTrace) -> io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in &trace.rows {
        let (kurt, ks) = r
            .gaussianity
            .map_or((f64::NAN, f64::NAN), |g| (g.excess_kurtosis, g.ks_distance));
        row(
            out,
            &[
                r.t.to_string(),
                fmt_f64(r.tau),
                r.active_count.to_string(),
                fmt_f64(r.residual_norm),
                fmt_f64(r.mse),
                fmt_f64(kurt),
                fmt_f64(ks),
            ],
        )?;
    }
    Ok(())
}

/// One row per `(δ, ρ)` band sample.
pub fn write_phase_raw(out: &mut (impl Write + ?Sized), grid: &PhaseGrid) -> io::Result<()> {
    writeln!(out, "{PHASE_RAW_HEADER}")?;
    for (cells, &curve) in grid.cells.iter().zip(&grid.curve) {
        for c in cells {
            row(
                out,
                &[
                    fmt_f64(c.delta),
                    fmt_f64(c.rho),
                    c.n.to_string(),
                    c.k.to_string(),
                    c.trials.to_string(),
                    c.successes.to_string(),
                    fmt_f64(c.success_rate()),
                    fmt_f64(curve),
                ],
            )?;
        }
    }
    Ok(())
}

pub fn write_phase_grid(
    out: &mut (impl Write + ?Sized),
    cells: &[(f64, f64, f64)],
) -> io::Result<()> {
    writeln!(out, "{PHASE_GRID_HEADER}")?;
    for &(d, r, p) in cells {
        row(out, &[d, r, p].map(fmt_f64))?;
    }
    Ok(())
}

pub fn write_risk_curve(out: &mut (impl Write + ?Sized), rows: &[RiskCurveRow]) -> io::Result<()> {
    writeln!(out, "{RISK_CURVE_HEADER}")?;
    for r in rows {
        row(out, &[r.tau, r.risk, r.risk_derivative].map(fmt_f64))?;
    }
    Ok(())
}
