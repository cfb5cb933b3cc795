//! Calibration maps between `β`, `λ` and `γ`.

use rayon::prelude::*;

use super::{
    scalar_fixed_point, solve_sigma_for_beta, SeError, SeModel, SePoint, BETA_MAX, FIXED_POINT_TOL,
    MAX_FIXED_POINT_ITERS,
};
use crate::kernels::{detection_prob, normalized_atom_risk, risk, Prior};

const MAX_BISECTIONS: usize = 200;

/// Midpoint, or `None` once `lo` and `hi` are adjacent floats.
fn midpoint(lo: f64, hi: f64) -> Option<f64> {
    let mid = 0.5 * (lo + hi);
    (mid > lo && mid < hi).then_some(mid)
}

/// Stability limit `α_min`: the `β` at which `r(β; 0) = δ`.
///
/// For `β ≤ α_min` the Ψ map has slope ≥ 1 at infinity and no fixed point.
pub fn min_beta(model: &SeModel) -> f64 {
    let (mut lo, mut hi) = (0.0, BETA_MAX);
    for _ in 0..MAX_BISECTIONS {
        let Some(mid) = midpoint(lo, hi) else { break };
        if normalized_atom_risk(0.0, mid) >= model.delta() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn gamma_at(model: &SeModel, beta: f64) -> Result<f64, SeError> {
    let sigma = solve_sigma_for_beta(model, beta)?;
    Ok(detection_prob(model.prior(), sigma, beta * sigma) / model.delta())
}

/// Largest-to-smallest search for the `β` where `detection/δ` equals `target`.
///
/// `detection/δ` is strictly decreasing in `β` above the stability limit and
/// tends to `2Q(α_min)/δ > 1` as `β ↓ α_min`, so `[α_min, BETA_MAX]` brackets
/// every target in `(0, 1]`. Evaluations that fail to converge only occur
/// right next to `α_min` and are treated as lying below the target.
/// Returns the bracket end on the low-detection side.
fn beta_for_gamma(model: &SeModel, target: f64) -> Result<f64, SeError> {
    let mut lo = min_beta(model);
    let mut hi = BETA_MAX;
    if gamma_at(model, hi)? > target {
        return Err(SeError::BracketFailure { target, lo, hi });
    }
    for _ in 0..MAX_BISECTIONS {
        let Some(mid) = midpoint(lo, hi) else { break };
        match gamma_at(model, mid) {
            Ok(g) if g == target => return Ok(mid),
            Ok(g) if g < target => hi = mid,
            Ok(_) | Err(SeError::NonConvergence(_)) => lo = mid,
            Err(e) => return Err(e),
        }
    }
    Ok(hi)
}

/// `β` at which `λ(β) = 0`, i.e. the detection fraction reaches `δ`.
pub fn zero_lambda_beta(model: &SeModel) -> Result<f64, SeError> {
    beta_for_gamma(model, 1.0)
}

/// Full [`SePoint`] for a given `β`.
pub fn lambda_of_beta(model: &SeModel, beta: f64) -> Result<SePoint, SeError> {
    let sigma = solve_sigma_for_beta(model, beta)?;
    let point = model.point(sigma, beta * sigma);
    if point.gamma > 1.0 {
        return Err(SeError::NegativeLambda {
            beta,
            gamma: point.gamma,
        });
    }
    Ok(point)
}

fn beta_of_lambda_above(model: &SeModel, lambda: f64, beta0: f64) -> Result<SePoint, SeError> {
    let tol = 1e-12 * lambda.max(1.0);
    let at_zero = lambda_of_beta(model, beta0)?;
    if lambda <= at_zero.lambda + tol {
        if (lambda - at_zero.lambda).abs() <= tol {
            return Ok(at_zero);
        }
        return Err(SeError::BracketFailure {
            target: lambda,
            lo: beta0,
            hi: BETA_MAX,
        });
    }
    let top = lambda_of_beta(model, BETA_MAX)?;
    if top.lambda < lambda {
        return Err(SeError::BracketFailure {
            target: lambda,
            lo: beta0,
            hi: BETA_MAX,
        });
    }
    let (mut lo, mut hi) = (beta0, BETA_MAX);
    let mut best = top;
    for _ in 0..MAX_BISECTIONS {
        let Some(mid) = midpoint(lo, hi) else { break };
        let p = lambda_of_beta(model, mid)?;
        if (p.lambda - lambda).abs() < (best.lambda - lambda).abs() {
            best = p;
        }
        if (p.lambda - lambda).abs() <= tol {
            return Ok(p);
        }
        if p.lambda < lambda {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}

/// Inverts `λ(β)` by bisection on `β ∈ [β₀, BETA_MAX]`, where `β₀` is the
/// `λ = 0` crossing. `|λ(β) − lambda| ≤ 1e-12·max(1, lambda)` on success.
pub fn beta_of_lambda(model: &SeModel, lambda: f64) -> Result<SePoint, SeError> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(SeError::InvalidArgument(format!(
            "lambda = {lambda} must be >= 0"
        )));
    }
    let beta0 = zero_lambda_beta(model)?;
    beta_of_lambda_above(model, lambda, beta0)
}

fn check_gamma(gamma: f64) -> Result<(), SeError> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(SeError::InvalidArgument(format!(
            "gamma = {gamma} not in (0, 1)"
        )))
    }
}

/// The unique `(σ̂, τ)` with `P(|X + σ̂Z| > τ)/δ = γ` and the noise equation
/// satisfied; found by bisection on `β` with an inner Ψ fixed point.
pub fn calibrate_gamma(model: &SeModel, gamma: f64) -> Result<SePoint, SeError> {
    check_gamma(gamma)?;
    let beta = beta_for_gamma(model, gamma)?;
    let sigma = solve_sigma_for_beta(model, beta)?;
    Ok(model.point(sigma, beta * sigma))
}

/// Threshold `θ` with `P(|X + σZ| > θ) = target`, by bisection on
/// `[0, 50σ + max|x|]`.
pub fn tau_for_detection(prior: &Prior, sigma: f64, target: f64) -> f64 {
    if target >= 1.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, 50.0 * sigma + prior.max_abs_value());
    for _ in 0..MAX_BISECTIONS {
        let Some(mid) = midpoint(lo, hi) else { break };
        if detection_prob(prior, sigma, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Same fixed point as [`calibrate_gamma`], reached by alternating a
/// threshold solve at fixed `σ` with a noise update at fixed `τ` (the
/// fixed-detection state-evolution map).
pub fn calibrate_gamma_alternating(model: &SeModel, gamma: f64) -> Result<SePoint, SeError> {
    check_gamma(gamma)?;
    let target = gamma * model.delta();
    let prior = model.prior();
    let s2 = scalar_fixed_point(
        |s| {
            let sigma = s.max(f64::MIN_POSITIVE).sqrt();
            let tau = tau_for_detection(prior, sigma, target);
            model.sigma_w_sq() + risk(prior, sigma, tau) / model.delta()
        },
        model.null_sigma_sq(),
        FIXED_POINT_TOL,
        MAX_FIXED_POINT_ITERS,
    )?;
    let sigma = s2.sqrt();
    Ok(model.point(sigma, tau_for_detection(prior, sigma, target)))
}

/// Asymptotic LASSO behaviour along an increasing `λ` grid.
///
/// Grid points are solved independently (in parallel); the output order
/// matches the input.
pub fn lasso_path(model: &SeModel, lambda_grid: &[f64]) -> Result<Vec<SePoint>, SeError> {
    if lambda_grid.len() < 3 {
        return Err(SeError::InvalidArgument(
            "lambda grid needs at least 3 points".into(),
        ));
    }
    if lambda_grid.windows(2).any(|w| !(w[1] > w[0])) || lambda_grid[0] < 0.0 {
        return Err(SeError::InvalidArgument(
            "lambda grid must be non-negative and strictly increasing".into(),
        ));
    }
    let beta0 = zero_lambda_beta(model)?;
    lambda_grid
        .par_iter()
        .map(|&l| beta_of_lambda_above(model, l, beta0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state_evolution::sign_changes;

    fn golden() -> SeModel {
        SeModel::new(0.5, 0.2, Prior::symmetric_sparse(0.1, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn golden_point_matches_independent_solve() {
        // Quadrature-based risk + arbitrary-precision root finder.
        let p = lambda_of_beta(&golden(), 1.5).unwrap();
        assert!((p.sigma_hat - 0.599_178_444_523_628_1).abs() < 1e-12);
        assert!((p.tau - 0.898_767_666_785_442_2).abs() < 1e-12);
        assert!((p.lambda - 0.580_536_086_100_654_1).abs() < 1e-12);
        assert!((p.gamma - 0.354_075_466_269_257_5).abs() < 1e-12);
        assert!((p.mse - 0.079_507_404_190_877_24).abs() < 1e-12);
        assert!((p.detection - 0.177_037_733_134_628_7).abs() < 1e-12);
    }

    #[test]
    fn zero_crossing_has_full_detection() {
        let m = golden();
        let b0 = zero_lambda_beta(&m).unwrap();
        assert!(b0 > min_beta(&m));
        let p = lambda_of_beta(&m, b0).unwrap();
        assert!((p.detection - m.delta()).abs() < 1e-9);
        assert!(p.lambda.abs() < 1e-9);
        let below = b0 * (1.0 - 1e-6);
        assert!(matches!(
            lambda_of_beta(&m, below),
            Err(SeError::NegativeLambda { .. })
        ));
        let at = beta_of_lambda(&m, 0.0).unwrap();
        assert!((at.beta - b0).abs() < 1e-9);
    }

    #[test]
    fn lambda_increasing_in_beta() {
        let m = golden();
        let b0 = zero_lambda_beta(&m).unwrap();
        let mut prev = -1.0;
        for i in 0..60 {
            let p = lambda_of_beta(&m, b0 + 0.1 * i as f64).unwrap();
            assert!(p.lambda > prev + 1e-9);
            prev = p.lambda;
        }
        let far = lambda_of_beta(&m, 30.0).unwrap();
        assert!(far.detection < 1e-12);
        assert!((far.lambda - far.tau).abs() < 1e-9);
    }

    #[test]
    fn beta_lambda_round_trip() {
        let m = golden();
        let b0 = zero_lambda_beta(&m).unwrap();
        for i in 0..25 {
            let beta = b0 + 0.01 + 0.2 * i as f64;
            let p = lambda_of_beta(&m, beta).unwrap();
            let q = beta_of_lambda(&m, p.lambda).unwrap();
            assert!((q.beta - beta).abs() < 1e-8, "beta={beta} got {}", q.beta);
        }
    }

    #[test]
    fn out_of_range_lambda() {
        let m = golden();
        assert!(matches!(
            beta_of_lambda(&m, 1e6),
            Err(SeError::BracketFailure { .. })
        ));
        assert!(matches!(
            beta_of_lambda(&m, -1.0),
            Err(SeError::InvalidArgument(_))
        ));
    }

    #[test]
    fn calibration_strategies_agree() {
        let m = golden();
        for gamma in [0.1, 0.4, 0.7, 0.95] {
            let a = calibrate_gamma(&m, gamma).unwrap();
            let b = calibrate_gamma_alternating(&m, gamma).unwrap();
            assert!((a.sigma_hat - b.sigma_hat).abs() < 1e-8);
            assert!((a.tau - b.tau).abs() < 1e-8);
            assert!((a.gamma - gamma).abs() < 1e-12);
            assert!((a.lambda - a.tau * (1.0 - gamma)).abs() < 1e-10);
        }
        assert!(calibrate_gamma(&m, 1.0).is_err());
        assert!(calibrate_gamma(&m, 0.0).is_err());
    }

    #[test]
    fn calibrate_round_trips_through_lambda() {
        let m = golden();
        for lambda in [0.05, 0.3, 1.0] {
            let p = beta_of_lambda(&m, lambda).unwrap();
            let q = calibrate_gamma(&m, p.gamma).unwrap();
            assert!((p.sigma_hat - q.sigma_hat).abs() < 1e-8);
            assert!((p.tau - q.tau).abs() < 1e-8);
            assert!((p.lambda - q.lambda).abs() < 1e-8);
        }
    }

    #[test]
    fn gamma_to_one_sends_lambda_to_zero() {
        let m = golden();
        let lams: Vec<f64> = [0.9, 0.99, 0.999, 0.9999]
            .iter()
            .map(|&g| calibrate_gamma(&m, g).unwrap().lambda)
            .collect();
        assert!(lams.windows(2).all(|w| w[1] < w[0]));
        assert!(lams[3] < 1e-3);
    }

    #[test]
    fn path_properties() {
        let m = golden();
        let grid: Vec<f64> = (1..=200).map(|i| 0.01 * i as f64).collect();
        let path = lasso_path(&m, &grid).unwrap();
        for w in path.windows(2) {
            assert!(w[1].detection - w[0].detection < -1e-9);
        }
        assert!(path.iter().all(|p| p.detection <= m.delta() + 1e-9));
        let (changes, first, _) = sign_changes(path.windows(2).map(|w| w[1].mse - w[0].mse), 1e-12);
        assert!(changes <= 1);
        if changes == 1 {
            assert_eq!(first, -1);
        }
        for p in &path {
            assert!(p.noise_residual(&m) <= 1e-9);
            assert!(p.lambda_residual(&m) <= 1e-9);
            assert!(p.sigma_hat >= m.sigma_w_sq().sqrt());
            assert!((p.mse - p.mse_from_sigma(&m)).abs() <= 1e-12 * p.sigma_hat.powi(2).max(1.0));
        }
        assert!(lasso_path(&m, &[0.1, 0.2]).is_err());
        assert!(lasso_path(&m, &[0.1, 0.3, 0.2]).is_err());
    }
}
