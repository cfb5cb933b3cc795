//! Reference LASSO solver: accelerated proximal gradient (FISTA) with
//! function-value restart, and the KKT residual used to certify solutions.

use ndarray::{Array1, Zip};

use crate::kernels::soft_threshold;
use crate::linalg::{norm, transpose_dot};
use crate::problem::ProblemInstance;

/// Relative tolerance of the power iteration for `σ_max(A)²`.
pub const POWER_ITER_TOL: f64 = 1e-10;
const POWER_ITER_MAX: usize = 10_000;
const KKT_CHECK_EVERY: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct LassoResult {
    pub x_hat: Array1<f64>,
    /// `½‖y − Ax̂‖₂² + λ‖x̂‖₁`.
    pub objective: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `½‖y − Ax‖₂² + λ‖x‖₁`.
pub fn objective(instance: &ProblemInstance, lambda: f64, x: &Array1<f64>) -> f64 {
    let r = &instance.y - &instance.a.dot(x);
    0.5 * r.dot(&r) + lambda * x.iter().map(|v| v.abs()).sum::<f64>()
}

/// Largest eigenvalue of `AᵀA` by power iteration from a fixed start vector.
pub fn lipschitz_constant(instance: &ProblemInstance) -> f64 {
    let big_n = instance.n_cols();
    let mut v = Array1::from_elem(big_n, 1.0 / (big_n as f64).sqrt());
    let mut w = Array1::zeros(big_n);
    let mut est = 0.0;
    for _ in 0..POWER_ITER_MAX {
        let av = instance.a.dot(&v);
        transpose_dot(&instance.a, av.view(), &mut w);
        let next = v.dot(&w);
        let nw = norm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        v = &w / nw;
        if (next - est).abs() <= POWER_ITER_TOL * next {
            return next;
        }
        est = next;
    }
    est
}

/// `max(max_{x̂ᵢ≠0} |gᵢ − λ·sign x̂ᵢ|, max_{x̂ᵢ=0} (|gᵢ| − λ)₊) / λ` with
/// `g = Aᵀ(y − Ax̂)`.
///
/// At `λ = 0` the unnormalized value is returned.
pub fn kkt_residual(instance: &ProblemInstance, lambda: f64, x_hat: &Array1<f64>) -> f64 {
    let r = &instance.y - &instance.a.dot(x_hat);
    let mut g = Array1::zeros(instance.n_cols());
    transpose_dot(&instance.a, r.view(), &mut g);
    kkt_from_gradient(&g, lambda, x_hat)
}

fn kkt_from_gradient(g: &Array1<f64>, lambda: f64, x: &Array1<f64>) -> f64 {
    let worst = g
        .iter()
        .zip(x.iter())
        .map(|(&gi, &xi)| {
            if xi != 0.0 {
                (gi - lambda * xi.signum()).abs()
            } else {
                (gi.abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max);
    if lambda > 0.0 {
        worst / lambda
    } else {
        worst
    }
}

/// Solves the LASSO from `x = 0`. Stops once the KKT residual is at most
/// `tol` or after `max_iter` iterations.
pub fn lasso_solve(
    instance: &ProblemInstance,
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> LassoResult {
    lasso_solve_from(
        instance,
        lambda,
        Array1::zeros(instance.n_cols()),
        tol,
        max_iter,
    )
}

/// As [`lasso_solve`], starting from `x0`.
pub fn lasso_solve_from(
    instance: &ProblemInstance,
    lambda: f64,
    x0: Array1<f64>,
    tol: f64,
    max_iter: usize,
) -> LassoResult {
    assert!(lambda >= 0.0, "lambda must be >= 0");
    assert_eq!(x0.len(), instance.n_cols());
    if lambda == 0.0 {
        log::warn!("lambda = 0: the LASSO minimizer need not be unique");
    }
    let a = &instance.a;
    let y = &instance.y;
    let l = lipschitz_constant(instance);
    let mut x = x0;
    let mut ax = a.dot(&x);
    let resid = |ax: &Array1<f64>| y - ax;
    let l1 = |x: &Array1<f64>| x.iter().map(|v| v.abs()).sum::<f64>();

    let mut g = Array1::zeros(x.len());
    transpose_dot(a, resid(&ax).view(), &mut g);
    if l == 0.0 {
        let kkt = kkt_from_gradient(&g, lambda, &x);
        let r = resid(&ax);
        return LassoResult {
            objective: 0.5 * r.dot(&r) + lambda * l1(&x),
            x_hat: x,
            kkt_residual: kkt,
            iterations: 0,
            converged: kkt <= tol,
        };
    }
    let step = 1.0 / l;
    let mut kkt = kkt_from_gradient(&g, lambda, &x);
    let r0 = resid(&ax);
    let mut obj = 0.5 * r0.dot(&r0) + lambda * l1(&x);

    let mut x_prev = x.clone();
    let mut ax_prev = ax.clone();
    let mut momentum_t = 1.0_f64;
    let mut iterations = 0;
    let mut x_new = Array1::zeros(x.len());

    while kkt > tol && iterations < max_iter {
        iterations += 1;
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * momentum_t * momentum_t).sqrt());
        let m = (momentum_t - 1.0) / t_next;
        // extrapolated point and its image under A
        let yk = &x + &((&x - &x_prev) * m);
        let ayk = &ax + &((&ax - &ax_prev) * m);
        transpose_dot(a, resid(&ayk).view(), &mut g);
        Zip::from(&mut x_new)
            .and(&yk)
            .and(&g)
            .for_each(|xn, &yi, &gi| *xn = soft_threshold(yi + step * gi, step * lambda));
        let ax_new = a.dot(&x_new);
        let r = resid(&ax_new);
        let obj_new = 0.5 * r.dot(&r) + lambda * l1(&x_new);

        if obj_new > obj && m > 0.0 {
            // restart: plain proximal-gradient step from x
            momentum_t = 1.0;
            x_prev.assign(&x);
            ax_prev.assign(&ax);
            continue;
        }
        std::mem::swap(&mut x_prev, &mut x);
        std::mem::swap(&mut x, &mut x_new);
        ax_prev = std::mem::replace(&mut ax, ax_new);
        obj = obj_new;
        momentum_t = t_next;

        if iterations % KKT_CHECK_EVERY == 0 || iterations == max_iter {
            transpose_dot(a, r.view(), &mut g);
            kkt = kkt_from_gradient(&g, lambda, &x);
        }
    }
    LassoResult {
        x_hat: x,
        objective: obj,
        kkt_residual: kkt,
        iterations,
        converged: kkt <= tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{sample_instance, InstanceConfig, SignPattern, SignalSpec};
    use ndarray::{array, Array2};

    fn scalar(a: f64, y0: f64) -> ProblemInstance {
        let mut inst =
            ProblemInstance::from_parts(Array2::from_elem((1, 1), a), array![0.0], array![0.0])
                .unwrap();
        inst.y = array![y0];
        inst
    }

    fn small(seed: u64) -> ProblemInstance {
        sample_instance(&InstanceConfig {
            n_rows: 40,
            n_cols: 80,
            signal: SignalSpec::Sparse {
                k: 6,
                amplitude: 1.0,
                signs: SignPattern::Random,
            },
            noise_variance: 0.01,
            seed,
        })
        .unwrap()
    }

    #[test]
    fn scalar_closed_form() {
        for (a, y0, lambda) in [
            (2.0, 3.0, 1.0),
            (0.5, -1.0, 0.1),
            (-1.5, 2.0, 0.7),
            (1.0, 0.3, 0.5),
        ] {
            let inst = scalar(a, y0);
            let want = soft_threshold(y0 / a, lambda / (a * a));
            let res = lasso_solve(&inst, lambda, 1e-13, 10_000);
            assert!((res.x_hat[0] - want).abs() < 1e-12, "{a} {y0} {lambda}");
            assert!(kkt_residual(&inst, lambda, &array![want]) < 1e-12);
        }
    }

    #[test]
    fn large_lambda_gives_zero() {
        let inst = small(1);
        let mut g = Array1::zeros(80);
        transpose_dot(&inst.a, inst.y.view(), &mut g);
        let lmax = g.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let res = lasso_solve(&inst, lmax, 1e-12, 1000);
        assert!(res.x_hat.iter().all(|v| *v == 0.0));
        assert_eq!(kkt_residual(&inst, lmax * 1.1, &Array1::zeros(80)), 0.0);
    }

    #[test]
    fn power_iteration_matches_two_by_two() {
        // AᵀA = [[5, 4], [4, 5]] has top eigenvalue 9
        let inst = ProblemInstance::from_parts(
            array![[1.0, 2.0], [2.0, 1.0]],
            array![0.0, 0.0],
            array![0.0, 0.0],
        )
        .unwrap();
        assert!((lipschitz_constant(&inst) - 9.0).abs() < 1e-8);
    }

    #[test]
    fn converges_and_beats_zero() {
        for seed in 0..5 {
            let inst = small(seed);
            for lambda in [0.01, 0.1, 0.5] {
                let res = lasso_solve(&inst, lambda, 1e-10, 100_000);
                assert!(
                    res.converged,
                    "seed {seed} lambda {lambda}: {}",
                    res.kkt_residual
                );
                assert!(res.objective <= 0.5 * inst.y.dot(&inst.y) + 1e-12);
                let recomputed = objective(&inst, lambda, &res.x_hat);
                assert!((recomputed - res.objective).abs() <= 1e-12 * recomputed.max(1.0));
                assert!(kkt_residual(&inst, lambda, &res.x_hat) <= 1e-10);
            }
        }
    }

    #[test]
    fn perturbation_grows_residual() {
        let inst = small(3);
        let lambda = 0.1;
        let res = lasso_solve(&inst, lambda, 1e-12, 100_000);
        let mut last = kkt_residual(&inst, lambda, &res.x_hat);
        assert!(last < 1e-10);
        let i = res.x_hat.iter().position(|v| *v != 0.0).unwrap();
        for eps in [1e-6, 1e-4, 1e-2, 1e-1] {
            let mut x = res.x_hat.clone();
            x[i] += eps;
            let r = kkt_residual(&inst, lambda, &x);
            assert!(r > last, "eps {eps}: {r} <= {last}");
            last = r;
        }
        let mut x = res.x_hat.clone();
        x[i] += 1e-9;
        assert!(kkt_residual(&inst, lambda, &x) < 1e-6);
    }
}
