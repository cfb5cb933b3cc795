use ndarray::ArrayView1;

use super::ProblemError;

/// Per-coordinate averages of an estimate `x̂` against the truth `x_o`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    /// `(1/N)‖x̂ − x_o‖²`
    pub mse: f64,
    /// false alarms: `|x̂ᵢ| > tol` where `x_oᵢ = 0`
    pub fa: f64,
    /// detections: `|x̂ᵢ| > tol`
    pub dr: f64,
    /// missed detections: `|x̂ᵢ| ≤ tol` where `x_oᵢ ≠ 0`
    pub md: f64,
}

/// An entry of `x̂` counts as nonzero when `|x̂ᵢ| > zero_tol`.
pub fn compute_observables(
    x_hat: ArrayView1<f64>,
    x_o: ArrayView1<f64>,
    zero_tol: f64,
) -> Result<Observables, ProblemError> {
    if x_hat.len() != x_o.len() {
        return Err(ProblemError::Dimension(format!(
            "estimate has {} entries, truth has {}",
            x_hat.len(),
            x_o.len()
        )));
    }
    let big_n = x_o.len().max(1) as f64;
    let (mut sq, mut fa, mut dr, mut md) = (0.0, 0usize, 0usize, 0usize);
    for (&e, &t) in x_hat.iter().zip(x_o.iter()) {
        sq += (e - t) * (e - t);
        let active = e.abs() > zero_tol;
        dr += active as usize;
        fa += (active && t == 0.0) as usize;
        md += (!active && t != 0.0) as usize;
    }
    Ok(Observables {
        mse: sq / big_n,
        fa: fa as f64 / big_n,
        dr: dr as f64 / big_n,
        md: md as f64 / big_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_and_zero_estimates() {
        let x = array![0.0, 1.0, 0.0, -2.0, 0.0];
        let o = compute_observables(x.view(), x.view(), 0.0).unwrap();
        assert_eq!(
            o,
            Observables {
                mse: 0.0,
                fa: 0.0,
                dr: 0.4,
                md: 0.0
            }
        );
        let z = Array1::zeros(5);
        let o = compute_observables(z.view(), x.view(), 0.0).unwrap();
        assert_eq!(o.dr, 0.0);
        assert_eq!(o.md, 0.4);
        assert!((o.mse - 1.0).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch() {
        let a = array![1.0, 2.0];
        let b = array![1.0];
        assert!(matches!(
            compute_observables(a.view(), b.view(), 0.0),
            Err(ProblemError::Dimension(_))
        ));
    }

    #[test]
    fn matches_naive_recount() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let n = 300;
            let gen = |rng: &mut ChaCha8Rng| {
                if rng.random::<f64>() < 0.6 {
                    0.0
                } else {
                    rng.random::<f64>() - 0.5
                }
            };
            let x_hat: Vec<f64> = (0..n).map(|_| gen(&mut rng)).collect();
            let x_o: Vec<f64> = (0..n).map(|_| gen(&mut rng)).collect();
            let tol = 0.1;
            let o =
                compute_observables(ArrayView1::from(&x_hat), ArrayView1::from(&x_o), tol).unwrap();
            let (mut fa, mut dr, mut md, mut sq) = (0, 0, 0, 0.0);
            for (&xh, &xo) in x_hat.iter().zip(&x_o) {
                sq += (xh - xo).powi(2);
                if xh.abs() > tol {
                    dr += 1;
                    if xo == 0.0 {
                        fa += 1;
                    }
                } else if xo != 0.0 {
                    md += 1;
                }
            }
            assert_eq!(o.fa, fa as f64 / n as f64);
            assert_eq!(o.dr, dr as f64 / n as f64);
            assert_eq!(o.md, md as f64 / n as f64);
            assert!((o.mse - sq / n as f64).abs() < 1e-15);
        }
    }
}
