//! The ℓ₁ phase-transition curve in parametric form:
//!
//! ```text
//! δ(z) = φ(z) / (φ(z) + z(Φ(z) − ½))
//! ρ(z) = 1 − z(1 − Φ(z))/φ(z)
//! ```

use crate::kernels::{std_normal_cdf, std_normal_pdf, std_normal_sf};

use super::ExperimentError;

/// `(δ(z), ρ(z))` for `z > 0`; the `z → 0⁺` limit is `(1, 1)`.
pub fn stojnic_point(z: f64) -> (f64, f64) {
    if z <= 0.0 {
        return (1.0, 1.0);
    }
    let phi = std_normal_pdf(z);
    let delta = phi / (phi + z * (std_normal_cdf(z) - 0.5));
    let rho = 1.0 - z * std_normal_sf(z) / phi;
    (delta, rho)
}

/// Curve samples at each `z` of an increasing positive grid.
pub fn stojnic_curve(z_grid: &[f64]) -> Result<Vec<(f64, f64)>, ExperimentError> {
    if z_grid.iter().any(|z| !(*z > 0.0 && z.is_finite())) {
        return Err(ExperimentError::Range("z grid must be positive".into()));
    }
    if z_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(ExperimentError::Range(
            "z grid must be strictly increasing".into(),
        ));
    }
    Ok(z_grid.iter().map(|&z| stojnic_point(z)).collect())
}

/// `z` with `δ(z) = delta`, by bisection (δ is decreasing in `z`).
pub fn z_of_delta(delta: f64) -> Result<f64, ExperimentError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(ExperimentError::Range(format!(
            "delta = {delta} not in (0, 1)"
        )));
    }
    let mut hi = 1.0;
    while stojnic_point(hi).0 > delta {
        hi *= 2.0;
        if hi > 64.0 {
            return Err(ExperimentError::Range(format!(
                "delta = {delta} too small to invert"
            )));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if stojnic_point(mid).0 > delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `ρ` on the curve at undersampling ratio `delta`.
pub fn rho_of_delta(delta: f64) -> Result<f64, ExperimentError> {
    Ok(stojnic_point(z_of_delta(delta)?).1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn limits() {
        let (d, r) = stojnic_point(1e-9);
        assert!((d - 1.0).abs() < 1e-8 && (r - 1.0).abs() < 1e-8);
    }

    #[test]
    fn golden_values() {
        // 40-digit evaluation of the parametric formulas
        let (d, r) = stojnic_point(1.0);
        assert!(close(d, 0.414_819_658_863_769_75, 1e-13));
        assert!(close(r, 0.344_320_457_581_201_53, 1e-13));
        let (d, r) = stojnic_point(8.0);
        assert!(d < 1e-2);
        assert!(close(d, 1.263e-15, 1e-3));
        assert!(close(r, 0.014_944_293_936_541_63, 1e-10));
        let tail = 1.0 / 64.0 - 3.0 / 4096.0 + 15.0 / 262_144.0;
        assert!((r - tail).abs() < 1e-3);
    }

    #[test]
    fn inverse_golden_values() {
        for (delta, rho) in [
            (0.1, 0.189_429_367_759_673_6),
            (0.3, 0.290_784_368_246_775_9),
            (0.5, 0.385_689_666_181_480_9),
            (0.7, 0.498_842_752_477_001_7),
            (0.9, 0.678_169_378_134_499_5),
        ] {
            assert!(close(rho_of_delta(delta).unwrap(), rho, 1e-10), "{delta}");
        }
        let z = z_of_delta(0.5).unwrap();
        assert!((z - 0.876_900_985_552_862_0).abs() < 1e-10);
    }

    #[test]
    fn dense_grid_cross_check() {
        // nearest point of a fine z grid brackets the root
        let zs: Vec<f64> = (1..200_000).map(|i| i as f64 * 1e-5).collect();
        let pts = stojnic_curve(&zs).unwrap();
        let i = pts.iter().position(|p| p.0 < 0.5).unwrap();
        let r = rho_of_delta(0.5).unwrap();
        assert!(pts[i].1 <= r && r <= pts[i - 1].1);
    }

    #[test]
    fn round_trip_and_monotone() {
        let zs: Vec<f64> = (1..400).map(|i| i as f64 * 0.01).collect();
        let pts = stojnic_curve(&zs).unwrap();
        for w in pts.windows(2) {
            assert!(w[1].0 < w[0].0 && w[1].1 < w[0].1);
        }
        for (&z, &(d, r)) in zs.iter().zip(&pts) {
            let z2 = z_of_delta(d).unwrap();
            assert!((stojnic_point(z2).0 - d).abs() <= 1e-10);
            assert!((rho_of_delta(d).unwrap() - r).abs() < 1e-9, "z = {z}");
        }
        let r = |d| rho_of_delta(d).unwrap();
        assert!(r(0.1) < r(0.5) && r(0.5) < r(0.9));
    }

    #[test]
    fn range_errors() {
        for d in [0.0, 1.0, -0.5, 1.5, f64::NAN] {
            assert!(matches!(rho_of_delta(d), Err(ExperimentError::Range(_))));
        }
        assert!(stojnic_curve(&[0.5, 0.2]).is_err());
        assert!(stojnic_curve(&[0.0, 0.2]).is_err());
    }
}
