//! Finite point-mass mixture priors.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Tolerance on `Σ wᵢ = 1` for a constructed prior.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Looser tolerance accepted by the text parser, which renormalizes.
pub const PARSE_WEIGHT_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PriorError {
    #[error("prior has no atoms")]
    Empty,
    #[error("atom weight {0} is not in (0, 1]")]
    BadWeight(f64),
    #[error("atom value {0} is not finite")]
    BadValue(f64),
    #[error("duplicate atom at value {0}")]
    DuplicateAtom(f64),
    #[error("weights sum to {0}, expected 1")]
    WeightSum(f64),
    #[error("malformed prior token {0:?}; expected weight:value")]
    Syntax(String),
}

/// One support point of a [`Prior`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub value: f64,
    pub weight: f64,
}

/// Signal distribution `p_X` as a finite mixture of point masses.
///
/// Atoms are kept sorted by value.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior {
    atoms: Vec<Atom>,
}

impl Prior {
    /// Builds a prior from `(value, weight)` pairs.
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self, PriorError> {
        let mut atoms: Vec<Atom> = atoms
            .into_iter()
            .map(|(value, weight)| Atom { value, weight })
            .collect();
        if atoms.is_empty() {
            return Err(PriorError::Empty);
        }
        for a in &atoms {
            if !a.value.is_finite() {
                return Err(PriorError::BadValue(a.value));
            }
            if !(a.weight > 0.0 && a.weight <= 1.0) {
                return Err(PriorError::BadWeight(a.weight));
            }
        }
        atoms.sort_by(|a, b| a.value.total_cmp(&b.value));
        if let Some(w) = atoms.windows(2).find(|w| w[0].value == w[1].value) {
            return Err(PriorError::DuplicateAtom(w[0].value));
        }
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(PriorError::WeightSum(total));
        }
        Ok(Self { atoms })
    }

    /// Point mass at zero (`δ₀`).
    pub fn point_mass_zero() -> Self {
        Self::point_mass(0.0)
    }

    pub fn point_mass(value: f64) -> Self {
        Self {
            atoms: vec![Atom { value, weight: 1.0 }],
        }
    }

    /// `(1 − ε)·δ₀ + (ε/2)·δ_{+a} + (ε/2)·δ_{−a}`.
    pub fn symmetric_sparse(eps: f64, amplitude: f64) -> Result<Self, PriorError> {
        if eps == 1.0 {
            return Self::new([(-amplitude, 0.5), (amplitude, 0.5)]);
        }
        Self::new([
            (0.0, 1.0 - eps),
            (amplitude, eps / 2.0),
            (-amplitude, eps / 2.0),
        ])
    }

    /// `(1 − ε)·δ₀ + ε·δ_a`.
    pub fn one_sided_sparse(eps: f64, amplitude: f64) -> Result<Self, PriorError> {
        if eps == 1.0 {
            return Ok(Self::point_mass(amplitude));
        }
        Self::new([(0.0, 1.0 - eps), (amplitude, eps)])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// `E[X²]`.
    pub fn second_moment(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.weight * a.value * a.value)
            .sum()
    }

    /// `P(X = 0)`.
    pub fn zero_mass(&self) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.value == 0.0)
            .map(|a| a.weight)
            .sum()
    }

    pub fn max_abs_value(&self) -> f64 {
        self.atoms.iter().map(|a| a.value.abs()).fold(0.0, f64::max)
    }

    /// Inverse-CDF draw from a uniform `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for a in &self.atoms {
            acc += a.weight;
            if u < acc {
                return a.value;
            }
        }
        self.atoms[self.atoms.len() - 1].value
    }
}

/// Parses `weight:value` tokens separated by commas, e.g. `0.8:0,0.1:1,0.1:-1`.
///
/// Weights must sum to one within [`PARSE_WEIGHT_SUM_TOL`]; they are then
/// renormalized exactly.
impl FromStr for Prior {
    type Err = PriorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut pairs = Vec::new();
        for token in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (w, v) = token
                .split_once(':')
                .ok_or_else(|| PriorError::Syntax(token.to_string()))?;
            let weight: f64 = w
                .trim()
                .parse()
                .map_err(|_| PriorError::Syntax(token.to_string()))?;
            let value: f64 = v
                .trim()
                .parse()
                .map_err(|_| PriorError::Syntax(token.to_string()))?;
            pairs.push((value, weight));
        }
        if pairs.is_empty() {
            return Err(PriorError::Empty);
        }
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        if !((total - 1.0).abs() <= PARSE_WEIGHT_SUM_TOL) {
            return Err(PriorError::WeightSum(total));
        }
        Prior::new(pairs.into_iter().map(|(v, w)| (v, w / total)))
    }
}

impl fmt::Display for Prior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}:{}", a.weight, a.value)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_three_atoms() {
        let p: Prior = "0.8:0,0.1:1,0.1:-1".parse().unwrap();
        assert_eq!(p.atoms().len(), 3);
        assert!((p.second_moment() - 0.2).abs() < 1e-15);
        assert!((p.zero_mass() - 0.8).abs() < 1e-15);
        assert_eq!(p.to_string().parse::<Prior>().unwrap(), p);
    }

    #[test]
    fn rejects_bad_sums_and_syntax() {
        assert!(matches!(
            "0.5:0,0.4:1".parse::<Prior>(),
            Err(PriorError::WeightSum(_))
        ));
        assert!(matches!(
            "0.5;0".parse::<Prior>(),
            Err(PriorError::Syntax(_))
        ));
        assert!(matches!("".parse::<Prior>(), Err(PriorError::Empty)));
        assert!(matches!(
            "0.5:1,0.5:1".parse::<Prior>(),
            Err(PriorError::DuplicateAtom(_))
        ));
        assert!(matches!(
            "1.5:1,-0.5:2".parse::<Prior>(),
            Err(PriorError::BadWeight(_))
        ));
        assert!(matches!(
            Prior::new([(f64::NAN, 1.0)]),
            Err(PriorError::BadValue(_))
        ));
    }

    #[test]
    fn parser_renormalizes_within_tolerance() {
        let p: Prior = "0.3333333333:0,0.6666666667:2".parse().unwrap();
        let total: f64 = p.atoms().iter().map(|a| a.weight).sum();
        assert!((total - 1.0).abs() <= WEIGHT_SUM_TOL);
    }

    #[test]
    fn quantile_covers_atoms() {
        let p = Prior::symmetric_sparse(0.2, 1.0).unwrap();
        assert_eq!(p.quantile(0.0), -1.0);
        assert_eq!(p.quantile(0.5), 0.0);
        assert_eq!(p.quantile(0.95), 1.0);
        assert_eq!(p.quantile(0.999_999_999_999), 1.0);
    }
}
