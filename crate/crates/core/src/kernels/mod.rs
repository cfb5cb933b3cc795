//! Scalar kernels: normal distribution functions, point-mass priors, and
//! closed-form soft-thresholding expectations.

mod normal;
mod prior;
mod risk;

pub use normal::{std_normal_cdf, std_normal_pdf, std_normal_sf, INV_SQRT_2PI};
pub use prior::{Atom, Prior, PriorError, PARSE_WEIGHT_SUM_TOL, WEIGHT_SUM_TOL};
pub use risk::{
    atom_risk, detection_prob, normalized_atom_risk, normalized_atom_risk_derivative, psi_map,
    risk, risk_derivative, soft_threshold, PsiParams,
};
