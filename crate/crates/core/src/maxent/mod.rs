//! Maximum-entropy densities under moment constraints.
//!
//! A density on `[a, b]` constrained by `⟨xⁱ⟩ = cᵢ` for finitely many orders
//! takes the form `ρ(x) = Z(x)·S(x)·exp(-a₀ - Σ aᵢ xⁱ)`, where `Z` and `S`
//! carry prescribed zeros and integrable singularities. The multipliers are
//! found by Newton iteration on the convex dual `ln N(a) + Σ aᵢcᵢ`, whose
//! gradient is the moment residual and whose Hessian is the covariance of the
//! constrained monomials.

mod factors;
mod one_d;
mod quadrature;
mod spec;
mod two_d;

pub use factors::{EndpointFactors, Singularity, Zero};
pub use one_d::{
    density_eval, fit_multipliers_1d, information, modified_information, moment_gradient_check,
    ExpFamilyDensity1D, FitDiagnostics, GradientCheck, MAX_NEWTON_ITERS,
};
pub use spec::{Bound, Moment, Moment2D, MomentSpec1D, MomentSpec2D, Multiplier, Multiplier2D, Rectangle, Support};
pub use two_d::{fit_multipliers_2d, ExpFamilyDensity2D, MAX_TOTAL_DEGREE_2D};

use thiserror::Error;

use crate::numerics::NumericsError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaxEntError {
    #[error("invalid moment specification: {0}")]
    Validation(String),
    #[error("moments are infeasible: {0}")]
    Infeasible(String),
    #[error("multiplier iteration did not converge after {iterations} iterations (max residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },
    #[error("x = {0} lies outside the support")]
    Domain(f64),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("tail mass {0:e} beyond the quadrature window exceeds 1e-12")]
    TailMass(f64),
    #[error("malformed JSON document: {0}")]
    Json(String),
}

impl From<NumericsError> for MaxEntError {
    fn from(e: NumericsError) -> Self {
        MaxEntError::Numeric(e.to_string())
    }
}
