//! Shared numerical primitives: uniform grids, quadrature rules, Hermite
//! polynomials and bracketing root finders.

mod grid;
mod hermite;
mod quadrature;
mod roots;

pub use grid::Grid1D;
pub use hermite::{hermite_deriv, hermite_eval, hermite_pair, HERMITE_MAX_ORDER};
pub use quadrature::{integrate, QuadratureKind, QuadratureRule};
pub use roots::{bisect_with, find_root, find_root_newton, sign_change_scan, RootBracket, ROOT_MAX_ITERS};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("order {order} exceeds the supported maximum {max}")]
    OrderTooLarge { order: usize, max: usize },
    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },
    #[error("sample count {samples} does not match rule size {nodes}")]
    LengthMismatch { samples: usize, nodes: usize },
    #[error("invalid quadrature request: {0}")]
    InvalidRule(String),
    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("invalid bracket [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error("function is not finite at x = {x}")]
    NotFinite { x: f64 },
    #[error("root finder did not converge after {0} iterations")]
    NoConvergence(usize),
}
