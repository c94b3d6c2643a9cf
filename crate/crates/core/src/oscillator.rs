//! Closed-form eigenstates of the logarithmic nonlinear problem with
//! potential `x²/2`.
//!
//! The states are Hermite–Gaussians
//! `ψ_n(x) = H_n(√(2β) x) · exp(-α - β x²)` whose parameters satisfy
//!
//! * normalization: `exp(2α) = 2ⁿ n! √π / √(2β)`
//! * width closure: `8β² (n + k + α) = 2α - 1`, with parity index `k = n mod 2`
//! * multiplier: `λ = (4β² - 1) / (4β)`
//! * energy: `E = λ (1 - 2α - (2n+1)/2)`
//!
//! With the Hermite factor as zero polynomial, `ln(ψ²/Z²) = -2α - 2βx²`, and
//! the eigen-equation residual reduces to `-2kβ ψ` pointwise.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{
    find_root_newton, hermite_pair, integrate, sign_change_scan, Grid1D, NumericsError,
    QuadratureRule,
};

/// Largest quantum number handled by [`solve_state`].
pub const MAX_QUANTUM_NUMBER: u32 = 20;

const BETA_SCAN_LO: f64 = 1e-4;
const BETA_SCAN_HI: f64 = 2.0;
const BETA_SCAN_PANELS: usize = 2000;
const BETA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OscillatorError {
    #[error("quantum number {0} outside 0..={MAX_QUANTUM_NUMBER}")]
    QuantumNumber(i64),
    #[error("width parameter must be positive, got {0}")]
    Beta(f64),
    #[error("n = {n}: expected exactly one admissible root of the width closure, found {found}")]
    RootStructure { n: u32, found: usize },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Which eigen-equation a state belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Logarithmic nonlinearity with multiplier λ.
    Logarithmic,
    /// Ordinary oscillator: `β = ½`, `λ = 0`, residual `(H - E)ψ`.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorState {
    pub n: u32,
    pub k: u32,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub energy: f64,
    pub branch: Branch,
}

/// One row of the parameter table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub n: u32,
    pub k: u32,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub energy: f64,
}

impl From<&OscillatorState> for TableRow {
    fn from(s: &OscillatorState) -> Self {
        Self { n: s.n, k: s.k, alpha: s.alpha, beta: s.beta, lambda: s.lambda, energy: s.energy }
    }
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|m| (m as f64).ln()).sum()
}

/// `α = ½ ln(2ⁿ n! √π / √(2β))`.
pub fn alpha_from_beta(n: u32, beta: f64) -> f64 {
    let ln_pi = std::f64::consts::PI.ln();
    0.5 * (n as f64 * std::f64::consts::LN_2 + ln_factorial(n) + 0.5 * ln_pi
        - 0.5 * (2.0 * beta).ln())
}

/// `g(β) = 8β²(n + k + α(β)) - (2α(β) - 1)`; its admissible root is `β_n`.
pub fn beta_closure_residual(n: u32, k: u32, beta: f64) -> f64 {
    let alpha = alpha_from_beta(n, beta);
    8.0 * beta * beta * (n as f64 + k as f64 + alpha) - (2.0 * alpha - 1.0)
}

fn beta_closure_derivative(n: u32, k: u32, beta: f64) -> f64 {
    let alpha = alpha_from_beta(n, beta);
    let d_alpha = -0.25 / beta;
    16.0 * beta * (n as f64 + k as f64 + alpha) + 8.0 * beta * beta * d_alpha - 2.0 * d_alpha
}

/// `λ = (4β² - 1) / (4β)`.
pub fn lambda_from_beta(beta: f64) -> f64 {
    (4.0 * beta * beta - 1.0) / (4.0 * beta)
}

/// `E = λ (1 - 2α - (2n+1)/2)`.
pub fn energy(n: u32, alpha: f64, lambda: f64) -> f64 {
    lambda * (1.0 - 2.0 * alpha - (2.0 * n as f64 + 1.0) / 2.0)
}

fn check_n(n: i64) -> Result<u32, OscillatorError> {
    if (0..=MAX_QUANTUM_NUMBER as i64).contains(&n) {
        Ok(n as u32)
    } else {
        Err(OscillatorError::QuantumNumber(n))
    }
}

/// Solves the width closure for state `n`.
///
/// The closure is scanned over `β ∈ (1e-4, 2]` and only sign changes with
/// `2α(β) > 1` are kept (the state is otherwise not normalizable against the
/// closure's right-hand side). Exactly one must remain.
pub fn solve_state(n: u32) -> Result<OscillatorState, OscillatorError> {
    let n = check_n(n as i64)?;
    let k = n % 2;
    let g = |b: f64| beta_closure_residual(n, k, b);
    let admissible: Vec<_> = sign_change_scan(g, BETA_SCAN_LO, BETA_SCAN_HI, BETA_SCAN_PANELS)?
        .into_iter()
        .filter(|br| {
            let mid = 0.5 * (br.lo + br.hi);
            2.0 * alpha_from_beta(n, mid) > 1.0
        })
        .collect();
    if admissible.len() != 1 {
        return Err(OscillatorError::RootStructure { n, found: admissible.len() });
    }
    let beta = find_root_newton(g, |b| beta_closure_derivative(n, k, b), admissible[0], BETA_TOL)?;
    let alpha = alpha_from_beta(n, beta);
    let lambda = lambda_from_beta(beta);
    Ok(OscillatorState {
        n,
        k,
        alpha,
        beta,
        lambda,
        energy: energy(n, alpha, lambda),
        branch: Branch::Logarithmic,
    })
}

/// Rows `n = 0..=n_max`, solved in parallel; order is by `n`.
pub fn table(n_max: u32) -> Result<Vec<TableRow>, OscillatorError> {
    let n_max = check_n(n_max as i64)?;
    (0..=n_max)
        .into_par_iter()
        .map(|n| solve_state(n).map(|s| TableRow::from(&s)))
        .collect()
}

/// States `n = 0..=n_max` on the logarithmic branch.
pub fn states(n_max: u32) -> Result<Vec<OscillatorState>, OscillatorError> {
    let n_max = check_n(n_max as i64)?;
    (0..=n_max).into_par_iter().map(solve_state).collect()
}

impl OscillatorState {
    /// The ordinary oscillator eigenstate `n` (`β = ½`, `λ = 0`, `E = n + ½`).
    pub fn linear(n: u32) -> Result<Self, OscillatorError> {
        let n = check_n(n as i64)?;
        Ok(Self {
            n,
            k: n % 2,
            alpha: alpha_from_beta(n, 0.5),
            beta: 0.5,
            lambda: 0.0,
            energy: n as f64 + 0.5,
            branch: Branch::Linear,
        })
    }

    /// A logarithmic-branch state with caller-chosen width; `α`, `λ`, `E`
    /// follow from `β` through the normalization, multiplier and energy
    /// relations (the width closure is not enforced).
    pub fn from_beta(n: u32, beta: f64) -> Result<Self, OscillatorError> {
        let n = check_n(n as i64)?;
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(OscillatorError::Beta(beta));
        }
        let alpha = alpha_from_beta(n, beta);
        let lambda = lambda_from_beta(beta);
        Ok(Self {
            n,
            k: n % 2,
            alpha,
            beta,
            lambda,
            energy: energy(n, alpha, lambda),
            branch: Branch::Logarithmic,
        })
    }

    fn scale(&self) -> f64 {
        (2.0 * self.beta).sqrt()
    }

    // n ≤ 20 is enforced by construction, far below the recurrence cap.
    fn hermite(&self, u: f64) -> (f64, f64) {
        hermite_pair(self.n as usize, u).expect("quantum number within Hermite cap")
    }

    fn hermite_lower(&self, u: f64) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            hermite_pair(self.n as usize - 1, u).expect("quantum number within Hermite cap").0
        }
    }

    /// The zero polynomial `Z_n(x) = H_n(√(2β) x)`.
    pub fn hermite_factor(&self, x: f64) -> f64 {
        self.hermite(self.scale() * x).1
    }

    pub fn psi(&self, x: f64) -> f64 {
        let (_, h) = self.hermite(self.scale() * x);
        h * (-self.alpha - self.beta * x * x).exp()
    }

    pub fn psi_derivative(&self, x: f64) -> f64 {
        let s = self.scale();
        let u = s * x;
        let (h_prev, h) = self.hermite(u);
        let dh = 2.0 * self.n as f64 * h_prev;
        (s * dh - 2.0 * self.beta * x * h) * (-self.alpha - self.beta * x * x).exp()
    }

    /// Analytic `ψ''` from `H_n' = 2n H_{n-1}` applied twice.
    pub fn psi_second_derivative(&self, x: f64) -> f64 {
        let s = self.scale();
        let u = s * x;
        let n = self.n as f64;
        let (h_prev, h) = self.hermite(u);
        let dh = 2.0 * n * h_prev;
        let d2h = 2.0 * n * 2.0 * (n - 1.0) * self.hermite_lower(u);
        let b = self.beta;
        let gauss = (-self.alpha - b * x * x).exp();
        (s * s * d2h - 4.0 * b * x * s * dh + (4.0 * b * b * x * x - 2.0 * b) * h) * gauss
    }

    /// Residual of the eigen-equation at `x`.
    ///
    /// Logarithmic branch: `-½ψ'' + (x²/2)ψ - λ[1 + ln(ψ²/Z²)]ψ` with
    /// `ln(ψ²/Z²) = -2α - 2βx²`. Linear branch: `-½ψ'' + (x²/2)ψ - Eψ`.
    pub fn eigen_residual(&self, x: f64) -> f64 {
        let psi = self.psi(x);
        let kinetic = -0.5 * self.psi_second_derivative(x) + 0.5 * x * x * psi;
        match self.branch {
            Branch::Logarithmic => {
                let log_ratio = -2.0 * self.alpha - 2.0 * self.beta * x * x;
                kinetic - self.lambda * (1.0 + log_ratio) * psi
            }
            Branch::Linear => kinetic - self.energy * psi,
        }
    }

    pub fn table_row(&self) -> TableRow {
        TableRow::from(self)
    }
}

/// `⟨ln(ψ²/Z²)⟩ = -2α - (2n+1)/2` in closed form.
pub fn state_information(state: &OscillatorState) -> f64 {
    -2.0 * state.alpha - (2.0 * state.n as f64 + 1.0) / 2.0
}

/// Quadrature value of `⟨ln(ψ²/Z²)⟩` on `grid` (trapezoid).
pub fn state_information_quadrature(state: &OscillatorState, grid: &Grid1D) -> Result<f64, NumericsError> {
    let samples = grid.sample(|x| {
        let p = state.psi(x);
        p * p * (-2.0 * state.alpha - 2.0 * state.beta * x * x)
    });
    integrate(&samples, &QuadratureRule::trapezoid(grid))
}

/// Quadrature `⟨H⟩ = ∫ ½ψ'² + (x²/2)ψ²` on `grid` (trapezoid).
pub fn hamiltonian_expectation(state: &OscillatorState, grid: &Grid1D) -> Result<f64, NumericsError> {
    let samples = grid.sample(|x| {
        let d = state.psi_derivative(x);
        let p = state.psi(x);
        0.5 * d * d + 0.5 * x * x * p * p
    });
    integrate(&samples, &QuadratureRule::trapezoid(grid))
}

/// `∫ψ²` on `grid` (trapezoid).
pub fn norm_squared(state: &OscillatorState, grid: &Grid1D) -> Result<f64, NumericsError> {
    let samples = grid.sample(|x| state.psi(x).powi(2));
    integrate(&samples, &QuadratureRule::trapezoid(grid))
}
