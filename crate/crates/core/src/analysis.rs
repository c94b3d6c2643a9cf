//! Overlaps, Gram matrices, multiplier checks and least-squares projections
//! for sampled functions, with helpers for the oscillator family.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{integrate, Grid1D, NumericsError, QuadratureRule};
use crate::oscillator::{self, OscillatorError, OscillatorState};

/// Condition number above which a truncated Gram system is rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("functions live on different grids")]
    GridMismatch,
    #[error("Gram matrix at order {order} has condition number {condition:e}")]
    IllConditioned { order: usize, condition: f64, partial: Box<ProjectionReport> },
    #[error(transparent)]
    Oscillator(#[from] OscillatorError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// `[-14, 14]` with 8001 points: the closed-form family is below 1e-30 at
/// the edges for every `n ≤ 7`.
pub fn default_grid() -> Grid1D {
    Grid1D::new(-14.0, 14.0, 8001).expect("static grid is valid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    pub grid: Grid1D,
    pub values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self, AnalysisError> {
        if values.len() != grid.len() {
            return Err(AnalysisError::Validation(format!(
                "{} samples for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(AnalysisError::Validation(format!("sample {i} is not finite")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: Grid1D, f: F) -> Result<Self, AnalysisError> {
        Self::new(grid, grid.sample(f))
    }
}

fn dot(grid: &Grid1D, f: &[f64], g: &[f64]) -> Result<f64, NumericsError> {
    let product: Vec<f64> = f.iter().zip(g).map(|(a, b)| a * b).collect();
    integrate(&product, &QuadratureRule::trapezoid(grid))
}

/// `∫ f g dx` by the trapezoid rule.
pub fn inner_product(f: &SampledFunction, g: &SampledFunction) -> Result<f64, AnalysisError> {
    if f.grid != g.grid {
        return Err(AnalysisError::GridMismatch);
    }
    Ok(dot(&f.grid, &f.values, &g.values)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSet {
    grid: Grid1D,
    members: Vec<Vec<f64>>,
    labels: Vec<String>,
}

impl BasisSet {
    pub fn new(grid: Grid1D, members: Vec<Vec<f64>>, labels: Vec<String>) -> Result<Self, AnalysisError> {
        if members.is_empty() {
            return Err(AnalysisError::Validation("basis needs at least one member".into()));
        }
        if members.len() != labels.len() {
            return Err(AnalysisError::Validation(format!(
                "{} members but {} labels",
                members.len(),
                labels.len()
            )));
        }
        for (m, label) in members.iter().zip(&labels) {
            if m.len() != grid.len() {
                return Err(AnalysisError::Validation(format!("member {label} has the wrong length")));
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(AnalysisError::Validation(format!("member {label} is not finite")));
            }
        }
        Ok(Self { grid, members, labels })
    }

    pub fn from_states(grid: Grid1D, states: &[OscillatorState]) -> Result<Self, AnalysisError> {
        let members = states.iter().map(|s| grid.sample(|x| s.psi(x))).collect();
        let labels = states.iter().map(|s| format!("psi_{}", s.n)).collect();
        Self::new(grid, members, labels)
    }

    /// Self-consistent states `n = 0..=n_max`.
    pub fn oscillator_family(grid: Grid1D, n_max: u32) -> Result<Self, AnalysisError> {
        Self::from_states(grid, &oscillator::states(n_max)?)
    }

    /// Linear harmonic eigenstates `n = 0..=n_max`.
    pub fn linear_family(grid: Grid1D, n_max: u32) -> Result<Self, AnalysisError> {
        let states = (0..=n_max).map(OscillatorState::linear).collect::<Result<Vec<_>, _>>()?;
        Self::from_states(grid, &states)
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn member(&self, i: usize) -> SampledFunction {
        SampledFunction { grid: self.grid, values: self.members[i].clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramReport {
    pub labels: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
    pub grid: Grid1D,
    pub rule: String,
}

impl GramReport {
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.matrix.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.matrix[i][j] - self.matrix[j][i]).abs());
            }
        }
        worst
    }
}

pub fn gram_matrix(basis: &BasisSet) -> Result<GramReport, AnalysisError> {
    let n = basis.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| dot(&basis.grid, &basis.members[i], &basis.members[j]))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let mut matrix = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            matrix[i][j] = upper[i][j - i];
            matrix[j][i] = upper[i][j - i];
        }
    }
    Ok(GramReport { labels: basis.labels.clone(), matrix, grid: basis.grid, rule: "trapezoid".into() })
}

/// `⟨ψ_lower, R ψ_upper⟩` with `R` the upper state's eigen-residual operator.
pub fn mu0_estimate(grid: &Grid1D, lower: &OscillatorState, upper: &OscillatorState) -> Result<f64, AnalysisError> {
    let a = grid.sample(|x| lower.psi(x));
    let r = grid.sample(|x| upper.eigen_residual(x));
    Ok(dot(grid, &a, &r)?)
}

/// True iff energies strictly increase in the given order.
pub fn energy_ordering_check(states: &[OscillatorState]) -> bool {
    states.windows(2).all(|w| w[0].energy < w[1].energy)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub label: String,
    pub orders: Vec<usize>,
    /// Coefficients of the first `order` basis members, one vector per order.
    pub coefficients: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub condition_numbers: Vec<f64>,
}

/// Least-squares projection of `target` onto the first `order` members for
/// each entry of `orders`, through the Gram system.
pub fn completeness_projection(
    target: &SampledFunction,
    label: &str,
    basis: &BasisSet,
    orders: &[usize],
) -> Result<ProjectionReport, AnalysisError> {
    if target.grid != basis.grid {
        return Err(AnalysisError::GridMismatch);
    }
    if let Some(&bad) = orders.iter().find(|&&o| o == 0 || o > basis.len()) {
        return Err(AnalysisError::Validation(format!("order {bad} outside 1..={}", basis.len())));
    }
    let mut report = ProjectionReport {
        label: label.to_string(),
        orders: Vec::new(),
        coefficients: Vec::new(),
        residuals: Vec::new(),
        condition_numbers: Vec::new(),
    };
    if orders.is_empty() {
        return Ok(report);
    }
    let max_order = *orders.iter().max().unwrap();
    let gram = gram_matrix(&BasisSet {
        grid: basis.grid,
        members: basis.members[..max_order].to_vec(),
        labels: basis.labels[..max_order].to_vec(),
    })?;
    let rhs: Vec<f64> = basis.members[..max_order]
        .iter()
        .map(|m| dot(&basis.grid, m, &target.values))
        .collect::<Result<_, _>>()?;

    for &order in orders {
        let g = DMatrix::from_fn(order, order, |i, j| gram.matrix[i][j]);
        let eig = SymmetricEigen::new(g.clone()).eigenvalues;
        let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e.abs()), hi.max(e.abs())));
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if condition > MAX_CONDITION {
            return Err(AnalysisError::IllConditioned { order, condition, partial: Box::new(report) });
        }
        let b = DVector::from_column_slice(&rhs[..order]);
        let c = g
            .clone()
            .cholesky()
            .map(|ch| ch.solve(&b))
            .or_else(|| g.lu().solve(&b))
            .ok_or(AnalysisError::IllConditioned { order, condition, partial: Box::new(report.clone()) })?;
        let residual: Vec<f64> = (0..target.values.len())
            .map(|p| target.values[p] - (0..order).map(|i| c[i] * basis.members[i][p]).sum::<f64>())
            .collect();
        report.orders.push(order);
        report.coefficients.push(c.iter().copied().collect());
        report.residuals.push(dot(&basis.grid, &residual, &residual)?.max(0.0).sqrt());
        report.condition_numbers.push(condition);
    }
    Ok(report)
}

/// JSON description of a projection target and the basis it is projected on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionTarget {
    #[serde(default)]
    pub label: Option<String>,
    pub function: TargetFunction,
    /// Basis is the oscillator family `n = 0..=n_max`.
    #[serde(default = "default_n_max")]
    pub n_max: u32,
    #[serde(default)]
    pub grid: Option<Grid1D>,
}

fn default_n_max() -> u32 {
    7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetFunction {
    /// Member `n` of the oscillator family.
    State { n: u32 },
    /// `(Σ cᵢ xⁱ)·exp(-β x²)`.
    PolynomialGaussian { coefficients: Vec<f64>, beta: f64 },
}

impl ProjectionTarget {
    pub fn from_json(text: &str) -> Result<Self, AnalysisError> {
        serde_json::from_str(text).map_err(|e| AnalysisError::Validation(e.to_string()))
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| match &self.function {
            TargetFunction::State { n } => format!("psi_{n}"),
            TargetFunction::PolynomialGaussian { .. } => "polynomial_gaussian".into(),
        })
    }

    pub fn sample(&self, grid: Grid1D) -> Result<SampledFunction, AnalysisError> {
        match &self.function {
            TargetFunction::State { n } => {
                let s = oscillator::solve_state(*n)?;
                SampledFunction::from_fn(grid, |x| s.psi(x))
            }
            TargetFunction::PolynomialGaussian { coefficients, beta } => {
                if !(*beta > 0.0) {
                    return Err(AnalysisError::Validation(format!("beta must be positive, got {beta}")));
                }
                SampledFunction::from_fn(grid, |x| {
                    coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c) * (-beta * x * x).exp()
                })
            }
        }
    }

    pub fn project(&self, orders: &[usize]) -> Result<ProjectionReport, AnalysisError> {
        let grid = self.grid.unwrap_or_else(default_grid);
        let basis = BasisSet::oscillator_family(grid, self.n_max)?;
        completeness_projection(&self.sample(grid)?, &self.label(), &basis, orders)
    }
}
