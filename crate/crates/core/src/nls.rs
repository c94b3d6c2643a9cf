//! Grid ground states of `-½ψ'' + Vψ - b ln(ψ²)ψ = μψ` with Dirichlet walls,
//! found by a normalized gradient flow, plus the outer solve for `μ(b) = b`.
//!
//! Each flow step is semi-implicit: with the nonlinear potential
//! `W = V - b(1 + ln max(ψ², ε))` frozen at the current iterate it solves
//!
//! ```text
//! (I + τ(K + W + s)) ψ* = (1 + τs) ψ,    s = max(0, -min W)
//! ```
//!
//! and renormalizes. `K` is the three-point `-½∂²`. The shift keeps the
//! system an M-matrix, so a positive iterate stays positive, and a fixed
//! point of the map is exactly a stationary point of the discrete energy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{bisect_with, Grid1D, NumericsError, RootBracket};

pub const DEFAULT_EPS_LOG: f64 = 1e-100;
pub const MAX_FLOW_ITERS: usize = 1_000_000;
/// Bracket width at which the outer bisection stops.
pub const LAMBDA_BRACKET_TOL: f64 = 1e-10;
/// Required `|μ(b*) - b*|` at the returned coefficient.
pub const SELF_CONSISTENCY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NlsError {
    #[error("invalid problem: {0}")]
    Validation(String),
    #[error("flow did not converge in {iterations} steps (flow norm {flow_norm:e})")]
    Convergence { iterations: usize, flow_norm: f64 },
    #[error("iterate lost positivity at grid index {index} after {iterations} steps; try a smaller step")]
    Instability { iterations: usize, index: usize },
    #[error("μ(b) - b has the same sign at b = {lo} ({f_lo:e}) and b = {hi} ({f_hi:e})")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("self-consistency residual {residual:e} at b = {b} exceeds tolerance")]
    SelfConsistency { b: f64, residual: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

impl NlsError {
    /// Whether the failure is a convergence problem rather than bad input.
    pub fn is_convergence(&self) -> bool {
        !matches!(self, NlsError::Validation(_) | NlsError::Numerics(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridProblem {
    grid: Grid1D,
    potential: Vec<f64>,
    b: f64,
    eps_log: f64,
}

impl GridProblem {
    pub fn new(grid: Grid1D, potential: Vec<f64>, b: f64) -> Result<Self, NlsError> {
        if potential.len() != grid.len() {
            return Err(NlsError::Validation(format!(
                "{} potential samples for {} grid points",
                potential.len(),
                grid.len()
            )));
        }
        if let Some(i) = potential.iter().position(|v| !v.is_finite()) {
            return Err(NlsError::Validation(format!("potential not finite at index {i}")));
        }
        if !b.is_finite() {
            return Err(NlsError::Validation(format!("coefficient b must be finite, got {b}")));
        }
        Ok(Self { grid, potential, b, eps_log: DEFAULT_EPS_LOG })
    }

    /// `V = x²/2`.
    pub fn harmonic(grid: Grid1D, b: f64) -> Result<Self, NlsError> {
        Self::new(grid, grid.sample(|x| 0.5 * x * x), b)
    }

    pub fn with_b(&self, b: f64) -> Result<Self, NlsError> {
        if !b.is_finite() {
            return Err(NlsError::Validation(format!("coefficient b must be finite, got {b}")));
        }
        Ok(Self { b, ..self.clone() })
    }

    pub fn with_eps_log(mut self, eps_log: f64) -> Result<Self, NlsError> {
        if !(1e-300..=1e-20).contains(&eps_log) {
            return Err(NlsError::Validation(format!("log floor {eps_log:e} outside [1e-300, 1e-20]")));
        }
        self.eps_log = eps_log;
        Ok(self)
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn eps_log(&self) -> f64 {
        self.eps_log
    }

    fn log_density(&self, psi: f64) -> f64 {
        (psi * psi).max(self.eps_log).ln()
    }

    fn max_abs_potential(&self) -> f64 {
        self.potential.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub tau: f64,
    pub tol_flow: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self { tau: 0.01, tol_flow: 1e-10, max_iters: 200_000, seed: 0 }
    }
}

impl FlowConfig {
    fn validate(&self, problem: &GridProblem) -> Result<(), NlsError> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(NlsError::Validation(format!("step must be positive, got {}", self.tau)));
        }
        if self.tau * problem.max_abs_potential() >= 1.0 {
            return Err(NlsError::Validation(format!(
                "step {} violates τ·max|V| < 1 (max|V| = {})",
                self.tau,
                problem.max_abs_potential()
            )));
        }
        if !(self.tol_flow > 0.0) {
            return Err(NlsError::Validation(format!("flow tolerance must be positive, got {}", self.tol_flow)));
        }
        if self.max_iters == 0 || self.max_iters > MAX_FLOW_ITERS {
            return Err(NlsError::Validation(format!(
                "max_iters must lie in 1..={MAX_FLOW_ITERS}, got {}",
                self.max_iters
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateSolution {
    pub psi: Vec<f64>,
    pub mu: f64,
    pub b: f64,
    pub iterations: usize,
    pub flow_norm: f64,
}

/// `Σψ²·dx`.
pub fn grid_norm_squared(grid: &Grid1D, psi: &[f64]) -> f64 {
    psi.iter().map(|v| v * v).sum::<f64>() * grid.spacing()
}

/// L² distance `(Σ(f - g)²·dx)^½`.
pub fn l2_distance(grid: &Grid1D, f: &[f64], g: &[f64]) -> f64 {
    (f.iter().zip(g).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() * grid.spacing()).sqrt()
}

/// L² distance between two states, minimized over the overall sign.
pub fn l2_distance_up_to_sign(grid: &Grid1D, f: &[f64], g: &[f64]) -> f64 {
    let neg: Vec<f64> = g.iter().map(|v| -v).collect();
    l2_distance(grid, f, g).min(l2_distance(grid, f, &neg))
}

// -½ψ'' at interior points with ψ = 0 at both walls.
fn kinetic(grid: &Grid1D, psi: &[f64]) -> Vec<f64> {
    let n = psi.len();
    let c = 0.5 / (grid.spacing() * grid.spacing());
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = c * (2.0 * psi[i] - psi[i - 1] - psi[i + 1]);
    }
    out
}

/// `-½ψ'' + Vψ` on the grid; zero at the walls.
pub fn apply_hamiltonian(problem: &GridProblem, psi: &[f64]) -> Vec<f64> {
    let mut out = kinetic(&problem.grid, psi);
    let n = psi.len();
    for i in 1..n - 1 {
        out[i] += problem.potential[i] * psi[i];
    }
    out
}

/// Discrete energy `Σ dx [¼(Dψ)² + ½Vψ² - ½b ψ² ln ψ²]` whose gradient
/// drives the flow.
pub fn discrete_energy(problem: &GridProblem, psi: &[f64]) -> f64 {
    let dx = problem.grid.spacing();
    let n = psi.len();
    let kinetic: f64 = (0..n - 1).map(|i| (psi[i + 1] - psi[i]).powi(2)).sum::<f64>() / (4.0 * dx * dx);
    let local: f64 = (1..n - 1)
        .map(|i| {
            let p2 = psi[i] * psi[i];
            0.5 * problem.potential[i] * p2 - 0.5 * problem.b * p2 * problem.log_density(psi[i])
        })
        .sum();
    dx * (kinetic + local)
}

/// `Hψ - b(1 + ln ψ²)ψ`, the energy gradient per unit `dx`.
pub fn energy_gradient(problem: &GridProblem, psi: &[f64]) -> Vec<f64> {
    let mut g = apply_hamiltonian(problem, psi);
    for i in 1..psi.len() - 1 {
        g[i] -= problem.b * (1.0 + problem.log_density(psi[i])) * psi[i];
    }
    g
}

/// `μ = Σψ(Hψ - b ln(ψ²)ψ)·dx` for a normalized `ψ`.
pub fn chemical_potential(problem: &GridProblem, psi: &[f64]) -> f64 {
    let h = apply_hamiltonian(problem, psi);
    let dx = problem.grid.spacing();
    (1..psi.len() - 1)
        .map(|i| psi[i] * (h[i] - problem.b * problem.log_density(psi[i]) * psi[i]))
        .sum::<f64>()
        * dx
}

/// `‖-½ψ'' + Vψ - λ(1 + ln ψ²)ψ‖₂` over the interior.
pub fn stationarity_residual(problem: &GridProblem, psi: &[f64], lambda: f64) -> f64 {
    let h = apply_hamiltonian(problem, psi);
    let dx = problem.grid.spacing();
    ((1..psi.len() - 1)
        .map(|i| (h[i] - lambda * (1.0 + problem.log_density(psi[i])) * psi[i]).powi(2))
        .sum::<f64>()
        * dx)
        .sqrt()
}

/// `‖Hψ - b ln(ψ²)ψ - μψ‖₂` over the interior, meaningful for any fixed `b`.
pub fn eigen_residual_norm(problem: &GridProblem, psi: &[f64], mu: f64) -> f64 {
    let h = apply_hamiltonian(problem, psi);
    let dx = problem.grid.spacing();
    ((1..psi.len() - 1)
        .map(|i| (h[i] - (problem.b * problem.log_density(psi[i]) + mu) * psi[i]).powi(2))
        .sum::<f64>()
        * dx)
        .sqrt()
}

fn normalize(grid: &Grid1D, psi: &mut [f64]) {
    let s = grid_norm_squared(grid, psi).sqrt();
    for v in psi.iter_mut() {
        *v /= s;
    }
}

/// Gaussian bump centred in the domain, zero at the walls.
pub fn default_initial_guess(grid: &Grid1D) -> Vec<f64> {
    let center = 0.5 * (grid.x_min() + grid.x_max());
    let width = 0.25 * (grid.x_max() - grid.x_min());
    let mut psi = grid.sample(|x| (-((x - center) / width).powi(2)).exp());
    let n = psi.len();
    psi[0] = 0.0;
    psi[n - 1] = 0.0;
    normalize(grid, &mut psi);
    psi
}

/// Positive random guess `exp(-c(x - x₀)²)(1 + u/2)` from stream `stream`
/// of the seeded generator.
pub fn random_initial_guess(grid: &Grid1D, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let half = 0.5 * (grid.x_max() - grid.x_min());
    let center = 0.5 * (grid.x_min() + grid.x_max());
    let x0 = center + half * rng.random_range(-0.25..0.25);
    let c = rng.random_range(0.5..4.0) / (half * half) * 16.0;
    let n = grid.len();
    let mut psi: Vec<f64> = (0..n)
        .map(|i| {
            let x = grid.x(i);
            (-c * (x - x0).powi(2)).exp() * (1.0 + 0.5 * rng.random::<f64>())
        })
        .collect();
    psi[0] = 0.0;
    psi[n - 1] = 0.0;
    normalize(grid, &mut psi);
    psi
}

/// One flow trajectory. Exposed so callers can watch the energy along it.
pub struct FlowStepper<'a> {
    problem: &'a GridProblem,
    tau: f64,
    psi: Vec<f64>,
    iterations: usize,
    // Thomas-algorithm scratch
    c_prime: Vec<f64>,
    d_prime: Vec<f64>,
}

impl<'a> FlowStepper<'a> {
    pub fn new(problem: &'a GridProblem, cfg: &FlowConfig, init: Option<&[f64]>) -> Result<Self, NlsError> {
        cfg.validate(problem)?;
        let grid = problem.grid;
        let mut psi = match init {
            Some(init) => {
                if init.len() != grid.len() {
                    return Err(NlsError::Validation(format!(
                        "initial state has {} samples for {} grid points",
                        init.len(),
                        grid.len()
                    )));
                }
                if init.iter().any(|v| !v.is_finite()) {
                    return Err(NlsError::Validation("initial state is not finite".into()));
                }
                // the flow preserves sign, so start from |ψ| with the walls pinned
                let mut psi: Vec<f64> = init.iter().map(|v| v.abs()).collect();
                let n = psi.len();
                psi[0] = 0.0;
                psi[n - 1] = 0.0;
                if psi.iter().all(|&v| v == 0.0) {
                    return Err(NlsError::Validation("initial state vanishes".into()));
                }
                psi
            }
            None => default_initial_guess(&grid),
        };
        normalize(&grid, &mut psi);
        let n = grid.len();
        Ok(Self { problem, tau: cfg.tau, psi, iterations: 0, c_prime: vec![0.0; n], d_prime: vec![0.0; n] })
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Advances one step and returns `‖Δψ‖_∞ / τ`.
    pub fn step(&mut self) -> Result<f64, NlsError> {
        let p = self.problem;
        let n = self.psi.len();
        let dx = p.grid.spacing();
        let tau = self.tau;
        let kin = 0.5 / (dx * dx);
        let w: Vec<f64> = (1..n - 1)
            .map(|i| p.potential[i] - p.b * (1.0 + p.log_density(self.psi[i])))
            .collect();
        let shift = (-w.iter().cloned().fold(f64::INFINITY, f64::min)).max(0.0);

        // interior unknowns 1..n-1; row m corresponds to grid index m + 1
        let m = n - 2;
        let off = -tau * kin;
        for r in 0..m {
            let diag = 1.0 + tau * (2.0 * kin + w[r] + shift);
            let rhs = (1.0 + tau * shift) * self.psi[r + 1];
            if r == 0 {
                self.c_prime[0] = off / diag;
                self.d_prime[0] = rhs / diag;
            } else {
                let denom = diag - off * self.c_prime[r - 1];
                self.c_prime[r] = off / denom;
                self.d_prime[r] = (rhs - off * self.d_prime[r - 1]) / denom;
            }
        }
        let mut next = vec![0.0; n];
        next[m] = self.d_prime[m - 1];
        for r in (0..m - 1).rev() {
            next[r + 1] = self.d_prime[r] - self.c_prime[r] * next[r + 2];
        }
        normalize(&p.grid, &mut next);
        self.iterations += 1;
        if let Some(index) = (1..n - 1).find(|&i| !(next[i] > 0.0 && next[i].is_finite())) {
            return Err(NlsError::Instability { iterations: self.iterations, index });
        }
        let delta = next.iter().zip(&self.psi).fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        self.psi = next;
        Ok(delta / tau)
    }
}

/// Runs the normalized flow at fixed `b` until `‖Δψ‖_∞/τ < tol_flow`.
pub fn gradient_flow_ground_state(
    problem: &GridProblem,
    cfg: &FlowConfig,
    init: Option<&[f64]>,
) -> Result<GroundStateSolution, NlsError> {
    let mut stepper = FlowStepper::new(problem, cfg, init)?;
    let mut flow_norm = f64::INFINITY;
    while stepper.iterations() < cfg.max_iters {
        flow_norm = stepper.step()?;
        if flow_norm < cfg.tol_flow {
            let psi = stepper.psi;
            let mu = chemical_potential(problem, &psi);
            return Ok(GroundStateSolution { psi, mu, b: problem.b, iterations: stepper.iterations, flow_norm });
        }
    }
    Err(NlsError::Convergence { iterations: cfg.max_iters, flow_norm })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfConsistentSolution {
    pub lambda: f64,
    /// `|μ(λ) - λ|`.
    pub residual: f64,
    /// Flow solves spent on the outer root-find.
    pub evaluations: usize,
    pub solution: GroundStateSolution,
}

/// Finds `b*` with `μ(b*) = b*` by bisection over `bracket`, warm-starting
/// each flow from the previous state.
pub fn self_consistent_lambda(
    template: &GridProblem,
    cfg: &FlowConfig,
    bracket: (f64, f64),
    init: Option<&[f64]>,
) -> Result<SelfConsistentSolution, NlsError> {
    let (lo, hi) = bracket;
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Err(NlsError::Validation(format!("bad bracket [{lo}, {hi}]")));
    }
    let mut warm: Option<Vec<f64>> = init.map(|v| v.to_vec());
    let mut evaluations = 0;
    let mut solve = |b: f64, warm: &mut Option<Vec<f64>>| -> Result<GroundStateSolution, NlsError> {
        evaluations += 1;
        let sol = gradient_flow_ground_state(&template.with_b(b)?, cfg, warm.as_deref())?;
        *warm = Some(sol.psi.clone());
        Ok(sol)
    };
    let f_lo = {
        let s = solve(lo, &mut warm)?;
        s.mu - lo
    };
    let f_hi = {
        let s = solve(hi, &mut warm)?;
        s.mu - hi
    };
    let br = RootBracket::new(lo, hi, f_lo, f_hi)
        .map_err(|_| NlsError::Bracket { lo, hi, f_lo, f_hi })?;
    let b_star = bisect_with(|b| solve(b, &mut warm).map(|s| s.mu - b), br, LAMBDA_BRACKET_TOL)?;
    let solution = solve(b_star, &mut warm)?;
    let residual = (solution.mu - b_star).abs();
    if residual >= SELF_CONSISTENCY_TOL {
        return Err(NlsError::SelfConsistency { b: b_star, residual });
    }
    Ok(SelfConsistentSolution { lambda: b_star, residual, evaluations, solution })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ProbeMode {
    /// Solve for `μ(b) = b` inside the bracket from every start.
    SelfConsistent { lo: f64, hi: f64 },
    /// Keep the problem's `b` and compare the resulting `μ`.
    FixedCoefficient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRun {
    pub init: usize,
    /// `λ` in self-consistent mode, `μ` otherwise.
    pub value: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub mode: ProbeMode,
    pub runs: Vec<ProbeRun>,
    /// Largest pairwise `|vᵢ - vⱼ|` over successful runs.
    pub max_value_spread: f64,
    /// Largest pairwise L² distance between states, up to sign.
    pub max_state_distance: f64,
}

/// Repeats the solve from `n_inits` seeded random positive starts.
/// Failures are recorded per start and do not abort the probe.
pub fn uniqueness_probe(
    problem: &GridProblem,
    cfg: &FlowConfig,
    mode: ProbeMode,
    n_inits: usize,
) -> Result<UniquenessReport, NlsError> {
    if n_inits < 2 {
        return Err(NlsError::Validation(format!("need at least 2 initializations, got {n_inits}")));
    }
    cfg.validate(problem)?;
    let grid = problem.grid;
    let outcomes: Vec<Result<(f64, Vec<f64>), NlsError>> = (0..n_inits)
        .into_par_iter()
        .map(|i| {
            let init = random_initial_guess(&grid, cfg.seed, i as u64);
            match mode {
                ProbeMode::SelfConsistent { lo, hi } => {
                    self_consistent_lambda(problem, cfg, (lo, hi), Some(&init)).map(|s| (s.lambda, s.solution.psi))
                }
                ProbeMode::FixedCoefficient => {
                    gradient_flow_ground_state(problem, cfg, Some(&init)).map(|s| (s.mu, s.psi))
                }
            }
        })
        .collect();

    let ok: Vec<&(f64, Vec<f64>)> = outcomes.iter().filter_map(|o| o.as_ref().ok()).collect();
    let mut max_value_spread = 0.0f64;
    let mut max_state_distance = 0.0f64;
    for (a, sa) in ok.iter().map(|o| (o.0, &o.1)) {
        for (b, sb) in ok.iter().map(|o| (o.0, &o.1)) {
            max_value_spread = max_value_spread.max((a - b).abs());
            max_state_distance = max_state_distance.max(l2_distance_up_to_sign(&grid, sa, sb));
        }
    }
    let runs = outcomes
        .iter()
        .enumerate()
        .map(|(init, o)| match o {
            Ok((v, _)) => ProbeRun { init, value: Some(*v), error: None },
            Err(e) => ProbeRun { init, value: None, error: Some(e.to_string()) },
        })
        .collect();
    Ok(UniquenessReport { mode, runs, max_value_spread, max_state_distance })
}
