use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{MaxEntError, Moment2D, MomentSpec2D, Multiplier2D, Rectangle};
use crate::numerics::QuadratureRule;

/// Largest total degree `i + j` accepted by [`fit_multipliers_2d`].
pub const MAX_TOTAL_DEGREE_2D: u32 = 4;

const TENSOR_STEP: f64 = 1.0 / 32.0;
const MAX_ITERS: usize = 100;

#[derive(Debug, Clone)]
struct TensorQuad {
    x: Vec<f64>,
    y: Vec<f64>,
    w: Vec<f64>,
}

impl TensorQuad {
    fn new(r: &Rectangle) -> Result<Self, MaxEntError> {
        let rx = QuadratureRule::tanh_sinh(r.x.0, r.x.1, TENSOR_STEP)?;
        let ry = QuadratureRule::tanh_sinh(r.y.0, r.y.1, TENSOR_STEP)?;
        let n = rx.len() * ry.len();
        let (mut x, mut y, mut w) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for (&xi, &wx) in rx.nodes().iter().zip(rx.weights()) {
            for (&yj, &wy) in ry.nodes().iter().zip(ry.weights()) {
                x.push(xi);
                y.push(yj);
                w.push(wx * wy);
            }
        }
        Ok(Self { x, y, w })
    }

    fn exponents(&self, pairs: &[(u32, u32)], a: &[f64]) -> Vec<f64> {
        self.x.iter().zip(&self.y).map(|(&x, &y)| -poly2(pairs, a, x, y)).collect()
    }

    fn masses(&self, pairs: &[(u32, u32)], a: &[f64]) -> (Vec<f64>, f64) {
        let e = self.exponents(pairs, a);
        let m = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut p: Vec<f64> = e.iter().zip(&self.w).map(|(&ei, &wi)| wi * (ei - m).exp()).collect();
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= s);
        (p, m + s.ln())
    }
}

fn poly2(pairs: &[(u32, u32)], a: &[f64], x: f64, y: f64) -> f64 {
    pairs.iter().zip(a).map(|(&(i, j), &c)| c * x.powi(i as i32) * y.powi(j as i32)).sum()
}

/// `ρ(x, y) = exp(-a₀₀ - Σ aᵢⱼ xⁱ yʲ)` on a rectangle.
#[derive(Debug, Clone, Serialize)]
pub struct ExpFamilyDensity2D {
    support: Rectangle,
    multipliers: Vec<Multiplier2D>,
    log_norm: f64,
    iterations: usize,
    max_residual: f64,
    #[serde(skip)]
    quad: TensorQuad,
}

impl ExpFamilyDensity2D {
    /// Density from multipliers with `i + j ≥ 1`; `a₀₀` normalizes it.
    pub fn new(support: Rectangle, multipliers: Vec<Multiplier2D>) -> Result<Self, MaxEntError> {
        let mut multipliers: Vec<_> = multipliers.into_iter().filter(|m| m.i + m.j > 0).collect();
        multipliers.sort_by_key(|m| (m.i + m.j, m.i, m.j));
        if multipliers.iter().any(|m| !m.value.is_finite()) {
            return Err(MaxEntError::Validation("multipliers must be finite".into()));
        }
        let quad = TensorQuad::new(&support)?;
        let (pairs, a) = split(&multipliers);
        let (_, log_norm) = quad.masses(&pairs, &a);
        Ok(Self { support, multipliers, log_norm, iterations: 0, max_residual: 0.0, quad })
    }

    pub fn support(&self) -> Rectangle {
        self.support
    }

    pub fn multipliers(&self) -> &[Multiplier2D] {
        &self.multipliers
    }

    /// `aᵢⱼ`, with `a₀₀` the log-normalizer and zero for absent pairs.
    pub fn multiplier(&self, i: u32, j: u32) -> f64 {
        if i == 0 && j == 0 {
            return self.log_norm;
        }
        self.multipliers.iter().find(|m| m.i == i && m.j == j).map_or(0.0, |m| m.value)
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64, MaxEntError> {
        if !self.support.contains(x, y) {
            return Err(MaxEntError::Domain(if self.support.x.0 <= x && x <= self.support.x.1 { y } else { x }));
        }
        Ok((-self.log_norm - self.exponent(x, y)).exp())
    }

    /// `Σ aᵢⱼ xⁱ yʲ` without the normalizer.
    pub fn exponent(&self, x: f64, y: f64) -> f64 {
        let (pairs, a) = split(&self.multipliers);
        poly2(&pairs, &a, x, y)
    }

    pub fn moment(&self, i: u32, j: u32) -> f64 {
        let (pairs, a) = split(&self.multipliers);
        let (p, _) = self.quad.masses(&pairs, &a);
        p.iter()
            .zip(self.quad.x.iter().zip(&self.quad.y))
            .map(|(&pk, (&x, &y))| pk * x.powi(i as i32) * y.powi(j as i32))
            .sum()
    }

    pub fn total_mass(&self) -> f64 {
        let (pairs, a) = split(&self.multipliers);
        self.quad
            .x
            .iter()
            .zip(&self.quad.y)
            .zip(&self.quad.w)
            .map(|((&x, &y), &w)| w * (-self.log_norm - poly2(&pairs, &a, x, y)).exp())
            .sum()
    }
}

fn split(m: &[Multiplier2D]) -> (Vec<(u32, u32)>, Vec<f64>) {
    m.iter().map(|m| ((m.i, m.j), m.value)).unzip()
}

fn monomial_range(r: &Rectangle, i: u32, j: u32) -> (f64, f64) {
    let cands = |lo: f64, hi: f64| {
        let mut v = vec![lo, hi];
        if lo < 0.0 && hi > 0.0 {
            v.push(0.0);
        }
        v
    };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for x in cands(r.x.0, r.x.1) {
        for y in cands(r.y.0, r.y.1) {
            let v = x.powi(i as i32) * y.powi(j as i32);
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (lo, hi)
}

fn check_feasible(spec: &MomentSpec2D) -> Result<(), MaxEntError> {
    for m in spec.constraints() {
        let (lo, hi) = monomial_range(&spec.support, m.i, m.j);
        if !(m.value > lo && m.value < hi) {
            return Err(MaxEntError::Infeasible(format!(
                "c{}{} = {} must lie strictly inside ({lo}, {hi})",
                m.i, m.j, m.value
            )));
        }
    }
    let v = |i, j| spec.value(i, j);
    if let (Some(c20), Some(c02), Some(c11)) = (v(2, 0), v(0, 2), v(1, 1)) {
        let full = match (v(1, 0), v(0, 1)) {
            (Some(c10), Some(c01)) => {
                DMatrix::from_row_slice(3, 3, &[1.0, c10, c01, c10, c20, c11, c01, c11, c02])
            }
            _ => DMatrix::from_row_slice(2, 2, &[c20, c11, c11, c02]),
        };
        if full.cholesky().is_none() {
            return Err(MaxEntError::Infeasible("second-moment matrix is not positive definite".into()));
        }
    }
    Ok(())
}

/// Fits `aᵢⱼ` so that `|⟨xⁱyʲ⟩ - cᵢⱼ| ≤ tol` for every constraint.
pub fn fit_multipliers_2d(spec: &MomentSpec2D, tol: f64) -> Result<ExpFamilyDensity2D, MaxEntError> {
    if !(tol > 0.0) {
        return Err(MaxEntError::Validation(format!("tolerance must be positive, got {tol}")));
    }
    if let Some(m) = spec.constraints().iter().find(|m| m.i + m.j > MAX_TOTAL_DEGREE_2D) {
        return Err(MaxEntError::Validation(format!(
            "pair ({}, {}) exceeds total degree {MAX_TOTAL_DEGREE_2D}",
            m.i, m.j
        )));
    }
    check_feasible(spec)?;
    let quad = TensorQuad::new(&spec.support)?;
    let pairs: Vec<(u32, u32)> = spec.constraints().iter().map(|m| (m.i, m.j)).collect();
    let k = pairs.len();
    let targets = DVector::from_iterator(k, spec.constraints().iter().map(|m: &Moment2D| m.value));
    let features: Vec<Vec<f64>> = quad
        .x
        .iter()
        .zip(&quad.y)
        .map(|(&x, &y)| pairs.iter().map(|&(i, j)| x.powi(i as i32) * y.powi(j as i32)).collect())
        .collect();

    let stats = |a: &[f64]| -> (f64, DVector<f64>, DMatrix<f64>) {
        let (p, log_norm) = quad.masses(&pairs, a);
        let mut mean = DVector::zeros(k);
        for (pk, f) in p.iter().zip(&features) {
            for r in 0..k {
                mean[r] += pk * f[r];
            }
        }
        let mut cov = DMatrix::zeros(k, k);
        for (pk, f) in p.iter().zip(&features) {
            for r in 0..k {
                let dr = f[r] - mean[r];
                for c in 0..=r {
                    cov[(r, c)] += pk * dr * (f[c] - mean[c]);
                }
            }
        }
        for r in 0..k {
            for c in 0..r {
                cov[(c, r)] = cov[(r, c)];
            }
        }
        (log_norm, mean, cov)
    };

    let mut a = vec![0.0; k];
    let (mut log_norm, mean, mut cov) = stats(&a);
    let mut resid = &targets - &mean;
    let mut max_res = if k == 0 { 0.0 } else { resid.amax() };
    let mut iterations = 0;
    while max_res > tol {
        if iterations == MAX_ITERS {
            return Err(MaxEntError::Convergence { iterations, residual: max_res });
        }
        iterations += 1;
        let s = DVector::from_iterator(k, (0..k).map(|i| cov[(i, i)].sqrt().max(1e-300)));
        let scaled = DMatrix::from_fn(k, k, |i, j| cov[(i, j)] / (s[i] * s[j]));
        let rhs = DVector::from_fn(k, |i, _| resid[i] / s[i]);
        let y = scaled
            .cholesky()
            .map(|c| c.solve(&rhs))
            .ok_or(MaxEntError::Convergence { iterations, residual: max_res })?;
        let dir: Vec<f64> = (0..k).map(|i| -y[i] / s[i]).collect();
        let dual0 = log_norm + a.iter().zip(targets.iter()).map(|(x, c)| x * c).sum::<f64>();
        let slope: f64 = (0..k).map(|i| resid[i] * dir[i]).sum::<f64>();
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = a.iter().zip(&dir).map(|(ai, di)| ai + t * di).collect();
            let (ln, mn, cv) = stats(&trial);
            let dual = ln + trial.iter().zip(targets.iter()).map(|(x, c)| x * c).sum::<f64>();
            let r = &targets - &mn;
            if dual.is_finite() && (dual <= dual0 + 1e-4 * t * slope || r.amax() < max_res) {
                accepted = Some((trial, ln, cv, r));
                break;
            }
            t *= 0.5;
        }
        let (trial, ln, cv, r) =
            accepted.ok_or(MaxEntError::Convergence { iterations, residual: max_res })?;
        a = trial;
        log_norm = ln;
        cov = cv;
        resid = r;
        max_res = resid.amax();
    }
    let multipliers = pairs
        .iter()
        .zip(&a)
        .map(|(&(i, j), &value)| Multiplier2D { i, j, value })
        .collect();
    Ok(ExpFamilyDensity2D {
        support: spec.support,
        multipliers,
        log_norm,
        iterations,
        max_residual: max_res,
        quad,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(i: u32, j: u32, value: f64) -> Moment2D {
        Moment2D { i, j, value }
    }

    #[test]
    fn independent_gaussians() {
        let spec = MomentSpec2D::new(
            Rectangle::square(-10.0, 10.0).unwrap(),
            vec![m(2, 0, 1.0), m(0, 2, 1.0), m(1, 1, 0.0)],
        )
        .unwrap();
        let d = fit_multipliers_2d(&spec, 1e-11).unwrap();
        assert!((d.multiplier(2, 0) - 0.5).abs() < 1e-8);
        assert!((d.multiplier(0, 2) - 0.5).abs() < 1e-8);
        assert!(d.multiplier(1, 1).abs() < 1e-8);
        assert!((d.multiplier(0, 0) - (2.0 * std::f64::consts::PI).ln()).abs() < 1e-8);
    }

    #[test]
    fn uniform_square() {
        let spec = MomentSpec2D::new(Rectangle::square(0.0, 1.0).unwrap(), vec![]).unwrap();
        let d = fit_multipliers_2d(&spec, 1e-10).unwrap();
        assert!(d.multiplier(0, 0).abs() < 1e-14);
        assert!(d.multipliers().is_empty());
        assert!((d.eval(0.2, 0.9).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn correlated_matches_dense_grid_oracle() {
        // frozen from a 2401² trapezoid solve of the moment equations
        let spec = MomentSpec2D::new(
            Rectangle::square(-6.0, 6.0).unwrap(),
            vec![m(1, 1, 0.3), m(2, 0, 1.0), m(0, 2, 1.0)],
        )
        .unwrap();
        let d = fit_multipliers_2d(&spec, 1e-12).unwrap();
        assert!((d.multiplier(1, 1) + 0.329670329670018).abs() < 1e-8);
        assert!((d.multiplier(2, 0) - 0.549450512992843).abs() < 1e-8);
        assert!((d.multiplier(0, 2) - 0.549450512992843).abs() < 1e-8);
        assert!((d.multiplier(0, 0) - 1.79072179564236).abs() < 1e-8);
        assert!((d.total_mass() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn degree_cap_and_feasibility() {
        let sq = Rectangle::square(-1.0, 1.0).unwrap();
        let spec = MomentSpec2D::new(sq, vec![m(3, 2, 0.01)]).unwrap();
        assert!(matches!(fit_multipliers_2d(&spec, 1e-8), Err(MaxEntError::Validation(_))));
        let spec = MomentSpec2D::new(sq, vec![m(2, 0, 0.3), m(0, 2, 0.3), m(1, 1, 0.5)]).unwrap();
        assert!(matches!(fit_multipliers_2d(&spec, 1e-8), Err(MaxEntError::Infeasible(_))));
        let spec = MomentSpec2D::new(sq, vec![m(2, 0, 1.2)]).unwrap();
        assert!(matches!(fit_multipliers_2d(&spec, 1e-8), Err(MaxEntError::Infeasible(_))));
    }
}
