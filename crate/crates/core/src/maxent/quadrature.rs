use nalgebra::{DMatrix, DVector};

use super::{EndpointFactors, MaxEntError};
use crate::numerics::QuadratureRule;

/// Tanh-sinh step used for every density integral.
pub(crate) const REFERENCE_STEP: f64 = 1.0 / 64.0;

/// Nodes, weights and `ln(Z·S)` at each node over a finite window, split at
/// every factor location inside the window.
#[derive(Debug, Clone)]
pub(crate) struct DensityQuadrature {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
    pub log_base: Vec<f64>,
}

pub(crate) struct MomentStats {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl DensityQuadrature {
    pub fn new(lo: f64, hi: f64, factors: &EndpointFactors) -> Result<Self, MaxEntError> {
        factors.check_integrable()?;
        let mut breaks = vec![lo];
        breaks.extend(factors.locations().into_iter().filter(|&l| l > lo && l < hi));
        breaks.push(hi);
        let mut x = Vec::new();
        let mut w = Vec::new();
        let mut log_base = Vec::new();
        for piece in breaks.windows(2) {
            let (a, b) = (piece[0], piece[1]);
            let rule = QuadratureRule::tanh_sinh(a, b, REFERENCE_STEP)?;
            let gaps = rule.endpoint_gaps().expect("tanh-sinh rule carries gaps");
            for ((&xi, &wi), &(from_lo, from_hi)) in rule.nodes().iter().zip(rule.weights()).zip(gaps) {
                let lb = factors.log_value_with(|loc| {
                    if loc <= a {
                        (a - loc) + from_lo
                    } else {
                        (loc - b) + from_hi
                    }
                });
                x.push(xi);
                w.push(wi);
                log_base.push(lb);
            }
        }
        Ok(Self { x, w, log_base })
    }

    /// `-Σ aᵢxⁱ + ln(Z·S)` at every node.
    pub fn exponents(&self, orders: &[u32], a: &[f64]) -> Vec<f64> {
        self.x
            .iter()
            .zip(&self.log_base)
            .map(|(&x, &lb)| lb - poly(orders, a, x))
            .collect()
    }

    /// `ln ∫ Z·S·exp(-Σ aᵢxⁱ) dx`.
    pub fn log_partition(&self, orders: &[u32], a: &[f64]) -> f64 {
        let e = self.exponents(orders, a);
        let m = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = e.iter().zip(&self.w).map(|(&ei, &wi)| wi * (ei - m).exp()).sum();
        m + s.ln()
    }

    /// Normalized node masses `w·ρ` under multipliers `a`, with `ln N`.
    pub fn masses(&self, orders: &[u32], a: &[f64]) -> (Vec<f64>, f64) {
        let e = self.exponents(orders, a);
        let m = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut p: Vec<f64> = e.iter().zip(&self.w).map(|(&ei, &wi)| wi * (ei - m).exp()).collect();
        let s: f64 = p.iter().sum();
        for v in &mut p {
            *v /= s;
        }
        (p, m + s.ln())
    }

    /// Means and covariance of the monomials `x^k` for `k` in `moment_orders`.
    pub fn stats(&self, orders: &[u32], a: &[f64], moment_orders: &[u32]) -> MomentStats {
        let (p, _) = self.masses(orders, a);
        let k = moment_orders.len();
        let mut mean = DVector::zeros(k);
        for (&pi, &x) in p.iter().zip(&self.x) {
            for (r, &o) in moment_orders.iter().enumerate() {
                mean[r] += pi * x.powi(o as i32);
            }
        }
        let mut cov = DMatrix::zeros(k, k);
        let mut dev = vec![0.0; k];
        for (&pi, &x) in p.iter().zip(&self.x) {
            for (r, &o) in moment_orders.iter().enumerate() {
                dev[r] = x.powi(o as i32) - mean[r];
            }
            for r in 0..k {
                for c in 0..=r {
                    cov[(r, c)] += pi * dev[r] * dev[c];
                }
            }
        }
        for r in 0..k {
            for c in 0..r {
                cov[(c, r)] = cov[(r, c)];
            }
        }
        MomentStats { mean, cov }
    }
}

pub(crate) fn poly(orders: &[u32], a: &[f64], x: f64) -> f64 {
    orders.iter().zip(a).map(|(&o, &ai)| ai * x.powi(o as i32)).sum()
}
