use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::{Grid1D, NumericsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureKind {
    Trapezoid,
    Simpson,
    GaussHermite,
    /// Double-exponential rule on a finite interval; tolerates integrable
    /// endpoint singularities.
    TanhSinh,
}

/// A fixed set of nodes and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    kind: QuadratureKind,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    // Distances (from lower end, to upper end) for tanh-sinh nodes, kept
    // separately because `b - x` loses all precision next to the endpoints.
    gaps: Option<Vec<(f64, f64)>>,
}

impl QuadratureRule {
    pub fn trapezoid(grid: &Grid1D) -> Self {
        let h = grid.spacing();
        let n = grid.len();
        let mut weights = vec![h; n];
        weights[0] = 0.5 * h;
        weights[n - 1] = 0.5 * h;
        Self { kind: QuadratureKind::Trapezoid, nodes: grid.points(), weights, gaps: None }
    }

    /// Composite Simpson rule; an odd number of intervals closes with a 3/8
    /// panel on the last three intervals.
    pub fn simpson(grid: &Grid1D) -> Self {
        let h = grid.spacing();
        let n = grid.len();
        let intervals = n - 1;
        let mut weights = vec![0.0; n];
        let simpson_end = if intervals.is_multiple_of(2) { intervals } else { intervals - 3 };
        let mut i = 0;
        while i < simpson_end {
            weights[i] += h / 3.0;
            weights[i + 1] += 4.0 * h / 3.0;
            weights[i + 2] += h / 3.0;
            i += 2;
        }
        if simpson_end < intervals {
            let s = simpson_end;
            let c = 3.0 * h / 8.0;
            weights[s] += c;
            weights[s + 1] += 3.0 * c;
            weights[s + 2] += 3.0 * c;
            weights[s + 3] += c;
        }
        Self { kind: QuadratureKind::Simpson, nodes: grid.points(), weights, gaps: None }
    }

    /// `n`-point Gauss–Hermite rule for `∫ f(u) e^{-u²} du`.
    pub fn gauss_hermite(n: usize) -> Result<Self, NumericsError> {
        if n == 0 || n > 200 {
            return Err(NumericsError::InvalidRule(format!(
                "Gauss-Hermite order must be in 1..=200, got {n}"
            )));
        }
        let pim4 = PI.powf(-0.25);
        let nf = n as f64;
        let m = n.div_ceil(2);
        let mut roots = vec![0.0; m];
        let mut wts = vec![0.0; m];
        let mut z = 0.0_f64;
        for i in 0..m {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * roots[0],
                3 => 1.91 * z - 0.91 * roots[1],
                _ => 2.0 * z - roots[i - 2],
            };
            let mut pp = 0.0;
            let mut converged = false;
            for _ in 0..100 {
                // Orthonormal recurrence keeps values O(1) for large n.
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 1..=n {
                    let jf = j as f64;
                    let p3 = p2;
                    p2 = p1;
                    p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(NumericsError::NoConvergence(100));
            }
            roots[i] = z;
            wts[i] = 2.0 / (pp * pp);
        }
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..m {
            nodes.push(-roots[i]);
            weights.push(wts[i]);
        }
        let skip_mid = n % 2 == 1;
        for i in (0..m).rev() {
            if skip_mid && i == m - 1 {
                continue;
            }
            nodes.push(roots[i]);
            weights.push(wts[i]);
        }
        if skip_mid {
            // the middle root is 0 up to Newton tolerance
            nodes[m - 1] = 0.0;
        }
        Ok(Self { kind: QuadratureKind::GaussHermite, nodes, weights, gaps: None })
    }

    /// Tanh-sinh rule on `[a, b]` with abscissa step `step` over
    /// `t ∈ [-5.5, 5.5]`. The range keeps the nodes nearest the endpoints
    /// about `1e-167·(b-a)` away, so power singularities of exponent below
    /// one lose a negligible amount of mass.
    pub fn tanh_sinh(a: f64, b: f64, step: f64) -> Result<Self, NumericsError> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(NumericsError::InvalidRule(format!("bad interval [{a}, {b}]")));
        }
        if !(step > 0.0 && step <= 0.5) {
            return Err(NumericsError::InvalidRule(format!("bad step {step}")));
        }
        const T_MAX: f64 = 5.5;
        let half = 0.5 * (b - a);
        let k = (T_MAX / step).floor() as i64;
        let mut nodes = Vec::with_capacity(2 * k as usize + 1);
        let mut weights = Vec::with_capacity(nodes.capacity());
        let mut gaps = Vec::with_capacity(nodes.capacity());
        for j in -k..=k {
            let t = j as f64 * step;
            let u = FRAC_PI_2 * t.sinh();
            // e = exp(-2|u|); 1 - tanh|u| = 2e/(1+e), sech²u = 4e/(1+e)².
            let e = (-2.0 * u.abs()).exp();
            let near = 2.0 * e / (1.0 + e) * half;
            let (from_lo, from_hi) = if u < 0.0 {
                (near, (b - a) - near)
            } else {
                ((b - a) - near, near)
            };
            let x = if u < 0.0 { a + from_lo } else { b - from_hi };
            let w = step * half * FRAC_PI_2 * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
            nodes.push(x);
            weights.push(w);
            gaps.push((from_lo, from_hi));
        }
        Ok(Self { kind: QuadratureKind::TanhSinh, nodes, weights, gaps: Some(gaps) })
    }

    pub fn kind(&self) -> QuadratureKind {
        self.kind
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// For tanh-sinh rules, each node's distance to the lower and upper end.
    pub fn endpoint_gaps(&self) -> Option<&[(f64, f64)]> {
        self.gaps.as_deref()
    }

    pub fn integrate_fn<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64, NumericsError> {
        let samples: Vec<f64> = self.nodes.iter().map(|&x| f(x)).collect();
        integrate(&samples, self)
    }
}

/// Quadrature estimate of the sampled integrand. Samples correspond
/// one-to-one with the rule's nodes.
pub fn integrate(samples: &[f64], rule: &QuadratureRule) -> Result<f64, NumericsError> {
    if samples.len() != rule.len() {
        return Err(NumericsError::LengthMismatch { samples: samples.len(), nodes: rule.len() });
    }
    let mut acc = 0.0;
    for (i, (&f, &w)) in samples.iter().zip(&rule.weights).enumerate() {
        if !f.is_finite() {
            return Err(NumericsError::NonFinite { index: i });
        }
        acc += w * f;
    }
    Ok(acc)
}
