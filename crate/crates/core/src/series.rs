//! Taylor and binomial series in one and two variables, with convergence
//! probes and the radial stationary-point check for two-variable densities.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::maxent::ExpFamilyDensity2D;
use crate::numerics::{find_root, sign_change_scan, Grid1D, NumericsError};

pub const MAX_POLY_DEGREE: usize = 32;
pub const MAX_SERIES_TERMS: usize = 200;
pub const MAX_TAYLOR2_ORDER: usize = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("invalid series request: {0}")]
    Validation(String),
    #[error("derivative oracle failed at order {0}")]
    Oracle(usize),
    #[error("no stationary point along the ray")]
    NotFound,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// `Σ cᵢ (x - x₀)ⁱ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSeries1D {
    pub center: f64,
    pub coefficients: Vec<f64>,
    /// Radius of convergence; `f64::INFINITY` for polynomials.
    pub radius: f64,
}

impl PowerSeries1D {
    pub fn eval(&self, x: f64) -> f64 {
        let t = x - self.center;
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }
}

fn binomial_int(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, m| acc * (n - m) as f64 / (m + 1) as f64)
}

/// Re-expands the polynomial `Σ pⱼ xʲ` about `x0`: `aᵢ = p⁽ⁱ⁾(x₀)/i!`.
pub fn poly_taylor_coeffs(p: &[f64], x0: f64) -> Result<PowerSeries1D, SeriesError> {
    if p.len() > MAX_POLY_DEGREE + 1 {
        return Err(SeriesError::Validation(format!(
            "degree {} exceeds {MAX_POLY_DEGREE}",
            p.len() - 1
        )));
    }
    let coefficients = (0..p.len())
        .map(|i| (i..p.len()).map(|j| p[j] * binomial_int(j, i) * x0.powi((j - i) as i32)).sum())
        .collect();
    Ok(PowerSeries1D { center: x0, coefficients, radius: f64::INFINITY })
}

/// Sup-norm Taylor remainders over a probe grid, one per truncation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainderReport {
    pub orders: Vec<usize>,
    pub remainders: Vec<f64>,
}

/// `R_N = sup_x |f(x) - Σ_{i≤N} f⁽ⁱ⁾(x₀)(x-x₀)ⁱ/i!|` for each `N` in `orders`.
/// `derivative(i)` returns `f⁽ⁱ⁾(x₀)`, or `None` if it cannot.
pub fn taylor_remainder_scan<F, D>(
    f: F,
    derivative: D,
    x0: f64,
    orders: &[usize],
    probe: &Grid1D,
) -> Result<RemainderReport, SeriesError>
where
    F: Fn(f64) -> f64,
    D: Fn(usize) -> Option<f64>,
{
    let n_max = orders.iter().copied().max().unwrap_or(0);
    let mut coeffs = Vec::with_capacity(n_max + 1);
    let mut fact = 1.0;
    for i in 0..=n_max {
        if i > 0 {
            fact *= i as f64;
        }
        let d = derivative(i).filter(|d| d.is_finite()).ok_or(SeriesError::Oracle(i))?;
        coeffs.push(d / fact);
    }
    let xs = probe.points();
    let exact: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let remainders = orders
        .iter()
        .map(|&n| {
            let series = PowerSeries1D { center: x0, coefficients: coeffs[..=n].to_vec(), radius: f64::NAN };
            xs.iter().zip(&exact).map(|(&x, &fx)| (fx - series.eval(x)).abs()).fold(0.0, f64::max)
        })
        .collect();
    Ok(RemainderReport { orders: orders.to_vec(), remainders })
}

/// Generalized binomial coefficient `C(k, m)` for real `k`.
pub fn binomial_coefficient(k: f64, m: usize) -> f64 {
    (0..m).fold(1.0, |acc, j| acc * (k - j as f64) / (j + 1) as f64)
}

fn is_nonneg_integer(k: f64) -> bool {
    k >= 0.0 && k.fract() == 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub partial_sum: f64,
    /// Analytic convergence predicate, not an empirical test.
    pub convergent: bool,
}

/// Which series a probe sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeriesKind {
    /// `(1 + a x)^k = Σ C(k, m) (a x)^m`.
    Binomial { a: f64, k: f64, x: f64 },
    /// `(1 + x y)^k = Σ C(k, m) (x y)^m`.
    BinomialXy { k: f64, x: f64, y: f64 },
    /// `exp(x y) = Σ (x y)^m / m!`.
    ExpXy { x: f64, y: f64 },
}

impl SeriesKind {
    fn ratio_and_coeff(&self) -> (f64, Box<dyn Fn(usize) -> f64>) {
        match *self {
            SeriesKind::Binomial { a, k, x } => (a * x, Box::new(move |m| binomial_coefficient(k, m))),
            SeriesKind::BinomialXy { k, x, y } => (x * y, Box::new(move |m| binomial_coefficient(k, m))),
            SeriesKind::ExpXy { x, y } => (
                x * y,
                Box::new(|m| 1.0 / (1..=m).map(|j| j as f64).product::<f64>()),
            ),
        }
    }

    pub fn convergent(&self) -> bool {
        match *self {
            SeriesKind::Binomial { a, k, x } => is_nonneg_integer(k) || (a * x).abs() < 1.0,
            SeriesKind::BinomialXy { k, x, y } => is_nonneg_integer(k) || (x * y).abs() < 1.0,
            SeriesKind::ExpXy { .. } => true,
        }
    }

    /// Partial sums `S_0..=S_n`.
    pub fn partial_sums(&self, n: usize) -> Result<Vec<f64>, SeriesError> {
        if n > MAX_SERIES_TERMS {
            return Err(SeriesError::Validation(format!("N = {n} exceeds {MAX_SERIES_TERMS}")));
        }
        let (t, coeff) = self.ratio_and_coeff();
        let mut sums = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        let mut power = 1.0;
        for m in 0..=n {
            acc += coeff(m) * power;
            power *= t;
            sums.push(acc);
        }
        Ok(sums)
    }

    pub fn eval(&self, n: usize) -> Result<SeriesValue, SeriesError> {
        let sums = self.partial_sums(n)?;
        Ok(SeriesValue { partial_sum: sums[n], convergent: self.convergent() })
    }
}

pub fn binomial_series_eval(a: f64, k: f64, x: f64, n: usize) -> Result<SeriesValue, SeriesError> {
    SeriesKind::Binomial { a, k, x }.eval(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TwoVarKind {
    BinomialXy { k: f64 },
    ExpXy,
}

pub fn two_var_series_eval(kind: TwoVarKind, x: f64, y: f64, n: usize) -> Result<SeriesValue, SeriesError> {
    match kind {
        TwoVarKind::BinomialXy { k } => SeriesKind::BinomialXy { k, x, y }.eval(n),
        TwoVarKind::ExpXy => SeriesKind::ExpXy { x, y }.eval(n),
    }
}

/// One row of a convergence probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub n: usize,
    pub partial_sum: f64,
    /// `|S_n - S_{n-1}|` (`|S_0|` for the first row).
    pub cauchy_diff: f64,
}

pub fn probe(kind: &SeriesKind, n_max: usize) -> Result<Vec<ProbeRow>, SeriesError> {
    let sums = kind.partial_sums(n_max)?;
    Ok(sums
        .iter()
        .enumerate()
        .map(|(n, &s)| ProbeRow {
            n,
            partial_sum: s,
            cauchy_diff: if n == 0 { s.abs() } else { (s - sums[n - 1]).abs() },
        })
        .collect())
}

/// Coefficients `aᵢⱼ` of `xⁱ yʲ` for `i + j ≤ order`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSeries2D {
    pub order: usize,
    coefficients: Vec<Vec<f64>>,
}

impl PowerSeries2D {
    pub fn coefficient(&self, i: usize, j: usize) -> f64 {
        if i + j > self.order {
            0.0
        } else {
            self.coefficients[i][j]
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..=self.order {
            for j in 0..=(self.order - i) {
                acc += self.coefficients[i][j] * x.powi(i as i32) * y.powi(j as i32);
            }
        }
        acc
    }
}

// δᵢₓ δⱼᵧ f(0,0) / h^{i+j}: nested central differences, error O(h²).
fn mixed_central_difference<F: Fn(f64, f64) -> f64>(f: &F, i: usize, j: usize, h: f64) -> f64 {
    let mut acc = 0.0;
    for a in 0..=i {
        let wx = binomial_int(i, a) * if a % 2 == 0 { 1.0 } else { -1.0 };
        let x = (i as f64 / 2.0 - a as f64) * h;
        for b in 0..=j {
            let wy = binomial_int(j, b) * if b % 2 == 0 { 1.0 } else { -1.0 };
            let y = (j as f64 / 2.0 - b as f64) * h;
            acc += wx * wy * f(x, y);
        }
    }
    acc / h.powi((i + j) as i32)
}

/// Taylor coefficients at the origin from nested central differences with
/// one Richardson step (`h` and `h/2`).
pub fn taylor2_coeffs<F: Fn(f64, f64) -> f64>(f: F, order: usize, h: f64) -> Result<PowerSeries2D, SeriesError> {
    if order > MAX_TAYLOR2_ORDER {
        return Err(SeriesError::Validation(format!("order {order} exceeds {MAX_TAYLOR2_ORDER}")));
    }
    if !(h > 1e-6 && h < 1e-1) {
        return Err(SeriesError::Validation(format!("step {h} outside (1e-6, 1e-1)")));
    }
    let fact = |n: usize| (1..=n).map(|m| m as f64).product::<f64>();
    let mut coefficients = vec![Vec::new(); order + 1];
    for i in 0..=order {
        for j in 0..=(order - i) {
            let d = if i + j == 0 {
                f(0.0, 0.0)
            } else {
                let coarse = mixed_central_difference(&f, i, j, h);
                let fine = mixed_central_difference(&f, i, j, 0.5 * h);
                (4.0 * fine - coarse) / 3.0
            };
            coefficients[i].push(d / (fact(i) * fact(j)));
        }
    }
    Ok(PowerSeries2D { order, coefficients })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StationaryKind {
    Max,
    Min,
    SaddleAlongRay,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialStationaryPoint {
    pub r: f64,
    pub kind: StationaryKind,
}

/// Stationary point of `ln ρ(r cos θ, r sin θ)` along one ray, classified by
/// the sign of the second radial derivative. Interior points in
/// `(0, r_max]` take precedence over the origin.
pub fn radial_stationary_point(
    d: &ExpFamilyDensity2D,
    theta: f64,
    r_max: f64,
) -> Result<RadialStationaryPoint, SeriesError> {
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(SeriesError::Validation(format!("r_max must be positive, got {r_max}")));
    }
    let (c, s) = (theta.cos(), theta.sin());
    if !d.support().contains(r_max * c, r_max * s) || !d.support().contains(0.0, 0.0) {
        return Err(SeriesError::Validation("ray leaves the density's support".into()));
    }
    // ln ρ = -a₀₀ - Σ_deg C_deg r^deg along the ray
    let max_deg = d.multipliers().iter().map(|m| m.i + m.j).max().unwrap_or(0) as usize;
    let mut radial = vec![0.0; max_deg + 1];
    for m in d.multipliers() {
        radial[(m.i + m.j) as usize] += m.value * c.powi(m.i as i32) * s.powi(m.j as i32);
    }
    let scale = radial.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(SeriesError::NotFound);
    }
    let slope = |r: f64| -> f64 {
        -(1..=max_deg).map(|deg| deg as f64 * radial[deg] * r.powi(deg as i32 - 1)).sum::<f64>()
    };
    let curvature = |r: f64| -> f64 {
        -(2..=max_deg)
            .map(|deg| (deg * (deg - 1)) as f64 * radial[deg] * r.powi(deg as i32 - 2))
            .sum::<f64>()
    };
    let classify = |r: f64| {
        let k = curvature(r);
        let kind = if k < -1e-12 * scale {
            StationaryKind::Max
        } else if k > 1e-12 * scale {
            StationaryKind::Min
        } else {
            StationaryKind::SaddleAlongRay
        };
        RadialStationaryPoint { r, kind }
    };
    let start = r_max * 1e-6;
    if let Some(br) = sign_change_scan(slope, start, r_max, 1000)?.first() {
        let r = find_root(slope, *br, 1e-13 * r_max)?;
        return Ok(classify(r));
    }
    if slope(0.0).abs() <= 1e-14 * scale {
        return Ok(classify(0.0));
    }
    Err(SeriesError::NotFound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maxent::{Multiplier2D, Rectangle};
    use std::f64::consts::E;

    #[test]
    fn poly_taylor_examples() {
        assert_eq!(poly_taylor_coeffs(&[0.0, 0.0, 1.0], 0.0).unwrap().coefficients, vec![0.0, 0.0, 1.0]);
        assert_eq!(poly_taylor_coeffs(&[0.0, 0.0, 1.0], 1.0).unwrap().coefficients, vec![1.0, 2.0, 1.0]);
        assert_eq!(
            poly_taylor_coeffs(&[0.0, -12.0, 0.0, 8.0], 0.0).unwrap().coefficients,
            vec![0.0, -12.0, 0.0, 8.0]
        );
        assert!(poly_taylor_coeffs(&[1.0; 34], 0.0).is_err());
    }

    #[test]
    fn re_expansion_reproduces_polynomial() {
        let p = [0.3, -1.2, 0.5, 2.0, -0.7, 0.1];
        let s = poly_taylor_coeffs(&p, -0.8).unwrap();
        for i in 0..20 {
            let x = -2.0 + 0.2 * i as f64;
            let direct: f64 = p.iter().rev().fold(0.0, |acc, &c| acc * x + c);
            assert!((s.eval(x) - direct).abs() <= 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn remainder_scan_examples() {
        let probe = Grid1D::new(-1.0, 1.0, 201).unwrap();
        let rep = taylor_remainder_scan(f64::exp, |_| Some(1.0), 0.0, &[2, 4, 8], &probe).unwrap();
        assert!(rep.remainders[0] <= E / 6.0);
        assert!(rep.remainders.windows(2).all(|w| w[1] < w[0]));

        let cubic = |x: f64| 1.0 + 2.0 * x - x * x * x;
        let derivs = [1.0, 2.0, 0.0, -6.0];
        let rep = taylor_remainder_scan(cubic, |i| Some(*derivs.get(i).unwrap_or(&0.0)), 0.0, &[3], &probe).unwrap();
        assert!(rep.remainders[0] < 1e-14);

        let probe = Grid1D::new(-0.5, 0.5, 101).unwrap();
        let orders: Vec<usize> = (1..=10).collect();
        // f⁽ⁱ⁾(0) = (-1)ⁱ i!
        let deriv = |i: usize| Some((1..=i).map(|m| m as f64).product::<f64>() * if i.is_multiple_of(2) { 1.0 } else { -1.0 });
        let rep = taylor_remainder_scan(|x| 1.0 / (1.0 + x), deriv, 0.0, &orders, &probe).unwrap();
        for w in rep.remainders.windows(2) {
            assert!((w[1] / w[0] - 0.5).abs() < 1e-9);
        }
        assert_eq!(
            taylor_remainder_scan(f64::exp, |i| if i < 3 { Some(1.0) } else { None }, 0.0, &[4], &probe),
            Err(SeriesError::Oracle(3))
        );
    }

    #[test]
    fn binomial_examples() {
        let v = binomial_series_eval(1.0, -1.0, 0.5, 60).unwrap();
        assert!((v.partial_sum - 2.0 / 3.0).abs() < 1e-8 && v.convergent);
        let v = binomial_series_eval(1.0, 2.0, 0.3, 3).unwrap();
        assert!((v.partial_sum - 1.69).abs() < 1e-14);
        assert!(v.convergent);
        assert!(!binomial_series_eval(2.0, -1.0, 0.8, 10).unwrap().convergent);
        assert!(binomial_series_eval(1.0, 0.5, 0.1, 201).is_err());
    }

    #[test]
    fn two_variable_examples() {
        let v = two_var_series_eval(TwoVarKind::ExpXy, 1.0, 1.0, 30).unwrap();
        assert!((v.partial_sum - E).abs() < 1e-9 && v.convergent);
        let v = two_var_series_eval(TwoVarKind::BinomialXy { k: -1.0 }, 0.5, 0.5, 60).unwrap();
        assert!((v.partial_sum - 0.8).abs() < 1e-8 && v.convergent);
        assert!(!two_var_series_eval(TwoVarKind::BinomialXy { k: -1.0 }, 2.0, 1.0, 5).unwrap().convergent);
    }

    #[test]
    fn convergence_predicate_matches_behavior() {
        let inside = probe(&SeriesKind::Binomial { a: 1.0, k: -0.5, x: 0.9 }, 200).unwrap();
        assert!(inside.last().unwrap().cauchy_diff < 1e-8);
        let outside = probe(&SeriesKind::Binomial { a: 1.0, k: -0.5, x: 1.1 }, 200).unwrap();
        assert!(outside[200].cauchy_diff > outside[100].cauchy_diff);
        assert!(!SeriesKind::Binomial { a: 1.0, k: -0.5, x: 1.1 }.convergent());
    }

    #[test]
    fn taylor2_examples() {
        let s = taylor2_coeffs(|x, y| (x * y).exp(), 4, 0.05).unwrap();
        assert!((s.coefficient(1, 1) - 1.0).abs() < 1e-6);
        assert!((s.coefficient(2, 2) - 0.5).abs() < 1e-6);
        assert!(s.coefficient(1, 0).abs() < 1e-6);

        let s = taylor2_coeffs(|x, y| x * x * y, 4, 0.05).unwrap();
        for i in 0..=4 {
            for j in 0..=(4 - i) {
                let expected = if (i, j) == (2, 1) { 1.0 } else { 0.0 };
                assert!((s.coefficient(i, j) - expected).abs() < 1e-6, "({i},{j})");
            }
        }

        // Richardson leaves an O(h⁴) error that a₄₄ = 1 makes visible at h = 0.05
        let s = taylor2_coeffs(|x, y| 1.0 / (1.0 + x * y), 4, 0.02).unwrap();
        assert!((s.coefficient(1, 1) + 1.0).abs() < 1e-6);
        assert!((s.coefficient(2, 2) - 1.0).abs() < 1e-6);

        assert!(taylor2_coeffs(|x, _| x, 3, 0.5).is_err());
        assert!(taylor2_coeffs(|x, _| x, 7, 0.05).is_err());
    }

    fn mult(i: u32, j: u32, value: f64) -> Multiplier2D {
        Multiplier2D { i, j, value }
    }

    #[test]
    fn radial_examples() {
        let box3 = Rectangle::square(-3.0, 3.0).unwrap();
        let g = ExpFamilyDensity2D::new(box3, vec![mult(2, 0, 1.0), mult(0, 2, 1.0)]).unwrap();
        for theta in [0.0, 0.7, 2.0] {
            let p = radial_stationary_point(&g, theta, 2.0).unwrap();
            assert_eq!(p.r, 0.0);
            assert_eq!(p.kind, StationaryKind::Max);
        }
        // ln ρ = -(x²+y²)² + (x²+y²)
        let ring = ExpFamilyDensity2D::new(
            box3,
            vec![mult(4, 0, 1.0), mult(2, 2, 2.0), mult(0, 4, 1.0), mult(2, 0, -1.0), mult(0, 2, -1.0)],
        )
        .unwrap();
        let p = radial_stationary_point(&ring, 0.0, 2.0).unwrap();
        assert!((p.r - 0.5f64.sqrt()).abs() < 1e-10);
        assert_eq!(p.kind, StationaryKind::Max);

        let flat = ExpFamilyDensity2D::new(box3, vec![]).unwrap();
        assert_eq!(radial_stationary_point(&flat, 0.0, 2.0), Err(SeriesError::NotFound));
    }
}
