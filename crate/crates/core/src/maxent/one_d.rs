use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::quadrature::{poly, DensityQuadrature};
use super::{EndpointFactors, MaxEntError, MomentSpec1D, Multiplier, Support};

/// Newton iteration cap for the multiplier fit.
pub const MAX_NEWTON_ITERS: usize = 100;

/// Half-width of the truncation window on an unbounded side, in units of the
/// scale estimated from the moments.
const WINDOW_SIGMAS: f64 = 12.0;
const TAIL_LIMIT: f64 = 1e-12;
// exp(-120) ≈ 8e-53 relative to the peak at the edge of an automatic window
const AUTO_WINDOW_DROP: f64 = 120.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub iterations: usize,
    pub max_residual: f64,
    /// Estimated mass outside the quadrature window (0 on bounded support).
    pub tail_mass: f64,
}

/// `ρ(x) = Z(x)·S(x)·exp(-a₀ - Σ aᵢ xⁱ)` on a support interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(into = "DensityDoc", try_from = "DensityDoc")]
pub struct ExpFamilyDensity1D {
    support: Support,
    multipliers: Vec<Multiplier>,
    log_norm: f64,
    factors: EndpointFactors,
    window: (f64, f64),
    diagnostics: Option<FitDiagnostics>,
    quad: DensityQuadrature,
}

/// Serialized form: `multipliers` includes order 0 (`a₀`).
#[derive(Debug, Clone, Serialize, Deserialize)]
struct DensityDoc {
    support: Support,
    multipliers: Vec<Multiplier>,
    #[serde(default)]
    factors: EndpointFactors,
    window: (f64, f64),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    diagnostics: Option<FitDiagnostics>,
}

impl From<ExpFamilyDensity1D> for DensityDoc {
    fn from(d: ExpFamilyDensity1D) -> Self {
        let mut multipliers = vec![Multiplier { order: 0, value: d.log_norm }];
        multipliers.extend(d.multipliers.iter().copied());
        DensityDoc {
            support: d.support,
            multipliers,
            factors: d.factors,
            window: d.window,
            diagnostics: d.diagnostics,
        }
    }
}

impl TryFrom<DensityDoc> for ExpFamilyDensity1D {
    type Error = MaxEntError;
    // a₀ is recomputed from the window rather than trusted from the document.
    fn try_from(doc: DensityDoc) -> Result<Self, Self::Error> {
        let mults: Vec<Multiplier> = doc.multipliers.into_iter().filter(|m| m.order != 0).collect();
        let mut d = ExpFamilyDensity1D::with_window(doc.support, mults, doc.factors, doc.window)?;
        d.diagnostics = doc.diagnostics;
        Ok(d)
    }
}

fn split(mults: &[Multiplier]) -> (Vec<u32>, Vec<f64>) {
    mults.iter().map(|m| (m.order, m.value)).unzip()
}

fn normalize_multipliers(mut mults: Vec<Multiplier>) -> Result<Vec<Multiplier>, MaxEntError> {
    mults.retain(|m| m.order != 0);
    mults.sort_by_key(|m| m.order);
    for w in mults.windows(2) {
        if w[0].order == w[1].order {
            return Err(MaxEntError::Validation(format!("duplicate multiplier order {}", w[0].order)));
        }
    }
    if mults.iter().any(|m| !m.value.is_finite()) {
        return Err(MaxEntError::Validation("multipliers must be finite".into()));
    }
    Ok(mults)
}

/// Window where the exponent has risen `AUTO_WINDOW_DROP` above its minimum
/// at every unbounded side.
fn auto_window(support: &Support, orders: &[u32], a: &[f64]) -> Result<(f64, f64), MaxEntError> {
    if support.is_bounded() {
        return Ok((support.lower(), support.upper()));
    }
    let mut half = 1.0_f64;
    while half <= 1e6 {
        let lo = if support.lower().is_finite() { support.lower() } else { -half };
        let hi = if support.upper().is_finite() { support.upper() } else { half };
        if lo < hi {
            let n = 4001;
            let step = (hi - lo) / (n - 1) as f64;
            let min = (0..n)
                .map(|i| poly(orders, a, lo + i as f64 * step))
                .fold(f64::INFINITY, f64::min);
            let lo_ok = support.lower().is_finite() || poly(orders, a, lo) - min > AUTO_WINDOW_DROP;
            let hi_ok = support.upper().is_finite() || poly(orders, a, hi) - min > AUTO_WINDOW_DROP;
            if lo_ok && hi_ok {
                return Ok((lo, hi));
            }
        }
        half *= 2.0;
    }
    Err(MaxEntError::Numeric("exponent does not grow on the unbounded support".into()))
}

impl ExpFamilyDensity1D {
    /// Builds a density from multipliers of orders `≥ 1`; `a₀` is computed so
    /// that the density integrates to one.
    pub fn new(
        support: Support,
        multipliers: Vec<Multiplier>,
        factors: EndpointFactors,
    ) -> Result<Self, MaxEntError> {
        let multipliers = normalize_multipliers(multipliers)?;
        factors.validate(&support)?;
        let (orders, a) = split(&multipliers);
        let window = auto_window(&support, &orders, &a)?;
        Self::with_window(support, multipliers, factors, window)
    }

    fn with_window(
        support: Support,
        multipliers: Vec<Multiplier>,
        factors: EndpointFactors,
        window: (f64, f64),
    ) -> Result<Self, MaxEntError> {
        let multipliers = normalize_multipliers(multipliers)?;
        factors.validate(&support)?;
        if !(window.0 < window.1 && support.contains(window.0) && support.contains(window.1)) {
            return Err(MaxEntError::Validation(format!(
                "window [{}, {}] must lie inside the support",
                window.0, window.1
            )));
        }
        let quad = DensityQuadrature::new(window.0, window.1, &factors)?;
        let (orders, a) = split(&multipliers);
        let log_norm = quad.log_partition(&orders, &a);
        if !log_norm.is_finite() {
            return Err(MaxEntError::Numeric("normalization integral is not finite".into()));
        }
        Ok(Self { support, multipliers, log_norm, factors, window, diagnostics: None, quad })
    }

    pub fn uniform(support: Support) -> Result<Self, MaxEntError> {
        Self::new(support, vec![], EndpointFactors::none())
    }

    pub fn support(&self) -> Support {
        self.support
    }

    /// Multipliers of orders `≥ 1`.
    pub fn multipliers(&self) -> &[Multiplier] {
        &self.multipliers
    }

    /// `aᵢ` (zero for orders that carry no multiplier); `a₀` for order 0.
    pub fn multiplier(&self, order: u32) -> f64 {
        if order == 0 {
            return self.log_norm;
        }
        self.multipliers.iter().find(|m| m.order == order).map_or(0.0, |m| m.value)
    }

    pub fn a0(&self) -> f64 {
        self.log_norm
    }

    pub fn factors(&self) -> &EndpointFactors {
        &self.factors
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn diagnostics(&self) -> Option<&FitDiagnostics> {
        self.diagnostics.as_ref()
    }

    fn orders_and_values(&self) -> (Vec<u32>, Vec<f64>) {
        split(&self.multipliers)
    }

    /// `ρ(x)`; `+∞` exactly at a singular factor location.
    pub fn eval(&self, x: f64) -> Result<f64, MaxEntError> {
        if !self.support.contains(x) {
            return Err(MaxEntError::Domain(x));
        }
        let fv = self.factors.value(x);
        if fv == f64::INFINITY {
            return Ok(f64::INFINITY);
        }
        let (orders, a) = self.orders_and_values();
        Ok(fv * (-self.log_norm - poly(&orders, &a, x)).exp())
    }

    /// `⟨x^order⟩` under the reference quadrature.
    pub fn moment(&self, order: u32) -> f64 {
        let (orders, a) = self.orders_and_values();
        let (p, _) = self.quad.masses(&orders, &a);
        p.iter().zip(&self.quad.x).map(|(&pi, &x)| pi * x.powi(order as i32)).sum()
    }

    /// `∫ρ` under the reference quadrature.
    pub fn total_mass(&self) -> f64 {
        let (orders, a) = self.orders_and_values();
        self.quad
            .x
            .iter()
            .zip(&self.quad.w)
            .zip(&self.quad.log_base)
            .map(|((&x, &w), &lb)| w * (lb - self.log_norm - poly(&orders, &a, x)).exp())
            .sum()
    }

    // Σ w·ρ·g(ln(Z·S), -a₀ - Σaᵢxⁱ)
    fn weighted_log_sum<G: Fn(f64, f64) -> f64>(&self, g: G) -> f64 {
        let (orders, a) = self.orders_and_values();
        let mut acc = 0.0;
        for ((&x, &w), &lb) in self.quad.x.iter().zip(&self.quad.w).zip(&self.quad.log_base) {
            let q = -(self.log_norm + poly(&orders, &a, x));
            let l = lb + q;
            let rho = l.exp();
            if rho > 0.0 {
                acc += w * rho * g(l, q);
            }
        }
        acc
    }

    /// `⟨ln ρ⟩ = ∫ ρ ln ρ`.
    pub fn information(&self) -> Result<f64, MaxEntError> {
        self.factors.check_integrable()?;
        let v = self.weighted_log_sum(|l, _| l);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(MaxEntError::Numeric("information integral is not finite".into()))
        }
    }

    /// `⟨ln(ρ / (Z·S))⟩`.
    pub fn modified_information(&self) -> Result<f64, MaxEntError> {
        self.factors.validate(&self.support)?;
        let v = self.weighted_log_sum(|_, q| q);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(MaxEntError::Numeric("modified information integral is not finite".into()))
        }
    }

    /// `ln N(a)` with `N(a) = ∫ Z·S·exp(-Σ_{i≥1} aᵢxⁱ)`, evaluated with the
    /// multiplier of `order` shifted by `delta`.
    fn log_partition_shifted(&self, order: u32, delta: f64) -> f64 {
        let (mut orders, mut a) = self.orders_and_values();
        match orders.iter().position(|&o| o == order) {
            Some(i) => a[i] += delta,
            None => {
                orders.push(order);
                a.push(delta);
            }
        }
        self.quad.log_partition(&orders, &a)
    }
}

pub fn density_eval(d: &ExpFamilyDensity1D, x: f64) -> Result<f64, MaxEntError> {
    d.eval(x)
}

pub fn information(d: &ExpFamilyDensity1D) -> Result<f64, MaxEntError> {
    d.information()
}

pub fn modified_information(d: &ExpFamilyDensity1D) -> Result<f64, MaxEntError> {
    d.modified_information()
}

/// `⟨xⁱ⟩` next to `-∂ ln N / ∂aᵢ` by central differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    pub analytic: f64,
    pub numeric: f64,
}

pub fn moment_gradient_check(
    d: &ExpFamilyDensity1D,
    order: u32,
    h: f64,
) -> Result<GradientCheck, MaxEntError> {
    if order == 0 {
        return Err(MaxEntError::Validation("order must be positive".into()));
    }
    if !(h >= 1e-10 && h.is_finite()) {
        return Err(MaxEntError::Validation(format!(
            "step {h} is below 1e-10; cancellation would dominate"
        )));
    }
    let plus = d.log_partition_shifted(order, h);
    let minus = d.log_partition_shifted(order, -h);
    Ok(GradientCheck { analytic: d.moment(order), numeric: -(plus - minus) / (2.0 * h) })
}

fn extremes_on(a: f64, b: f64, order: u32) -> (f64, f64) {
    let mut cands = vec![a.powi(order as i32), b.powi(order as i32)];
    if a < 0.0 && b > 0.0 {
        cands.push(0.0);
    }
    let lo = cands.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = cands.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn positive_definite(m: DMatrix<f64>) -> bool {
    m.cholesky().is_some()
}

/// Necessary conditions for the moments to lie inside the moment cone.
fn check_feasible(spec: &MomentSpec1D) -> Result<(), MaxEntError> {
    let sup = spec.support;
    for m in spec.constraints() {
        if sup.is_bounded() {
            let (lo, hi) = extremes_on(sup.lower(), sup.upper(), m.order);
            if !(m.value > lo && m.value < hi) {
                return Err(MaxEntError::Infeasible(format!(
                    "c{} = {} must lie strictly inside ({lo}, {hi})",
                    m.order, m.value
                )));
            }
        } else if m.order % 2 == 0 && !(m.value > 0.0) {
            return Err(MaxEntError::Infeasible(format!(
                "even moment c{} = {} must be positive",
                m.order, m.value
            )));
        }
    }
    // Hankel matrix on the longest run of consecutive orders 1..=2m
    let mut run = 0;
    while spec.value(run + 1).is_some() {
        run += 1;
    }
    let m = (run / 2) as usize;
    if m >= 1 {
        let c = |k: usize| if k == 0 { 1.0 } else { spec.value(k as u32).unwrap() };
        let h = DMatrix::from_fn(m + 1, m + 1, |i, j| c(i + j));
        if !positive_definite(h) {
            return Err(MaxEntError::Infeasible("Hankel moment matrix is not positive definite".into()));
        }
    }
    if let (Some(c2), Some(c4)) = (spec.value(2), spec.value(4)) {
        if !(c4 > c2 * c2) {
            return Err(MaxEntError::Infeasible(format!("need c4 > c2², got c2={c2}, c4={c4}")));
        }
    }
    if sup.is_bounded() {
        if let (Some(c1), Some(c2)) = (spec.value(1), spec.value(2)) {
            let (a, b) = (sup.lower(), sup.upper());
            if !(-c2 + (a + b) * c1 - a * b > 0.0) {
                return Err(MaxEntError::Infeasible(format!(
                    "c1={c1}, c2={c2} violate ⟨(b-x)(x-a)⟩ > 0 on [{a}, {b}]"
                )));
            }
        }
    }
    Ok(())
}

/// Center and scale implied by the constraints.
fn moment_scale(spec: &MomentSpec1D) -> (f64, f64) {
    let center = spec.value(1).unwrap_or(0.0);
    let scale = match spec.value(2) {
        Some(c2) => (c2 - center * center).max(c2 * 1e-12).sqrt(),
        None => spec
            .constraints()
            .iter()
            .filter(|m| m.order % 2 == 0)
            .map(|m| m.value.powf(1.0 / m.order as f64))
            .fold(0.0, f64::max),
    };
    (center, if scale > 0.0 { scale } else { 1.0 })
}

fn initial_guess(spec: &MomentSpec1D, center: f64, scale: f64) -> Vec<f64> {
    let orders: Vec<u32> = spec.constraints().iter().map(|m| m.order).collect();
    let mut a = vec![0.0; orders.len()];
    if spec.support.is_bounded() {
        return a;
    }
    let top = *orders.last().expect("unbounded specs carry an even top order");
    if top == 2 {
        let var = scale * scale;
        for (i, &o) in orders.iter().enumerate() {
            if o == 2 {
                a[i] = 0.5 / var;
            } else if o == 1 {
                a[i] = -center / var;
            }
        }
    } else {
        // ρ ∝ exp(-a xᵏ) has ⟨xᵏ⟩ = 1/(k a)
        let c_top = spec.value(top).unwrap();
        *a.last_mut().unwrap() = 1.0 / (top as f64 * c_top);
    }
    a
}

/// Fits multipliers so that every constraint holds to `tol`.
pub fn fit_multipliers_1d(
    spec: &MomentSpec1D,
    init: Option<&[Multiplier]>,
    tol: f64,
) -> Result<ExpFamilyDensity1D, MaxEntError> {
    if !(tol > 0.0) {
        return Err(MaxEntError::Validation(format!("tolerance must be positive, got {tol}")));
    }
    check_feasible(spec)?;
    let support = spec.support;
    let (center, scale) = moment_scale(spec);
    let window = (
        if support.lower().is_finite() { support.lower() } else { center - WINDOW_SIGMAS * scale },
        if support.upper().is_finite() { support.upper() } else { center + WINDOW_SIGMAS * scale },
    );
    let quad = DensityQuadrature::new(window.0, window.1, &spec.factors)?;
    let orders: Vec<u32> = spec.constraints().iter().map(|m| m.order).collect();
    let targets = DVector::from_iterator(orders.len(), spec.constraints().iter().map(|m| m.value));
    let mut a = match init {
        Some(init) => orders
            .iter()
            .map(|o| init.iter().find(|m| m.order == *o).map_or(0.0, |m| m.value))
            .collect(),
        None => initial_guess(spec, center, scale),
    };

    let dual = |a: &[f64]| -> f64 {
        quad.log_partition(&orders, a) + a.iter().zip(targets.iter()).map(|(x, c)| x * c).sum::<f64>()
    };

    let mut iterations = 0;
    let mut stats = quad.stats(&orders, &a, &orders);
    let mut resid = &targets - &stats.mean;
    let mut max_res = resid.amax();
    while max_res > tol {
        if iterations == MAX_NEWTON_ITERS {
            return Err(MaxEntError::Convergence { iterations, residual: max_res });
        }
        iterations += 1;
        // Newton step on the dual in diagonally scaled coordinates.
        let k = orders.len();
        let scale = DVector::from_iterator(k, (0..k).map(|i| stats.cov[(i, i)].sqrt().max(1e-300)));
        let scaled = DMatrix::from_fn(k, k, |i, j| stats.cov[(i, j)] / (scale[i] * scale[j]));
        let rhs = DVector::from_fn(k, |i, _| resid[i] / scale[i]);
        let y = match scaled.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => scaled
                .lu()
                .solve(&rhs)
                .ok_or(MaxEntError::Convergence { iterations, residual: max_res })?,
        };
        // the dual's gradient is the residual and its Hessian the covariance
        let dir: Vec<f64> = (0..k).map(|i| -y[i] / scale[i]).collect();
        let slope: f64 = (0..k).map(|i| resid[i] * dir[i]).sum::<f64>();
        let phi0 = dual(&a);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = a.iter().zip(&dir).map(|(ai, di)| ai + t * di).collect();
            let phi = dual(&trial);
            if phi.is_finite() {
                let st = quad.stats(&orders, &trial, &orders);
                let r = &targets - &st.mean;
                if phi <= phi0 + 1e-4 * t * slope || r.amax() < max_res {
                    accepted = Some((trial, st, r));
                    break;
                }
            }
            t *= 0.5;
        }
        let (trial, st, r) = accepted.ok_or(MaxEntError::Convergence { iterations, residual: max_res })?;
        a = trial;
        stats = st;
        resid = r;
        max_res = resid.amax();
        if !max_res.is_finite() {
            return Err(MaxEntError::Convergence { iterations, residual: max_res });
        }
    }

    let multipliers: Vec<Multiplier> =
        orders.iter().zip(&a).map(|(&order, &value)| Multiplier { order, value }).collect();
    let mut density = ExpFamilyDensity1D::with_window(support, multipliers, spec.factors.clone(), window)?;
    let tail_mass = tail_estimate(&density, scale);
    if tail_mass > TAIL_LIMIT {
        return Err(MaxEntError::TailMass(tail_mass));
    }
    density.diagnostics = Some(FitDiagnostics { iterations, max_residual: max_res, tail_mass });
    Ok(density)
}

// Density at each truncated edge times the moment scale.
fn tail_estimate(d: &ExpFamilyDensity1D, scale: f64) -> f64 {
    let mut tail = 0.0;
    if !d.support.lower().is_finite() {
        tail += d.eval(d.window.0).unwrap_or(f64::INFINITY) * scale;
    }
    if !d.support.upper().is_finite() {
        tail += d.eval(d.window.1).unwrap_or(f64::INFINITY) * scale;
    }
    tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maxent::Moment;
    use std::f64::consts::{LN_2, PI};

    fn gaussian_spec() -> MomentSpec1D {
        MomentSpec1D::new(
            Support::real_line(),
            vec![Moment { order: 1, value: 0.0 }, Moment { order: 2, value: 1.0 }],
        )
        .unwrap()
    }

    #[test]
    fn gaussian_fit() {
        let d = fit_multipliers_1d(&gaussian_spec(), None, 1e-12).unwrap();
        assert!(d.multiplier(1).abs() < 1e-8);
        assert!((d.multiplier(2) - 0.5).abs() < 1e-8);
        assert!((d.a0() - (2.0 * PI).sqrt().ln()).abs() < 1e-8);
        assert!((d.a0() - 0.918939).abs() < 1e-6);
        assert!((d.total_mass() - 1.0).abs() < 1e-8);
        assert!(d.diagnostics().unwrap().tail_mass < 1e-12);
    }

    #[test]
    fn uniform_without_constraints() {
        let spec = MomentSpec1D::new(Support::new(0.0, 1.0).unwrap(), vec![]).unwrap();
        let d = fit_multipliers_1d(&spec, None, 1e-10).unwrap();
        assert!(d.multipliers().is_empty());
        assert!(d.a0().abs() < 1e-14);
        assert!((d.eval(0.3).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bounded_second_moment_matches_bisection_oracle() {
        // frozen from bisection on a₂ with 100001-point Simpson quadrature
        let spec = MomentSpec1D::new(Support::new(-1.0, 1.0).unwrap(), vec![Moment { order: 2, value: 0.2 }]).unwrap();
        let d = fit_multipliers_1d(&spec, None, 1e-12).unwrap();
        assert!((d.multiplier(2) - 1.87420663094857).abs() < 1e-8);
        assert!((d.a0() - 0.203966325243914).abs() < 1e-8);
    }

    #[test]
    fn density_eval_examples() {
        let g = fit_multipliers_1d(&gaussian_spec(), None, 1e-12).unwrap();
        assert!((g.eval(0.0).unwrap() - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-9);
        let lin = ExpFamilyDensity1D::new(
            Support::new(0.0, 1.0).unwrap(),
            vec![],
            EndpointFactors::zero_at(0.0, 1.0),
        )
        .unwrap();
        assert!((lin.a0() + LN_2).abs() < 1e-13);
        assert!((lin.eval(0.5).unwrap() - 1.0).abs() < 1e-13);
        assert_eq!(lin.eval(0.0).unwrap(), 0.0);
        assert_eq!(lin.eval(1.5), Err(MaxEntError::Domain(1.5)));
        let sing = ExpFamilyDensity1D::new(
            Support::new(0.0, 1.0).unwrap(),
            vec![],
            EndpointFactors::singularity_at(0.0, 0.5),
        )
        .unwrap();
        assert_eq!(sing.eval(0.0).unwrap(), f64::INFINITY);
        // ρ = x^{-1/2}/2
        assert!((sing.eval(0.25).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn information_examples() {
        let u = ExpFamilyDensity1D::uniform(Support::new(0.0, 2.0).unwrap()).unwrap();
        assert!((u.information().unwrap() + LN_2).abs() < 1e-12);
        let g = fit_multipliers_1d(&gaussian_spec(), None, 1e-12).unwrap();
        let expected = -0.5 * (2.0 * PI * std::f64::consts::E).ln();
        assert!((g.information().unwrap() - expected).abs() < 1e-9);
        assert_eq!(g.information().unwrap(), g.modified_information().unwrap());
        let lin = ExpFamilyDensity1D::new(
            Support::new(0.0, 1.0).unwrap(),
            vec![],
            EndpointFactors::zero_at(0.0, 1.0),
        )
        .unwrap();
        assert!((lin.information().unwrap() - (LN_2 - 0.5)).abs() < 1e-12);
        assert!((lin.modified_information().unwrap() - LN_2).abs() < 1e-12);
    }

    #[test]
    fn singular_information_is_finite() {
        // ρ = ½ x^{-1/2}: ∫ρ ln ρ = -ln 2 + 1
        let sing = ExpFamilyDensity1D::new(
            Support::new(0.0, 1.0).unwrap(),
            vec![],
            EndpointFactors::singularity_at(0.0, 0.5),
        )
        .unwrap();
        assert!((sing.information().unwrap() - (1.0 - LN_2)).abs() < 1e-10);
        assert!((sing.modified_information().unwrap() + LN_2).abs() < 1e-12);
    }

    #[test]
    fn gradient_check_examples() {
        let g = fit_multipliers_1d(&gaussian_spec(), None, 1e-12).unwrap();
        let c = moment_gradient_check(&g, 2, 1e-5).unwrap();
        assert!((c.analytic - 1.0).abs() < 1e-9 && (c.numeric - c.analytic).abs() < 1e-6);

        let u = ExpFamilyDensity1D::uniform(Support::new(0.0, 1.0).unwrap()).unwrap();
        let c = moment_gradient_check(&u, 1, 1e-5).unwrap();
        assert!((c.analytic - 0.5).abs() < 1e-12 && (c.numeric - 0.5).abs() < 1e-9);

        let spec = MomentSpec1D::new(Support::new(-1.0, 1.0).unwrap(), vec![Moment { order: 2, value: 0.2 }]).unwrap();
        let d = fit_multipliers_1d(&spec, None, 1e-12).unwrap();
        let c = moment_gradient_check(&d, 2, 1e-5).unwrap();
        assert!((c.analytic - 0.2).abs() < 1e-6 && (c.numeric - 0.2).abs() < 1e-6);

        assert!(matches!(moment_gradient_check(&d, 2, 1e-11), Err(MaxEntError::Validation(_))));
    }

    #[test]
    fn infeasible_moments() {
        let sup = Support::new(-1.0, 1.0).unwrap();
        for c2 in [1.5, 0.0, -0.1] {
            let spec = MomentSpec1D::new(sup, vec![Moment { order: 2, value: c2 }]).unwrap();
            assert!(matches!(fit_multipliers_1d(&spec, None, 1e-10), Err(MaxEntError::Infeasible(_))));
        }
        let spec = MomentSpec1D::new(
            Support::real_line(),
            vec![Moment { order: 1, value: 1.0 }, Moment { order: 2, value: 0.5 }],
        )
        .unwrap();
        assert!(matches!(fit_multipliers_1d(&spec, None, 1e-10), Err(MaxEntError::Infeasible(_))));
    }

    #[test]
    fn unreachable_tolerance_reports_convergence_error() {
        assert!(matches!(
            fit_multipliers_1d(&gaussian_spec(), None, 1e-300),
            Err(MaxEntError::Convergence { .. })
        ));
        assert!(matches!(fit_multipliers_1d(&gaussian_spec(), None, 0.0), Err(MaxEntError::Validation(_))));
    }

    #[test]
    fn quartic_fit_on_real_line() {
        let spec = MomentSpec1D::new(
            Support::real_line(),
            vec![Moment { order: 2, value: 1.0 }, Moment { order: 4, value: 2.5 }],
        )
        .unwrap();
        let d = fit_multipliers_1d(&spec, None, 1e-11).unwrap();
        assert!((d.moment(2) - 1.0).abs() < 1e-10);
        assert!((d.moment(4) - 2.5).abs() < 1e-10);
        assert!(d.multiplier(4) > 0.0);
    }

    #[test]
    fn json_round_trip_recomputes_normalization() {
        let d = fit_multipliers_1d(&gaussian_spec(), None, 1e-12).unwrap();
        let text = serde_json::to_string(&d).unwrap();
        let back: ExpFamilyDensity1D = serde_json::from_str(&text).unwrap();
        assert_eq!(back.multiplier(2), d.multiplier(2));
        assert!((back.a0() - d.a0()).abs() < 1e-15);
    }
}
