use serde::{Deserialize, Serialize};

use super::NumericsError;

/// Iteration cap shared by the bracketing solvers.
pub const ROOT_MAX_ITERS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootBracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl RootBracket {
    pub fn new(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Result<Self, NumericsError> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(NumericsError::InvalidBracket { lo, hi });
        }
        if !f_lo.is_finite() {
            return Err(NumericsError::NotFinite { x: lo });
        }
        if !f_hi.is_finite() {
            return Err(NumericsError::NotFinite { x: hi });
        }
        if f_lo * f_hi > 0.0 {
            return Err(NumericsError::NoSignChange { lo, hi });
        }
        Ok(Self { lo, hi, f_lo, f_hi })
    }

    /// Evaluates `f` at both ends and checks for a sign change.
    pub fn from_fn<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<Self, NumericsError> {
        Self::new(lo, hi, f(lo), f(hi))
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Bisection over a fallible function. Stops once the bracket is narrower
/// than `tol` and returns its midpoint.
pub fn bisect_with<F, E>(mut f: F, bracket: RootBracket, tol: f64) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    if !(tol > 0.0) {
        return Err(NumericsError::InvalidBracket { lo: bracket.lo, hi: bracket.hi }.into());
    }
    let RootBracket { mut lo, mut hi, f_lo, f_hi } = bracket;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    let mut f_lo = f_lo;
    for _ in 0..ROOT_MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        if hi - lo < tol {
            return Ok(mid);
        }
        let fm = f(mid)?;
        if !fm.is_finite() {
            return Err(NumericsError::NotFinite { x: mid }.into());
        }
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    Err(NumericsError::NoConvergence(ROOT_MAX_ITERS).into())
}

pub fn find_root<F: Fn(f64) -> f64>(
    f: F,
    bracket: RootBracket,
    tol: f64,
) -> Result<f64, NumericsError> {
    bisect_with(|x| Ok::<_, NumericsError>(f(x)), bracket, tol)
}

/// Bisection to width `tol`, then a few guarded Newton steps. A Newton step
/// is kept only if it stays inside the final bracket and lowers `|f|`.
pub fn find_root_newton<F, D>(
    f: F,
    df: D,
    bracket: RootBracket,
    tol: f64,
) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mid = find_root(&f, bracket, tol)?;
    let (lo, hi) = (mid - tol, mid + tol);
    let mut best = mid;
    let mut f_best = f(mid).abs();
    let mut x = mid;
    for _ in 0..8 {
        let d = df(x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = x - f(x) / d;
        if !(next >= lo && next <= hi) {
            break;
        }
        let fn_abs = f(next).abs();
        if fn_abs < f_best {
            best = next;
            f_best = fn_abs;
            x = next;
        } else {
            break;
        }
    }
    Ok(best)
}

/// Splits `[lo, hi]` into `panels` equal panels and returns the ones whose
/// endpoint values change sign (or hit zero at the panel start).
pub fn sign_change_scan<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    panels: usize,
) -> Result<Vec<RootBracket>, NumericsError> {
    if !(lo < hi) || panels == 0 {
        return Err(NumericsError::InvalidBracket { lo, hi });
    }
    let h = (hi - lo) / panels as f64;
    let xs: Vec<f64> = (0..=panels)
        .map(|i| if i == panels { hi } else { lo + i as f64 * h })
        .collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut out = Vec::new();
    for i in 0..panels {
        let (a, b) = (fs[i], fs[i + 1]);
        if !a.is_finite() {
            return Err(NumericsError::NotFinite { x: xs[i] });
        }
        let last_zero = i + 1 == panels && b == 0.0;
        if a * b < 0.0 || a == 0.0 || last_zero {
            out.push(RootBracket { lo: xs[i], hi: xs[i + 1], f_lo: a, f_hi: b });
        }
    }
    Ok(out)
}
