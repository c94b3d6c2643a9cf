use super::NumericsError;

/// Largest order accepted by the recurrences.
pub const HERMITE_MAX_ORDER: usize = 64;

fn check_order(n: usize) -> Result<(), NumericsError> {
    if n > HERMITE_MAX_ORDER {
        Err(NumericsError::OrderTooLarge { order: n, max: HERMITE_MAX_ORDER })
    } else {
        Ok(())
    }
}

/// Returns `(H_{n-1}(u), H_n(u))` for the physicists' Hermite polynomials,
/// with `H_{-1} = 0`.
pub fn hermite_pair(n: usize, u: f64) -> Result<(f64, f64), NumericsError> {
    check_order(n)?;
    let mut prev = 0.0;
    let mut cur = 1.0;
    for m in 0..n {
        let next = 2.0 * u * cur - 2.0 * m as f64 * prev;
        prev = cur;
        cur = next;
    }
    Ok((prev, cur))
}

/// Physicists' Hermite polynomial `H_n(u)`.
pub fn hermite_eval(n: usize, u: f64) -> Result<f64, NumericsError> {
    hermite_pair(n, u).map(|(_, h)| h)
}

/// `H_n'(u) = 2n H_{n-1}(u)`.
pub fn hermite_deriv(n: usize, u: f64) -> Result<f64, NumericsError> {
    let (prev, _) = hermite_pair(n, u)?;
    Ok(2.0 * n as f64 * prev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_orders() {
        assert_eq!(hermite_eval(0, 3.7).unwrap(), 1.0);
        assert_eq!(hermite_eval(2, 1.0).unwrap(), 2.0);
        assert_eq!(hermite_eval(3, 1.0).unwrap(), -4.0);
        assert_eq!(hermite_deriv(0, 5.0).unwrap(), 0.0);
        assert_eq!(hermite_deriv(1, 2.5).unwrap(), 2.0);
        assert_eq!(hermite_deriv(2, 1.0).unwrap(), 8.0);
    }

    #[test]
    fn explicit_forms() {
        for &u in &[-2.3f64, -0.4, 0.0, 0.9, 3.1] {
            let h4 = 16.0 * u.powi(4) - 48.0 * u * u + 12.0;
            assert!((hermite_eval(4, u).unwrap() - h4).abs() < 1e-10 * h4.abs().max(1.0));
            let d3 = 24.0 * u * u - 12.0;
            assert!((hermite_deriv(3, u).unwrap() - d3).abs() < 1e-12 * d3.abs().max(1.0));
        }
    }

    #[test]
    fn order_cap() {
        assert!(hermite_eval(64, 0.1).is_ok());
        assert_eq!(
            hermite_eval(65, 0.1),
            Err(NumericsError::OrderTooLarge { order: 65, max: 64 })
        );
        assert!(hermite_deriv(65, 0.1).is_err());
    }
}
