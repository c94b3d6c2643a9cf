use approx::assert_relative_eq;
use proptest::prelude::*;

use infoqm_core::analysis::{self, BasisSet};
use infoqm_core::maxent::{fit_multipliers_1d, MomentSpec1D};
use infoqm_core::numerics::{integrate, Grid1D, QuadratureRule};
use infoqm_core::oscillator;
use infoqm_core::series::{binomial_series_eval, poly_taylor_coeffs};

fn eval_poly(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn integration_is_linear(a in -5.0f64..5.0, b in -5.0f64..5.0, n in 5usize..200) {
        let grid = Grid1D::new(-2.0, 3.0, n).unwrap();
        let rule = QuadratureRule::simpson(&grid);
        let f = grid.sample(|x| x.sin());
        let g = grid.sample(|x| x * x);
        let mix: Vec<f64> = f.iter().zip(&g).map(|(u, v)| a * u + b * v).collect();
        let lhs = integrate(&mix, &rule).unwrap();
        let rhs = a * integrate(&f, &rule).unwrap() + b * integrate(&g, &rule).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn reexpanded_polynomial_agrees(
        p in prop::collection::vec(-3.0f64..3.0, 1..8),
        x0 in -2.0f64..2.0,
        x in -2.0f64..2.0,
    ) {
        let series = poly_taylor_coeffs(&p, x0).unwrap();
        let direct = eval_poly(&p, x);
        prop_assert!((series.eval(x) - direct).abs() < 1e-9 * (1.0 + direct.abs()));
    }

    #[test]
    fn terminating_binomial_is_exact(k in 0u32..8, x in -3.0f64..3.0) {
        let v = binomial_series_eval(1.0, k as f64, x, k as usize).unwrap();
        let exact = (1.0 + x).powi(k as i32);
        prop_assert!(v.convergent);
        prop_assert!((v.partial_sum - exact).abs() < 1e-9 * (1.0 + exact.abs()));
    }

    #[test]
    fn fitted_density_reproduces_its_moment(c2 in 0.05f64..0.6) {
        let text = format!(r#"{{"support": [-1, 1], "moments": [{{"order": 2, "value": {c2}}}]}}"#);
        let spec = MomentSpec1D::from_json(&text).unwrap();
        let d = fit_multipliers_1d(&spec, None, 1e-10).unwrap();
        prop_assert!((d.moment(0) - 1.0).abs() < 1e-9);
        prop_assert!((d.moment(2) - c2).abs() < 1e-9);
    }
}

#[test]
fn oscillator_states_are_normalized() {
    let grid = analysis::default_grid();
    for s in oscillator::states(7).unwrap() {
        assert_relative_eq!(oscillator::norm_squared(&s, &grid).unwrap(), 1.0, epsilon = 1e-9);
    }
}

#[test]
fn gram_matrix_is_symmetric_with_unit_diagonal() {
    let basis = BasisSet::oscillator_family(analysis::default_grid(), 5).unwrap();
    let gram = analysis::gram_matrix(&basis).unwrap();
    assert!(gram.max_asymmetry() < 1e-14);
    for (i, row) in gram.matrix.iter().enumerate() {
        assert_relative_eq!(row[i], 1.0, epsilon = 1e-9);
    }
    // states of opposite parity are orthogonal
    assert!(gram.matrix[0][1].abs() < 1e-12);
    assert!(gram.matrix[2][5].abs() < 1e-12);
}
