//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so the report reads top to bottom; exits non-zero on any failure.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use infoqm_core::analysis::{self, BasisSet};
use infoqm_core::maxent::{self, Moment, MomentSpec1D, Support};
use infoqm_core::nls::{self, FlowConfig, GridProblem, ProbeMode};
use infoqm_core::numerics::Grid1D;
use infoqm_core::oscillator::{self, OscillatorState};
use infoqm_core::series::{self, SeriesKind, TwoVarKind};

const BIN: &str = env!("CARGO_BIN_EXE_infoqm");

/// Published table: n, alpha, beta, lambda, energy.
const TABLE: [(u32, f64, f64, f64, f64); 8] = [
    (0, 0.561903, 0.165957, -1.34046, 0.836186),
    (1, 0.8846183, 0.182575, -1.18673, 2.69296),
    (2, 1.483947, 0.265717, -0.675132, 3.01642),
    (3, 2.374767, 0.271151, -0.650844, 4.71831),
    (4, 3.3791495, 0.312319, -0.488143, 5.00752),
    (5, 4.5328009, 0.309387, -0.498664, 6.76468),
    (6, 5.7558755, 0.334322, -0.413460, 7.03368),
    (7, 7.07846158, 0.330258, -0.426725, 8.81483),
];

/// ⟨H⟩ for n = 0..=7 from an independent trapezoid oracle on [-14, 14].
const H_EXPECTATION_ORACLE: [f64; 8] = [
    0.8361870532,
    2.3278153070,
    3.0164161759,
    4.1760116876,
    5.0075191069,
    6.1459044687,
    7.0336759378,
    8.1543122014,
];

/// Same-parity overlaps ⟨ψ₀,ψ₂⟩, ⟨ψ₁,ψ₃⟩, ⟨ψ₂,ψ₄⟩ from the same oracle.
const OVERLAP_ORACLE: [(usize, usize, f64); 3] =
    [(0, 2, 0.161186841568843), (1, 3, 0.232227535200028), (2, 4, 0.138279623992505)];

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(start: Instant, limit_s: f64) -> Result<f64, String> {
    let t = start.elapsed().as_secs_f64();
    ensure(t < limit_s, || format!("took {t:.2} s, limit {limit_s} s"))?;
    Ok(t)
}

fn infoqm(args: &[&str], dir: &Path) -> Result<(), String> {
    let status = Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .status()
        .map_err(|e| e.to_string())?;
    ensure(status.success(), || format!("`infoqm {}` exited with {status}", args.join(" ")))
}

fn table_reproduction() -> Check {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    infoqm(&["oscillator", "table", "--n-max", "7", "--out", "table.csv"], dir.path())?;
    let text = fs::read_to_string(dir.path().join("table.csv")).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    ensure(lines.next() == Some("n,k,alpha,beta,lambda,energy"), || "unexpected header".into())?;
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    ensure(rows.len() == 8, || format!("{} data rows", rows.len()))?;
    let mut worst = [0.0f64; 4];
    for (row, &(n, alpha, beta, lambda, energy)) in rows.iter().zip(&TABLE) {
        ensure(row[0] as u32 == n && row[1] as u32 == n % 2, || format!("bad n/k in row {n}"))?;
        for (slot, (got, want)) in [(row[2], alpha), (row[3], beta), (row[4], lambda), (row[5], energy)]
            .into_iter()
            .enumerate()
        {
            worst[slot] = worst[slot].max((got - want).abs());
        }
    }
    ensure(worst[0] <= 2e-5 && worst[1] <= 2e-5, || format!("alpha/beta off by {:.1e}/{:.1e}", worst[0], worst[1]))?;
    ensure(worst[2] <= 1e-4 && worst[3] <= 1e-4, || format!("lambda/E off by {:.1e}/{:.1e}", worst[2], worst[3]))?;
    let lib_start = Instant::now();
    oscillator::table(7).map_err(|e| e.to_string())?;
    let lib_t = within_time(lib_start, 1.0)?;
    let t = within_time(start, 1.0)?;
    Ok(format!(
        "32 values, max |Δ| alpha {:.1e} beta {:.1e} lambda {:.1e} E {:.1e}; solve {lib_t:.3} s, cli {t:.3} s",
        worst[0], worst[1], worst[2], worst[3]
    ))
}

fn linear_limit() -> Check {
    let start = Instant::now();
    let lam = oscillator::lambda_from_beta(0.5);
    ensure(lam == 0.0, || format!("lambda_from_beta(0.5) = {lam:e}"))?;
    let grid = Grid1D::new(-12.0, 12.0, 2048).unwrap();
    let p = GridProblem::harmonic(grid, 0.0).map_err(|e| e.to_string())?;
    let sol = nls::gradient_flow_ground_state(&p, &FlowConfig::default(), None).map_err(|e| e.to_string())?;
    let exact = OscillatorState::linear(0).unwrap();
    let err = nls::l2_distance(&grid, &sol.psi, &grid.sample(|x| exact.psi(x)));
    ensure((sol.mu - 0.5).abs() < 1e-3, || format!("mu = {}", sol.mu))?;
    ensure(err < 1e-4, || format!("L2 error {err:e}"))?;
    let t = within_time(start, 10.0)?;
    Ok(format!("lambda(0.5) = 0, mu = {:.8}, L2 error {err:.1e}, {t:.2} s", sol.mu))
}

fn self_consistent_ground_state() -> Check {
    let start = Instant::now();
    let grid = Grid1D::new(-12.0, 12.0, 2048).unwrap();
    let p = GridProblem::harmonic(grid, 0.0).map_err(|e| e.to_string())?;
    let s = nls::self_consistent_lambda(&p, &FlowConfig::default(), (-3.0, -0.5), None).map_err(|e| e.to_string())?;
    let closed = oscillator::solve_state(0).map_err(|e| e.to_string())?;
    let err = nls::l2_distance(&grid, &s.solution.psi, &grid.sample(|x| closed.psi(x)));
    ensure((s.lambda - TABLE[0].3).abs() < 1e-3, || format!("lambda = {}", s.lambda))?;
    ensure(err < 1e-3, || format!("L2 distance to closed form {err:e}"))?;
    let t = within_time(start, 60.0)?;
    Ok(format!("lambda = {:.8} (table {}), L2 distance {err:.1e}, {t:.2} s", s.lambda, TABLE[0].3))
}

fn residual_identity() -> Check {
    let start = Instant::now();
    let probe = Grid1D::new(-8.0, 8.0, 1601).unwrap().points();
    let mut worst = 0.0f64;
    for s in oscillator::states(7).map_err(|e| e.to_string())? {
        let scale = probe.iter().fold(0.0f64, |m, &x| m.max(s.psi(x).abs()));
        for &x in &probe {
            let dev = (s.eigen_residual(x) + 2.0 * s.k as f64 * s.beta * s.psi(x)).abs() / scale;
            worst = worst.max(dev);
        }
    }
    ensure(worst <= 1e-6, || format!("relative deviation {worst:e}"))?;
    let t = start.elapsed().as_secs_f64();
    Ok(format!("n = 0..7 on 1601 probe points, max relative deviation {worst:.1e}, {t:.3} s"))
}

fn energy_identity() -> Check {
    let start = Instant::now();
    let grid = analysis::default_grid();
    let mut worst = 0.0f64;
    let mut worst_oracle = 0.0f64;
    for s in oscillator::states(7).map_err(|e| e.to_string())? {
        let h = oscillator::hamiltonian_expectation(&s, &grid).map_err(|e| e.to_string())?;
        worst = worst.max((h - (s.energy - 2.0 * s.k as f64 * s.beta)).abs());
        worst_oracle = worst_oracle.max((h - H_EXPECTATION_ORACLE[s.n as usize]).abs());
    }
    ensure(worst <= 1e-5, || format!("|<H> - (E - 2k beta)| = {worst:e}"))?;
    ensure(worst_oracle <= 1e-5, || format!("oracle disagreement {worst_oracle:e}"))?;
    let t = start.elapsed().as_secs_f64();
    Ok(format!("max |<H> - (E - 2k beta)| {worst:.1e}, vs oracle {worst_oracle:.1e}, {t:.3} s"))
}

fn maxent_recovery() -> Check {
    let start = Instant::now();
    let gaussian = MomentSpec1D::new(
        Support::real_line(),
        vec![Moment { order: 1, value: 0.0 }, Moment { order: 2, value: 1.0 }],
    )
    .map_err(|e| e.to_string())?;
    let d = maxent::fit_multipliers_1d(&gaussian, None, 1e-12).map_err(|e| e.to_string())?;
    let (a1, a2) = (d.multiplier(1), d.multiplier(2));
    ensure(a1.abs() < 1e-8 && (a2 - 0.5).abs() < 1e-8, || format!("(a1, a2) = ({a1:e}, {a2})"))?;

    let bounded = MomentSpec1D::new(Support::new(-1.0, 1.0).unwrap(), vec![Moment { order: 2, value: 0.2 }])
        .map_err(|e| e.to_string())?;
    let quartic = MomentSpec1D::new(
        Support::real_line(),
        vec![Moment { order: 2, value: 1.0 }, Moment { order: 4, value: 2.5 }],
    )
    .map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    let mut checked = 0;
    for spec in [&gaussian, &bounded, &quartic] {
        let fit = maxent::fit_multipliers_1d(spec, None, 1e-12).map_err(|e| e.to_string())?;
        for m in spec.constraints() {
            let g = maxent::moment_gradient_check(&fit, m.order, 1e-5).map_err(|e| e.to_string())?;
            worst = worst.max((g.analytic - g.numeric).abs());
            checked += 1;
        }
    }
    ensure(worst <= 1e-6, || format!("dual-gradient mismatch {worst:e}"))?;
    let t = start.elapsed().as_secs_f64();
    Ok(format!(
        "(a1, a2) = ({a1:.1e}, {a2:.12}); gradient identity on {checked} orders over 3 fits, max |Δ| {worst:.1e}, {t:.3} s"
    ))
}

fn overlap_numerics() -> Check {
    let start = Instant::now();
    let grid = analysis::default_grid();
    let states = oscillator::states(7).map_err(|e| e.to_string())?;
    let gram = analysis::gram_matrix(&BasisSet::from_states(grid, &states).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let mut diag = 0.0f64;
    let mut odd = 0.0f64;
    for i in 0..8 {
        diag = diag.max((gram.matrix[i][i] - 1.0).abs());
        for j in 0..8 {
            if (i + j) % 2 == 1 {
                odd = odd.max(gram.matrix[i][j].abs());
            }
        }
    }
    ensure(diag <= 1e-8, || format!("diagonal off by {diag:e}"))?;
    ensure(odd < 1e-10, || format!("opposite-parity entry {odd:e}"))?;
    let mu0 = analysis::mu0_estimate(&grid, &states[0], &states[1]).map_err(|e| e.to_string())?;
    ensure(mu0.abs() <= 1e-8, || format!("mu0(psi0, psi1) = {mu0:e}"))?;
    ensure(analysis::energy_ordering_check(&states), || "energies not increasing".into())?;
    let mut overlaps = Vec::new();
    for &(m, n, want) in &OVERLAP_ORACLE {
        let got = gram.matrix[m][n];
        ensure((got - want).abs() <= 1e-6, || format!("<psi{m},psi{n}> = {got}, oracle {want}"))?;
        overlaps.push(format!("<{m},{n}>={got:.6}"));
    }
    let t = start.elapsed().as_secs_f64();
    Ok(format!(
        "diag {diag:.1e}, odd parity {odd:.1e}, mu0 {mu0:.1e}, ordering ok, same-parity overlaps {} (reported, not zero), {t:.3} s",
        overlaps.join(" ")
    ))
}

fn uniqueness() -> Check {
    let start = Instant::now();
    let grid = Grid1D::new(-12.0, 12.0, 2048).unwrap();
    let p = GridProblem::harmonic(grid, 0.0).map_err(|e| e.to_string())?;
    let cfg = FlowConfig { seed: 7, ..FlowConfig::default() };
    let rep = nls::uniqueness_probe(&p, &cfg, ProbeMode::SelfConsistent { lo: -3.0, hi: -0.5 }, 5)
        .map_err(|e| e.to_string())?;
    let failed: Vec<_> = rep.runs.iter().filter_map(|r| r.error.clone()).collect();
    ensure(failed.is_empty(), || format!("failed runs: {failed:?}"))?;
    ensure(rep.max_value_spread < 1e-6, || format!("lambda spread {:e}", rep.max_value_spread))?;
    ensure(rep.max_state_distance < 1e-5, || format!("state spread {:e}", rep.max_state_distance))?;
    let t = start.elapsed().as_secs_f64();
    Ok(format!(
        "5 seeds, lambda spread {:.1e}, psi spread {:.1e}, {t:.2} s",
        rep.max_value_spread, rep.max_state_distance
    ))
}

fn series_suite() -> Check {
    let start = Instant::now();
    let b = series::binomial_series_eval(1.0, -1.0, 0.5, 60).map_err(|e| e.to_string())?;
    ensure((b.partial_sum - 1.0 / 1.5).abs() < 1e-8 && b.convergent, || format!("binomial {b:?}"))?;
    let div = SeriesKind::Binomial { a: 1.1, k: -1.0, x: 1.0 };
    ensure(!div.convergent(), || "|ax| = 1.1 flagged convergent".into())?;
    let e = series::two_var_series_eval(TwoVarKind::ExpXy, 1.0, 1.0, 30).map_err(|e| e.to_string())?;
    ensure((e.partial_sum - std::f64::consts::E).abs() < 1e-9, || format!("exp_xy {}", e.partial_sum))?;
    let t2 = series::taylor2_coeffs(|x, y| (x * y).exp(), 4, 0.05).map_err(|e| e.to_string())?;
    let (a11, a22) = (t2.coefficient(1, 1), t2.coefficient(2, 2));
    ensure((a11 - 1.0).abs() < 1e-6 && (a22 - 0.5).abs() < 1e-6, || format!("a11 {a11}, a22 {a22}"))?;
    let t = start.elapsed().as_secs_f64();
    Ok(format!(
        "binomial |Δ| {:.1e}, divergent flag at 1.1, exp_xy |Δ| {:.1e}, a11 {a11:.9} a22 {a22:.9}, {t:.3} s",
        (b.partial_sum - 1.0 / 1.5).abs(),
        (e.partial_sum - std::f64::consts::E).abs()
    ))
}

fn determinism() -> Check {
    let start = Instant::now();
    let runs: [&[&str]; 8] = [
        &["oscillator", "table", "--n-max", "7", "--out", "table.csv"],
        &["oscillator", "table", "--n-max", "7", "--format", "json", "--out", "table.json"],
        &["series", "probe", "--kind", "binomial", "--x", "0.9", "--k", "-0.5", "--n-max", "200", "--out", "probe.csv"],
        &["analyze", "gram", "--n-max", "7", "--out", "gram.csv"],
        &["analyze", "project", "--target", "target.json", "--orders", "2,4,8", "--out", "proj.json"],
        &["maxent", "fit", "--input", "moments.json", "--out", "fit.json"],
        &["maxent", "fit", "--input", "moments2d.json", "--out", "fit2d.json"],
        &[
            "nls", "ground", "--domain", "-12", "12", "--grid", "1024", "--lambda-solve", "--seed", "7", "--probe", "3",
            "--out", "sol.json",
        ],
    ];
    let outputs = ["table.csv", "table.json", "probe.csv", "gram.csv", "proj.json", "fit.json", "fit2d.json", "sol.json"];
    let dirs = [tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?];
    for dir in &dirs {
        let write = |name: &str, body: &str| fs::write(dir.path().join(name), body).map_err(|e| e.to_string());
        write(
            "target.json",
            r#"{"function": {"kind": "polynomial_gaussian", "coefficients": [0, 1], "beta": 0.5}}"#,
        )?;
        write(
            "moments.json",
            r#"{"support": ["-inf", "inf"], "moments": [{"order": 2, "value": 1.0}, {"order": 4, "value": 2.5}]}"#,
        )?;
        write(
            "moments2d.json",
            r#"{"support": {"x": [-6, 6], "y": [-6, 6]}, "constraints": [{"i": 2, "j": 0, "value": 1.0}, {"i": 1, "j": 1, "value": 0.3}, {"i": 0, "j": 2, "value": 1.0}]}"#,
        )?;
        for args in &runs {
            infoqm(args, dir.path())?;
        }
    }
    let mut bytes = 0;
    for name in outputs {
        let a = fs::read(dirs[0].path().join(name)).map_err(|e| e.to_string())?;
        let b = fs::read(dirs[1].path().join(name)).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("{name} differs between runs"))?;
        bytes += a.len();
    }
    let t = start.elapsed().as_secs_f64();
    Ok(format!("{} artifacts ({bytes} bytes) byte-identical across two runs, {t:.2} s", outputs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("table reproduction", table_reproduction),
        ("linear limit", linear_limit),
        ("self-consistent nonlinear ground state", self_consistent_ground_state),
        ("residual identity", residual_identity),
        ("energy identity", energy_identity),
        ("maxent recovery", maxent_recovery),
        ("orthogonality numerics", overlap_numerics),
        ("uniqueness probe", uniqueness),
        ("series suite", series_suite),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS  {:>2}. {name}: {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("FAIL  {:>2}. {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
