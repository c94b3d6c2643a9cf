use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use infoqm_core::analysis::{self, AnalysisError, BasisSet, ProjectionTarget};
use infoqm_core::maxent::{self, MaxEntError, MomentSpec1D, MomentSpec2D};
use infoqm_core::nls::{self, FlowConfig, GridProblem, NlsError, ProbeMode, UniquenessReport};
use infoqm_core::numerics::Grid1D;
use infoqm_core::oscillator::{self, OscillatorError};
use infoqm_core::series::{self, SeriesKind};

use crate::emit::{csv, format_sig, to_canonical_json, write_output, JSON_DIGITS};
use crate::{
    AnalyzeCmd, CliError, Command, Family, Format, GramArgs, MaxentCmd, MaxentFitArgs, NlsCmd, NlsGroundArgs,
    OscillatorCmd, OscillatorTableArgs, Outcome, ProjectArgs, SeriesCmd, SeriesKindArg, SeriesProbeArgs,
};

pub(crate) fn dispatch(cmd: &Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::Maxent(MaxentCmd::Fit(a)) => maxent_fit(a),
        Command::Series(SeriesCmd::Probe(a)) => series_probe(a),
        Command::Oscillator(OscillatorCmd::Table(a)) => oscillator_table(a),
        Command::Nls(NlsCmd::Ground(a)) => nls_ground(a),
        Command::Analyze(AnalyzeCmd::Gram(a)) => analyze_gram(a),
        Command::Analyze(AnalyzeCmd::Project(a)) => analyze_project(a),
    }
}

fn done(out: &Option<std::path::PathBuf>, warnings: Vec<String>) -> Result<Outcome, CliError> {
    Ok(Outcome { out: out.clone(), warnings, failure: None })
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn check_digits(digits: usize) -> Result<(), CliError> {
    if (1..=17).contains(&digits) {
        Ok(())
    } else {
        Err(CliError::Invalid(format!("--digits must lie in 1..=17, got {digits}")))
    }
}

fn maxent_err(e: MaxEntError) -> CliError {
    match e {
        MaxEntError::Convergence { .. } | MaxEntError::TailMass(_) => CliError::Convergence(e.to_string()),
        _ => CliError::Invalid(e.to_string()),
    }
}

fn oscillator_err(e: OscillatorError) -> CliError {
    match e {
        OscillatorError::QuantumNumber(_) | OscillatorError::Beta(_) => CliError::Invalid(e.to_string()),
        _ => CliError::Convergence(e.to_string()),
    }
}

fn nls_err(e: NlsError) -> CliError {
    if e.is_convergence() {
        CliError::Convergence(e.to_string())
    } else {
        CliError::Invalid(e.to_string())
    }
}

fn analysis_err(e: AnalysisError) -> CliError {
    match e {
        AnalysisError::Oscillator(e) => oscillator_err(e),
        AnalysisError::IllConditioned { .. } => CliError::Convergence(e.to_string()),
        _ => CliError::Invalid(e.to_string()),
    }
}

fn maxent_fit(a: &MaxentFitArgs) -> Result<Outcome, CliError> {
    let text = read(&a.input)?;
    let raw: Value = serde_json::from_str(&text).map_err(|e| CliError::Invalid(e.to_string()))?;
    let body = if raw.get("support").is_some_and(Value::is_object) {
        if a.init.is_some() {
            return Err(CliError::Invalid("--init is only supported for one-dimensional specs".into()));
        }
        let parsed: MomentSpec2D = serde_json::from_value(raw).map_err(|e| CliError::Invalid(e.to_string()))?;
        let spec = MomentSpec2D::new(parsed.support, parsed.constraints().to_vec()).map_err(maxent_err)?;
        let d = maxent::fit_multipliers_2d(&spec, a.tol).map_err(maxent_err)?;
        to_canonical_json(&d, JSON_DIGITS)?
    } else {
        let spec = MomentSpec1D::from_json(&text).map_err(maxent_err)?;
        let init = match &a.init {
            Some(p) => {
                let prev: maxent::ExpFamilyDensity1D =
                    serde_json::from_str(&read(p)?).map_err(|e| CliError::Invalid(e.to_string()))?;
                Some(prev.multipliers().to_vec())
            }
            None => None,
        };
        let d = maxent::fit_multipliers_1d(&spec, init.as_deref(), a.tol).map_err(maxent_err)?;
        to_canonical_json(&d, JSON_DIGITS)?
    };
    write_output(a.out.as_deref(), &body)?;
    done(&a.out, Vec::new())
}

#[derive(Serialize)]
struct ProbeDoc<'a> {
    series: SeriesKind,
    convergent: bool,
    rows: &'a [series::ProbeRow],
}

fn series_probe(a: &SeriesProbeArgs) -> Result<Outcome, CliError> {
    check_digits(a.digits)?;
    let kind = match a.kind {
        SeriesKindArg::Binomial => SeriesKind::Binomial { a: a.a, k: a.k, x: a.x },
        SeriesKindArg::BinomialXy => SeriesKind::BinomialXy { k: a.k, x: a.x, y: a.y },
        SeriesKindArg::ExpXy => SeriesKind::ExpXy { x: a.x, y: a.y },
    };
    let rows = series::probe(&kind, a.n_max).map_err(|e| CliError::Invalid(e.to_string()))?;
    let convergent = kind.convergent();
    let body = match a.format {
        Format::Csv => csv(
            &["N".into(), "partial_sum".into(), "cauchy_diff".into()],
            &rows
                .iter()
                .map(|r| vec![r.n.to_string(), format_sig(r.partial_sum, a.digits), format_sig(r.cauchy_diff, a.digits)])
                .collect::<Vec<_>>(),
        ),
        Format::Json => to_canonical_json(&ProbeDoc { series: kind, convergent, rows: &rows }, a.digits)?,
    };
    write_output(a.out.as_deref(), &body)?;
    let warnings = if convergent {
        Vec::new()
    } else {
        vec!["series is outside its region of convergence; partial sums diverge".into()]
    };
    done(&a.out, warnings)
}

fn oscillator_table(a: &OscillatorTableArgs) -> Result<Outcome, CliError> {
    check_digits(a.digits)?;
    let n_max = u32::try_from(a.n_max).map_err(|_| CliError::Invalid(format!("--n-max must be ≥ 0, got {}", a.n_max)))?;
    let rows = oscillator::table(n_max).map_err(oscillator_err)?;
    let body = match a.format {
        Format::Csv => csv(
            &["n", "k", "alpha", "beta", "lambda", "energy"].map(String::from),
            &rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        r.k.to_string(),
                        format_sig(r.alpha, a.digits),
                        format_sig(r.beta, a.digits),
                        format_sig(r.lambda, a.digits),
                        format_sig(r.energy, a.digits),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
        Format::Json => to_canonical_json(&rows, a.digits)?,
    };
    write_output(a.out.as_deref(), &body)?;
    done(&a.out, Vec::new())
}

/// JSON written by `nls ground` and read back by `--resume`.
#[derive(Debug, Serialize, Deserialize)]
pub struct GroundDoc {
    /// Self-consistent coefficient; absent when `b` was fixed.
    pub lambda: Option<f64>,
    pub mu: f64,
    pub b: f64,
    pub iterations: usize,
    pub grid: Grid1D,
    pub psi: Vec<f64>,
    pub diagnostics: GroundDiagnostics,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GroundDiagnostics {
    pub flow_norm: f64,
    pub norm: f64,
    /// `‖Hψ - b ln(ψ²)ψ - μψ‖₂`.
    pub eigen_residual: f64,
    pub self_consistency_residual: Option<f64>,
    pub flow_solves: Option<usize>,
    pub uniqueness: Option<UniquenessReport>,
}

fn nls_ground(a: &NlsGroundArgs) -> Result<Outcome, CliError> {
    let grid = Grid1D::new(a.domain[0], a.domain[1], a.grid).map_err(|e| CliError::Invalid(e.to_string()))?;
    let problem = GridProblem::harmonic(grid, a.b)
        .and_then(|p| p.with_eps_log(a.eps_log))
        .map_err(nls_err)?;
    let cfg = FlowConfig { tau: a.tau, tol_flow: a.tol, max_iters: a.max_iters, seed: a.seed };
    let init = match &a.resume {
        Some(path) => {
            let prev: GroundDoc = serde_json::from_str(&read(path)?).map_err(|e| CliError::Invalid(e.to_string()))?;
            if prev.grid != grid {
                return Err(CliError::Invalid("resume state was computed on a different grid".into()));
            }
            Some(prev.psi)
        }
        None => None,
    };
    let bracket = (a.bracket[0], a.bracket[1]);

    let (lambda, solution, sc_residual, solves) = if a.lambda_solve {
        let s = nls::self_consistent_lambda(&problem, &cfg, bracket, init.as_deref()).map_err(nls_err)?;
        (Some(s.lambda), s.solution, Some(s.residual), Some(s.evaluations))
    } else {
        let s = nls::gradient_flow_ground_state(&problem, &cfg, init.as_deref()).map_err(nls_err)?;
        (None, s, None, None)
    };
    let solved = problem.with_b(solution.b).map_err(nls_err)?;
    let uniqueness = match a.probe {
        Some(n) => {
            let mode = if a.lambda_solve {
                ProbeMode::SelfConsistent { lo: bracket.0, hi: bracket.1 }
            } else {
                ProbeMode::FixedCoefficient
            };
            Some(nls::uniqueness_probe(&problem, &cfg, mode, n).map_err(nls_err)?)
        }
        None => None,
    };
    let mut warnings = Vec::new();
    if let Some(u) = &uniqueness {
        let failed = u.runs.iter().filter(|r| r.error.is_some()).count();
        if failed > 0 {
            warnings.push(format!("{failed} of {} probe runs failed", u.runs.len()));
        }
    }
    let doc = GroundDoc {
        lambda,
        mu: solution.mu,
        b: solution.b,
        iterations: solution.iterations,
        grid,
        diagnostics: GroundDiagnostics {
            flow_norm: solution.flow_norm,
            norm: nls::grid_norm_squared(&grid, &solution.psi),
            eigen_residual: nls::eigen_residual_norm(&solved, &solution.psi, solution.mu),
            self_consistency_residual: sc_residual,
            flow_solves: solves,
            uniqueness,
        },
        psi: solution.psi,
    };
    write_output(a.out.as_deref(), &to_canonical_json(&doc, JSON_DIGITS)?)?;
    done(&a.out, warnings)
}

fn analyze_gram(a: &GramArgs) -> Result<Outcome, CliError> {
    check_digits(a.digits)?;
    let n_max = u32::try_from(a.n_max).map_err(|_| CliError::Invalid(format!("--n-max must be ≥ 0, got {}", a.n_max)))?;
    let grid = analysis::default_grid();
    let basis = match a.family {
        Family::Log => BasisSet::oscillator_family(grid, n_max),
        Family::Linear => BasisSet::linear_family(grid, n_max),
    }
    .map_err(analysis_err)?;
    let report = analysis::gram_matrix(&basis).map_err(analysis_err)?;
    let body = match a.format {
        Format::Csv => {
            let size = report.matrix.len();
            let mut header = vec!["n".to_string()];
            header.extend((0..size).map(|i| i.to_string()));
            let rows: Vec<Vec<String>> = report
                .matrix
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    std::iter::once(i.to_string()).chain(row.iter().map(|&v| format_sig(v, a.digits))).collect()
                })
                .collect();
            csv(&header, &rows)
        }
        Format::Json => to_canonical_json(&report, a.digits)?,
    };
    write_output(a.out.as_deref(), &body)?;
    done(&a.out, Vec::new())
}

fn analyze_project(a: &ProjectArgs) -> Result<Outcome, CliError> {
    let target = ProjectionTarget::from_json(&read(&a.target)?).map_err(analysis_err)?;
    match target.project(&a.orders) {
        Ok(report) => {
            write_output(a.out.as_deref(), &to_canonical_json(&report, JSON_DIGITS)?)?;
            done(&a.out, Vec::new())
        }
        Err(AnalysisError::IllConditioned { order, condition, partial }) => {
            write_output(a.out.as_deref(), &to_canonical_json(&partial, JSON_DIGITS)?)?;
            let msg = format!("Gram matrix at order {order} has condition number {condition:e}; partial report written");
            Ok(Outcome { out: a.out.clone(), warnings: vec![msg.clone()], failure: Some(CliError::Convergence(msg)) })
        }
        Err(e) => Err(analysis_err(e)),
    }
}
