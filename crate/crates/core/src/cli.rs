//! Command-line front end: problem documents in, closed forms and CSV out.
//!
//! A problem document is JSON:
//!
//! ```json
//! {"alpha": 0.5,
//!  "operator": {"coefficients": [-2, 1, 1]},
//!  "initial_conditions": [1, [0, 0.5]],
//!  "grid": {"t_end": 1, "points": 51},
//!  "tolerances": {"residual": 1e-10}}
//! ```
//!
//! `operator` holds either `coefficients` p_0..p_n or `factors`, the roots of
//! the characteristic polynomial. Complex values are a number or `[re, im]`.
//!
//! Exit codes: 0 success, 2 unreadable input, 3 invalid problem, 4 numerical
//! failure, 5 a verification check failed.

use std::fmt::Write as _;
use std::io::{self, Read, Write};

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deviation::{deviation_report, DeviationError, Scenario};
use crate::roots::{expand_factors, CLUSTER_TOL};
use crate::solver::{
    eval_solution, residual, solve_with, taylor_reference, FdeProblem, Grid, RealTerm, Solution, SolverError,
    DEFAULT_ORDER,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid problem: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

pub const EXIT_VERIFY_FAILED: i32 = 5;

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Problem(msg) => CliError::Validation(msg),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<DeviationError> for CliError {
    fn from(e: DeviationError) -> Self {
        match e {
            DeviationError::Alpha(_) | DeviationError::Scenario { .. } => CliError::Validation(e.to_string()),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fracml", version, about = "Linear fractional differential equations in the Jumarie derivative")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the closed-form solution and a machine-readable block.
    Solve { file: String },
    /// Tabulate the solution on the problem grid as CSV.
    Eval { file: String },
    /// Run the self-checks; exit status 5 if any fails.
    Verify { file: String },
    /// Deviation table for identities that only hold at alpha = 1.
    Report {
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        alphas: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// The pair a,b entering the identities.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        pair: Option<Vec<f64>>,
    },
}

/// A complex value as written in problem documents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexValue> for Complex64 {
    fn from(v: ComplexValue) -> Self {
        match v {
            ComplexValue::Real(x) => Complex64::new(x, 0.0),
            ComplexValue::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

impl From<Complex64> for ComplexValue {
    fn from(z: Complex64) -> Self {
        if z.im == 0.0 && z.im.is_sign_positive() {
            ComplexValue::Real(z.re)
        } else {
            ComplexValue::Pair([z.re, z.im])
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    factors: Option<Vec<ComplexValue>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coefficients: Option<Vec<ComplexValue>>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    t_end: f64,
    points: usize,
}

/// Overrides for the thresholds used by `solve`, `verify` and `eval`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative series residual for equations with simple roots.
    pub residual: f64,
    /// Initial-condition reproduction.
    pub ic: f64,
    /// Real form against the complex mode sum.
    pub real_form: f64,
    /// Agreement with the classical Taylor solution at alpha = 1.
    pub classical: f64,
    /// Distance below which roots are merged.
    pub cluster: f64,
    /// Series order for residuals.
    pub series_order: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-10,
            ic: 1e-10,
            real_form: 1e-10,
            classical: 1e-9,
            cluster: CLUSTER_TOL,
            series_order: DEFAULT_ORDER,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    operator: Option<OperatorSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    initial_conditions: Option<Vec<ComplexValue>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<GridSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tolerances: Option<Tolerances>,
}

/// A validated problem together with its thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedProblem {
    pub problem: FdeProblem,
    pub tolerances: Tolerances,
}

pub fn parse_problem(text: &str) -> Result<LoadedProblem, CliError> {
    let spec: ProblemSpec = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    let alpha = spec.alpha.ok_or_else(|| CliError::Validation("missing field `alpha`".into()))?;
    let operator = spec
        .operator
        .ok_or_else(|| CliError::Validation("missing field `operator`".into()))?;
    let coeffs: Vec<Complex64> = match (operator.factors, operator.coefficients) {
        (Some(_), Some(_)) => {
            return Err(CliError::Validation(
                "`operator` must hold exactly one of `factors` and `coefficients`".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::Validation(
                "`operator` needs `factors` or `coefficients`".into(),
            ))
        }
        (Some(f), None) => {
            if f.is_empty() {
                return Err(CliError::Validation("`operator.factors` is empty".into()));
            }
            let roots: Vec<Complex64> = f.into_iter().map(Complex64::from).collect();
            expand_factors(&roots)
        }
        (None, Some(c)) => c.into_iter().map(Complex64::from).collect(),
    };
    let ics: Vec<Complex64> = spec
        .initial_conditions
        .ok_or_else(|| CliError::Validation("missing field `initial_conditions`".into()))?
        .into_iter()
        .map(Complex64::from)
        .collect();
    let grid = spec.grid.map(|g| Grid { t_end: g.t_end, points: g.points });
    let tolerances = spec.tolerances.unwrap_or_default();
    let positive = [
        ("residual", tolerances.residual),
        ("ic", tolerances.ic),
        ("real_form", tolerances.real_form),
        ("classical", tolerances.classical),
        ("cluster", tolerances.cluster),
    ];
    if let Some((name, v)) = positive.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
        return Err(CliError::Validation(format!("tolerance `{name}` must be positive, got {v}")));
    }
    let problem = FdeProblem::new(alpha, coeffs, ics, grid)?;
    Ok(LoadedProblem { problem, tolerances })
}

/// Problem document in coefficient form; [`parse_problem`] reads it back
/// to an identical problem.
pub fn emit_problem(problem: &FdeProblem) -> String {
    let spec = ProblemSpec {
        alpha: Some(problem.alpha()),
        operator: Some(OperatorSpec {
            factors: None,
            coefficients: Some(problem.char_coeffs().iter().map(|&c| c.into()).collect()),
        }),
        initial_conditions: Some(problem.ics().iter().map(|&c| c.into()).collect()),
        grid: problem.grid().map(|g| GridSpec { t_end: g.t_end, points: g.points }),
        tolerances: None,
    };
    to_machine_json(&spec)
}

/// Compact JSON with every float written to 17 significant digits.
struct Sig17;

impl serde_json::ser::Formatter for Sig17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", sig17(value))
    }
}

fn to_machine_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Sig17);
    value.serialize(&mut ser).expect("in-memory serialization cannot fail");
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

/// 17 significant digits, enough to round-trip any f64.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// 6 significant digits for human-readable text.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
        if s == "-0" { "0".into() } else { s }
    } else {
        format!("{x:.5e}")
    }
}

fn complex6(z: Complex64) -> String {
    if z.im == 0.0 {
        sig6(z.re)
    } else if z.re == 0.0 {
        format!("{}i", sig6(z.im))
    } else {
        let sign = if z.im < 0.0 { '-' } else { '+' };
        format!("({} {} {}i)", sig6(z.re), sign, sig6(z.im.abs()))
    }
}

/// "+ x" or "- |x|", for a coefficient that follows another term.
fn signed(x: f64) -> String {
    if x < 0.0 {
        format!("- {}", sig6(-x))
    } else {
        format!("+ {}", sig6(x))
    }
}

/// Joins rendered terms, turning "+ -x" into "- x".
fn join_terms(terms: &[String]) -> String {
    let mut out = String::new();
    for (i, t) in terms.iter().enumerate() {
        if i == 0 {
            out.push_str(t);
        } else if let Some(rest) = t.strip_prefix('-') {
            let _ = write!(out, " - {rest}");
        } else {
            let _ = write!(out, " + {t}");
        }
    }
    out
}

fn power_label(degree: usize) -> String {
    match degree {
        0 => String::new(),
        1 => "t^α·".into(),
        j => format!("t^{{{j}α}}·"),
    }
}

fn render_real_term(term: &RealTerm, alpha: f64) -> String {
    match *term {
        RealTerm::Single { root, degree, amplitude } => {
            format!("{}·{}E_α({} t^α)", sig6(amplitude), power_label(degree), sig6(root))
        }
        RealTerm::Pair { a, b, degree, cos_coeff, sin_coeff } => {
            let p = power_label(degree);
            if term.factorizes(alpha) {
                format!(
                    "{p}E_α({} t^α)·[{}·cos_α({} t^α) {}·sin_α({} t^α)]",
                    sig6(a),
                    sig6(cos_coeff),
                    sig6(b),
                    signed(sin_coeff),
                    sig6(b)
                )
            } else {
                let z = complex6(Complex64::new(a, b));
                format!(
                    "{p}[{}·Re E_α({z} t^α) {}·Im E_α({z} t^α)]",
                    sig6(cos_coeff),
                    signed(sin_coeff)
                )
            }
        }
    }
}

#[derive(Serialize)]
struct MachineRoot {
    root: [f64; 2],
    multiplicity: usize,
}

#[derive(Serialize)]
struct MachineMode {
    root: [f64; 2],
    degree: usize,
    amplitude: [f64; 2],
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum MachineRealTerm {
    Single { root: f64, degree: usize, amplitude: f64 },
    Pair { a: f64, b: f64, degree: usize, cos_coeff: f64, sin_coeff: f64, factorizes: bool },
}

#[derive(Serialize)]
struct MachineSolution {
    alpha: f64,
    roots: Vec<MachineRoot>,
    modes: Vec<MachineMode>,
    extension_beyond_paper: bool,
    residual: f64,
    real_form: Option<Vec<MachineRealTerm>>,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn residual_order(solution: &Solution, tol: &Tolerances) -> usize {
    let max_degree = solution.modes.iter().map(|m| m.degree).max().unwrap_or(0);
    tol.series_order.max(max_degree + 10)
}

fn distinct_roots(solution: &Solution) -> Vec<MachineRoot> {
    let mut out: Vec<MachineRoot> = Vec::new();
    for m in &solution.modes {
        if m.degree == 0 {
            out.push(MachineRoot { root: pair(m.root), multiplicity: 1 });
        } else if let Some(last) = out.last_mut() {
            last.multiplicity += 1;
        }
    }
    out
}

pub fn cmd_solve(loaded: &LoadedProblem) -> Result<String, CliError> {
    let p = &loaded.problem;
    let tol = &loaded.tolerances;
    let solution = solve_with(p, tol.cluster)?;
    let order = residual_order(&solution, tol);
    let res = residual(&solution, p, order)?;
    let alpha = p.alpha();

    let mut out = String::new();
    let coeffs: Vec<String> = p.char_coeffs().iter().map(|&c| complex6(c)).collect();
    let _ = writeln!(out, "alpha = {}", sig6(alpha));
    let _ = writeln!(out, "operator: sum_m p_m D^(m alpha), p = [{}]", coeffs.join(", "));
    let _ = writeln!(out, "roots:");
    for r in distinct_roots(&solution) {
        let z = Complex64::new(r.root[0], r.root[1]);
        let _ = writeln!(out, "  {} (multiplicity {})", complex6(z), r.multiplicity);
    }
    let terms: Vec<String> = solution
        .modes
        .iter()
        .map(|m| format!("{}·{}E_α({} t^α)", complex6(m.amplitude), power_label(m.degree), complex6(m.root)))
        .collect();
    let _ = writeln!(out, "y(t) = {}", join_terms(&terms));
    if let Some(real) = &solution.real_form {
        let terms: Vec<String> = real.iter().map(|t| render_real_term(t, alpha)).collect();
        let _ = writeln!(out, "real form: y(t) = {}", join_terms(&terms));
        if real.iter().any(|t| !t.factorizes(alpha)) {
            let _ = writeln!(
                out,
                "note: for alpha < 1, E_α((a+ib)t^α) ≠ E_α(at^α)·E_α(ibt^α); the pair terms are kept unfactorized"
            );
        }
    }
    if solution.modes.iter().any(|m| m.degree > 0) {
        let _ = writeln!(
            out,
            "note: repeated roots use t^(jα)·E_α(a t^α) modes, which solve the equation exactly only at alpha = 1"
        );
    }
    if solution.extension_beyond_paper {
        let _ = writeln!(out, "note: multiplicity above 2 extends the repeated-root pattern beyond the double-root case");
    }
    let _ = writeln!(out, "series residual (order {order}): {}", sig6(res));

    let machine = MachineSolution {
        alpha,
        roots: distinct_roots(&solution),
        modes: solution
            .modes
            .iter()
            .map(|m| MachineMode { root: pair(m.root), degree: m.degree, amplitude: pair(m.amplitude) })
            .collect(),
        extension_beyond_paper: solution.extension_beyond_paper,
        residual: res,
        real_form: solution.real_form.as_ref().map(|terms| {
            terms
                .iter()
                .map(|t| match *t {
                    RealTerm::Single { root, degree, amplitude } => MachineRealTerm::Single { root, degree, amplitude },
                    RealTerm::Pair { a, b, degree, cos_coeff, sin_coeff } => MachineRealTerm::Pair {
                        a,
                        b,
                        degree,
                        cos_coeff,
                        sin_coeff,
                        factorizes: t.factorizes(alpha),
                    },
                })
                .collect()
        }),
    };
    let _ = writeln!(out, "--- machine ---");
    let _ = writeln!(out, "{}", to_machine_json(&machine));
    Ok(out)
}

fn require_grid(p: &FdeProblem) -> Result<Vec<f64>, CliError> {
    p.grid()
        .map(|g| g.nodes())
        .ok_or_else(|| CliError::Validation("this command needs a `grid`".into()))
}

pub fn cmd_eval(loaded: &LoadedProblem) -> Result<String, CliError> {
    let nodes = require_grid(&loaded.problem)?;
    let solution = solve_with(&loaded.problem, loaded.tolerances.cluster)?;
    let values = eval_solution(&solution, &nodes)?;
    let mut out = String::from("t,re_y,im_y\n");
    for (t, y) in nodes.iter().zip(values) {
        let _ = writeln!(out, "{},{},{}", sig17(*t), sig17(y.re), sig17(y.im));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOutcome {
    pub checks: Vec<Check>,
    pub report: String,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

const DEFAULT_VERIFY_GRID: Grid = Grid { t_end: 1.0, points: 51 };

pub fn cmd_verify(loaded: &LoadedProblem) -> Result<VerifyOutcome, CliError> {
    let p = &loaded.problem;
    let tol = &loaded.tolerances;
    let solution = solve_with(p, tol.cluster)?;
    let nodes = p.grid().unwrap_or(DEFAULT_VERIFY_GRID).nodes();
    let values = eval_solution(&solution, &nodes)?;
    let mut checks = Vec::new();
    let mut push = |name: String, value: f64, threshold: f64| {
        checks.push(Check { name, value, threshold, passed: value <= threshold });
    };

    let order = residual_order(&solution, tol);
    push(format!("series residual (order {order})"), residual(&solution, p, order)?, tol.residual);

    let ic_scale = p.ics().iter().map(|c| c.norm()).fold(1.0, f64::max);
    let y0 = eval_solution(&solution, &[0.0])?[0];
    push("y(0) matches initial condition".into(), (y0 - p.ics()[0]).norm() / ic_scale, tol.ic);
    let series = solution.series(order)?;
    let mut worst = 0.0f64;
    for (k, &ic) in p.ics().iter().enumerate() {
        let d = series.deriv_at_zero(k).map_err(SolverError::from)?;
        worst = worst.max((d - ic).norm() / ic_scale);
    }
    push("D^(k alpha) y(0) match initial conditions".into(), worst, tol.ic);

    if solution.real_form.is_some() {
        let mut worst = 0.0f64;
        for (&t, y) in nodes.iter().zip(&values) {
            let r = solution.eval_real_form(t)?.unwrap_or_default();
            worst = worst.max((y - r).norm() / y.norm().max(1.0));
        }
        push("real form equals complex mode sum".into(), worst, tol.real_form);
    }

    if p.alpha() == 1.0 {
        let mut worst = 0.0f64;
        for (&t, y) in nodes.iter().zip(&values) {
            let r = taylor_reference(p, t)?;
            worst = worst.max((y - r).norm() / r.norm().max(1.0));
        }
        push("matches classical Taylor solution".into(), worst, tol.classical);
    }

    let mut report = String::new();
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(report, "{status} {}: {} (threshold {})", c.name, sig6(c.value), sig6(c.threshold));
    }
    if p.alpha() < 1.0 && solution.modes.iter().any(|m| m.degree > 0) {
        let _ = writeln!(
            report,
            "note: repeated-root modes t^(jα)·E_α(a t^α) do not solve the equation exactly for alpha < 1"
        );
    }
    let verdict = if checks.iter().all(|c| c.passed) { "all checks passed" } else { "verification failed" };
    let _ = writeln!(report, "{verdict}");
    Ok(VerifyOutcome { checks, report })
}

pub fn cmd_report(alphas: &[f64], t: f64, pair: Option<(f64, f64)>) -> Result<String, CliError> {
    let (a, b) = pair.unwrap_or((1.0, 1.0));
    let report = deviation_report(alphas, &[Scenario { a, b, t }])?;
    let mut out = String::from("identity,alpha,t,deviation,exact_at_alpha1\n");
    for row in &report.rows {
        let t_cell = if row.identity.is_pointwise() { sig17(row.scenario.t) } else { String::new() };
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            row.identity.name(),
            sig17(row.alpha),
            t_cell,
            sig17(row.deviation),
            row.exact_at_alpha1
        );
    }
    Ok(out)
}

fn read_input(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Parse(format!("reading standard input: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("reading {path}: {e}")))
    }
}

/// Text for standard output and the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub exit_code: i32,
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let ok = |stdout| Outcome { stdout, exit_code: 0 };
    match &cli.command {
        Command::Solve { file } => cmd_solve(&parse_problem(&read_input(file)?)?).map(ok),
        Command::Eval { file } => cmd_eval(&parse_problem(&read_input(file)?)?).map(ok),
        Command::Verify { file } => {
            let v = cmd_verify(&parse_problem(&read_input(file)?)?)?;
            let exit_code = if v.passed() { 0 } else { EXIT_VERIFY_FAILED };
            Ok(Outcome { stdout: v.report, exit_code })
        }
        Command::Report { alphas, t, pair } => {
            let pair = match pair.as_deref() {
                None => None,
                Some(&[a, b]) => Some((a, b)),
                Some(other) => {
                    return Err(CliError::Validation(format!(
                        "--pair takes two values a,b, got {}",
                        other.len()
                    )))
                }
            };
            cmd_report(alphas, *t, pair).map(ok)
        }
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            let mut stdout = io::stdout().lock();
            let _ = stdout.write_all(outcome.stdout.as_bytes());
            let _ = stdout.flush();
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("fracml: {e}");
            e.exit_code()
        }
    }
}
