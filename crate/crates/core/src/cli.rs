//! Batch front end: problem files in, JSON reports out.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::bethe::{
    bethe_vector, solution_weight, solve_bae, BetheSolution, ColorAssignment, SolveOutcome, SolverConfig,
    MAX_BETHE_VECTOR_POINTS,
};
use crate::gaudin::{all_hamiltonians, joint_spectrum, GaudinError, GaudinProblem, SpectrumConfig, SpectrumRecord};
use crate::liealg::{RootData, Weight};
use crate::opers::{
    cartan_connection, closed_form_eigenvalues, frobenius_obstruction, miura_of_connection, miura_sln,
    oper_residues, regularity_check, CartanConnection, Oper,
};
use crate::ratfun::{Point, Pole, RationalFunction};
use crate::repmod::{RepError, TensorRep};
use crate::scalar::{format_rational, int, parse_rational, rat, Rational, Scalar, C64};

pub const SCHEMA_VERSION: u64 = 1;
/// Largest tensor product the oracle side will build.
pub const TENSOR_DIM_CAP: usize = 1024;
/// Largest number of Newton starts per color multiset.
pub const STARTS_CAP: usize = 100_000;

/// Tolerances used by `verify`.
pub const INVARIANCE_TOL: f64 = 1e-9;
pub const EIGEN_TOL: f64 = 1e-8;
pub const REGULARITY_TOL: f64 = 1e-9;
pub const OBSTRUCTION_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input at {pointer}: {message}")]
    Input { pointer: String, message: String },
    #[error("resource cap exceeded: {0}")]
    Cap(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input { .. } | CliError::Io(_) => 2,
            CliError::Cap(_) => 3,
        }
    }

    fn input(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Input { pointer: pointer.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Verify,
    Spectrum,
    Miura,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Verify => "verify",
            Command::Spectrum => "spectrum",
            Command::Miura => "miura",
        }
    }
}

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub starts: Option<usize>,
    pub perturb: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub passed: bool,
    /// human-readable summary
    pub table: String,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// Points in one of the two fields.
#[derive(Debug, Clone)]
pub enum Problem {
    Exact(GaudinProblem<Rational>),
    Complex(GaudinProblem<C64>),
}

/// Connection supplied to `miura`.
#[derive(Debug, Clone)]
pub enum ConnectionInput {
    /// ε-components `u_1..u_n`
    Epsilon(Vec<RationalFunction<Rational>>),
    /// fundamental-weight components
    Fundamental(Vec<RationalFunction<Rational>>),
}

#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub root_data: RootData,
    pub problem: Option<Problem>,
    pub colors: Option<ColorAssignment>,
    pub lambda_inf: Option<Weight>,
    pub mu: Option<Weight>,
    pub solver: SolverConfig,
    pub connection: Option<ConnectionInput>,
}

const TOP_KEYS: &[&str] = &["schema", "algebra", "points", "weights", "colors", "lambda_inf", "mu", "solver", "connection"];

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let v: Value = serde_json::from_str(text).map_err(|e| CliError::input("", format!("not JSON: {e}")))?;
        let obj = v.as_object().ok_or_else(|| CliError::input("", "expected an object"))?;
        for k in obj.keys() {
            if !TOP_KEYS.contains(&k.as_str()) {
                return Err(CliError::input(format!("/{k}"), "unknown key"));
            }
        }
        match obj.get("schema").and_then(Value::as_u64) {
            Some(SCHEMA_VERSION) => {}
            _ => return Err(CliError::input("/schema", format!("expected {SCHEMA_VERSION}"))),
        }
        let root_data = parse_algebra(obj.get("algebra"))?;
        let rank = root_data.rank();

        let points = obj.get("points");
        let weights = obj.get("weights");
        let problem = match (points, weights) {
            (None, None) => None,
            (Some(_), None) => return Err(CliError::input("/weights", "missing")),
            (None, Some(_)) => return Err(CliError::input("/points", "missing")),
            (Some(p), Some(w)) => Some(parse_problem(&root_data, p, w)?),
        };
        let colors = match obj.get("colors") {
            None => None,
            Some(c) => {
                let arr = c.as_array().ok_or_else(|| CliError::input("/colors", "expected an array"))?;
                let mut out = Vec::new();
                for (i, x) in arr.iter().enumerate() {
                    match x.as_u64() {
                        Some(k) if k >= 1 && (k as usize) <= rank => out.push(k as usize),
                        _ => return Err(CliError::input(format!("/colors/{i}"), format!("expected an integer in 1..={rank}"))),
                    }
                }
                Some(ColorAssignment::new(rank, out).expect("colors validated"))
            }
        };
        let lambda_inf = obj.get("lambda_inf").map(|x| parse_weight(x, "/lambda_inf", rank, true)).transpose()?;
        let mu = obj.get("mu").map(|x| parse_weight(x, "/mu", rank, false)).transpose()?;
        let solver = parse_solver(obj.get("solver"))?;
        let connection = obj.get("connection").map(|c| parse_connection(c, &root_data)).transpose()?;
        Ok(ProblemFile { root_data, problem, colors, lambda_inf, mu, solver, connection })
    }

    fn require_problem(&self) -> Result<&Problem, CliError> {
        self.problem.as_ref().ok_or_else(|| CliError::input("/points", "missing"))
    }
}

fn parse_algebra(v: Option<&Value>) -> Result<RootData, CliError> {
    let obj = v.and_then(Value::as_object).ok_or_else(|| CliError::input("/algebra", "expected an object"))?;
    if obj.get("type").and_then(Value::as_str) != Some("A") {
        return Err(CliError::input("/algebra/type", "only type \"A\" is supported"));
    }
    let rank = obj
        .get("rank")
        .and_then(Value::as_u64)
        .filter(|&r| (1..=16).contains(&r))
        .ok_or_else(|| CliError::input("/algebra/rank", "expected an integer in 1..=16"))?;
    RootData::type_a(rank as usize).map_err(|e| CliError::input("/algebra/rank", e.to_string()))
}

fn parse_weight(v: &Value, pointer: &str, rank: usize, dominant: bool) -> Result<Weight, CliError> {
    let arr = v.as_array().ok_or_else(|| CliError::input(pointer, "expected an array of integers"))?;
    if arr.len() != rank {
        return Err(CliError::input(pointer, format!("expected {rank} coordinates")));
    }
    let mut out = Vec::new();
    for (i, x) in arr.iter().enumerate() {
        let k = x.as_i64().ok_or_else(|| CliError::input(format!("{pointer}/{i}"), "expected an integer"))?;
        if dominant && k < 0 {
            return Err(CliError::input(format!("{pointer}/{i}"), "weights must be dominant"));
        }
        out.push(k);
    }
    Ok(Weight::from_ints(&out))
}

enum RawScalar {
    Exact(Rational),
    Complex(C64),
}

fn parse_scalar(v: &Value, pointer: &str) -> Result<RawScalar, CliError> {
    match v {
        Value::String(s) => parse_rational(s)
            .map(RawScalar::Exact)
            .ok_or_else(|| CliError::input(pointer, "expected a rational \"p/q\"")),
        Value::Number(n) if n.is_i64() => Ok(RawScalar::Exact(int(n.as_i64().unwrap()))),
        Value::Array(a) if a.len() == 2 => {
            let re = a[0].as_f64().ok_or_else(|| CliError::input(format!("{pointer}/0"), "expected a number"))?;
            let im = a[1].as_f64().ok_or_else(|| CliError::input(format!("{pointer}/1"), "expected a number"))?;
            Ok(RawScalar::Complex(C64::new(re, im)))
        }
        _ => Err(CliError::input(pointer, "expected \"p/q\" or [re, im]")),
    }
}

fn parse_exact(v: &Value, pointer: &str) -> Result<Rational, CliError> {
    match parse_scalar(v, pointer)? {
        RawScalar::Exact(q) => Ok(q),
        RawScalar::Complex(_) => Err(CliError::input(pointer, "expected an exact rational")),
    }
}

fn parse_problem(rd: &RootData, points: &Value, weights: &Value) -> Result<Problem, CliError> {
    let parr = points.as_array().ok_or_else(|| CliError::input("/points", "expected an array"))?;
    let warr = weights.as_array().ok_or_else(|| CliError::input("/weights", "expected an array"))?;
    if parr.len() != warr.len() {
        return Err(CliError::input("/weights", format!("expected {} weights, one per point", parr.len())));
    }
    let raw: Vec<RawScalar> =
        parr.iter().enumerate().map(|(i, x)| parse_scalar(x, &format!("/points/{i}"))).collect::<Result<_, _>>()?;
    let ws: Vec<Weight> = warr
        .iter()
        .enumerate()
        .map(|(i, x)| parse_weight(x, &format!("/weights/{i}"), rd.rank(), true))
        .collect::<Result<_, _>>()?;
    let map_err = |e: GaudinError| match e {
        GaudinError::CoincidentPoints(_, j) => CliError::input(format!("/points/{j}"), e.to_string()),
        GaudinError::NotDominant(i) => CliError::input(format!("/weights/{i}"), e.to_string()),
        other => CliError::input("/points", other.to_string()),
    };
    if raw.iter().all(|x| matches!(x, RawScalar::Exact(_))) {
        let pts = raw.into_iter().map(|x| if let RawScalar::Exact(q) = x { q } else { unreachable!() }).collect();
        GaudinProblem::new(rd.clone(), pts, ws).map(Problem::Exact).map_err(map_err)
    } else {
        let pts = raw
            .into_iter()
            .map(|x| match x {
                RawScalar::Exact(q) => q.to_c64(),
                RawScalar::Complex(c) => c,
            })
            .collect();
        GaudinProblem::new(rd.clone(), pts, ws).map(Problem::Complex).map_err(map_err)
    }
}

fn parse_solver(v: Option<&Value>) -> Result<SolverConfig, CliError> {
    let mut cfg = SolverConfig::default();
    let Some(v) = v else { return Ok(cfg) };
    let obj = v.as_object().ok_or_else(|| CliError::input("/solver", "expected an object"))?;
    for (k, x) in obj {
        let ptr = format!("/solver/{k}");
        match k.as_str() {
            "seed" => cfg.seed = x.as_u64().ok_or_else(|| CliError::input(&ptr, "expected an unsigned integer"))?,
            "starts" => {
                cfg.starts =
                    Some(x.as_u64().filter(|&n| n > 0).ok_or_else(|| CliError::input(&ptr, "expected a positive integer"))?
                        as usize)
            }
            "tol" => cfg.tol = x.as_f64().filter(|t| *t > 0.0).ok_or_else(|| CliError::input(&ptr, "expected a positive number"))?,
            "dedup" => {
                cfg.dedup = x.as_f64().filter(|t| *t >= 0.0).ok_or_else(|| CliError::input(&ptr, "expected a number"))?
            }
            "max_iter" => {
                cfg.max_iter =
                    x.as_u64().filter(|&n| n > 0).ok_or_else(|| CliError::input(&ptr, "expected a positive integer"))?
                        as usize
            }
            _ => return Err(CliError::input(ptr, "unknown solver key")),
        }
    }
    Ok(cfg)
}

fn parse_function(v: &Value, pointer: &str) -> Result<RationalFunction<Rational>, CliError> {
    let obj = v.as_object().ok_or_else(|| CliError::input(pointer, "expected {\"poly\": [...], \"poles\": [...]}"))?;
    let mut poly = Vec::new();
    if let Some(p) = obj.get("poly") {
        let arr = p.as_array().ok_or_else(|| CliError::input(format!("{pointer}/poly"), "expected an array"))?;
        for (i, c) in arr.iter().enumerate() {
            poly.push(parse_exact(c, &format!("{pointer}/poly/{i}"))?);
        }
    }
    let mut poles = Vec::new();
    if let Some(p) = obj.get("poles") {
        let arr = p.as_array().ok_or_else(|| CliError::input(format!("{pointer}/poles"), "expected an array"))?;
        for (i, pole) in arr.iter().enumerate() {
            let ptr = format!("{pointer}/poles/{i}");
            let at = parse_exact(pole.get("at").unwrap_or(&Value::Null), &format!("{ptr}/at"))?;
            let coeffs = pole
                .get("coeffs")
                .and_then(Value::as_array)
                .ok_or_else(|| CliError::input(format!("{ptr}/coeffs"), "expected an array"))?
                .iter()
                .enumerate()
                .map(|(k, c)| parse_exact(c, &format!("{ptr}/coeffs/{k}")))
                .collect::<Result<Vec<_>, _>>()?;
            poles.push(Pole { at, coeffs });
        }
    }
    RationalFunction::from_parts(poles, poly).map_err(|e| CliError::input(pointer, e.to_string()))
}

fn parse_connection(v: &Value, rd: &RootData) -> Result<ConnectionInput, CliError> {
    let obj = v.as_object().ok_or_else(|| CliError::input("/connection", "expected an object"))?;
    let list = |key: &str| -> Result<Vec<RationalFunction<Rational>>, CliError> {
        let ptr = format!("/connection/{key}");
        match obj.get(key) {
            Some(Value::Array(a)) => {
                a.iter().enumerate().map(|(i, f)| parse_function(f, &format!("{ptr}/{i}"))).collect()
            }
            Some(f @ Value::Object(_)) => Ok(vec![parse_function(f, &ptr)?]),
            _ => Err(CliError::input(ptr, "expected a function or a list of functions")),
        }
    };
    if obj.contains_key("u") {
        let mut u = list("u")?;
        if u.len() == 1 && rd.n() == 2 {
            let neg = u[0].neg();
            u.push(neg);
        }
        if u.len() != rd.n() {
            return Err(CliError::input("/connection/u", format!("expected {} components", rd.n())));
        }
        Ok(ConnectionInput::Epsilon(u))
    } else if obj.contains_key("components") {
        let c = list("components")?;
        if c.len() != rd.rank() {
            return Err(CliError::input("/connection/components", format!("expected {} components", rd.rank())));
        }
        Ok(ConnectionInput::Fundamental(c))
    } else {
        Err(CliError::input("/connection", "expected key \"u\" or \"components\""))
    }
}

// ---------------------------------------------------------------------------
// JSON helpers

fn c64_json(z: C64) -> Value {
    let f = |x: f64| if x.is_finite() { json!(x) } else { Value::Null };
    json!([f(z.re), f(z.im)])
}

fn f64_json(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn weight_json(w: &Weight) -> Value {
    match w.to_ints() {
        Some(v) => json!(v),
        None => Value::Array(w.coords().iter().map(|q| Value::String(format_rational(q))).collect()),
    }
}

fn rel_delta(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

// ---------------------------------------------------------------------------
// commands

pub fn run(cmd: Command, text: &str, opts: &Options) -> Result<Outcome, CliError> {
    let mut file = ProblemFile::parse(text)?;
    if let Some(s) = opts.seed {
        file.solver.seed = s;
    }
    if let Some(t) = opts.tol {
        file.solver.tol = t;
    }
    if let Some(n) = opts.starts {
        file.solver.starts = Some(n);
    }
    match cmd {
        Command::Solve => cmd_solve(&file),
        Command::Verify => cmd_verify(&file, opts.perturb.unwrap_or(0.0)),
        Command::Spectrum => cmd_spectrum(&file),
        Command::Miura => cmd_miura(&file),
    }
}

macro_rules! with_problem {
    ($problem:expr, $p:ident => $body:expr) => {
        match $problem {
            Problem::Exact($p) => $body,
            Problem::Complex($p) => $body,
        }
    };
}

fn header(cmd: Command, file: &ProblemFile) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(cmd.name()));
    m.insert("schema".into(), json!(SCHEMA_VERSION));
    m.insert("algebra".into(), json!({"type": "A", "rank": file.root_data.rank()}));
    if let Some(p) = &file.problem {
        let field = if matches!(p, Problem::Exact(_)) { "exact" } else { "complex" };
        m.insert("field".into(), json!(field));
    }
    m
}

/// Color multisets to solve for: the explicit list, the one fixed by
/// `lambda_inf`, or every multiset leaving a dominant weight.
fn sectors<S: Scalar>(p: &GaudinProblem<S>, file: &ProblemFile) -> Result<Vec<ColorAssignment>, CliError> {
    let rd = p.root_data();
    if let Some(c) = &file.colors {
        return Ok(vec![c.clone()]);
    }
    let total = p.total_weight();
    if let Some(li) = &file.lambda_inf {
        let target = rd.dual_weight(li);
        let diff = rd.root_coords(&total.sub(&target));
        return ColorAssignment::from_root_difference(&diff)
            .map(|c| vec![c])
            .ok_or_else(|| CliError::input("/lambda_inf", "Σλ_i - λ_∞* is not a sum of simple roots"));
    }
    let bound: Vec<i64> = rd
        .root_coords(&total)
        .iter()
        .map(|q| q.floor().to_integer().try_into().unwrap_or(0))
        .collect();
    let mut out = Vec::new();
    let mut counts = vec![0i64; rd.rank()];
    loop {
        let mu = counts.iter().enumerate().fold(total.clone(), |acc, (i, &k)| acc.sub(&rd.simple_root(i).scale(&int(k))));
        if mu.is_dominant_integral() {
            let coords: Vec<Rational> = counts.iter().map(|&k| int(k)).collect();
            out.push(ColorAssignment::from_root_difference(&coords).expect("nonnegative counts"));
        }
        let mut i = 0;
        while i < counts.len() {
            if counts[i] < bound[i] {
                counts[i] += 1;
                break;
            }
            counts[i] = 0;
            i += 1;
        }
        if i == counts.len() {
            break;
        }
    }
    out.sort_by_key(|c| (c.len(), c.colors().to_vec()));
    Ok(out)
}

fn check_caps(colors: &ColorAssignment, cfg: &SolverConfig) -> Result<(), CliError> {
    if colors.len() > MAX_BETHE_VECTOR_POINTS {
        return Err(CliError::Cap(format!("{} Bethe roots exceed the cap {MAX_BETHE_VECTOR_POINTS}", colors.len())));
    }
    if cfg.effective_starts(colors.len()) > STARTS_CAP {
        return Err(CliError::Cap(format!("more than {STARTS_CAP} solver starts")));
    }
    Ok(())
}

fn tensor_within_cap<S: Scalar>(p: &GaudinProblem<S>) -> Result<Option<TensorRep>, CliError> {
    let dim: f64 = p.weights().iter().map(|w| p.root_data().weyl_dimension(w).to_c64().re).product();
    if dim > TENSOR_DIM_CAP as f64 {
        return Ok(None);
    }
    match p.tensor_irreducibles() {
        Ok(t) => Ok(Some(t)),
        Err(GaudinError::Rep(RepError::DimensionCap { .. })) => Ok(None),
        Err(e) => Err(CliError::Cap(e.to_string())),
    }
}

fn classification_json(rd: &RootData, mu: &Weight) -> Value {
    match rd.classify_weight_at_infinity(mu) {
        Some((li, w)) => json!({"lambda_inf": weight_json(&li), "weyl": w.to_string()}),
        None => Value::Null,
    }
}

struct SolvedSector {
    colors: ColorAssignment,
    mu: Weight,
    outcome: SolveOutcome,
}

fn solve_all<S: Scalar>(p: &GaudinProblem<S>, file: &ProblemFile) -> Result<Vec<SolvedSector>, CliError> {
    let mut out = Vec::new();
    for colors in sectors(p, file)? {
        check_caps(&colors, &file.solver)?;
        let outcome = solve_bae(p, &colors, &file.solver);
        out.push(SolvedSector { mu: solution_weight(p, &colors), colors, outcome });
    }
    Ok(out)
}

fn solution_json<S: Scalar>(p: &GaudinProblem<S>, s: &BetheSolution) -> Value {
    let predicted = crate::opers::predicted_eigenvalues(p, s).ok();
    let residue_sum = predicted.as_ref().map(|v| v.iter().sum::<C64>().norm());
    let mut m = Map::new();
    m.insert("w".into(), Value::Array(s.w.iter().map(|&z| c64_json(z)).collect()));
    m.insert("residual".into(), f64_json(s.residual));
    m.insert("condition".into(), f64_json(s.condition));
    m.insert("possibly_degenerate".into(), json!(s.possibly_degenerate));
    m.insert(
        "predicted_eigenvalues".into(),
        predicted.map_or(Value::Null, |v| Value::Array(v.into_iter().map(c64_json).collect())),
    );
    m.insert("residue_sum".into(), residue_sum.map_or(Value::Null, f64_json));
    if p.root_data().rank() == 1 {
        let half = C64::new(0.5, 0.0);
        let closed = closed_form_eigenvalues(&p.to_complex(), &s.w, &half);
        m.insert("closed_form_half".into(), Value::Array(closed.into_iter().map(c64_json).collect()));
    }
    Value::Object(m)
}

fn cmd_solve(file: &ProblemFile) -> Result<Outcome, CliError> {
    let problem = file.require_problem()?;
    let mut report = header(Command::Solve, file);
    report.insert("seed".into(), json!(file.solver.seed));
    let mut table = String::new();
    let mut total = 0usize;
    let mut sectors_json = Vec::new();
    let mut count_violations = 0usize;
    with_problem!(problem, p => {
        let tensor = tensor_within_cap(p)?;
        for sec in solve_all(p, file)? {
            let singular = tensor.as_ref().map(|t| t.singular_space(&sec.mu).len());
            let found = sec.outcome.solutions.len();
            total += found;
            let count_ok = singular.map(|d| found <= d);
            if count_ok == Some(false) {
                count_violations += 1;
            }
            let _ = writeln!(
                table,
                "colors {:?}  mu {}  solutions {}  singular dim {}",
                sec.colors.colors(),
                sec.mu,
                found,
                singular.map_or("-".to_string(), |d| d.to_string())
            );
            for s in &sec.outcome.solutions {
                let ws: Vec<String> = s.w.iter().map(|z| format!("{:.12}{:+.12}i", z.re, z.im)).collect();
                let _ = writeln!(table, "    w = [{}]  residual {:.2e}", ws.join(", "), s.residual);
            }
            sectors_json.push(json!({
                "colors": sec.colors.colors(),
                "mu": weight_json(&sec.mu),
                "classification": classification_json(p.root_data(), &sec.mu),
                "singular_dim": singular,
                "starts": sec.outcome.starts,
                "converged": sec.outcome.converged,
                "count_within_singular_dim": count_ok,
                "solutions": sec.outcome.solutions.iter().map(|s| solution_json(p, s)).collect::<Vec<_>>(),
                "collisions": sec.outcome.collisions.iter().map(|s| solution_json(p, s)).collect::<Vec<_>>(),
            }));
        }
    });
    report.insert("sectors".into(), Value::Array(sectors_json));
    report.insert("summary".into(), json!({"solutions": total, "count_violations": count_violations}));
    Ok(Outcome { report: Value::Object(report), passed: true, table })
}

struct Check {
    name: String,
    value: f64,
    tol: f64,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Check { name: name.into(), value, tol }
    }

    fn passed(&self) -> bool {
        self.value.is_finite() && self.value < self.tol
    }

    fn json(&self) -> Value {
        json!({"check": self.name, "value": f64_json(self.value), "tol": self.tol, "passed": self.passed()})
    }
}

fn verify_solution<S: Scalar>(
    p: &GaudinProblem<S>,
    t: &TensorRep,
    hams: &[nalgebra::DMatrix<C64>],
    oracle: &SpectrumRecord,
    s: &BetheSolution,
) -> Vec<Check> {
    let mut checks = Vec::new();
    let rd = p.root_data();
    let phi = match bethe_vector(p, s, t) {
        Ok(v) => nalgebra::DVector::from_vec(v),
        Err(_) => return vec![Check::new("bethe_vector", f64::INFINITY, 0.0)],
    };
    let norm = phi.norm();
    checks.push(Check::new("bethe_vector_nonzero", if norm > 1e-12 { 0.0 } else { 1.0 }, 0.5));
    for i in 0..rd.rank() {
        let e = t.total_e(i).to_complex();
        checks.push(Check::new(format!("invariance_e{}", i + 1), (&e * &phi).norm() / norm, INVARIANCE_TOL));
    }
    let predicted = match crate::opers::predicted_eigenvalues(p, s) {
        Ok(v) => v,
        Err(_) => return checks,
    };
    for (i, (h, theta)) in hams.iter().zip(&predicted).enumerate() {
        let r = (h * &phi - &phi * *theta).norm() / norm;
        checks.push(Check::new(format!("eigenvector_site{}", i + 1), r / theta.norm().max(1.0), EIGEN_TOL));
    }
    let oracle_delta = oracle
        .entries
        .iter()
        .map(|e| e.eigenvalues.iter().zip(&predicted).map(|(&o, &q)| rel_delta(q, o)).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min);
    checks.push(Check::new("oracle_delta", oracle_delta, EIGEN_TOL));
    checks.push(Check::new("residue_sum", predicted.iter().sum::<C64>().norm(), 1e-10));

    if let Ok(conn) = cartan_connection(p, s) {
        if let Ok(oper) = miura_of_connection(&conn) {
            for (j, wj) in s.w.iter().enumerate() {
                let rep = regularity_check(&oper, wj, REGULARITY_TOL);
                checks.push(Check::new(format!("regularity_w{}", j + 1), rep.max_singular, REGULARITY_TOL));
            }
            if oper.n() == 2 {
                for (i, (z, lam)) in p.points().iter().zip(p.weights()).enumerate() {
                    let l = lam.to_ints().map_or(0, |v| v[0]) as u32;
                    let value = frobenius_obstruction(&oper, &z.to_c64(), l, 1e-9)
                        .map(|v| v.iter().map(|x| x.norm()).fold(0.0, f64::max))
                        .unwrap_or(f64::INFINITY);
                    checks.push(Check::new(format!("monodromy_z{}", i + 1), value, OBSTRUCTION_TOL));
                }
            }
            let mu = solution_weight(p, &s.colors);
            if let (Ok(inf), Some((li, _))) =
                (oper_residues(&oper, &Point::Infinity), rd.classify_weight_at_infinity(&mu))
            {
                let expected = rd.casimir_value(&li).to_c64();
                checks.push(Check::new("infinity_casimir", rel_delta(inf.double, expected), 1e-10));
            }
        }
    }
    checks
}

fn cmd_verify(file: &ProblemFile, perturb: f64) -> Result<Outcome, CliError> {
    let problem = file.require_problem()?;
    let mut report = header(Command::Verify, file);
    report.insert("seed".into(), json!(file.solver.seed));
    report.insert("perturb".into(), json!(perturb));
    let mut all_passed = true;
    let mut table = String::new();
    let mut sectors_json = Vec::new();
    with_problem!(problem, p => {
        let t = tensor_within_cap(p)?
            .ok_or_else(|| CliError::Cap(format!("tensor product exceeds dimension {TENSOR_DIM_CAP}")))?;
        let hams: Vec<nalgebra::DMatrix<C64>> = all_hamiltonians(p, &t)
            .map_err(|e| CliError::Cap(e.to_string()))?
            .iter()
            .map(|h| h.to_complex())
            .collect();
        for sec in solve_all(p, file)? {
            let oracle = joint_spectrum(p, &t, &sec.mu, &SpectrumConfig { seed: file.solver.seed, ..Default::default() })
                .map_err(|e| CliError::Cap(e.to_string()))?;
            let mut sols = Vec::new();
            for s in &sec.outcome.solutions {
                let s = if perturb != 0.0 {
                    s.perturbed(p, C64::new(perturb, 0.0)).map_err(|e| CliError::Cap(e.to_string()))?
                } else {
                    s.clone()
                };
                let checks = verify_solution(p, &t, &hams, &oracle, &s);
                let ok = checks.iter().all(Check::passed);
                all_passed &= ok;
                let _ = writeln!(table, "colors {:?}  w {:?}  {}", sec.colors.colors(), s.w.iter().map(|z| z.re).collect::<Vec<_>>(), if ok { "PASS" } else { "FAIL" });
                for c in checks.iter().filter(|c| !c.passed()) {
                    let _ = writeln!(table, "    {} = {:.3e} (tol {:.0e})", c.name, c.value, c.tol);
                }
                let mut sj = solution_json(p, &s);
                sj["checks"] = Value::Array(checks.iter().map(Check::json).collect());
                sj["passed"] = json!(ok);
                sols.push(sj);
            }
            let count_ok = sec.outcome.solutions.len() <= oracle.singular_dim;
            all_passed &= count_ok;
            sectors_json.push(json!({
                "colors": sec.colors.colors(),
                "mu": weight_json(&sec.mu),
                "classification": classification_json(p.root_data(), &sec.mu),
                "singular_dim": oracle.singular_dim,
                "count_within_singular_dim": count_ok,
                "oracle": spectrum_json(&oracle),
                "solutions": sols,
                "collisions": sec.outcome.collisions.len(),
            }));
        }
    });
    report.insert("sectors".into(), Value::Array(sectors_json));
    report.insert("passed".into(), json!(all_passed));
    Ok(Outcome { report: Value::Object(report), passed: all_passed, table })
}

fn spectrum_json(rec: &SpectrumRecord) -> Value {
    json!({
        "singular_dim": rec.singular_dim,
        "jordan": rec.jordan,
        "degenerate": rec.degenerate,
        "quadratic_only": rec.quadratic_only,
        "max_residual": f64_json(rec.max_residual()),
        "entries": rec.entries.iter().map(|e| json!({
            "eigenvalues": e.eigenvalues.iter().map(|&z| c64_json(z)).collect::<Vec<_>>(),
            "residuals": e.residuals.iter().map(|&r| f64_json(r)).collect::<Vec<_>>(),
            "multiplicity": e.multiplicity,
        })).collect::<Vec<_>>(),
    })
}

fn dominant_weights<S: Scalar>(p: &GaudinProblem<S>) -> Result<Vec<Weight>, CliError> {
    let blank = ProblemFile {
        root_data: p.root_data().clone(),
        problem: None,
        colors: None,
        lambda_inf: None,
        mu: None,
        solver: SolverConfig::default(),
        connection: None,
    };
    Ok(sectors(p, &blank)?.iter().map(|c| solution_weight(p, c)).collect())
}

fn cmd_spectrum(file: &ProblemFile) -> Result<Outcome, CliError> {
    let problem = file.require_problem()?;
    let mut report = header(Command::Spectrum, file);
    let mut table = String::new();
    let mut blocks = Vec::new();
    with_problem!(problem, p => {
        let t = tensor_within_cap(p)?
            .ok_or_else(|| CliError::Cap(format!("tensor product exceeds dimension {TENSOR_DIM_CAP}")))?;
        let mus = match &file.mu {
            Some(mu) => vec![mu.clone()],
            None => dominant_weights(p)?,
        };
        let cfg = SpectrumConfig { seed: file.solver.seed, ..Default::default() };
        for mu in mus {
            let rec = joint_spectrum(p, &t, &mu, &cfg).map_err(|e| CliError::Cap(e.to_string()))?;
            let _ = writeln!(table, "mu {}  singular dim {}", mu, rec.singular_dim);
            for e in &rec.entries {
                let vals: Vec<String> = e.eigenvalues.iter().map(|z| format!("{:.10}{:+.10}i", z.re, z.im)).collect();
                let _ = writeln!(table, "    [{}]", vals.join(", "));
            }
            let mut b = spectrum_json(&rec);
            b["mu"] = weight_json(&mu);
            blocks.push(b);
        }
    });
    report.insert("blocks".into(), Value::Array(blocks));
    Ok(Outcome { report: Value::Object(report), passed: true, table })
}

/// Double-pole coefficient `c = λ(λ+2)/4` solved for a nonnegative integer `λ`.
fn sl2_weight_of(c: &Rational) -> Option<u32> {
    (0u32..=64).find(|&l| rat((l * (l + 2)) as i64, 4) == *c)
}

fn cmd_miura(file: &ProblemFile) -> Result<Outcome, CliError> {
    let conn = file.connection.as_ref().ok_or_else(|| CliError::input("/connection", "missing"))?;
    let rd = &file.root_data;
    let oper: Oper<Rational> = match conn {
        ConnectionInput::Epsilon(u) => miura_sln(u).map_err(|e| CliError::input("/connection/u", e.to_string()))?,
        ConnectionInput::Fundamental(c) => {
            let cc = CartanConnection::new(rd.clone(), c.clone())
                .map_err(|e| CliError::input("/connection/components", e.to_string()))?;
            miura_of_connection(&cc).map_err(|e| CliError::input("/connection/components", e.to_string()))?
        }
    };
    let mut report = header(Command::Miura, file);
    let mut table = String::new();
    let q = oper.projective();
    let _ = writeln!(table, "q = {}", q);
    report.insert("v".into(), Value::Array(oper.coefficients().iter().map(|f| f.to_json()).collect()));
    report.insert("q".into(), q.to_json());
    let mut points = Vec::new();
    let mut poles: Vec<Rational> = oper.coefficients().iter().flat_map(|f| f.poles().iter().map(|p| p.at.clone())).collect();
    poles.sort();
    poles.dedup();
    for x in poles {
        let r = oper_residues(&oper, &Point::Finite(x.clone())).map_err(|e| CliError::input("/connection", e.to_string()))?;
        let obstruction = if oper.n() == 2 {
            sl2_weight_of(&r.double).and_then(|l| frobenius_obstruction(&oper, &x, l, 0.0).ok()).map(|v| v[0].clone())
        } else {
            None
        };
        let _ = writeln!(
            table,
            "at {}: double {}  simple {}  obstruction {}",
            format_rational(&x),
            format_rational(&r.double),
            format_rational(&r.simple),
            obstruction.as_ref().map_or("-".into(), format_rational)
        );
        points.push(json!({
            "at": format_rational(&x),
            "double": format_rational(&r.double),
            "simple": format_rational(&r.simple),
            "obstruction": obstruction.map(|o| format_rational(&o)),
        }));
    }
    let inf = oper_residues(&oper, &Point::Infinity).map_err(|e| CliError::input("/connection", e.to_string()))?;
    report.insert("points".into(), Value::Array(points));
    report.insert(
        "infinity".into(),
        json!({"double": format_rational(&inf.double), "simple": format_rational(&inf.simple)}),
    );
    Ok(Outcome { report: Value::Object(report), passed: true, table })
}
