//! Command-line front end. Every command prints one JSON document on stdout.
//!
//! Exit codes: 0 success, 1 negative verdict, 2 input error, 3 solver failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use crate::correlation::{
    bell_polytope_membership, classical_max, no_signalling_check, BellFunctional, Convention, CorrelationError,
    CorrelationOutcome, GramSystem,
};
use crate::npa::{npa_bound, npa_bound_bell, GeneralScenario, Level, NpaError, ReducedFunctional};
use crate::realization::{jl_reduce, realize, verify, QuantumRealization, RealizationError};
use crate::sdp::{
    elliptope_membership, suspension_bound, upper_bound_nc, ElliptopeGraph, ElliptopeVerdict, SdpError, SdpOptions,
    SdpStatus,
};
use crate::stabilizer::{expected_signs, pipeline_summary, StabilizerError};

/// Largest deviation accepted by `verify` unless `--tol` overrides it.
pub const VERIFY_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "tsirelson", version, about = "Bounds and realizations of two-party quantum correlations")]
struct Cli {
    /// Solver tolerance (SDP) or acceptance threshold (verify).
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Use a built-in functional instead of a file.
    #[arg(long, global = true, value_enum)]
    builtin: Option<Builtin>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Builtin {
    /// CHSH in 0/1 form, classical bound 0.
    Chsh,
    /// CHSH in ±1 form, classical bound 2.
    ChshPm,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Membership tests for a correlation outcome.
    Check { test: CheckKind, outcome: PathBuf },
    /// Exact classical maximum by enumeration.
    ClassicalMax { functional: Option<PathBuf> },
    /// Upper bound on the quantum value of a functional.
    Bound {
        #[arg(long, value_enum)]
        method: BoundMethod,
        #[arg(long, default_value = "1")]
        level: String,
        functional: Option<PathBuf>,
    },
    /// Build a state and ±1 observables reproducing a Gram system.
    Realize {
        gram: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a realization's expectations with a Gram system.
    Verify { realization: PathBuf, gram: PathBuf },
    /// Johnson-Lindenstrauss reduction of a Gram system.
    Reduce {
        #[arg(long)]
        epsilon: f64,
        gram: PathBuf,
    },
    /// Stabilizer pipeline report for ν singlets.
    Stabilizer {
        #[arg(long)]
        nu: usize,
        /// Print the GF(2) matrices as 0/1 text instead of JSON.
        #[arg(long)]
        dump: bool,
    },
    /// Bound table over every functional in a directory.
    Table {
        #[arg(long, value_enum)]
        method: Option<TableMethod>,
        dir: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CheckKind {
    Nosignalling,
    Bellpolytope,
    Elliptope,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BoundMethod {
    Elliptope,
    #[value(name = "elliptope_rmet")]
    ElliptopeRmet,
    Npa,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TableMethod {
    I,
    Ii,
}

/// Exit code with the text destined for stdout and stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandResult {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Solver(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Self::Input(_) => 2,
            Self::Solver(_) => 3,
        }
    }
}

impl From<CorrelationError> for Failure {
    fn from(e: CorrelationError) -> Self {
        match e {
            CorrelationError::Solver(_) => Self::Solver(e.to_string()),
            _ => Self::Input(e.to_string()),
        }
    }
}

impl From<SdpError> for Failure {
    fn from(e: SdpError) -> Self {
        match e {
            SdpError::Solver(_) | SdpError::Numerics(_) => Self::Solver(e.to_string()),
            SdpError::Correlation(c) => c.into(),
            _ => Self::Input(e.to_string()),
        }
    }
}

impl From<NpaError> for Failure {
    fn from(e: NpaError) -> Self {
        match e {
            NpaError::Sdp(s) => s.into(),
            _ => Self::Input(e.to_string()),
        }
    }
}

impl From<RealizationError> for Failure {
    fn from(e: RealizationError) -> Self {
        match e {
            RealizationError::Numerics(_) | RealizationError::Stabilizer(_) => Self::Solver(e.to_string()),
            RealizationError::Correlation(c) => c.into(),
            _ => Self::Input(e.to_string()),
        }
    }
}

impl From<StabilizerError> for Failure {
    fn from(e: StabilizerError) -> Self {
        match e {
            StabilizerError::ZeroQubits | StabilizerError::TooManyQubits(_) => Self::Input(e.to_string()),
            _ => Self::Solver(e.to_string()),
        }
    }
}

/// Successful command output: payload and whether the verdict was positive.
struct Output {
    text: String,
    positive: bool,
    solver_ok: bool,
}

impl Output {
    fn json(value: &impl Serialize) -> Self {
        Self::verdict(value, true)
    }

    fn verdict(value: &impl Serialize, positive: bool) -> Self {
        let mut text = serde_json::to_string_pretty(value).expect("serializable payload");
        text.push('\n');
        Self {
            text,
            positive,
            solver_ok: true,
        }
    }

    fn status(mut self, status: SdpStatus) -> Self {
        self.solver_ok = status == SdpStatus::Optimal;
        self
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                CommandResult { code, stdout: text, stderr: String::new() }
            } else {
                CommandResult { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match dispatch(&cli) {
        Ok(out) => {
            let code = if !out.solver_ok {
                3
            } else if out.positive {
                0
            } else {
                1
            };
            let stderr = if code == 3 { "solver did not reach the requested tolerance\n".into() } else { String::new() };
            CommandResult { code, stdout: out.text, stderr }
        }
        Err(f) => {
            let code = f.code();
            let (Failure::Input(msg) | Failure::Solver(msg)) = f;
            CommandResult {
                code,
                stdout: String::new(),
                stderr: format!("error: {msg}\n"),
            }
        }
    }
}

fn sdp_options(cli: &Cli) -> SdpOptions {
    let mut o = SdpOptions::default();
    if let Some(t) = cli.tol {
        o.tol = t;
    }
    if let Some(k) = cli.max_iter {
        o.max_iter = k;
    }
    o
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Deserializes with the JSON path of the first offending value in the error.
fn parse_json<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T, Failure> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        Failure::Input(format!("{}: at `{at}`: {}", path.display(), e.into_inner()))
    })
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    parse_json(path, &read_text(path)?)
}

/// A Bell functional or a full-outcome coefficient table.
enum FunctionalInput {
    Bell(BellFunctional),
    Table(GeneralScenario, ReducedFunctional),
}

fn functional_input(cli: &Cli, path: Option<&Path>) -> Result<FunctionalInput, Failure> {
    match (cli.builtin, path) {
        (Some(Builtin::Chsh), None) => Ok(FunctionalInput::Bell(BellFunctional::chsh())),
        (Some(Builtin::ChshPm), None) => Ok(FunctionalInput::Bell(BellFunctional::chsh_pm())),
        (Some(_), Some(_)) => Err(Failure::Input("give either --builtin or a functional file, not both".into())),
        (None, None) => Err(Failure::Input("missing functional file (or --builtin)".into())),
        (None, Some(p)) => {
            let text = read_text(p)?;
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
            if value.get("V").is_some() {
                let (s, f) = ReducedFunctional::from_coefficient_json(&text)
                    .map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
                Ok(FunctionalInput::Table(s, f))
            } else {
                Ok(FunctionalInput::Bell(parse_json(p, &text)?))
            }
        }
    }
}

fn bell_input(cli: &Cli, path: Option<&Path>) -> Result<BellFunctional, Failure> {
    match functional_input(cli, path)? {
        FunctionalInput::Bell(f) => Ok(f),
        FunctionalInput::Table(..) => Err(Failure::Input("this command needs a Bell functional, not a coefficient table".into())),
    }
}

fn dispatch(cli: &Cli) -> Result<Output, Failure> {
    let opts = sdp_options(cli);
    match &cli.command {
        Command::Check { test, outcome } => {
            let x: CorrelationOutcome = read_json(outcome)?;
            match test {
                CheckKind::Nosignalling => {
                    let r = no_signalling_check(&x);
                    Ok(Output::verdict(&r, r.is_satisfied()))
                }
                CheckKind::Bellpolytope => {
                    let m = bell_polytope_membership(&x)?;
                    Ok(Output::verdict(&m, m.is_inside()))
                }
                CheckKind::Elliptope => {
                    let pm = x.in_convention(Convention::PmOne);
                    let v = elliptope_membership(&ElliptopeGraph::bipartite(&pm.joint_rows()), &opts)?;
                    let inside = matches!(v, ElliptopeVerdict::Inside { .. });
                    Ok(Output::verdict(&v, inside))
                }
            }
        }
        Command::ClassicalMax { functional } => {
            let f = bell_input(cli, functional.as_deref())?;
            let c = classical_max(&f)?;
            Ok(Output::json(&json!({
                "value": c.value,
                "assignment": c.assignment,
                "convention": f.convention(),
            })))
        }
        Command::Bound { method, level, functional } => {
            let input = functional_input(cli, functional.as_deref())?;
            match (method, input) {
                (BoundMethod::Npa, input) => {
                    let level: Level = level.parse()?;
                    let b = match input {
                        FunctionalInput::Bell(f) => npa_bound_bell(&f, level, &opts)?,
                        FunctionalInput::Table(s, f) => npa_bound(&s, &f, level, &opts)?,
                    };
                    let status = b.status;
                    Ok(Output::json(&with_method("npa", &b)).status(status))
                }
                (_, FunctionalInput::Table(..)) => {
                    Err(Failure::Input("elliptope bounds need a Bell functional, not a coefficient table".into()))
                }
                (BoundMethod::Elliptope, FunctionalInput::Bell(f)) => {
                    let b = suspension_bound(&f, &opts)?;
                    Ok(Output::json(&with_method("elliptope", &b)).status(b.status))
                }
                (BoundMethod::ElliptopeRmet, FunctionalInput::Bell(f)) => {
                    let b = upper_bound_nc(&f, &opts)?;
                    Ok(Output::json(&with_method("elliptope_rmet", &b)).status(b.status))
                }
            }
        }
        Command::Realize { gram, out } => {
            let g: GramSystem = read_json(gram)?;
            let r = realize(&g)?;
            match out {
                None => Ok(Output::json(&r)),
                Some(path) => {
                    let mut text = serde_json::to_string_pretty(&r).expect("serializable realization");
                    text.push('\n');
                    std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
                    Ok(Output::json(&json!({
                        "nu": r.nu(),
                        "xi": r.xi(),
                        "entropy": r.entropy()?,
                        "out": path.display().to_string(),
                    })))
                }
            }
        }
        Command::Verify { realization, gram } => {
            let r: QuantumRealization = read_json(realization)?;
            let g: GramSystem = read_json(gram)?;
            let deviation = verify(&r, &g)?;
            let tol = cli.tol.unwrap_or(VERIFY_TOL);
            Ok(Output::verdict(
                &json!({ "max_deviation": deviation, "tol": tol }),
                deviation <= tol,
            ))
        }
        Command::Reduce { epsilon, gram } => {
            let g: GramSystem = read_json(gram)?;
            let (reduced, report) = jl_reduce(&g, *epsilon, cli.seed)?;
            Ok(Output::verdict(
                &json!({ "gram": reduced, "report": report }),
                report.target_met,
            ))
        }
        Command::Stabilizer { nu, dump } => {
            let s = pipeline_summary(*nu)?;
            let ok = s.l_symplectic && s.r_invertible && s.signs_z_form == expected_signs(*nu);
            if *dump {
                let mut text = String::new();
                for (name, body) in [("E", &s.e), ("F", &s.f), ("L", &s.l), ("R", &s.r)] {
                    let _ = writeln!(text, "# {name}");
                    text.push_str(body);
                    if !body.ends_with('\n') {
                        text.push('\n');
                    }
                }
                Ok(Output {
                    text,
                    positive: ok,
                    solver_ok: true,
                })
            } else {
                Ok(Output::verdict(&s, ok))
            }
        }
        Command::Table { method, dir } => table(cli, *method, dir, &opts),
    }
}

fn with_method(method: &str, payload: &impl Serialize) -> serde_json::Value {
    let mut v = serde_json::to_value(payload).expect("serializable bound");
    if let serde_json::Value::Object(map) = &mut v {
        map.insert("method".into(), json!(method));
    }
    v
}

#[derive(Serialize)]
struct TableRow {
    name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound_i: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound_ii: Option<f64>,
}

fn table(cli: &Cli, method: Option<TableMethod>, dir: &Path, opts: &SdpOptions) -> Result<Output, Failure> {
    let entries = std::fs::read_dir(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Failure::Input(format!("{}: no .json functionals", dir.display())));
    }
    let (want_i, want_ii) = match method {
        None => (true, true),
        Some(TableMethod::I) => (true, false),
        Some(TableMethod::Ii) => (false, true),
    };
    let mut rows = Vec::with_capacity(files.len());
    let mut solver_ok = true;
    for path in &files {
        let f = bell_input(cli, Some(path))?;
        let mut row = TableRow {
            name: path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
            bound_i: None,
            bound_ii: None,
        };
        if want_i {
            let b = suspension_bound(&f, opts)?;
            solver_ok &= b.status == SdpStatus::Optimal;
            row.bound_i = Some(b.bound);
        }
        if want_ii {
            let b = upper_bound_nc(&f, opts)?;
            solver_ok &= b.status == SdpStatus::Optimal;
            row.bound_ii = Some(b.bound);
        }
        rows.push(row);
    }
    let mut out = Output::json(&json!({ "rows": rows }));
    out.solver_ok = solver_ok;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> CommandResult {
        run(std::iter::once("tsirelson").chain(args.iter().copied()))
    }

    #[test]
    fn builtin_bounds() {
        let r = run_args(&["bound", "--method", "elliptope", "--builtin", "chsh"]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
        assert!((v["bound"].as_f64().unwrap() - (2f64.sqrt() - 1.0)).abs() < 1e-3);
        assert_eq!(v["status"], "optimal");
    }

    #[test]
    fn classical_max_builtin() {
        let r = run_args(&["classical-max", "--builtin", "chsh-pm"]);
        let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
        assert_eq!(v["value"].as_f64(), Some(2.0));
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_args(&["bound", "--method", "nope"]).code, 2);
        assert_eq!(run_args(&["classical-max"]).code, 2);
        assert_eq!(run_args(&["bound", "--method", "npa", "--level", "7", "--builtin", "chsh"]).code, 2);
    }

    #[test]
    fn stabilizer_dump_blocks() {
        let r = run_args(&["stabilizer", "--nu", "1", "--dump"]);
        assert_eq!(r.code, 0);
        assert!(r.stdout.starts_with("# E\n"));
        assert_eq!(r.stdout.matches("# ").count(), 4);
    }
}
