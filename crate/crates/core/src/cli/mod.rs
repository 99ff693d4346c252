//! Problem documents, the built-in example registry, command dispatch and
//! machine-readable reports for the `torifano` binary.
//!
//! Verdicts (including `NotExists` and `Obstructed`) are report payload.
//! Exit codes only signal operational failure: 1 usage, 2 invalid input,
//! 3 a requested solve that did not converge.

mod builtins;
mod document;
mod report;

pub use builtins::{builtin_example, c_star, fourfold_rhs, hexagon_row, registry_listing, FOURFOLD_NORMALS, REGISTRY};
pub use document::{
    load_problem, parse_problem, Convention, GridSpec, Offsets, Options, Problem, ProblemDocument, Rat, RawHalfspace,
};
pub use report::{to_json, FixedDigits, Report, Tolerances};

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use num_traits::Zero;
use serde_json::{json, Value};

use crate::ma::{self, MaOptions, MaProblem, Outcome};
use crate::moments;
use crate::rational::{self, QVec, Q};
use crate::stability::{
    self, coupled_ke_verdict, destabilizer, df_invariant, lifted_config, soliton_residual, solve_soliton,
    sum_barycenter, validate_decomposition, Decomposition, Geometry, KeVerdict, SolitonOptions, StabilityError,
};
use crate::toric::validate_fan;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

/// Iteration cap for the soliton Newton solve.
pub const SOLITON_MAX_ITER: usize = 100;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) | CliError::Output(_) => EXIT_INPUT,
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Validate,
    Barycenter,
    KeVerdict,
    SolitonCheck,
    SolitonSolve,
    Df,
    Lift,
    MaSolve,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Barycenter => "barycenter",
            Command::KeVerdict => "ke-verdict",
            Command::SolitonCheck => "soliton-check",
            Command::SolitonSolve => "soliton-solve",
            Command::Df => "df",
            Command::Lift => "lift",
            Command::MaSolve => "ma-solve",
        }
    }
}

fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let mut grid = GridSpec::default();
    for part in s.split(',') {
        let (key, value) = part.split_once('=').ok_or_else(|| format!("expected key=value, got {part:?}"))?;
        let value: f64 = value.trim().parse().map_err(|e| format!("{key}: {e}"))?;
        match key.trim() {
            "R" | "r" | "radius" => grid.radius = value,
            "h" | "step" => grid.step = value,
            other => return Err(format!("unknown grid key {other:?}")),
        }
    }
    Ok(grid)
}

#[derive(Debug, Parser)]
#[command(name = "torifano", version, about = "Coupled Kähler–Einstein and soliton criteria for toric Fano manifolds")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// Problem document (JSON).
    #[arg(long, conflicts_with = "example", required_unless_present = "example")]
    pub input: Option<PathBuf>,
    /// Built-in problem, optionally parameterized as name:param.
    #[arg(long)]
    pub example: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Monge–Ampère grid, e.g. R=8,h=0.004.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<GridSpec>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub t_schedule: Option<Vec<f64>>,
    /// Vector field for df and lift, comma-separated rationals.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub v: Option<Vec<String>>,
    /// Cap C of the lifted polytope.
    #[arg(long, allow_hyphen_values = true)]
    pub cap: Option<String>,
    /// Decomposition row used as the base of lift.
    #[arg(long, default_value_t = 0)]
    pub row: usize,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// ma-solve: write one JSON record per value of t here.
    #[arg(long)]
    pub snapshots: Option<PathBuf>,
}

/// Settings that come from the command line rather than the document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub grid: Option<GridSpec>,
    pub t_schedule: Option<Vec<f64>>,
    pub v: Option<QVec>,
    pub cap: Option<Q>,
    pub row: usize,
    pub snapshots: Option<PathBuf>,
}

impl Overrides {
    fn apply(&self, doc: &mut ProblemDocument) {
        let o = &mut doc.options;
        if let Some(t) = self.tol {
            o.tol = t;
        }
        if let Some(g) = &self.grid {
            o.grid = g.clone();
        }
        if let Some(s) = &self.t_schedule {
            o.t_schedule = s.clone();
        }
        if let Some(v) = &self.v {
            o.v = Some(v.iter().cloned().map(Rat).collect());
        }
        if let Some(c) = &self.cap {
            o.cap = Some(Rat(c.clone()));
        }
    }
}

/// A finished command: the report and the exit code it implies.
#[derive(Debug, Clone)]
pub struct Run {
    pub report: Report,
    pub exit_code: i32,
}

fn build_decomposition(p: &Problem) -> Result<Decomposition, CliError> {
    if let Geometry::Fan(fan) = &p.geometry {
        let report = validate_fan(fan).map_err(input)?;
        if !(report.smooth && report.complete) {
            return Err(CliError::Input(format!("fan is not smooth and complete: {:?}", report.witnesses)));
        }
    }
    let d = Decomposition::new(p.geometry.clone(), p.rows.clone()).map_err(|e| match e {
        StabilityError::Invalid(r) => CliError::Input(format!("invalid decomposition: {}", to_json(&*r))),
        other => input(other),
    })?;
    Ok(d.with_float_mode(p.options.float_mode))
}

fn qvec_json(v: &[Q]) -> Value {
    Value::Array(v.iter().map(|x| Value::String(x.to_string())).collect())
}

fn fields(p: &Problem, n: usize) -> Vec<Vec<f64>> {
    p.vector_fields.clone().unwrap_or_else(|| vec![vec![0.0; n]; p.rows.len()])
}

/// Dispatches one command on a document.
pub fn run(command: Command, doc: &ProblemDocument, overrides: &Overrides) -> Result<Run, CliError> {
    let start = Instant::now();
    let mut doc = doc.clone();
    overrides.apply(&mut doc);
    let problem = Problem::from_document(&doc)?;
    let o = &problem.options;
    let tolerances = Tolerances {
        tol: o.tol,
        grid: o.grid.clone(),
        t_schedule: o.t_schedule.clone(),
        relaxation: o.relaxation,
        max_iter: o.max_iter,
        soliton_max_iter: SOLITON_MAX_ITER,
    };
    let mut exit_code = EXIT_OK;
    let mut diagnostics = json!({});
    let result = match command {
        Command::Validate => validate(&problem)?,
        Command::Barycenter => barycenter(&problem)?,
        Command::KeVerdict => {
            let d = build_decomposition(&problem)?;
            let sum = sum_barycenter(&d);
            let verdict = coupled_ke_verdict(&d, o.tol);
            let witness = match &verdict {
                KeVerdict::NotExists { destabilizer } => {
                    serde_json::to_value(df_invariant(&d, destabilizer).map_err(input)?).expect("serializes")
                }
                KeVerdict::Exists => Value::Null,
            };
            json!({
                "verdict": serde_json::to_value(&verdict).expect("serializes"),
                "sum_barycenter": qvec_json(&sum),
                "sum_barycenter_f64": rational::vec_to_f64(&sum),
                "sup_norm": stability::sup_norm(&sum),
                "float_mode": d.float_mode(),
                "destabilizer_df": witness,
            })
        }
        Command::SolitonCheck => {
            let d = build_decomposition(&problem)?;
            let vs = fields(&problem, d.dim());
            let residual = soliton_residual(&d, &vs).map_err(input)?;
            let per: Vec<Value> = d
                .meshes()
                .iter()
                .zip(&vs)
                .map(|(m, v)| moments::moment_report(m, v).map(|r| serde_json::to_value(r).expect("serializes")))
                .collect::<Result<_, _>>()
                .map_err(input)?;
            json!({
                "vector_fields": vs,
                "residual": residual,
                "residual_norm": residual.iter().map(|x| x * x).sum::<f64>().sqrt(),
                "moments": per,
            })
        }
        Command::SolitonSolve => {
            let d = build_decomposition(&problem)?;
            let opts = SolitonOptions { tol: o.tol, max_iter: SOLITON_MAX_ITER, start: None };
            match solve_soliton(&d, &opts) {
                Ok(s) => json!({"converged": true, "solution": serde_json::to_value(&s).expect("serializes")}),
                Err(StabilityError::NonConvergence(best)) => {
                    exit_code = EXIT_NONCONVERGENCE;
                    json!({"converged": false, "best_iterate": serde_json::to_value(&*best).expect("serializes")})
                }
                Err(e) => return Err(input(e)),
            }
        }
        Command::Df => {
            let d = build_decomposition(&problem)?;
            let (v, source) = match &o.v {
                Some(v) => (v.iter().map(|r| r.0.clone()).collect::<QVec>(), "given"),
                None => match destabilizer(&d) {
                    Some(v) => (v, "destabilizer"),
                    None => (vec![Q::zero(); d.dim()], "zero"),
                },
            };
            diagnostics = json!({ "v_source": source });
            serde_json::to_value(df_invariant(&d, &v).map_err(input)?).expect("serializes")
        }
        Command::Lift => {
            let d = build_decomposition(&problem)?;
            let row = overrides.row;
            let base = d
                .polytopes()
                .get(row)
                .ok_or_else(|| CliError::Usage(format!("--row {row} out of range (k = {})", d.k())))?;
            let v: QVec =
                o.v.as_ref()
                    .ok_or_else(|| CliError::Usage("lift needs a vector field (--v)".into()))?
                    .iter()
                    .map(|r| r.0.clone())
                    .collect();
            let cap = match &o.cap {
                Some(c) => c.0.clone(),
                None => {
                    let floor = base.vertices().iter().map(|p| -rational::dot(&v, p)).max().expect("vertices");
                    diagnostics = json!({ "cap_source": "max(-<v,p>) + 1" });
                    floor + rational::int(1)
                }
            };
            let lifted = lifted_config(base, &v, cap).map_err(input)?;
            let mut value = serde_json::to_value(&lifted).expect("serializes");
            value["row"] = json!(row);
            value["lifted_vertices"] = json!(lifted.lifted.vertices().len());
            value
        }
        Command::MaSolve => ma_solve(&problem, overrides)?,
    };
    let report = Report {
        command: command.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        problem: doc,
        ingestion: problem.ingestion.clone(),
        tolerances,
        result,
        diagnostics,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok(Run { report, exit_code })
}

fn validate(p: &Problem) -> Result<Value, CliError> {
    let fan = match &p.geometry {
        Geometry::Fan(f) => {
            let r = validate_fan(f).map_err(input)?;
            let witnesses: Vec<String> = r.witnesses.iter().map(|w| format!("{w:?}")).collect();
            if !(r.smooth && r.complete) {
                return Ok(json!({
                    "fan": {"complete": r.complete, "smooth": r.smooth, "fano": r.fano, "witnesses": witnesses},
                }));
            }
            json!({"complete": r.complete, "smooth": r.smooth, "fano": r.fano, "witnesses": witnesses})
        }
        Geometry::Halfspaces { .. } => Value::Null,
    };
    let decomposition = validate_decomposition(&p.geometry, &p.rows).map_err(input)?;
    let polytopes: Vec<Value> = p
        .rows
        .iter()
        .map(|r| match p.geometry.polytope(r) {
            Ok(poly) => json!({
                "vertices": poly.vertices().iter().map(|v| qvec_json(v)).collect::<Vec<_>>(),
                "redundant": poly.redundant(),
            }),
            Err(e) => json!({ "error": e.to_string() }),
        })
        .collect();
    Ok(json!({
        "fan": fan,
        "decomposition": serde_json::to_value(&decomposition).expect("serializes"),
        "polytopes": polytopes,
    }))
}

fn barycenter(p: &Problem) -> Result<Value, CliError> {
    let d = build_decomposition(p)?;
    let polytopes: Vec<Value> = d
        .polytopes()
        .iter()
        .zip(d.meshes())
        .map(|(poly, mesh)| {
            json!({
                "volume": moments::volume(mesh).to_string(),
                "barycenter": qvec_json(&moments::barycenter(mesh)),
                "vertices": poly.vertices().len(),
                "redundant_halfspaces": poly.num_redundant(),
                "simplices": mesh.len(),
            })
        })
        .collect();
    let sum = sum_barycenter(&d);
    Ok(json!({ "polytopes": polytopes, "sum_barycenter": qvec_json(&sum) }))
}

fn ma_solve(p: &Problem, overrides: &Overrides) -> Result<Value, CliError> {
    let d = build_decomposition(p)?;
    if d.dim() != 1 {
        return Err(CliError::Input(format!("ma-solve needs a one-dimensional problem, got dimension {}", d.dim())));
    }
    let intervals: Vec<(f64, f64)> = d
        .polytopes()
        .iter()
        .map(|poly| {
            let xs: Vec<f64> = poly.vertices().iter().map(|v| rational::to_f64(&v[0])).collect();
            (xs.iter().cloned().fold(f64::INFINITY, f64::min), xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
        })
        .collect();
    let vs: Vec<f64> = fields(p, 1).iter().map(|v| v[0]).collect();
    let o = &p.options;
    let grid = ma::Grid::new(o.grid.radius, o.grid.step).map_err(input)?;
    let problem = MaProblem::new(intervals, vs, grid).map_err(input)?;
    let opts = MaOptions {
        t_schedule: o.t_schedule.clone(),
        tol: o.tol,
        max_iter: o.max_iter,
        relaxation: o.relaxation,
        ..MaOptions::default()
    };
    let mut sink = match &overrides.snapshots {
        Some(path) => Some(std::io::BufWriter::new(std::fs::File::create(path)?)),
        None => None,
    };
    let mut write_error = None;
    let mut record = |s: &ma::Snapshot<'_>| {
        if let Some(w) = sink.as_mut() {
            if let Err(e) = writeln!(w, "{}", to_json(s)) {
                write_error.get_or_insert(e);
            }
        }
    };
    let outcome = ma::solve_continuity_1d(problem, &opts, Some(&mut record)).map_err(input)?;
    if let Some(mut w) = sink {
        w.flush()?;
    }
    if let Some(e) = write_error {
        return Err(e.into());
    }
    Ok(match outcome {
        Outcome::Converged(state) => {
            let w = ma::w_diagnostics(&state);
            let center = state.grid().center();
            json!({
                "outcome": "converged",
                "t": state.t,
                "mass": state.mass,
                "m": w.m,
                "x_w": w.x_w,
                "growth_eps": w.growth_eps,
                "update_norm": state.update_norm,
                "f_at_zero": state.f.iter().map(|f| f[center]).collect::<Vec<_>>(),
                "obstruction_residual": ma::obstruction_residual(&state),
                "closed_form_residual": state.problem.closed_form_residual(),
            })
        }
        Outcome::Obstructed(ob) => {
            let mut v = serde_json::to_value(&*ob).expect("serializes");
            v["outcome"] = json!("obstructed");
            v
        }
    })
}

fn parse_rationals(values: &[String]) -> Result<QVec, CliError> {
    values.iter().map(|s| rational::parse(s.trim()).map_err(|e| CliError::Usage(format!("--v: {e}")))).collect()
}

/// Parses arguments, runs the command and writes the report; returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("torifano: {e}");
            e.exit_code()
        }
    }
}

fn execute(args: &Args) -> Result<i32, CliError> {
    let doc = match (&args.input, &args.example) {
        (Some(path), _) => load_problem(path)?,
        (None, Some(name)) => builtin_example(name)?,
        (None, None) => return Err(CliError::Usage("one of --input or --example is required".into())),
    };
    let overrides = Overrides {
        tol: args.tol,
        grid: args.grid.clone(),
        t_schedule: args.t_schedule.clone(),
        v: args.v.as_deref().map(parse_rationals).transpose()?,
        cap: args
            .cap
            .as_deref()
            .map(|c| rational::parse(c).map_err(|e| CliError::Usage(format!("--cap: {e}"))))
            .transpose()?,
        row: args.row,
        snapshots: args.snapshots.clone(),
    };
    let run = run(args.command, &doc, &overrides)?;
    let text = run.report.to_json();
    match &args.out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}").and_then(|_| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(run.exit_code)
}
