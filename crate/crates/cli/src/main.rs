//! `moxp`: extreme points of multi-objective (mixed-integer) linear programs.
//!
//! Exit codes: 0 success, 1 bad input (parse error, invalid problem, bad
//! option), 2 infeasible, 3 no ideal point, 4 limit reached (partial result
//! written), 5 solver failure, 6 `check` found a mismatch.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use moxp_core::bench::{self, Caps, Family, GenSpec};
use moxp_core::dualbenson::{IterationAction, SolveEvent};
use moxp_core::linalg::max_abs_diff;
use moxp_core::oracle::branch::BranchOptions;
use moxp_core::parser::{self, Format};
use moxp_core::vertexenum::GeomTolerances;
use moxp_core::{
    solve_problem_observed, BallOracle, BuiltinOracle, EpsilonScale, OracleError, Problem, SolveError,
    SolverConfig, WeightedSumOracle,
};

use output::{artifact, write_oracle_stats, RunLog, SolFile};

const EXIT_INPUT: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_NO_IDEAL: u8 = 3;
const EXIT_LIMIT: u8 = 4;
const EXIT_SOLVER: u8 = 5;
const EXIT_MISMATCH: u8 = 6;

#[derive(Parser)]
#[command(name = "moxp", version, about = "Non-dominated extreme points of multi-objective linear programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and write `<prefix>_sol`, `<prefix>_log`, `<prefix>_oracle`.
    Solve(SolveArgs),
    /// Write a random instance.
    Gen(GenArgs),
    /// Compare the solver against brute-force enumeration on a small instance.
    Check(CheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Auto,
    Lp,
    Mps,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Relative,
    Absolute,
}

#[derive(clap::Args)]
struct SolveArgs {
    input: PathBuf,
    /// Output prefix.
    #[arg(short, long)]
    output: String,
    #[arg(long, value_enum, default_value = "auto")]
    format: FormatArg,
    /// Skip cuts whose ray is shorter than this (0 = exact).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    eps: f64,
    #[arg(long, value_enum, default_value = "relative")]
    eps_scale: ScaleArg,
    /// Do not rescale objectives to comparable ranges.
    #[arg(long)]
    no_normalize: bool,
    /// Weighted-sum oracle: `builtin` (LP/MILP) or `ball` (linear objectives over a Euclidean ball).
    #[arg(long, default_value = "builtin")]
    oracle: String,
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
    /// Branch-and-bound node limit per oracle call.
    #[arg(long, default_value_t = 1_000_000)]
    node_limit: usize,
    /// Write the final H- and V-representation of the dual approximation here.
    #[arg(long)]
    dump_dual: Option<PathBuf>,
    #[arg(short, long)]
    verbose: bool,
}

#[derive(clap::Args)]
struct GenArgs {
    /// `moilp_general` or `momilp_mixed`.
    family: Family,
    #[arg(short = 'd', long, default_value_t = 3)]
    objectives: usize,
    #[arg(short = 'n', long, default_value_t = 10)]
    variables: usize,
    /// Constraint count (default n/2 + 1).
    #[arg(short = 'm', long)]
    constraints: Option<usize>,
    #[arg(long, default_value_t = 10)]
    upper: i64,
    #[arg(long, default_value_t = 0.5)]
    integer_ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; the extension picks the format unless `--format` is given.
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    format: FormatArg,
}

#[derive(clap::Args)]
struct CheckArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    format: FormatArg,
    /// Coordinate tolerance for set equality.
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let code = match cli.command {
        Command::Solve(a) => solve(&a),
        Command::Gen(a) => generate(&a),
        Command::Check(a) => check(&a),
    };
    ExitCode::from(code)
}

fn resolve_format(arg: FormatArg, path: &Path, text: &str) -> Format {
    match arg {
        FormatArg::Lp => Format::Lp,
        FormatArg::Mps => Format::Mps,
        FormatArg::Auto => path
            .to_str()
            .and_then(Format::from_extension)
            .unwrap_or_else(|| Format::sniff(text)),
    }
}

fn load(path: &Path, fmt: FormatArg) -> Result<(Problem, Format), String> {
    let bytes = fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let text = String::from_utf8_lossy(&bytes);
    let format = resolve_format(fmt, path, &text);
    parser::parse_bytes(&bytes, Some(format))
        .map(|p| (p, format))
        .map_err(|e| e.with_file(path.display().to_string()).to_string())
}

/// Tolerance overrides from the environment; see the README for the list.
fn env_tolerance(name: &str, default: f64) -> Result<f64, String> {
    match std::env::var(name) {
        Ok(v) => match v.trim().parse::<f64>() {
            Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
            _ => Err(format!("{name} must be a positive number, got `{v}`")),
        },
        Err(_) => Ok(default),
    }
}

fn build_config(a: &SolveArgs) -> Result<(SolverConfig, BranchOptions), String> {
    let defaults = SolverConfig::default();
    let mut branch = BranchOptions {
        node_limit: a.node_limit,
        ..BranchOptions::default()
    };
    branch.tol_int = env_tolerance("MOXP_TOL_INT", branch.tol_int)?;
    branch.simplex.feas_tol = env_tolerance("MOXP_TOL_LP_FEAS", branch.simplex.feas_tol)?;
    let cfg = SolverConfig {
        epsilon: a.eps,
        epsilon_scale: match a.eps_scale {
            ScaleArg::Relative => EpsilonScale::Relative,
            ScaleArg::Absolute => EpsilonScale::Absolute,
        },
        tol_confirm: env_tolerance("MOXP_TOL_CONFIRM", defaults.tol_confirm)?,
        geometry: GeomTolerances {
            geom: env_tolerance("MOXP_TOL_GEOM", defaults.geometry.geom)?,
            merge: env_tolerance("MOXP_TOL_MERGE", defaults.geometry.merge)?,
        },
        max_iterations: a.max_iter,
        normalize: !a.no_normalize,
    };
    if !(cfg.epsilon >= 0.0) || !cfg.epsilon.is_finite() {
        return Err(format!("--eps must be a finite number >= 0, got {}", cfg.epsilon));
    }
    if a.output.is_empty() {
        return Err("output prefix must not be empty".into());
    }
    Ok((cfg, branch))
}

fn make_oracle(name: &str, branch: BranchOptions) -> Result<Box<dyn WeightedSumOracle>, String> {
    match name {
        "builtin" => Ok(Box::new(BuiltinOracle::new(branch))),
        "ball" => Ok(Box::new(BallOracle::new())),
        other => Err(format!("unknown oracle `{other}` (available: builtin, ball)")),
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

fn solve(a: &SolveArgs) -> u8 {
    let mut log = RunLog::new(a.verbose);
    let log_path = artifact(&a.output, "log");
    let fail = |log: &mut RunLog, code: u8, msg: &str| {
        log.line("error", msg);
        eprintln!("error: {msg}");
        if let Err(e) = log.write(&log_path) {
            eprintln!("error: cannot write {}: {e}", log_path.display());
        }
        code
    };

    let (cfg, branch) = match build_config(a) {
        Ok(c) => c,
        Err(e) => return fail(&mut log, EXIT_INPUT, &e),
    };
    let oracle = match make_oracle(&a.oracle, branch) {
        Ok(o) => o,
        Err(e) => return fail(&mut log, EXIT_INPUT, &e),
    };

    let started = Instant::now();
    let (p, format) = match load(&a.input, a.format) {
        Ok(r) => r,
        Err(e) => return fail(&mut log, EXIT_INPUT, &e),
    };
    log.line(
        "parse",
        format!(
            "read {} as {format}: d={} n={} m={} integer={}",
            a.input.display(),
            p.num_objectives(),
            p.num_variables(),
            p.constraints.len(),
            p.num_integer()
        ),
    );

    let mut observer = |e: &SolveEvent| match e {
        SolveEvent::Preprocessed { ideal, multipliers } => {
            log.line(
                "preprocess",
                format!("ideal point {} multipliers {}", fmt_vec(ideal), fmt_vec(multipliers)),
            );
        }
        SolveEvent::Initialized { y } => log.line("init", format!("first outcome {}", fmt_vec(y))),
        SolveEvent::Iteration {
            iteration,
            vertex,
            ray_length,
            action,
        } => {
            let what = match action {
                IterationAction::Confirmed => "confirmed".to_string(),
                IterationAction::Suppressed => "within epsilon".to_string(),
                IterationAction::Cut { new_vertices } => format!("cut, {new_vertices} new vertices"),
                IterationAction::Skipped(why) => format!("skipped: {why}"),
            };
            log.line(
                "iterate",
                format!("#{iteration} vertex {} ray {ray_length:.6e} {what}", fmt_vec(vertex)),
            );
        }
        SolveEvent::Finished { vertices, facets } => {
            log.line("finish", format!("{vertices} dual vertices, {facets} facets"))
        }
    };
    let result = solve_problem_observed(&p, &cfg, oracle.as_ref(), &mut observer);

    let oracle_path = artifact(&a.output, "oracle");
    if let Err(e) = write_oracle_stats(&oracle_path, oracle.name(), &oracle.stats()) {
        eprintln!("error: cannot write {}: {e}", oracle_path.display());
    }
    let sol_path = artifact(&a.output, "sol");
    let normalized = cfg.normalize;
    let code = match result {
        Ok(sol) => {
            if let Some(path) = &a.dump_dual {
                if let Err(e) = fs::write(path, sol.set.polyhedron.dump()) {
                    return fail(&mut log, EXIT_INPUT, &format!("cannot write {}: {e}", path.display()));
                }
            }
            let file = SolFile::new(&p, &a.input, oracle.name(), cfg.epsilon, normalized, &sol);
            if let Err(e) = file.write(&sol_path) {
                return fail(&mut log, EXIT_INPUT, &format!("cannot write {}: {e}", sol_path.display()));
            }
            log.line(
                "terminate",
                format!(
                    "{} (exact={}): {} extreme points, {} oracle calls, {:.3}s",
                    sol.termination.as_str(),
                    sol.exact(),
                    sol.points.len(),
                    sol.oracle_calls,
                    started.elapsed().as_secs_f64()
                ),
            );
            if sol.termination == moxp_core::Termination::Complete {
                0
            } else {
                EXIT_LIMIT
            }
        }
        Err(err) => {
            let code = match &err {
                SolveError::InvalidProblem(_) | SolveError::Oracle(OracleError::UnsupportedProblem(_)) => EXIT_INPUT,
                SolveError::Infeasible => EXIT_INFEASIBLE,
                SolveError::NoIdealPoint { .. } => EXIT_NO_IDEAL,
                SolveError::LimitReached { .. } => {
                    let file = SolFile::aborted(&p, &a.input, oracle.name(), cfg.epsilon, normalized, "node_limit");
                    if let Err(e) = file.write(&sol_path) {
                        eprintln!("error: cannot write {}: {e}", sol_path.display());
                    }
                    EXIT_LIMIT
                }
                _ => EXIT_SOLVER,
            };
            return fail(&mut log, code, &err.to_string());
        }
    };
    if let Err(e) = log.write(&log_path) {
        eprintln!("error: cannot write {}: {e}", log_path.display());
        return EXIT_INPUT;
    }
    code
}

fn generate(a: &GenArgs) -> u8 {
    let mut spec = GenSpec::new(a.family, a.objectives, a.variables, a.seed);
    if let Some(m) = a.constraints {
        spec.m = m;
    }
    spec.upper = a.upper;
    spec.integer_ratio = a.integer_ratio;
    let p = match bench::generate(&spec) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let format = match a.format {
        FormatArg::Lp => Format::Lp,
        FormatArg::Mps => Format::Mps,
        FormatArg::Auto => a.output.to_str().and_then(Format::from_extension).unwrap_or(Format::Lp),
    };
    let text = match parser::serialize_problem(&p, format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    if let Err(e) = fs::write(&a.output, text) {
        eprintln!("error: cannot write {}: {e}", a.output.display());
        return EXIT_INPUT;
    }
    println!("{}", a.output.display());
    0
}

fn check(a: &CheckArgs) -> u8 {
    let p = match load(&a.input, a.format) {
        Ok((p, _)) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let truth = match bench::brute_force_extreme_points(&p, Caps::default()) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let sol = match moxp_core::solve_problem(&p, &SolverConfig::default(), &BuiltinOracle::default()) {
        Ok(s) => s,
        Err(SolveError::Infeasible) if truth.infeasible => {
            println!("PASS {}: infeasible", a.input.display());
            return 0;
        }
        Err(e) => {
            println!("FAIL {}: solver error: {e}", a.input.display());
            return EXIT_MISMATCH;
        }
    };
    let got: Vec<&[f64]> = sol.points.iter().map(|r| r.y.as_slice()).collect();
    let want: Vec<&[f64]> = truth.points.iter().map(|o| o.y.as_slice()).collect();
    let covered = |xs: &[&[f64]], ys: &[&[f64]]| xs.iter().all(|x| ys.iter().any(|y| max_abs_diff(x, y) <= a.tol));
    if got.len() == want.len() && covered(&got, &want) && covered(&want, &got) {
        println!("PASS {}: {} extreme points", a.input.display(), got.len());
        0
    } else {
        println!(
            "FAIL {}: solver found {} points, brute force {}",
            a.input.display(),
            got.len(),
            want.len()
        );
        EXIT_MISMATCH
    }
}
