//! `qve`: solve, benchmark, validate and analyze quadratic vector equations.
//!
//! Exit codes: 0 success, 1 input error, 2 no convergence, 3 validation failure.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qve_core::bench::{run_grid, write_csv, BenchGrid};
use qve_core::instances::{problem_to_json, report_to_json};
use qve_core::{
    certify_minimal, classify, estimate_extinction, load_problem, solve, Family, GeneratorSpec,
    McConfig, QveError, QveProblem, SolverConfig, SolverKind, SolverReport, VariantKind,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "qve", version, about = "Extinction probabilities of Markovian binary trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem and write a JSON report.
    Solve(SolveArgs),
    /// Run a solver grid over random instances and print CSV.
    Bench(BenchArgs),
    /// Compare the solution with Monte Carlo extinction estimates.
    Validate(ValidateArgs),
    /// Report ρ(R), criticality and block structure.
    Analyze(AnalyzeArgs),
    /// Write a generated problem file.
    Generate(GenerateArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Problem file (JSON).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Generator spec `family,n,lambda,seed`, e.g. `scalar,1,0.25,0`.
    #[arg(long)]
    generate: Option<GeneratorSpec>,
}

#[derive(Args)]
struct InputArgs {
    #[command(flatten)]
    source: Source,
    /// Rescale an input whose rows do not sum to one instead of rejecting it.
    #[arg(long)]
    renormalize: bool,
}

impl InputArgs {
    fn load(&self) -> Result<QveProblem, QveError> {
        match (&self.source.input, &self.source.generate) {
            (Some(path), _) => load_problem(path, self.renormalize),
            (None, Some(spec)) => spec.generate(),
            (None, None) => Err(QveError::InvalidInput("no problem given".into())),
        }
    }
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
}

impl ConfigArgs {
    fn config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::default();
        if let Some(tol) = self.tol {
            cfg = cfg.with_tol(tol);
        }
        if let Some(m) = self.max_iters {
            cfg = cfg.with_max_iters(m);
        }
        cfg
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    /// depth, order, thicknesses, newton, perron, perron-newton or auto.
    #[arg(long, default_value = "auto")]
    solver: SolverKind,
    /// original, transpose, symmetrize, desym1 or desym2.
    #[arg(long, default_value = "original")]
    variant: VariantKind,
    #[command(flatten)]
    config: ConfigArgs,
    /// Report file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "random_mbt")]
    family: Family,
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    /// Fractions of the per-seed critical λ.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.9,0.99,0.999")]
    lambda_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "newton,perron")]
    solvers: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "original")]
    variants: Vec<String>,
    #[command(flatten)]
    config: ConfigArgs,
    /// Write 0 in the wall_time column so output is byte-reproducible.
    #[arg(long)]
    no_timing: bool,
    /// CSV file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 10_000)]
    max_population: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Truncation allowance added to the 3σ band.
    #[arg(long, default_value_t = 0.005)]
    allowance: f64,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Solution report (or bare JSON array) to certify.
    #[arg(long)]
    solution: Option<PathBuf>,
    /// Also write the analysis as JSON.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Generator spec `family,n,lambda,seed`.
    #[arg(long)]
    spec: GeneratorSpec,
    /// Problem file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

enum Failure {
    Input(String),
    NoConvergence(String),
    Validation(String),
}

impl From<QveError> for Failure {
    fn from(e: QveError) -> Self {
        if e.is_convergence_failure() {
            Failure::NoConvergence(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn emit(text: &str, output: Option<&PathBuf>) -> io::Result<()> {
    match output {
        Some(path) => fs::write(path, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn cmd_solve(args: &SolveArgs) -> CmdResult {
    let p = args.input.load()?;
    let cfg = args.config.config().with_variant(args.variant);
    let report = solve(&p, args.solver, &cfg)?;
    emit(&report_to_json(&report)?, args.output.as_ref())?;
    if report.converged() {
        Ok(())
    } else {
        Err(Failure::NoConvergence(format!(
            "{} stopped with status {} after {} iterations",
            report.solver, report.status, report.iterations
        )))
    }
}

fn cmd_bench(args: &BenchArgs) -> CmdResult {
    if args.family != Family::RandomMbt {
        return Err(Failure::Input(format!(
            "bench supports only the random_mbt family, got {}",
            args.family
        )));
    }
    let parse_list = |items: &[String]| -> Vec<String> {
        items.iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
    };
    let solvers = parse_list(&args.solvers)
        .iter()
        .map(|s| s.parse())
        .collect::<Result<Vec<SolverKind>, _>>()?;
    let variants = parse_list(&args.variants)
        .iter()
        .map(|s| s.parse())
        .collect::<Result<Vec<VariantKind>, _>>()?;
    let grid = BenchGrid {
        n: args.n,
        seeds: args.seeds.clone(),
        lambda_fracs: args.lambda_grid.clone(),
        solvers,
        variants,
        config: args.config.config(),
        timing: !args.no_timing,
    };
    let rows = run_grid(&grid)?;
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf)?;
    emit(&String::from_utf8_lossy(&buf), args.output.as_ref())?;
    Ok(())
}

fn cmd_validate(args: &ValidateArgs) -> CmdResult {
    if !(args.allowance >= 0.0) {
        return Err(Failure::Input(format!("allowance must be >= 0, got {}", args.allowance)));
    }
    let p = args.input.load()?;
    let report = solve(&p, SolverKind::Auto, &SolverConfig::default())?;
    let mut out = io::stdout().lock();
    writeln!(out, "state,x,estimate,stderr,band,result")?;
    let mut failed = Vec::new();
    for (state, &x) in report.solution.iter().enumerate() {
        let cfg = McConfig {
            trials: args.trials,
            max_population: args.max_population,
            seed: args.seed,
            start_state: state,
        };
        let est = estimate_extinction(&p, &cfg)?;
        // An all-or-nothing outcome has zero sample variance; fall back to
        // the largest binomial standard error so tiny runs stay inconclusive.
        let sigma = if est.extinct == 0 || est.extinct == est.trials {
            0.5 / (est.trials as f64).sqrt()
        } else {
            est.stderr
        };
        let band = 3.0 * sigma + args.allowance;
        let pass = (est.estimate - x).abs() <= band;
        if !pass {
            failed.push(state);
        }
        writeln!(
            out,
            "{state},{x:.12},{:.6},{:.6},{band:.6},{}",
            est.estimate,
            est.stderr,
            if pass { "pass" } else { "fail" }
        )?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Validation(format!("states {failed:?} outside the band")))
    }
}

fn load_solution(path: &PathBuf) -> Result<Vec<f64>, Failure> {
    let text = fs::read_to_string(path)?;
    if let Ok(report) = serde_json::from_str::<SolverReport>(&text) {
        return Ok(report.solution);
    }
    serde_json::from_str::<Vec<f64>>(&text)
        .map_err(|e| Failure::Input(format!("{}: not a report or vector: {e}", path.display())))
}

fn cmd_analyze(args: &AnalyzeArgs) -> CmdResult {
    let p = args.input.load()?;
    let s = classify(&p)?;
    let mut out = io::stdout().lock();
    let shape = if s.irreducible {
        "irreducible".to_string()
    } else {
        format!("reducible ({} components)", s.components.len())
    };
    writeln!(out, "{}, rho={}, {shape}", s.criticality, s.rho_r)?;
    for (i, c) in s.components.iter().enumerate() {
        writeln!(out, "component {i}: {c:?}")?;
    }
    let verdict = match &args.solution {
        Some(path) => {
            let x = load_solution(path)?;
            let v = certify_minimal(&p, &x).map_err(|e| Failure::Input(e.to_string()))?;
            writeln!(out, "minimality: {}", v.class.as_str())?;
            Some(v)
        }
        None => None,
    };
    if let Some(path) = &args.output {
        let doc = json!({ "structure": s, "minimality": verdict });
        let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Input(e.to_string()))?;
        text.push('\n');
        fs::write(path, text)?;
    }
    Ok(())
}

fn cmd_generate(args: &GenerateArgs) -> CmdResult {
    let p = args.spec.generate()?;
    let meta = json!({ "generator": args.spec.to_string() });
    emit(&problem_to_json(&p, Some(meta))?, args.output.as_ref())?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Generate(a) => cmd_generate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::NoConvergence(msg)) => {
            eprintln!("no convergence: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("validation failed: {msg}");
            ExitCode::from(3)
        }
    }
}
