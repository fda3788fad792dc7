//! Solver comparison grids over generated random instances, written as CSV.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QveError, Result};
use crate::instances::{generate_random_mbt, random_mbt_critical_lambda};
use crate::solver::{solve, SolverConfig, SolverKind};
use crate::tensor::VariantKind;

pub const CSV_HEADER: [&str; 9] = [
    "solver",
    "variant",
    "lambda_frac",
    "n",
    "seed",
    "iterations",
    "residual",
    "wall_time",
    "status",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub solver: String,
    pub variant: String,
    /// `λ / λ_crit`.
    pub lambda_frac: f64,
    pub n: usize,
    pub seed: u64,
    pub iterations: usize,
    /// `‖F(x)‖∞` of the returned vector on the original problem.
    pub residual: f64,
    /// Seconds; 0 when timing is disabled.
    pub wall_time: f64,
    /// A solver status, or `no_convergence` / `error` for failed cells.
    pub status: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchGrid {
    pub n: usize,
    pub seeds: Vec<u64>,
    pub lambda_fracs: Vec<f64>,
    pub solvers: Vec<SolverKind>,
    pub variants: Vec<VariantKind>,
    pub config: SolverConfig,
    /// Record wall-clock times. Without it the output is byte-reproducible.
    pub timing: bool,
}

impl BenchGrid {
    pub fn validate(&self) -> Result<()> {
        let empty = |what: &str| Err(QveError::InvalidInput(format!("empty {what} list")));
        if self.solvers.is_empty() {
            return empty("solver");
        }
        if self.variants.is_empty() {
            return empty("variant");
        }
        if self.seeds.is_empty() {
            return empty("seed");
        }
        if self.lambda_fracs.is_empty() {
            return empty("lambda");
        }
        if let Some(f) = self.lambda_fracs.iter().find(|f| !(**f >= 0.0)) {
            return Err(QveError::InvalidInput(format!("lambda fraction {f} is negative")));
        }
        if self.n == 0 {
            return Err(QveError::InvalidInput("n must be positive".into()));
        }
        self.config.validate()
    }

    /// Cells in output order: seed, then λ fraction, then solver, then variant.
    fn cells(&self) -> Vec<(u64, f64, SolverKind, VariantKind)> {
        let mut cells = Vec::new();
        for &seed in &self.seeds {
            for &frac in &self.lambda_fracs {
                for &solver in &self.solvers {
                    for &variant in &self.variants {
                        cells.push((seed, frac, solver, variant));
                    }
                }
            }
        }
        cells
    }
}

/// Runs every cell (concurrently) and returns rows in grid order. Failing
/// cells are recorded in their row and never abort the grid.
pub fn run_grid(grid: &BenchGrid) -> Result<Vec<BenchRow>> {
    grid.validate()?;
    let crit: Vec<(u64, Result<f64>)> = grid
        .seeds
        .iter()
        .map(|&s| (s, random_mbt_critical_lambda(grid.n, s)))
        .collect();
    let rows = grid
        .cells()
        .into_par_iter()
        .map(|(seed, frac, solver, variant)| {
            let lambda_crit = crit.iter().find(|(s, _)| *s == seed).map(|(_, l)| l);
            run_cell(grid, seed, frac, solver, variant, lambda_crit)
        })
        .collect();
    Ok(rows)
}

fn run_cell(
    grid: &BenchGrid,
    seed: u64,
    frac: f64,
    solver: SolverKind,
    variant: VariantKind,
    lambda_crit: Option<&Result<f64>>,
) -> BenchRow {
    let mut row = BenchRow {
        solver: solver.to_string(),
        variant: variant.to_string(),
        lambda_frac: frac,
        n: grid.n,
        seed,
        iterations: 0,
        residual: f64::NAN,
        wall_time: 0.0,
        status: "error".into(),
    };
    let problem = match lambda_crit {
        Some(Ok(l)) => generate_random_mbt(grid.n, frac * l, seed),
        Some(Err(e)) => Err(QveError::Numeric(e.to_string())),
        None => Err(QveError::InvalidInput("missing seed".into())),
    };
    let Ok(problem) = problem else {
        return row;
    };
    let cfg = grid.config.with_variant(variant);
    let start = Instant::now();
    let outcome = solve(&problem, solver, &cfg);
    if grid.timing {
        row.wall_time = start.elapsed().as_secs_f64();
    }
    match outcome {
        Ok(report) => {
            row.iterations = report.iterations;
            row.residual = problem.residual_norm(&report.solution).unwrap_or(f64::NAN);
            row.status = report.status.to_string();
        }
        Err(e) if e.is_convergence_failure() => row.status = "no_convergence".into(),
        Err(_) => {}
    }
    row
}

/// Writes the fixed header followed by one line per row.
pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let csv_err = |e: csv::Error| QveError::Parse(e.to_string());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<BenchRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| QveError::Parse(e.to_string()))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(QveError::Parse(format!("unexpected CSV header {header:?}")));
    }
    r.deserialize()
        .map(|row| row.map_err(|e| QveError::Parse(e.to_string())))
        .collect()
}
