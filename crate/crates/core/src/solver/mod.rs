//! Solver configuration, reports and the common entry point [`solve`].

mod classical;
mod perron;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use classical::{depth_solve, newton_solve, order_solve, thicknesses_solve};
pub use perron::{
    normalize_perron, orthogonality_residual, perron_iteration_step, perron_jacobian,
    perron_newton_solve, perron_solve, survival_matrix, PerronStepTrace, START_PERTURBATION,
};

use crate::error::{QveError, Result};
use crate::linalg::{mmatrix_classify, MmatrixVerdict};
use crate::problem::QveProblem;
use crate::tensor::VariantKind;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_LINEAR_MAX_ITERS: usize = 10_000;
pub const DEFAULT_NEWTON_MAX_ITERS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Stopping threshold: `‖F(x)‖∞` for the classical methods, the iterate
    /// increment `‖y_{k+1} − y_k‖∞` for the Perron methods.
    pub tol: f64,
    /// `None` picks the per-method default (10000 for linearly convergent
    /// methods, 100 for the Newton-type ones).
    pub max_iters: Option<usize>,
    pub variant: VariantKind,
    /// Keep every iterate `x_k` in the report.
    pub record_iterates: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: DEFAULT_TOL,
            max_iters: None,
            variant: VariantKind::Original,
            record_iterates: false,
        }
    }
}

impl SolverConfig {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = Some(max_iters);
        self
    }

    pub fn with_variant(mut self, variant: VariantKind) -> Self {
        self.variant = variant;
        self
    }

    pub fn recording(mut self) -> Self {
        self.record_iterates = true;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(QveError::InvalidInput(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iters == Some(0) {
            return Err(QveError::InvalidInput("max_iters must be at least 1".into()));
        }
        Ok(())
    }

    pub(crate) fn iteration_limit(&self, default: usize) -> usize {
        self.max_iters.unwrap_or(default)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIters,
    NumericFailure,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIters => "max_iters",
            Status::NumericFailure => "numeric_failure",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolverKind {
    #[serde(rename = "depth")]
    Depth,
    #[serde(rename = "order")]
    Order,
    #[serde(rename = "thicknesses")]
    Thicknesses,
    #[serde(rename = "newton")]
    Newton,
    #[serde(rename = "perron")]
    Perron,
    #[serde(rename = "perron-newton")]
    PerronNewton,
    #[serde(rename = "auto")]
    Auto,
}

impl SolverKind {
    /// The six algorithms, without the `auto` driver.
    pub const METHODS: [SolverKind; 6] = [
        SolverKind::Depth,
        SolverKind::Order,
        SolverKind::Thicknesses,
        SolverKind::Newton,
        SolverKind::Perron,
        SolverKind::PerronNewton,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Depth => "depth",
            SolverKind::Order => "order",
            SolverKind::Thicknesses => "thicknesses",
            SolverKind::Newton => "newton",
            SolverKind::Perron => "perron",
            SolverKind::PerronNewton => "perron-newton",
            SolverKind::Auto => "auto",
        }
    }

    pub fn is_perron(self) -> bool {
        matches!(self, SolverKind::Perron | SolverKind::PerronNewton)
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = QveError;

    fn from_str(s: &str) -> Result<Self> {
        [SolverKind::Auto]
            .into_iter()
            .chain(SolverKind::METHODS)
            .find(|k| k.as_str() == s)
            .ok_or_else(|| QveError::InvalidInput(format!("unknown solver '{s}'")))
    }
}

/// Diagnostics specific to the survival-form iterations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerronInfo {
    /// Normalization vector, the left Perron vector of `R` with `‖w‖₁ = 1`.
    pub w: Vec<f64>,
    /// Final survival vector `y = e − x`.
    pub y: Vec<f64>,
    /// `ρ(H_y)` at the final `y`.
    pub rho_h: f64,
    /// Largest `|wᵀ(y − b(y,e) − b(e,y) + b(y,y))|` over all normalized iterates.
    pub max_orthogonality: f64,
    /// `‖y_{k+1} − y_k‖∞` (Perron) or `‖y_k − G(y_k)‖∞` (Perron–Newton) per step.
    pub increments: Vec<f64>,
    /// Whether the start vector had to be pulled inside `(0, e)`.
    pub perturbed_start: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub solver: SolverKind,
    pub variant: VariantKind,
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// `‖F(x_k)‖∞` after each step.
    pub residual_history: Vec<f64>,
    pub status: Status,
    pub minimality: Option<MmatrixVerdict>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub iterates: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perron: Option<PerronInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl SolverReport {
    pub(crate) fn new(solver: SolverKind, n: usize) -> Self {
        SolverReport {
            solver,
            variant: VariantKind::Original,
            solution: vec![0.0; n],
            iterations: 0,
            residual_history: Vec::new(),
            status: Status::MaxIters,
            minimality: None,
            iterates: Vec::new(),
            perron: None,
            message: None,
        }
    }

    /// Report for the cases where `e` is known to be the minimal solution.
    pub(crate) fn at_ones(solver: SolverKind, p: &QveProblem, message: &str) -> Result<Self> {
        let mut r = SolverReport::new(solver, p.n());
        r.solution = p.ones();
        r.residual_history.push(p.residual_norm(&r.solution)?);
        r.status = Status::Converged;
        r.message = Some(message.to_string());
        r.certify(p);
        Ok(r)
    }

    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.residual_history.last().copied()
    }

    /// Fills `minimality` from the Jacobian at the solution of a converged run.
    pub(crate) fn certify(&mut self, p: &QveProblem) {
        self.minimality = if self.converged() {
            p.jacobian(&self.solution)
                .ok()
                .and_then(|j| mmatrix_classify(&j).ok())
        } else {
            None
        };
    }
}

/// Runs `kind` on `p` with `b` replaced by `cfg.variant`.
pub fn solve(p: &QveProblem, kind: SolverKind, cfg: &SolverConfig) -> Result<SolverReport> {
    cfg.validate()?;
    let q = p.with_variant(cfg.variant);
    let mut report = match kind {
        SolverKind::Depth => depth_solve(&q, cfg),
        SolverKind::Order => order_solve(&q, cfg),
        SolverKind::Thicknesses => thicknesses_solve(&q, cfg),
        SolverKind::Newton => newton_solve(&q, cfg),
        SolverKind::Perron => perron_solve(&q, cfg),
        SolverKind::PerronNewton => perron_newton_solve(&q, cfg),
        SolverKind::Auto => crate::structure::solve_auto(&q, cfg),
    }?;
    report.variant = cfg.variant;
    Ok(report)
}
