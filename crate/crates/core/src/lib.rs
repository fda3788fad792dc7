//! Minimal nonnegative solutions of the quadratic vector equation
//! `x = a + b(x, x)`, the extinction probabilities of a Markovian binary tree.
//!
//! Six solvers are provided: the classical depth, order, thicknesses and
//! Newton iterations, and the survival-form Perron iteration with its Newton
//! variant. [`structure`] classifies problems, reduces reducible ones and
//! certifies minimality; [`mc`] gives a solver-free Monte Carlo check.
//!
//! ```
//! use qve_core::{generate_scalar, solve, SolverConfig, SolverKind};
//!
//! let p = generate_scalar(0.25).unwrap();
//! let r = solve(&p, SolverKind::PerronNewton, &SolverConfig::default()).unwrap();
//! assert!((r.solution[0] - 1.0 / 3.0).abs() < 1e-12);
//! ```

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod error;
pub mod instances;
pub mod linalg;
pub mod mc;
pub mod problem;
pub mod solver;
pub mod structure;
pub mod tensor;

pub use error::{QveError, Result};
pub use instances::{
    generate_block_triangular, generate_random_mbt, generate_scalar, load_problem, load_report,
    random_mbt_critical_lambda, save_problem, save_report, Family, GeneratorSpec, Prng,
};
pub use linalg::{Matrix, MmatrixClass, MmatrixVerdict};
pub use mc::{estimate_extinction, McConfig, McEstimate};
pub use problem::{QveProblem, STOCHASTIC_TOL};
pub use solver::{solve, PerronInfo, SolverConfig, SolverKind, SolverReport, Status};
pub use structure::{
    back_substitute, certify_minimal, classify, solve_auto, split_reducible, Criticality,
    ReducedProblem, StructureReport,
};
pub use tensor::{BilinearTensor, VariantKind};
