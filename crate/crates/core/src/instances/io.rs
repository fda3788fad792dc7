//! Problem and report files.
//!
//! A problem file is a JSON document
//!
//! ```json
//! { "n": 2, "a": [0.5, 0.25], "b": [[0, 0, 1, 0.5], [1, 1, 1, 0.75]], "meta": {} }
//! ```
//!
//! with 0-based `[i, j, k, value]` entries for the nonzero coefficients of
//! `b` and an optional free-form `meta` field. Floats are written in the
//! shortest form that parses back to the same `f64`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{QveError, Result};
use crate::problem::QveProblem;
use crate::solver::SolverReport;
use crate::tensor::BilinearTensor;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    n: usize,
    a: Vec<f64>,
    b: Vec<(usize, usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<Value>,
}

pub fn problem_to_json(p: &QveProblem, meta: Option<Value>) -> Result<String> {
    let file = ProblemFile {
        n: p.n(),
        a: p.a().to_vec(),
        b: p.b().nonzero_triples(),
        meta,
    };
    let mut s = serde_json::to_string_pretty(&file).map_err(|e| QveError::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Parses a problem document. Without `renormalize`, inputs whose rows do
/// not sum to one (within the stochastic tolerance) are rejected.
pub fn problem_from_json(text: &str, renormalize: bool) -> Result<QveProblem> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| QveError::Parse(e.to_string()))?;
    if file.n == 0 {
        return Err(QveError::Parse("n must be positive".into()));
    }
    if file.a.len() != file.n {
        return Err(QveError::Parse(format!(
            "field a has {} entries, expected n = {}",
            file.a.len(),
            file.n
        )));
    }
    let b = BilinearTensor::from_triples(file.n, &file.b)?;
    if renormalize {
        QveProblem::renormalized(file.a, b)
    } else {
        QveProblem::new(file.a, b)
    }
}

pub fn save_problem(path: impl AsRef<Path>, p: &QveProblem, meta: Option<Value>) -> Result<()> {
    fs::write(path, problem_to_json(p, meta)?)?;
    Ok(())
}

pub fn load_problem(path: impl AsRef<Path>, renormalize: bool) -> Result<QveProblem> {
    problem_from_json(&fs::read_to_string(path)?, renormalize)
}

pub fn report_to_json(report: &SolverReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| QveError::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn save_report(path: impl AsRef<Path>, report: &SolverReport) -> Result<()> {
    fs::write(path, report_to_json(report)?)?;
    Ok(())
}

pub fn load_report(path: impl AsRef<Path>) -> Result<SolverReport> {
    serde_json::from_str(&fs::read_to_string(path)?).map_err(|e| QveError::Parse(e.to_string()))
}
