//! Depth, order, thicknesses and classical Newton, all started from `x₀ = 0`.

use super::{SolverConfig, SolverKind, SolverReport, Status, DEFAULT_LINEAR_MAX_ITERS, DEFAULT_NEWTON_MAX_ITERS};
use crate::error::{QveError, Result};
use crate::linalg::{linear_solve, norm_inf, Matrix};
use crate::problem::QveProblem;
use crate::structure::{classify, Criticality};
use crate::tensor::{BilinearTensor, VariantKind};

/// `(I − b(·, x_k)) x_{k+1} = a`.
pub fn depth_solve(p: &QveProblem, cfg: &SolverConfig) -> Result<SolverReport> {
    run(p, cfg, SolverKind::Depth, DEFAULT_LINEAR_MAX_ITERS, |_, x| {
        depth_step(p, x)
    })
}

/// `(I − b(x_k, ·)) x_{k+1} = a`.
pub fn order_solve(p: &QveProblem, cfg: &SolverConfig) -> Result<SolverReport> {
    run(p, cfg, SolverKind::Order, DEFAULT_LINEAR_MAX_ITERS, |_, x| {
        order_step(p, x)
    })
}

/// Depth and order steps alternately, depth first. Each half step counts as
/// one iteration.
pub fn thicknesses_solve(p: &QveProblem, cfg: &SolverConfig) -> Result<SolverReport> {
    run(p, cfg, SolverKind::Thicknesses, DEFAULT_LINEAR_MAX_ITERS, |k, x| {
        if k % 2 == 0 {
            depth_step(p, x)
        } else {
            order_step(p, x)
        }
    })
}

/// `(I − b(x_k,·) − b(·,x_k)) x_{k+1} = a − b(x_k, x_k)`.
///
/// Both terms only depend on the quadratic form, so they are assembled from
/// the symmetrized tensor: the iterates are then the same, bit for bit,
/// whichever bilinear extension `p` carries.
pub fn newton_solve(p: &QveProblem, cfg: &SolverConfig) -> Result<SolverReport> {
    let sym = p.b().variant(VariantKind::Symmetrize);
    let n = p.n();
    run(p, cfg, SolverKind::Newton, DEFAULT_NEWTON_MAX_ITERS, |_, x| {
        let jac = Matrix::identity(n).sub(&sym.left_matrix_unchecked(x).scale(2.0));
        let bxx = sym.eval_unchecked(x, x);
        let rhs: Vec<f64> = p.a().iter().zip(&bxx).map(|(a, q)| a - q).collect();
        linear_solve(&jac, &rhs)
    })
}

fn depth_step(p: &QveProblem, x: &[f64]) -> Result<Vec<f64>> {
    let n = p.n();
    linear_solve(&Matrix::identity(n).sub(&p.b().left_matrix_unchecked(x)), p.a())
}

fn order_step(p: &QveProblem, x: &[f64]) -> Result<Vec<f64>> {
    let n = p.n();
    linear_solve(&Matrix::identity(n).sub(&p.b().right_matrix_unchecked(x)), p.a())
}

/// `‖x − a − b(x,x)‖∞` through the symmetrized tensor, so that the stopping
/// decision does not depend on the bilinear extension either.
fn sym_residual(p: &QveProblem, sym: &BilinearTensor, x: &[f64]) -> f64 {
    let q = sym.eval_unchecked(x, x);
    let r: Vec<f64> = x
        .iter()
        .zip(p.a())
        .zip(&q)
        .map(|((xi, ai), qi)| xi - ai - qi)
        .collect();
    norm_inf(&r)
}

fn run(
    p: &QveProblem,
    cfg: &SolverConfig,
    kind: SolverKind,
    default_max: usize,
    mut step: impl FnMut(usize, &[f64]) -> Result<Vec<f64>>,
) -> Result<SolverReport> {
    cfg.validate()?;
    // At exact criticality all four iterations converge sublinearly to `e`
    // and cannot reach a small residual; the answer is known.
    if p.is_stochastic() && classify(p)?.criticality == Criticality::Critical {
        return SolverReport::at_ones(kind, p, "critical problem: e is the minimal solution");
    }

    let sym = p.b().variant(VariantKind::Symmetrize);
    let mut report = SolverReport::new(kind, p.n());
    let mut x = vec![0.0; p.n()];
    for k in 0..cfg.iteration_limit(default_max) {
        match step(k, &x) {
            Ok(next) => x = next,
            Err(e @ (QveError::Singular { .. } | QveError::Numeric(_))) => {
                report.status = Status::NumericFailure;
                report.message = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        }
        report.iterations = k + 1;
        let r = sym_residual(p, &sym, &x);
        report.residual_history.push(r);
        if cfg.record_iterates {
            report.iterates.push(x.clone());
        }
        if !r.is_finite() {
            report.status = Status::NumericFailure;
            report.message = Some("non-finite iterate".into());
            break;
        }
        if r <= cfg.tol {
            report.status = Status::Converged;
            break;
        }
    }
    report.solution = x;
    report.certify(p);
    Ok(report)
}
