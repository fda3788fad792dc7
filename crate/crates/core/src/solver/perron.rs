//! Survival-form iterations on `y = e − x`, which solves `y = H_y y` with
//! `H_y = b(·,e) + b(e−y,·)`.

use super::{
    PerronInfo, SolverConfig, SolverKind, SolverReport, Status, DEFAULT_LINEAR_MAX_ITERS,
    DEFAULT_NEWTON_MAX_ITERS,
};
use crate::error::{QveError, Result};
use crate::linalg::{
    dist_inf, dot, linear_solve, norm1, norm_inf, perron_left, perron_right, pseudo_inverse_apply_rank,
    Matrix,
};
use crate::problem::QveProblem;
use crate::structure::{classify, Criticality};

/// Pull-in of the start vector when `H_e = b(·,e)` is reducible.
pub const START_PERTURBATION: f64 = 1e-6;

/// Largest admissible `|ρ(H_y) − 1|` at an accepted limit.
const RHO_H_TOL: f64 = 1e-8;

/// Relative size below which a projection denominator counts as zero.
const DEGENERATE_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct PerronStepTrace {
    /// `ρ(H_y)` at the input point.
    pub lambda: f64,
    pub y_next: Vec<f64>,
    /// `‖y_next − H_{y_next} y_next‖∞`.
    pub residual_norm: f64,
}

/// `H_y = b(·,e) + b(e−y,·)`.
pub fn survival_matrix(p: &QveProblem, y: &[f64]) -> Result<Matrix> {
    let e = p.ones();
    let ey: Vec<f64> = y.iter().map(|v| 1.0 - v).collect();
    Ok(p.b().left_matrix(&e)?.add(&p.b().right_matrix(&ey)?))
}

/// Scales `u` so that the y-residual `y − b(y,e) − b(e,y) + b(y,y)` is
/// orthogonal to `w`. Substituting `y = αu` gives `α c₁ + α² c₂ = 0`.
pub fn normalize_perron(p: &QveProblem, w: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    let b = p.b();
    let e = p.ones();
    let bue = b.eval(u, &e)?;
    let beu = b.eval(&e, u)?;
    let buu = b.eval(u, u)?;
    let lin: Vec<f64> = (0..u.len()).map(|i| bue[i] + beu[i] - u[i]).collect();
    let num = dot(w, &lin);
    let den = dot(w, &buu);
    if !(den > 0.0) {
        return Err(QveError::Normalization(format!("wᵀb(u,u) = {den:e} is not positive")));
    }
    let alpha = num / den;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(QveError::Normalization(format!(
            "scale factor {alpha:e} is not positive (problem not supercritical?)"
        )));
    }
    Ok(u.iter().map(|v| alpha * v).collect())
}

/// `wᵀ(y − b(y,e) − b(e,y) + b(y,y))`.
pub fn orthogonality_residual(p: &QveProblem, w: &[f64], y: &[f64]) -> Result<f64> {
    let b = p.b();
    let e = p.ones();
    let bye = b.eval(y, &e)?;
    let bey = b.eval(&e, y)?;
    let byy = b.eval(y, y)?;
    let r: Vec<f64> = (0..y.len()).map(|i| y[i] - bye[i] - bey[i] + byy[i]).collect();
    Ok(dot(w, &r))
}

/// Everything the Perron map computes at one point.
struct PerronPoint {
    h: Matrix,
    lambda: f64,
    u: Vec<f64>,
}

fn perron_point(p: &QveProblem, w: &[f64], y: &[f64]) -> Result<PerronPoint> {
    let h = survival_matrix(p, y)?;
    let pair = perron_right(&h)?;
    let u = normalize_perron(p, w, &pair.vector)?;
    Ok(PerronPoint {
        h,
        lambda: pair.value,
        u,
    })
}

fn y_residual(p: &QveProblem, y: &[f64]) -> Result<f64> {
    let hy = survival_matrix(p, y)?.mul_vec(y);
    Ok(dist_inf(y, &hy))
}

/// One application of the map `G`: Perron vector of `H_y`, normalized.
pub fn perron_iteration_step(p: &QveProblem, w: &[f64], y: &[f64]) -> Result<PerronStepTrace> {
    let pt = perron_point(p, w, y)?;
    let residual_norm = y_residual(p, &pt.u)?;
    Ok(PerronStepTrace {
        lambda: pt.lambda,
        y_next: pt.u,
        residual_norm,
    })
}

/// Jacobian of `G` at `y`:
/// `(I − uσ₁ᵀ/σ₁ᵀu) (H_y − λI)† (I − uvᵀ/vᵀu) b(·,u)` with `u = G(y)`,
/// `v` the left Perron vector of `H_y` and `σ₁ᵀ = wᵀ(I − b(e−u,·) − b(·,e−u))`.
pub fn perron_jacobian(p: &QveProblem, w: &[f64], y: &[f64]) -> Result<Matrix> {
    let pt = perron_point(p, w, y)?;
    jacobian_at(p, w, &pt)
}

fn jacobian_at(p: &QveProblem, w: &[f64], pt: &PerronPoint) -> Result<Matrix> {
    let n = p.n();
    let b = p.b();
    let u = &pt.u;
    let v = perron_left(&pt.h)?.vector;

    let eu: Vec<f64> = u.iter().map(|ui| 1.0 - ui).collect();
    let sigma_mat = Matrix::identity(n)
        .sub(&b.right_matrix(&eu)?)
        .sub(&b.left_matrix(&eu)?);
    let sigma = sigma_mat.vec_mul(w);
    let su = dot(&sigma, u);
    let vu = dot(&v, u);
    if su.abs() < DEGENERATE_TOL * norm1(&sigma) * norm_inf(u) {
        return Err(QveError::DegenerateProjection(format!("σ₁ᵀu = {su:e}")));
    }
    if vu.abs() < DEGENERATE_TOL * norm1(&v) * norm_inf(u) {
        return Err(QveError::DegenerateProjection(format!("vᵀu = {vu:e}")));
    }

    let bu = b.left_matrix(u)?;
    let vb = bu.vec_mul(&v);
    let projected = Matrix::from_fn(n, n, |i, j| bu[(i, j)] - u[i] * vb[j] / vu);
    // H_y − λI is singular by construction; the computed smallest singular
    // value is pure roundoff and must not be inverted.
    let shifted = pt.h.shifted(-pt.lambda);
    let z = pseudo_inverse_apply_rank(&shifted, &projected, n - 1)?;
    let sz = z.vec_mul(&sigma);
    Ok(Matrix::from_fn(n, n, |i, j| z[(i, j)] - u[i] * sz[j] / su))
}

/// Checks that apply before either Perron method; returns `w` or an early
/// report when `e` is the answer.
fn prepare(p: &QveProblem, kind: SolverKind, cfg: &SolverConfig) -> Result<std::result::Result<Vec<f64>, SolverReport>> {
    cfg.validate()?;
    if !p.is_stochastic() {
        return Err(QveError::InvalidInput(
            "the survival-form methods need a + b(e,e) = e".into(),
        ));
    }
    let s = classify(p)?;
    if !s.irreducible {
        return Err(QveError::Structure(format!(
            "mean matrix is reducible ({} components); use the auto solver",
            s.components.len()
        )));
    }
    if s.criticality != Criticality::Supercritical {
        return Ok(Err(SolverReport::at_ones(
            kind,
            p,
            &format!("{} problem: e is the minimal solution", s.criticality),
        )?));
    }
    Ok(Ok(perron_left(&p.mean_matrix())?.vector))
}

/// Whether an error from the first Perron step calls for the pulled-in start.
fn retry_inside(e: &QveError) -> bool {
    matches!(e, QveError::Irreducibility(_))
}

fn failure(report: &mut SolverReport, e: QveError) -> Result<()> {
    if e.is_convergence_failure() {
        report.status = Status::NumericFailure;
        report.message = Some(e.to_string());
        Ok(())
    } else {
        Err(e)
    }
}

/// Validates a converged survival vector and fills the report.
fn finish(
    p: &QveProblem,
    report: &mut SolverReport,
    mut info: PerronInfo,
    y: Vec<f64>,
) -> Result<()> {
    if report.converged() {
        if y.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(QveError::NoConvergence(format!(
                "limit y leaves [0, e] (min {:e}, max {:e})",
                y.iter().copied().fold(f64::INFINITY, f64::min),
                y.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            )));
        }
        info.rho_h = perron_right(&survival_matrix(p, &y)?)?.value;
        if (info.rho_h - 1.0).abs() > RHO_H_TOL {
            return Err(QveError::NoConvergence(format!(
                "ρ(H_y) = {} at the limit, expected 1",
                info.rho_h
            )));
        }
    }
    report.solution = y.iter().map(|v| 1.0 - v).collect();
    info.y = y;
    report.perron = Some(info);
    report.certify(p);
    Ok(())
}

fn record(p: &QveProblem, cfg: &SolverConfig, report: &mut SolverReport, y: &[f64]) -> Result<()> {
    let x: Vec<f64> = y.iter().map(|v| 1.0 - v).collect();
    report.residual_history.push(p.residual_norm(&x)?);
    if cfg.record_iterates {
        report.iterates.push(x);
    }
    Ok(())
}

/// Fixed-point iteration `y_{k+1} = G(y_k)` from `y₀ = e`, stopped when
/// `‖y_{k+1} − y_k‖∞ ≤ tol`. Problems that are not supercritical return `e`.
pub fn perron_solve(p: &QveProblem, cfg: &SolverConfig) -> Result<SolverReport> {
    let kind = SolverKind::Perron;
    let w = match prepare(p, kind, cfg)? {
        Ok(w) => w,
        Err(report) => return Ok(report),
    };
    let mut report = SolverReport::new(kind, p.n());
    let mut info = PerronInfo {
        w: w.clone(),
        y: Vec::new(),
        rho_h: f64::NAN,
        max_orthogonality: 0.0,
        increments: Vec::new(),
        perturbed_start: false,
    };
    let mut y = p.ones();
    for k in 0..cfg.iteration_limit(DEFAULT_LINEAR_MAX_ITERS) {
        let pt = match perron_point(p, &w, &y) {
            Err(e) if k == 0 && retry_inside(&e) => {
                y = vec![1.0 - START_PERTURBATION; p.n()];
                info.perturbed_start = true;
                perron_point(p, &w, &y)
            }
            other => other,
        };
        let pt = match pt {
            Ok(pt) => pt,
            Err(e) => {
                failure(&mut report, e)?;
                break;
            }
        };
        let inc = dist_inf(&pt.u, &y);
        y = pt.u;
        report.iterations = k + 1;
        info.increments.push(inc);
        info.max_orthogonality = info
            .max_orthogonality
            .max(orthogonality_residual(p, &w, &y)?.abs());
        record(p, cfg, &mut report, &y)?;
        if !inc.is_finite() {
            report.status = Status::NumericFailure;
            break;
        }
        if inc <= cfg.tol {
            report.status = Status::Converged;
            break;
        }
    }
    finish(p, &mut report, info, y)?;
    Ok(report)
}

/// Newton's method on `y − G(y) = 0` with the explicit Jacobian of `G`:
/// `u = G(y)`, stop if `‖y − u‖∞ ≤ tol` (taking `y = u`), otherwise
/// `y ← y − (I − JG_y)⁻¹ (y − u)`.
pub fn perron_newton_solve(p: &QveProblem, cfg: &SolverConfig) -> Result<SolverReport> {
    let kind = SolverKind::PerronNewton;
    let w = match prepare(p, kind, cfg)? {
        Ok(w) => w,
        Err(report) => return Ok(report),
    };
    let n = p.n();
    let mut report = SolverReport::new(kind, n);
    let mut info = PerronInfo {
        w: w.clone(),
        y: Vec::new(),
        rho_h: f64::NAN,
        max_orthogonality: 0.0,
        increments: Vec::new(),
        perturbed_start: false,
    };
    let mut y = p.ones();
    for k in 0..cfg.iteration_limit(DEFAULT_NEWTON_MAX_ITERS) {
        let pt = match perron_point(p, &w, &y) {
            Err(e) if k == 0 && retry_inside(&e) => {
                y = vec![1.0 - START_PERTURBATION; n];
                info.perturbed_start = true;
                perron_point(p, &w, &y)
            }
            other => other,
        };
        let pt = match pt {
            Ok(pt) => pt,
            Err(e) => {
                failure(&mut report, e)?;
                break;
            }
        };
        report.iterations = k + 1;
        info.max_orthogonality = info
            .max_orthogonality
            .max(orthogonality_residual(p, &w, &pt.u)?.abs());
        let diff: Vec<f64> = y.iter().zip(&pt.u).map(|(a, b)| a - b).collect();
        let inc = norm_inf(&diff);
        info.increments.push(inc);
        if !inc.is_finite() {
            report.status = Status::NumericFailure;
            break;
        }
        if inc <= cfg.tol {
            y = pt.u;
            record(p, cfg, &mut report, &y)?;
            report.status = Status::Converged;
            break;
        }
        let step = jacobian_at(p, &w, &pt).and_then(|j| linear_solve(&Matrix::identity(n).sub(&j), &diff));
        match step {
            Ok(step) => y.iter_mut().zip(&step).for_each(|(yi, si)| *yi -= si),
            Err(e) => {
                failure(&mut report, e)?;
                break;
            }
        }
        record(p, cfg, &mut report, &y)?;
    }
    finish(p, &mut report, info, y)?;
    Ok(report)
}
