//! Criticality, reducibility reduction and minimality certificates.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{QveError, Result};
use crate::linalg::{
    block_order, mmatrix_classify, scc_partition, solve_matrix, spectral_radius, MmatrixClass,
    MmatrixVerdict, Matrix,
};
use crate::problem::QveProblem;
use crate::solver::{newton_solve, perron_newton_solve, SolverConfig, SolverKind, SolverReport, Status};
use crate::tensor::BilinearTensor;

/// Half-width of the band around `ρ(R) = 1` classified as critical.
pub const CRIT_TOL: f64 = 1e-9;

/// Residual a candidate must reach before it can be certified.
pub const CERTIFY_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criticality {
    Subcritical,
    Critical,
    Supercritical,
}

impl Criticality {
    pub fn from_rho(rho: f64) -> Self {
        if (rho - 1.0).abs() <= CRIT_TOL {
            Criticality::Critical
        } else if rho < 1.0 {
            Criticality::Subcritical
        } else {
            Criticality::Supercritical
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Criticality::Subcritical => "subcritical",
            Criticality::Critical => "critical",
            Criticality::Supercritical => "supercritical",
        }
    }
}

impl fmt::Display for Criticality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub rho_r: f64,
    pub criticality: Criticality,
    /// Strongly connected components of the pattern of `R`, sources first.
    pub components: Vec<Vec<usize>>,
    pub irreducible: bool,
}

/// Spectral radius of the mean matrix and its block structure.
pub fn classify(p: &QveProblem) -> Result<StructureReport> {
    let r = p.mean_matrix();
    let components = scc_partition(&r.positive_pattern());
    let rho_r = spectral_radius(&r)?;
    Ok(StructureReport {
        rho_r,
        criticality: Criticality::from_rho(rho_r),
        irreducible: components.len() == 1,
        components,
    })
}

/// A problem relabelled so that its mean matrix is block upper triangular,
/// split into a self-contained tail (the last strongly connected component)
/// and a head of everything else.
#[derive(Clone, Debug)]
pub struct ReducedProblem {
    /// `perm[new] = old`.
    pub perm: Vec<usize>,
    /// Number of head states `M`; the tail holds states `M..N`.
    pub head: usize,
    pub permuted: QveProblem,
    /// `x₂ = a₂ + b₂(x₂, x₂)` on the tail states.
    pub tail: QveProblem,
}

pub fn split_reducible(p: &QveProblem) -> Result<ReducedProblem> {
    let parts = scc_partition(&p.mean_matrix().positive_pattern());
    if parts.len() < 2 {
        return Err(QveError::InvalidInput(
            "split_reducible called on a problem with irreducible R".into(),
        ));
    }
    let perm = block_order(&parts);
    let n = p.n();
    let head = n - parts.last().map_or(0, Vec::len);
    let permuted = p.permuted(&perm);
    let tail_idx: Vec<usize> = (head..n).collect();
    let tail = permuted.restrict(&tail_idx)?;
    Ok(ReducedProblem {
        perm,
        head,
        permuted,
        tail,
    })
}

impl ReducedProblem {
    /// Head equation `x₁ = a_y + b_y(x₁, x₁)` for a tail solution `y = x₂`:
    /// `T_y = I − P b(·,Qᵀy) Pᵀ − P b(Qᵀy,·) Pᵀ`, `a_y = T_y⁻¹(a₁ + P b(Qᵀy,Qᵀy))`,
    /// `b_y(u,v) = T_y⁻¹ P b(Pᵀu, Pᵀv)`.
    pub fn head_problem(&self, x2: &[f64]) -> Result<QveProblem> {
        let n = self.permuted.n();
        let m = self.head;
        if m == 0 {
            return Err(QveError::InvalidInput("empty head block".into()));
        }
        if x2.len() != n - m {
            return Err(QveError::DimensionMismatch {
                expected: n - m,
                found: x2.len(),
            });
        }
        let b = self.permuted.b();
        let mut z = vec![0.0; n];
        z[m..].copy_from_slice(x2);
        let head_idx: Vec<usize> = (0..m).collect();

        let t = Matrix::identity(m)
            .sub(&b.left_matrix(&z)?.select(&head_idx, &head_idx))
            .sub(&b.right_matrix(&z)?.select(&head_idx, &head_idx));
        let verdict = mmatrix_classify(&t)?;
        if verdict.class != MmatrixClass::NonsingularM {
            return Err(QveError::Structure(format!(
                "T matrix of the head block is {} (is the minimal solution positive?)",
                verdict.class
            )));
        }

        let bzz = b.eval(&z, &z)?;
        let rhs_a = Matrix::from_fn(m, 1, |i, _| self.permuted.a()[i] + bzz[i]);
        let a_y = solve_matrix(&t, &rhs_a)?;
        // Columns (j,k) of P b(Pᵀ·, Pᵀ·) for head j, k.
        let slab = Matrix::from_fn(m, m * m, |i, c| b.get(i, c / m, c % m));
        let b_y = solve_matrix(&t, &slab)?;

        // T⁻¹ ≥ 0, so negative entries are roundoff.
        let a_y: Vec<f64> = (0..m).map(|i| a_y[(i, 0)].max(0.0)).collect();
        let coeffs: Vec<f64> = (0..m)
            .flat_map(|i| (0..m * m).map(move |c| (i, c)))
            .map(|(i, c)| b_y[(i, c)].max(0.0))
            .collect();
        QveProblem::general(a_y, BilinearTensor::from_dense(m, coeffs)?)
    }

    /// Full solution in the original labelling from head and tail parts.
    pub fn assemble(&self, x1: &[f64], x2: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.perm.len()];
        for (pos, &v) in x1.iter().chain(x2).enumerate() {
            x[self.perm[pos]] = v;
        }
        x
    }
}

/// Solves the head equation for a given tail solution with `inner` and
/// returns the assembled full vector.
pub fn back_substitute(
    reduced: &ReducedProblem,
    x2: &[f64],
    inner: impl FnOnce(&QveProblem) -> Result<Vec<f64>>,
) -> Result<Vec<f64>> {
    let head = reduced.head_problem(x2)?;
    let x1 = inner(&head)?;
    Ok(reduced.assemble(&x1, x2))
}

/// Classifies `F'_x` for a solution `x`. An M-matrix (singular or not)
/// certifies that `x` is the minimal solution; `not_M` that it is not.
pub fn certify_minimal(p: &QveProblem, x: &[f64]) -> Result<MmatrixVerdict> {
    let r = p.residual_norm(x)?;
    if !(r <= CERTIFY_RESIDUAL_TOL) {
        return Err(QveError::InvalidInput(format!(
            "x is not a solution: residual {r:e} exceeds {CERTIFY_RESIDUAL_TOL:e}"
        )));
    }
    mmatrix_classify(&p.jacobian(x)?)
}

/// Solves any problem by recursive reduction: the last strongly connected
/// component is solved first, then the head equation built from it.
/// Irreducible stochastic pieces go to Perron–Newton, other pieces (heads
/// whose rows no longer sum to one) to classical Newton.
pub fn solve_auto(p: &QveProblem, cfg: &SolverConfig) -> Result<SolverReport> {
    cfg.validate()?;
    let mut iterations = 0;
    let x = solve_recursive(p, cfg, &mut iterations)?;
    let mut report = SolverReport::new(SolverKind::Auto, p.n());
    report.iterations = iterations;
    report.residual_history.push(p.residual_norm(&x)?);
    if cfg.record_iterates {
        report.iterates.push(x.clone());
    }
    report.solution = x;
    report.status = Status::Converged;
    report.certify(p);
    Ok(report)
}

fn solve_recursive(p: &QveProblem, cfg: &SolverConfig, iterations: &mut usize) -> Result<Vec<f64>> {
    let parts = scc_partition(&p.mean_matrix().positive_pattern());
    if parts.len() == 1 {
        let report = if p.is_stochastic() {
            perron_newton_solve(p, cfg)?
        } else {
            newton_solve(p, cfg)?
        };
        *iterations += report.iterations;
        if !report.converged() {
            return Err(QveError::NoConvergence(format!(
                "{} stopped with status {} on a block of size {}",
                report.solver,
                report.status,
                p.n()
            )));
        }
        return Ok(report.solution);
    }
    let reduced = split_reducible(p)?;
    let x2 = solve_recursive(&reduced.tail, cfg, iterations)?;
    back_substitute(&reduced, &x2, |head| solve_recursive(head, cfg, iterations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{generate_block_triangular, generate_scalar};
    use crate::linalg::MmatrixClass;
    use crate::tensor::VariantKind;

    #[test]
    fn scalar_classification() {
        let cases = [
            (0.25, 1.5, Criticality::Supercritical),
            (0.5, 1.0, Criticality::Critical),
            (0.6, 0.8, Criticality::Subcritical),
        ];
        for (a, rho, crit) in cases {
            let s = classify(&generate_scalar(a).unwrap()).unwrap();
            assert!((s.rho_r - rho).abs() < 1e-15);
            assert_eq!(s.criticality, crit);
            assert!(s.irreducible);
        }
    }

    #[test]
    fn classification_is_variant_invariant() {
        let p = generate_block_triangular(6, 0.3, 2).unwrap();
        let base = classify(&p).unwrap();
        for kind in VariantKind::ALL {
            let s = classify(&p.with_variant(kind)).unwrap();
            assert_eq!(s.components, base.components);
            assert_eq!(s.criticality, base.criticality);
            assert!((s.rho_r - base.rho_r).abs() <= 1e-12);
        }
    }

    #[test]
    fn scalar_certificates() {
        let p = generate_scalar(0.25).unwrap();
        let v = certify_minimal(&p, &[1.0 / 3.0]).unwrap();
        assert_eq!(v.class, MmatrixClass::NonsingularM);
        assert_eq!(certify_minimal(&p, &[1.0]).unwrap().class, MmatrixClass::NotM);
        assert!(certify_minimal(&p, &[0.5]).is_err());
        let c = generate_scalar(0.5).unwrap();
        assert_eq!(certify_minimal(&c, &[1.0]).unwrap().class, MmatrixClass::SingularM);
    }

    #[test]
    fn split_block_triangular() {
        let p = generate_block_triangular(6, 0.0, 0).unwrap();
        let red = split_reducible(&p).unwrap();
        assert_eq!(red.perm, (0..6).collect::<Vec<_>>());
        assert_eq!(red.head, 3);
        assert!(red.tail.is_stochastic());
        // Restriction agrees with the full tensor on tail vectors.
        let u = [0.3, 0.7, 0.2];
        let mut full = vec![0.0; 6];
        full[3..].copy_from_slice(&u);
        let small = red.tail.b().eval(&u, &u).unwrap();
        let big = p.b().eval(&full, &full).unwrap();
        assert_eq!(&big[3..], small.as_slice());
        assert!(split_reducible(&generate_scalar(0.25).unwrap()).is_err());
    }

    #[test]
    fn reduction_matches_direct_newton() {
        for seed in 0..3 {
            let p = generate_block_triangular(6, 0.0, seed).unwrap();
            let auto = solve_auto(&p, &SolverConfig::default()).unwrap();
            let direct = newton_solve(&p, &SolverConfig::default()).unwrap();
            assert!(direct.converged());
            for (a, b) in auto.solution.iter().zip(&direct.solution) {
                assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
            }
            assert!(auto.minimality.unwrap().class.is_m_matrix());
        }
    }

    #[test]
    fn empty_head_is_rejected() {
        let p = generate_block_triangular(4, 0.0, 1).unwrap();
        let mut red = split_reducible(&p).unwrap();
        red.head = 0;
        assert!(red.head_problem(&[0.5; 4]).is_err());
    }
}
