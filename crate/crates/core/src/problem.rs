use crate::error::{check_len, QveError, Result};
use crate::linalg::{norm_inf, Matrix};
use crate::tensor::{BilinearTensor, VariantKind};

/// Allowed deviation of `a + b(e,e)` from `e` when validating a problem.
pub const STOCHASTIC_TOL: f64 = 1e-8;

/// The quadratic vector equation `x = a + b(x, x)` with `a ≥ 0`, `b ≥ 0`.
///
/// Problems built with [`QveProblem::new`] satisfy `a + b(e,e) = e`, so `e`
/// is a solution and the Perron-based methods apply. Reduced problems that
/// arise from block back-substitution need not have this property; they are
/// built with [`QveProblem::general`] and report `is_stochastic() == false`
/// unless the identity happens to hold.
#[derive(Clone, Debug, PartialEq)]
pub struct QveProblem {
    a: Vec<f64>,
    b: BilinearTensor,
    stochastic: bool,
}

impl QveProblem {
    /// Validated problem with `‖a + b(e,e) − e‖∞ ≤ STOCHASTIC_TOL`.
    pub fn new(a: Vec<f64>, b: BilinearTensor) -> Result<Self> {
        let p = Self::general(a, b)?;
        let deviation = p.stochastic_deviation();
        if deviation > STOCHASTIC_TOL {
            return Err(QveError::NotStochastic {
                deviation,
                tol: STOCHASTIC_TOL,
            });
        }
        Ok(p)
    }

    /// Any nonnegative QVE; `e` need not be a solution.
    pub fn general(a: Vec<f64>, b: BilinearTensor) -> Result<Self> {
        check_len(b.n(), a.len())?;
        if let Some(&bad) = a.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(QveError::InvalidInput(format!(
                "death probability {bad} is not a finite nonnegative number"
            )));
        }
        let mut p = QveProblem {
            a,
            b,
            stochastic: false,
        };
        p.stochastic = p.stochastic_deviation() <= STOCHASTIC_TOL;
        Ok(p)
    }

    /// Rescales an input whose rows do not sum to one, the way random
    /// instances are built: with `K = max_i (a + b(e,e))_i`, the tensor
    /// becomes `b / K` and `a` absorbs the rest, `a = e − b(e,e) / K`.
    pub fn renormalized(a: Vec<f64>, b: BilinearTensor) -> Result<Self> {
        let raw = Self::general(a, b)?;
        let n = raw.n();
        let e = vec![1.0; n];
        let s = raw.b.eval_unchecked(&e, &e);
        let k = raw
            .a
            .iter()
            .zip(&s)
            .map(|(ai, si)| ai + si)
            .fold(0.0, f64::max);
        if k <= 0.0 {
            return Err(QveError::InvalidInput(
                "cannot renormalize a problem with a = 0 and b = 0".into(),
            ));
        }
        let b = raw.b.scaled(1.0 / k)?;
        let a = s.iter().map(|si| ((k - si) / k).max(0.0)).collect();
        Self::new(a, b)
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &BilinearTensor {
        &self.b
    }

    pub fn is_stochastic(&self) -> bool {
        self.stochastic
    }

    pub fn ones(&self) -> Vec<f64> {
        vec![1.0; self.n()]
    }

    /// `‖a + b(e,e) − e‖∞`.
    pub fn stochastic_deviation(&self) -> f64 {
        let e = self.ones();
        let s = self.b.eval_unchecked(&e, &e);
        self.a
            .iter()
            .zip(&s)
            .fold(0.0, |m, (ai, si)| m.max((ai + si - 1.0).abs()))
    }

    /// Mean matrix `R = b(e,·) + b(·,e)`, i.e. `R_{ij} = Σ_k (b_{ijk} + b_{ikj})`.
    pub fn mean_matrix(&self) -> Matrix {
        let e = self.ones();
        self.b
            .right_matrix_unchecked(&e)
            .add(&self.b.left_matrix_unchecked(&e))
    }

    /// `F(x) = x − a − b(x, x)`.
    pub fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n(), x.len())?;
        let bxx = self.b.eval_unchecked(x, x);
        Ok(x.iter()
            .zip(&self.a)
            .zip(&bxx)
            .map(|((xi, ai), qi)| xi - ai - qi)
            .collect())
    }

    pub fn residual_norm(&self, x: &[f64]) -> Result<f64> {
        Ok(norm_inf(&self.residual(x)?))
    }

    /// `F'_x = I − b(x,·) − b(·,x)`.
    pub fn jacobian(&self, x: &[f64]) -> Result<Matrix> {
        check_len(self.n(), x.len())?;
        let n = self.n();
        Ok(Matrix::identity(n)
            .sub(&self.b.right_matrix_unchecked(x))
            .sub(&self.b.left_matrix_unchecked(x)))
    }

    /// Same equation with a different bilinear extension of `b(t, t)`.
    pub fn with_variant(&self, kind: VariantKind) -> Self {
        QveProblem {
            a: self.a.clone(),
            b: self.b.variant(kind),
            stochastic: self.stochastic,
        }
    }

    /// Relabels states: state `i` of the result is state `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        QveProblem {
            a: perm.iter().map(|&i| self.a[i]).collect(),
            b: self.b.permuted(perm),
            stochastic: self.stochastic,
        }
    }

    /// Restriction of `a` and `b` to the index set `idx`.
    pub fn restrict(&self, idx: &[usize]) -> Result<Self> {
        Self::general(idx.iter().map(|&i| self.a[i]).collect(), self.b.restrict(idx))
    }
}
