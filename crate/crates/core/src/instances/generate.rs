use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Prng;
use crate::error::{QveError, Result};
use crate::linalg::{perron_right, Matrix};
use crate::problem::QveProblem;
use crate::tensor::BilinearTensor;

/// Scale of the head→tail coupling coefficients in block triangular instances.
const COUPLING: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Uniform random tensor, rescaled so that `a + b(e,e) = e`.
    RandomMbt,
    /// `N = 1`, `a = λ`, `b = 1 − λ`.
    Scalar,
    /// Two diagonal blocks with a self-contained tail (see
    /// [`generate_block_triangular`]).
    BlockTriangular,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::RandomMbt => "random_mbt",
            Family::Scalar => "scalar",
            Family::BlockTriangular => "block_triangular",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = QveError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random_mbt" => Ok(Family::RandomMbt),
            "scalar" => Ok(Family::Scalar),
            "block_triangular" => Ok(Family::BlockTriangular),
            other => Err(QveError::InvalidInput(format!("unknown instance family '{other}'"))),
        }
    }
}

/// Parameters of a generated instance. The meaning of `lambda` depends on
/// the family: immediate-death inflation for `random_mbt` and for the tail
/// block of `block_triangular`, and the death probability `a` for `scalar`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    pub n: usize,
    pub lambda: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<QveProblem> {
        match self.family {
            Family::RandomMbt => generate_random_mbt(self.n, self.lambda, self.seed),
            Family::Scalar => {
                if self.n != 1 {
                    return Err(QveError::InvalidInput(format!(
                        "scalar family has n = 1, got {}",
                        self.n
                    )));
                }
                generate_scalar(self.lambda)
            }
            Family::BlockTriangular => generate_block_triangular(self.n, self.lambda, self.seed),
        }
    }
}

/// Parses `family,n,lambda,seed`.
impl FromStr for GeneratorSpec {
    type Err = QveError;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [family, n, lambda, seed] = parts.as_slice() else {
            return Err(QveError::InvalidInput(format!(
                "expected 'family,n,lambda,seed', got '{s}'"
            )));
        };
        let bad = |what: &str| QveError::InvalidInput(format!("bad {what} in '{s}'"));
        Ok(GeneratorSpec {
            family: family.parse()?,
            n: n.parse().map_err(|_| bad("n"))?,
            lambda: lambda.parse().map_err(|_| bad("lambda"))?,
            seed: seed.parse().map_err(|_| bad("seed"))?,
        })
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.family, self.n, self.lambda, self.seed)
    }
}

/// Unscaled random tensor: `N³` uniform draws in `(i, j, k)` lexicographic order.
pub fn raw_random_tensor(n: usize, seed: u64) -> Result<BilinearTensor> {
    let mut rng = Prng::new(seed);
    BilinearTensor::from_dense(n, (0..n * n * n).map(|_| rng.next_unit()).collect())
}

/// Random MBT: `s = b₀(e,e)`, `K = max sᵢ + λ`, `a = (Ke − s)/K`, `b = b₀/K`.
pub fn generate_random_mbt(n: usize, lambda: f64, seed: u64) -> Result<QveProblem> {
    if n == 0 {
        return Err(QveError::InvalidInput("n must be at least 1".into()));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(QveError::InvalidInput(format!("lambda must be >= 0, got {lambda}")));
    }
    let b0 = raw_random_tensor(n, seed)?;
    scale_rows(&b0, &vec![lambda; n], &[(0..n).collect()])
}

/// Value of `λ` at which the random MBT for `(n, seed)` is critical.
///
/// Scaling by `K` divides `R` by `K`, so `ρ(R) = ρ(R₀) / (max sᵢ + λ)` and
/// criticality sits at `λ = ρ(R₀) − max sᵢ`. Instances with smaller `λ` are
/// supercritical.
pub fn random_mbt_critical_lambda(n: usize, seed: u64) -> Result<f64> {
    let b0 = raw_random_tensor(n, seed)?;
    let e = vec![1.0; n];
    let r0 = b0.right_matrix(&e)?.add(&b0.left_matrix(&e)?);
    let rho0 = perron_right(&r0)?.value;
    let smax = b0.eval(&e, &e)?.into_iter().fold(0.0, f64::max);
    Ok(rho0 - smax)
}

/// Scalar instance `x = λ + (1 − λ) x²`; its minimal solution is
/// `min(1, λ / (1 − λ))`.
pub fn generate_scalar(lambda: f64) -> Result<QveProblem> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(QveError::InvalidInput(format!(
            "scalar family needs 0 < lambda < 1, got {lambda}"
        )));
    }
    QveProblem::new(vec![lambda], BilinearTensor::from_dense(1, vec![1.0 - lambda])?)
}

/// Instance with a block upper triangular mean matrix.
///
/// The last `⌈n/2⌉` states form the tail: their offspring stay in the tail
/// (`b_{ijk} = 0` for tail `i` unless `j` and `k` are both tail states). Head
/// states split into any pair of states, with head→tail coefficients drawn
/// from `[0.05, 0.15)` so the off-diagonal block of `R` is strictly positive.
/// Each block is rescaled like a random MBT; `lambda` is the death inflation
/// of the tail block, while the head block uses none. Small `lambda` gives a
/// supercritical tail, large `lambda` a subcritical one.
pub fn generate_block_triangular(n: usize, lambda: f64, seed: u64) -> Result<QveProblem> {
    if n < 2 {
        return Err(QveError::InvalidInput(format!(
            "block_triangular needs n >= 2, got {n}"
        )));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(QveError::InvalidInput(format!("lambda must be >= 0, got {lambda}")));
    }
    let head = n / 2;
    let is_tail = |i: usize| i >= head;
    let mut rng = Prng::new(seed);
    let mut coeffs = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = if is_tail(i) {
                    if is_tail(j) && is_tail(k) {
                        rng.next_unit()
                    } else {
                        0.0
                    }
                } else if is_tail(j) || is_tail(k) {
                    COUPLING * (0.5 + rng.next_unit())
                } else {
                    rng.next_unit()
                };
                coeffs.push(v);
            }
        }
    }
    let b0 = BilinearTensor::from_dense(n, coeffs)?;
    let inflation: Vec<f64> = (0..n).map(|i| if is_tail(i) { lambda } else { 0.0 }).collect();
    scale_rows(&b0, &inflation, &[(0..head).collect(), (head..n).collect()])
}

/// Applies the `K = max s + λ` rescaling separately on each row block.
fn scale_rows(b0: &BilinearTensor, inflation: &[f64], blocks: &[Vec<usize>]) -> Result<QveProblem> {
    let n = b0.n();
    let e = vec![1.0; n];
    let s = b0.eval(&e, &e)?;
    let mut a = vec![0.0; n];
    let mut factor = vec![0.0; n];
    for block in blocks {
        let k = block.iter().map(|&i| s[i]).fold(0.0, f64::max) + inflation[block[0]];
        if k <= 0.0 {
            return Err(QveError::InvalidInput("degenerate random block".into()));
        }
        for &i in block {
            a[i] = (k - s[i]) / k;
            factor[i] = k;
        }
    }
    let mut coeffs = b0.coeffs().to_vec();
    for (i, chunk) in coeffs.chunks_mut(n * n).enumerate() {
        chunk.iter_mut().for_each(|v| *v /= factor[i]);
    }
    QveProblem::new(a, BilinearTensor::from_dense(n, coeffs)?)
}

/// Pattern check used by tests and the analyzer: mean matrix lower-left block.
pub fn lower_left_block(r: &Matrix, head: usize) -> Matrix {
    let n = r.rows();
    let tail: Vec<usize> = (head..n).collect();
    let headv: Vec<usize> = (0..head).collect();
    r.select(&tail, &headv)
}
