//! Bilinear forms `b : ℝᴺ × ℝᴺ → ℝᴺ` stored as dense `N³` coefficient arrays.
//!
//! Coordinates follow `b_{ijk} = e_iᵀ b(e_j, e_k)`, so that
//! `(b(x, y))_i = Σ_{j,k} b_{ijk} x_j y_k`. All indices are 0-based.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, QveError, Result};
use crate::linalg::Matrix;

#[derive(Clone, Debug, PartialEq)]
pub struct BilinearTensor {
    n: usize,
    coeffs: Vec<f64>,
}

impl BilinearTensor {
    pub fn zeros(n: usize) -> Self {
        BilinearTensor {
            n,
            coeffs: vec![0.0; n * n * n],
        }
    }

    /// Builds a tensor from dense coefficients in `(i, j, k)` lexicographic order.
    pub fn from_dense(n: usize, coeffs: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(QveError::InvalidInput("dimension must be positive".into()));
        }
        check_len(n * n * n, coeffs.len())?;
        if let Some(&bad) = coeffs.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(QveError::InvalidInput(format!(
                "bilinear coefficient {bad} is not a finite nonnegative number"
            )));
        }
        Ok(BilinearTensor { n, coeffs })
    }

    /// Builds a tensor from `(i, j, k, value)` triples; absent entries are zero.
    /// Repeated index triples are rejected.
    pub fn from_triples(n: usize, triples: &[(usize, usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(QveError::InvalidInput("dimension must be positive".into()));
        }
        let mut coeffs = vec![0.0; n * n * n];
        let mut seen = vec![false; n * n * n];
        for &(i, j, k, v) in triples {
            if i >= n || j >= n || k >= n {
                return Err(QveError::InvalidInput(format!(
                    "index ({i}, {j}, {k}) out of range for N = {n}"
                )));
            }
            let at = (i * n + j) * n + k;
            if seen[at] {
                return Err(QveError::InvalidInput(format!(
                    "duplicate entry for index ({i}, {j}, {k})"
                )));
            }
            seen[at] = true;
            coeffs[at] = v;
        }
        Self::from_dense(n, coeffs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.coeffs[(i * self.n + j) * self.n + k]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Nonzero entries as `(i, j, k, value)` in lexicographic order.
    pub fn nonzero_triples(&self) -> Vec<(usize, usize, usize, f64)> {
        let n = self.n;
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = self.get(i, j, k);
                    if v != 0.0 {
                        out.push((i, j, k, v));
                    }
                }
            }
        }
        out
    }

    /// `b(x, y)`.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, x.len())?;
        check_len(self.n, y.len())?;
        Ok(self.eval_unchecked(x, y))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let slab = &self.coeffs[i * n * n..(i + 1) * n * n];
                let mut acc = 0.0;
                for (j, &xj) in x.iter().enumerate() {
                    let row = &slab[j * n..(j + 1) * n];
                    let inner: f64 = row.iter().zip(y).map(|(b, yk)| b * yk).sum();
                    acc += xj * inner;
                }
                acc
            })
            .collect()
    }

    /// Matrix of `b(·, y)`: `M_{ij} = Σ_k b_{ijk} y_k`, so `M x = b(x, y)`.
    pub fn left_matrix(&self, y: &[f64]) -> Result<Matrix> {
        check_len(self.n, y.len())?;
        Ok(self.left_matrix_unchecked(y))
    }

    pub(crate) fn left_matrix_unchecked(&self, y: &[f64]) -> Matrix {
        let n = self.n;
        Matrix::from_fn(n, n, |i, j| {
            let mut s = 0.0;
            for (k, &yk) in y.iter().enumerate() {
                s += self.get(i, j, k) * yk;
            }
            s
        })
    }

    /// Matrix of `b(x, ·)`: `M_{ik} = Σ_j b_{ijk} x_j`, so `M y = b(x, y)`.
    pub fn right_matrix(&self, x: &[f64]) -> Result<Matrix> {
        check_len(self.n, x.len())?;
        Ok(self.right_matrix_unchecked(x))
    }

    pub(crate) fn right_matrix_unchecked(&self, x: &[f64]) -> Matrix {
        let n = self.n;
        // Summation runs over the contracted index in ascending order, exactly
        // like `left_matrix`, so `right_matrix(b, x)` and
        // `left_matrix(bᵀ, x)` agree bit for bit.
        Matrix::from_fn(n, n, |i, k| {
            let mut s = 0.0;
            for (j, &xj) in x.iter().enumerate() {
                s += self.get(i, j, k) * xj;
            }
            s
        })
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_dense(self.n, self.coeffs.iter().map(|v| v * factor).collect())
    }

    /// Tensor with `b_{ijk}` replaced by `f(i, j, k)`.
    fn map_indexed(&self, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let n = self.n;
        let mut coeffs = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    coeffs.push(f(i, j, k));
                }
            }
        }
        BilinearTensor { n, coeffs }
    }

    /// A different bilinear extension of the same quadratic form `b(t, t)`.
    pub fn variant(&self, kind: VariantKind) -> Self {
        match kind {
            VariantKind::Original => self.clone(),
            VariantKind::Transpose => self.map_indexed(|i, j, k| self.get(i, k, j)),
            VariantKind::Symmetrize => {
                self.map_indexed(|i, j, k| (self.get(i, j, k) + self.get(i, k, j)) / 2.0)
            }
            VariantKind::Desym1 => self.map_indexed(|i, j, k| match j.cmp(&k) {
                std::cmp::Ordering::Less => self.get(i, j, k) + self.get(i, k, j),
                std::cmp::Ordering::Equal => self.get(i, j, k),
                std::cmp::Ordering::Greater => 0.0,
            }),
            VariantKind::Desym2 => self.map_indexed(|i, j, k| match j.cmp(&k) {
                std::cmp::Ordering::Greater => self.get(i, j, k) + self.get(i, k, j),
                std::cmp::Ordering::Equal => self.get(i, j, k),
                std::cmp::Ordering::Less => 0.0,
            }),
        }
    }

    /// Restriction to the index set `idx` in both the output and the two
    /// argument slots, relabelled `0..idx.len()`.
    pub fn restrict(&self, idx: &[usize]) -> Self {
        let m = idx.len();
        let mut coeffs = Vec::with_capacity(m * m * m);
        for &i in idx {
            for &j in idx {
                for &k in idx {
                    coeffs.push(self.get(i, j, k));
                }
            }
        }
        BilinearTensor { n: m, coeffs }
    }

    /// Symmetric relabelling: entry `(i, j, k)` of the result is entry
    /// `(perm[i], perm[j], perm[k])` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n);
        self.restrict(perm)
    }
}

/// The bilinear extensions of a quadratic form that leave `b(t, t)` unchanged.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantKind {
    #[default]
    Original,
    /// `bᵀ(s, t) = b(t, s)`.
    Transpose,
    /// `(b + bᵀ) / 2`.
    Symmetrize,
    /// Each pair `b_{ijk}, b_{ikj}` lumped onto `j < k`.
    Desym1,
    /// Each pair lumped onto `j > k`.
    Desym2,
}

impl VariantKind {
    pub const ALL: [VariantKind; 5] = [
        VariantKind::Original,
        VariantKind::Transpose,
        VariantKind::Symmetrize,
        VariantKind::Desym1,
        VariantKind::Desym2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VariantKind::Original => "original",
            VariantKind::Transpose => "transpose",
            VariantKind::Symmetrize => "symmetrize",
            VariantKind::Desym1 => "desym1",
            VariantKind::Desym2 => "desym2",
        }
    }
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VariantKind {
    type Err = QveError;

    fn from_str(s: &str) -> Result<Self> {
        VariantKind::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| QveError::InvalidInput(format!("unknown bilinear variant '{s}'")))
    }
}
