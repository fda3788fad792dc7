use super::Matrix;
use crate::error::{check_len, QveError, Result};

/// Relative accuracy expected from [`linear_solve`] on well-conditioned input.
pub const SOLVE_TOL: f64 = 1e-12;

/// Solves `A x = rhs` by Gaussian elimination with partial (row) pivoting.
///
/// A pivot smaller than `N·ε·‖A‖∞` is treated as singular.
pub fn linear_solve(a: &Matrix, rhs: &[f64]) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(QveError::InvalidInput(format!(
            "linear_solve needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    check_len(n, rhs.len())?;
    if n == 0 {
        return Ok(Vec::new());
    }

    let threshold = n as f64 * f64::EPSILON * a.norm_inf();
    let mut lu = a.clone();
    let mut x = rhs.to_vec();

    for col in 0..n {
        let (piv, piv_abs) = (col..n)
            .map(|r| (r, lu[(r, col)].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_abs <= threshold || !piv_abs.is_finite() {
            return Err(QveError::Singular {
                pivot: piv_abs,
                threshold,
            });
        }
        if piv != col {
            for j in 0..n {
                let tmp = lu[(col, j)];
                lu[(col, j)] = lu[(piv, j)];
                lu[(piv, j)] = tmp;
            }
            x.swap(col, piv);
        }
        let p = lu[(col, col)];
        for r in col + 1..n {
            let f = lu[(r, col)] / p;
            if f == 0.0 {
                continue;
            }
            lu[(r, col)] = 0.0;
            for j in col + 1..n {
                lu[(r, j)] -= f * lu[(col, j)];
            }
            x[r] -= f * x[col];
        }
    }

    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= lu[(i, j)] * x[j];
        }
        x[i] = s / lu[(i, i)];
    }

    if x.iter().any(|v| !v.is_finite()) {
        return Err(QveError::Numeric("non-finite solution of linear system".into()));
    }
    Ok(x)
}

/// `A⁻¹ B`, column by column.
pub(crate) fn solve_matrix(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let cols: Vec<Vec<f64>> = (0..b.cols())
        .map(|j| linear_solve(a, &b.column(j)))
        .collect::<Result<_>>()?;
    Ok(Matrix::from_fn(b.rows(), b.cols(), |i, j| cols[j][i]))
}

#[cfg(test)]
fn residual_ok(a: &Matrix, x: &[f64], rhs: &[f64]) -> bool {
    let ax = a.mul_vec(x);
    let r: Vec<f64> = ax.iter().zip(rhs).map(|(p, q)| p - q).collect();
    super::norm_inf(&r) <= SOLVE_TOL * a.norm_inf() * super::norm_inf(x).max(f64::MIN_POSITIVE)
}
