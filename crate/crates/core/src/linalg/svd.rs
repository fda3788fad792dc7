use super::Matrix;
use crate::error::{QveError, Result};

const MAX_SWEEPS: usize = 100;

/// Thin SVD `A = U Σ Vᵀ` of an `m × n` matrix (`m ≥ n`), computed with
/// one-sided Jacobi rotations. Singular values are sorted descending.
#[derive(Clone, Debug)]
pub struct Svd {
    u: Matrix,
    sigma: Vec<f64>,
    v: Matrix,
}

impl Svd {
    pub fn new(a: &Matrix) -> Result<Svd> {
        let (m, n) = (a.rows(), a.cols());
        if m < n {
            return Err(QveError::InvalidInput(format!(
                "Jacobi SVD needs rows >= cols, got {m}x{n}"
            )));
        }
        // column-major working copies
        let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
        let mut vcols: Vec<Vec<f64>> = (0..n)
            .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();

        // Pairs already orthogonal to working precision, or involving a
        // column that is numerically zero, are left alone; rotating against
        // rounding noise in a null column never settles.
        let tol = m as f64 * f64::EPSILON;
        let frob2: f64 = cols.iter().flatten().map(|x| x * x).sum();
        let negligible = f64::EPSILON * f64::EPSILON * frob2;
        let mut converged = n < 2;
        for _ in 0..MAX_SWEEPS {
            if converged {
                break;
            }
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let (alpha, beta, gamma) = gram(&cols[p], &cols[q]);
                    if alpha <= negligible
                        || beta <= negligible
                        || gamma.abs() <= tol * (alpha * beta).sqrt()
                    {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    rotate(&mut cols, p, q, c, s);
                    rotate(&mut vcols, p, q, c, s);
                }
            }
            converged = !rotated;
        }
        if !converged {
            return Err(QveError::Numeric(format!(
                "Jacobi SVD did not converge in {MAX_SWEEPS} sweeps"
            )));
        }

        let norms: Vec<f64> = cols.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
        if norms.iter().any(|s| !s.is_finite()) {
            return Err(QveError::Numeric("non-finite singular value".into()));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

        let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
        let u = Matrix::from_fn(m, n, |i, k| {
            let j = order[k];
            if norms[j] > 0.0 {
                cols[j][i] / norms[j]
            } else {
                0.0
            }
        });
        let v = Matrix::from_fn(n, n, |i, k| vcols[order[k]][i]);
        Ok(Svd { u, sigma, v })
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.sigma
    }

    pub fn u(&self) -> &Matrix {
        &self.u
    }

    pub fn v(&self) -> &Matrix {
        &self.v
    }

    /// `A† X` using the leading `rank` singular triplets.
    pub fn pinv_apply(&self, x: &Matrix, rank: usize) -> Matrix {
        assert_eq!(x.rows(), self.u.rows(), "pinv_apply dimension mismatch");
        let n = self.v.rows();
        let mut out = Matrix::zeros(n, x.cols());
        for k in 0..rank.min(self.sigma.len()) {
            let s = self.sigma[k];
            if s <= 0.0 {
                break;
            }
            // coefficient row: u_kᵀ X / σ_k
            let coeff: Vec<f64> = (0..x.cols())
                .map(|c| (0..x.rows()).map(|i| self.u[(i, k)] * x[(i, c)]).sum::<f64>() / s)
                .collect();
            for i in 0..n {
                let vik = self.v[(i, k)];
                for (c, &w) in coeff.iter().enumerate() {
                    out[(i, c)] += vik * w;
                }
            }
        }
        out
    }

    /// Number of singular values above `rel_tol · σ_max`.
    pub fn numerical_rank(&self, rel_tol: f64) -> usize {
        let smax = self.sigma.first().copied().unwrap_or(0.0);
        self.sigma.iter().filter(|&&s| s > rel_tol * smax).count()
    }
}

fn gram(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let mut a = 0.0;
    let mut b = 0.0;
    let mut g = 0.0;
    for (&p, &q) in x.iter().zip(y) {
        a += p * p;
        b += q * q;
        g += p * q;
    }
    (a, b, g)
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// `M† X`, truncating singular values `σ ≤ N·ε·σ_max`.
pub fn pseudo_inverse_apply(m: &Matrix, x: &Matrix) -> Result<Matrix> {
    check_square(m, x)?;
    let svd = Svd::new(m)?;
    let rank = svd.numerical_rank(m.rows() as f64 * f64::EPSILON);
    Ok(svd.pinv_apply(x, rank))
}

/// `M† X` for an `M` known to have rank at most `rank`: only the `rank`
/// largest singular values are inverted (and none at or below the
/// `N·ε·σ_max` floor).
pub fn pseudo_inverse_apply_rank(m: &Matrix, x: &Matrix, rank: usize) -> Result<Matrix> {
    check_square(m, x)?;
    let svd = Svd::new(m)?;
    let rank = rank.min(svd.numerical_rank(m.rows() as f64 * f64::EPSILON));
    Ok(svd.pinv_apply(x, rank))
}

fn check_square(m: &Matrix, x: &Matrix) -> Result<()> {
    if !m.is_square() || x.rows() != m.rows() {
        return Err(QveError::InvalidInput(format!(
            "pseudo-inverse of {}x{} applied to {}x{}",
            m.rows(),
            m.cols(),
            x.rows(),
            x.cols()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::linear_solve;
    use proptest::prelude::*;

    fn max_diff(a: &Matrix, b: &Matrix) -> f64 {
        a.sub(b).max_abs()
    }

    #[test]
    fn nonsingular_matches_solve() {
        let m = Matrix::from_rows(&[
            vec![4.0, 1.0, 0.0],
            vec![1.0, 3.0, -1.0],
            vec![0.5, 0.0, 2.0],
        ]);
        let x = Matrix::identity(3);
        let inv = pseudo_inverse_apply(&m, &x).unwrap();
        for j in 0..3 {
            let col = linear_solve(&m, &x.column(j)).unwrap();
            for i in 0..3 {
                assert!((inv[(i, j)] - col[i]).abs() <= 1e-10 * col[i].abs().max(1.0));
            }
        }
    }

    #[test]
    fn zero_matrix() {
        let z = Matrix::zeros(3, 3);
        let p = pseudo_inverse_apply(&z, &Matrix::identity(3)).unwrap();
        assert_eq!(p, Matrix::zeros(3, 3));
    }

    #[test]
    fn diagonal_with_zero() {
        let m = Matrix::diag(&[2.0, 0.0]);
        let p = pseudo_inverse_apply(&m, &Matrix::identity(2)).unwrap();
        assert!(max_diff(&p, &Matrix::diag(&[0.5, 0.0])) < 1e-15);
    }

    #[test]
    fn forced_rank_drops_smallest() {
        let m = Matrix::diag(&[3.0, 1e-13, 2.0]);
        let p = pseudo_inverse_apply_rank(&m, &Matrix::identity(3), 2).unwrap();
        assert!(max_diff(&p, &Matrix::diag(&[1.0 / 3.0, 0.0, 0.5])) < 1e-15);
    }

    proptest! {
        #[test]
        fn moore_penrose_identities(
            n in 2usize..8,
            r_off in 1usize..7,
            vals in proptest::collection::vec(-1.0f64..1.0, 128),
        ) {
            let r = (n - 1).min(r_off).max(1);
            let f = Matrix::from_fn(n, r, |i, j| vals[i * 8 + j]);
            let g = Matrix::from_fn(r, n, |i, j| vals[64 + i * 8 + j]);
            let a = f.matmul(&g);
            let ap = pseudo_inverse_apply(&a, &Matrix::identity(n)).unwrap();
            let a_ap = a.matmul(&ap);
            let ap_a = ap.matmul(&a);
            prop_assert!(max_diff(&a_ap.matmul(&a), &a) < 1e-8);
            prop_assert!(max_diff(&ap_a.matmul(&ap), &ap) < 1e-8 * ap.max_abs().max(1.0));
            prop_assert!(max_diff(&a_ap, &a_ap.transpose()) < 1e-8);
            prop_assert!(max_diff(&ap_a, &ap_a.transpose()) < 1e-8);
        }
    }
}
