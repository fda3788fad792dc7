use super::{dist_inf, is_irreducible, Matrix};
use crate::error::{QveError, Result};

/// Convergence threshold on successive ℓ1-normalized iterates.
pub const EIG_TOL: f64 = 1e-13;
pub const MAX_EIG_ITERS: usize = 100_000;

/// Dominant eigenpair of a nonnegative irreducible matrix.
///
/// `vector` is entrywise positive with `‖vector‖₁ = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct PerronOptions {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for PerronOptions {
    fn default() -> Self {
        PerronOptions {
            tol: EIG_TOL,
            max_iters: MAX_EIG_ITERS,
        }
    }
}

/// Right Perron pair `(ρ(M), v)` with `M v = ρ(M) v` by power iteration.
///
/// The iteration starts from the all-ones vector and renormalizes in ℓ1. If
/// it has not settled after `MAX_EIG_ITERS` steps (periodic matrices, close
/// ties in modulus) it restarts on `M + δI` with `δ = 1e-3·‖M‖∞`, which
/// has the same eigenvectors and a strictly dominant eigenvalue.
pub fn perron_right(m: &Matrix) -> Result<EigenPair> {
    perron_right_with(m, PerronOptions::default())
}

/// Left Perron pair: `vᵀ M = ρ(M) vᵀ`.
pub fn perron_left(m: &Matrix) -> Result<EigenPair> {
    perron_right(&m.transpose())
}

pub(crate) fn perron_right_with(m: &Matrix, opts: PerronOptions) -> Result<EigenPair> {
    check_nonnegative(m)?;
    let n = m.rows();
    if n == 0 {
        return Err(QveError::InvalidInput("empty matrix".into()));
    }
    if !is_irreducible(&m.positive_pattern()) {
        return Err(QveError::Irreducibility(format!(
            "{n}x{n} matrix has more than one strongly connected component"
        )));
    }
    if n == 1 {
        return Ok(EigenPair {
            value: m[(0, 0)].max(0.0),
            vector: vec![1.0],
        });
    }

    let pair = match power_iterate(m, 0.0, opts) {
        Some(p) => p,
        None => {
            let delta = 1e-3 * m.norm_inf();
            power_iterate(m, delta, opts).ok_or_else(|| {
                QveError::Numeric(format!(
                    "power iteration did not converge in {} steps",
                    2 * opts.max_iters
                ))
            })?
        }
    };

    let floor = pair.vector.iter().copied().fold(f64::INFINITY, f64::min);
    if floor <= 0.0 || !floor.is_finite() {
        return Err(QveError::Irreducibility(format!(
            "Perron vector has non-positive entry {floor:e}"
        )));
    }
    Ok(pair)
}

fn power_iterate(m: &Matrix, shift: f64, opts: PerronOptions) -> Option<EigenPair> {
    let n = m.rows();
    let mut v = vec![1.0 / n as f64; n];
    for _ in 0..opts.max_iters {
        let mut next = m.mul_vec(&v);
        for (x, &old) in next.iter_mut().zip(&v) {
            *x += shift * old;
        }
        let s: f64 = next.iter().sum();
        if s <= 0.0 || !s.is_finite() {
            // nilpotent or overflowing; no Perron pair to report
            return None;
        }
        next.iter_mut().for_each(|x| *x /= s);
        let diff = dist_inf(&next, &v);
        v = next;
        if diff <= opts.tol {
            // With ‖v‖₁ = 1 and v ≥ 0 the eigenvalue is the column-weighted sum.
            let value = m.mul_vec(&v).iter().sum::<f64>();
            return Some(EigenPair { value, vector: v });
        }
    }
    None
}

fn check_nonnegative(m: &Matrix) -> Result<()> {
    if !m.is_square() {
        return Err(QveError::InvalidInput(format!(
            "eigenpair of non-square {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let worst = m.min_entry();
    if worst < 0.0 || worst.is_nan() {
        return Err(QveError::InvalidInput(format!(
            "matrix has negative entry {worst:e}; Perron pair needs M >= 0"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm_inf;
    use proptest::prelude::*;

    fn eig_residual(m: &Matrix, p: &EigenPair) -> f64 {
        let mv = m.mul_vec(&p.vector);
        let r: Vec<f64> = mv
            .iter()
            .zip(&p.vector)
            .map(|(a, b)| a - p.value * b)
            .collect();
        norm_inf(&r)
    }

    #[test]
    fn scalar() {
        let p = perron_right(&Matrix::from_rows(&[vec![1.0]])).unwrap();
        assert_eq!(p, EigenPair { value: 1.0, vector: vec![1.0] });
        let p = perron_left(&Matrix::from_rows(&[vec![0.75]])).unwrap();
        assert_eq!(p, EigenPair { value: 0.75, vector: vec![1.0] });
    }

    #[test]
    fn swap_matrix() {
        let m = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let p = perron_right(&m).unwrap();
        assert!((p.value - 1.0).abs() < 1e-14);
        assert!(dist_inf(&p.vector, &[0.5, 0.5]) < 1e-14);
    }

    #[test]
    fn periodic_left_vector_needs_shift() {
        // vᵀM = vᵀ for v ∝ (1, 2); the plain iteration oscillates with period 2.
        let m = Matrix::from_rows(&[vec![0.0, 2.0], vec![0.5, 0.0]]);
        let p = perron_left(&m).unwrap();
        assert!((p.value - 1.0).abs() < 1e-10);
        assert!(dist_inf(&p.vector, &[1.0 / 3.0, 2.0 / 3.0]) < 1e-10);
    }

    #[test]
    fn reducible_identity_is_rejected() {
        let r = perron_right(&Matrix::identity(2));
        assert!(matches!(r, Err(QveError::Irreducibility(_))));
    }

    #[test]
    fn negative_entry_is_rejected() {
        let m = Matrix::from_rows(&[vec![1.0, -0.1], vec![1.0, 1.0]]);
        assert!(matches!(perron_right(&m), Err(QveError::InvalidInput(_))));
    }

    #[test]
    fn symmetric_left_equals_right() {
        let m = Matrix::from_rows(&[
            vec![2.0, 1.0, 0.5],
            vec![1.0, 0.0, 3.0],
            vec![0.5, 3.0, 1.0],
        ]);
        let r = perron_right(&m).unwrap();
        let l = perron_left(&m).unwrap();
        assert!(dist_inf(&r.vector, &l.vector) < 1e-12);
    }

    proptest! {
        #[test]
        fn positive_matrices_satisfy_eigen_bound(
            n in 2usize..12,
            vals in proptest::collection::vec(0.01f64..1.0, 144),
        ) {
            let m = Matrix::from_fn(n, n, |i, j| vals[i * 12 + j]);
            let r = perron_right(&m).unwrap();
            let l = perron_left(&m).unwrap();
            prop_assert!(r.vector.iter().all(|&v| v > 0.0));
            prop_assert!((r.vector.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(eig_residual(&m, &r) <= 10.0 * EIG_TOL * m.norm_inf());
            prop_assert!((r.value - l.value).abs() <= 1e-10 * r.value);
        }
    }
}
