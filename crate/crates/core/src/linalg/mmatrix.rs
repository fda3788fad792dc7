use serde::{Deserialize, Serialize};

use super::{perron_right, scc_partition, Matrix};
use crate::error::{QveError, Result};

/// Relative band (w.r.t. the diagonal shift `s`) for calling an M-matrix singular.
pub const MMATRIX_TOL: f64 = 1e-10;

/// Off-diagonal entries above this are not treated as roundoff.
const ZMATRIX_SLACK: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MmatrixClass {
    #[serde(rename = "nonsingular_M")]
    NonsingularM,
    #[serde(rename = "singular_M")]
    SingularM,
    #[serde(rename = "not_M")]
    NotM,
}

impl MmatrixClass {
    pub fn as_str(self) -> &'static str {
        match self {
            MmatrixClass::NonsingularM => "nonsingular_M",
            MmatrixClass::SingularM => "singular_M",
            MmatrixClass::NotM => "not_M",
        }
    }

    /// Nonsingular or singular M-matrix.
    pub fn is_m_matrix(self) -> bool {
        !matches!(self, MmatrixClass::NotM)
    }
}

impl std::fmt::Display for MmatrixClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MmatrixVerdict {
    pub class: MmatrixClass,
    /// `ρ(B)` for the splitting `Z = sI − B`.
    pub rho_offdiag: f64,
    pub shift: f64,
}

/// Spectral radius of a nonnegative matrix, reducible or not: the largest
/// Perron root over the diagonal blocks of its SCC decomposition.
pub fn spectral_radius(m: &Matrix) -> Result<f64> {
    let parts = scc_partition(&m.positive_pattern());
    let mut rho: f64 = 0.0;
    for part in &parts {
        let block = m.select(part, part);
        let r = if part.len() == 1 {
            block[(0, 0)].max(0.0)
        } else {
            perron_right(&block)?.value
        };
        rho = rho.max(r);
    }
    Ok(rho)
}

/// Classifies a Z-matrix by writing it as `sI − B` with `s = max Zᵢᵢ`.
pub fn mmatrix_classify(z: &Matrix) -> Result<MmatrixVerdict> {
    if !z.is_square() {
        return Err(QveError::InvalidInput("M-matrix test needs a square matrix".into()));
    }
    let n = z.rows();
    let scale = z.max_abs().max(1.0);
    for i in 0..n {
        for j in 0..n {
            if i != j && z[(i, j)] > ZMATRIX_SLACK * scale {
                return Err(QveError::InvalidInput(format!(
                    "not a Z-matrix: entry ({i},{j}) = {:e} is positive",
                    z[(i, j)]
                )));
            }
        }
    }
    let shift = (0..n).map(|i| z[(i, i)]).fold(f64::NEG_INFINITY, f64::max);
    let b = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            shift - z[(i, i)]
        } else {
            (-z[(i, j)]).max(0.0)
        }
    });
    let rho = spectral_radius(&b)?;
    let band = MMATRIX_TOL * shift.abs();
    let class = if (rho - shift).abs() <= band {
        MmatrixClass::SingularM
    } else if rho < shift {
        MmatrixClass::NonsingularM
    } else {
        MmatrixClass::NotM
    };
    Ok(MmatrixVerdict {
        class,
        rho_offdiag: rho,
        shift,
    })
}
