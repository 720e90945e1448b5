//! Small dense linear-algebra helpers on top of nalgebra.
//!
//! Log-determinants, quadratic forms and traces all go through a Cholesky
//! factor; no explicit inverses are formed.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{AigError, Result};

const SYMMETRY_TOL: f64 = 1e-12;

/// Cholesky factor of a symmetric positive definite matrix with its log-determinant.
#[derive(Debug, Clone)]
pub struct Factor {
    pub chol: Cholesky<f64, Dyn>,
    pub log_det: f64,
}

impl Factor {
    pub fn new(m: &DMatrix<f64>, which: &str) -> Result<Self> {
        check_symmetric(m, which)?;
        let chol = Cholesky::new(m.clone()).ok_or_else(|| AigError::NotPositiveDefinite {
            which: which.to_string(),
        })?;
        let l = chol.l_dirty();
        let mut log_det = 0.0;
        for i in 0..m.nrows() {
            let d = l[(i, i)];
            if !(d > 0.0) || !d.is_finite() {
                return Err(AigError::NotPositiveDefinite {
                    which: which.to_string(),
                });
            }
            log_det += d.ln();
        }
        Ok(Self {
            chol,
            log_det: 2.0 * log_det,
        })
    }

    pub fn dim(&self) -> usize {
        self.chol.l_dirty().nrows()
    }

    /// vᵀ D⁻¹ v as the squared norm of L⁻¹ v.
    pub fn inv_quad(&self, v: &DVector<f64>) -> f64 {
        let mut w = v.clone();
        self.chol.l_dirty().solve_lower_triangular_mut(&mut w);
        w.norm_squared()
    }

    /// tr(D⁻¹ M).
    pub fn trace_solve(&self, m: &DMatrix<f64>) -> f64 {
        self.chol.solve(m).trace()
    }

    pub fn solve_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(v)
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        self.chol.inverse()
    }

    /// x = m + L z, used to colour standard-normal draws.
    pub fn colour(&self, z: &DVector<f64>) -> DVector<f64> {
        self.chol.l_dirty().lower_triangle() * z
    }
}

pub fn check_symmetric(m: &DMatrix<f64>, which: &str) -> Result<()> {
    if !m.is_square() {
        return Err(AigError::param(
            which,
            format!("matrix is {}x{}, expected square", m.nrows(), m.ncols()),
        ));
    }
    let scale = m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    for i in 0..m.nrows() {
        for j in 0..i {
            let (a, b) = (m[(i, j)], m[(j, i)]);
            if !a.is_finite() || !b.is_finite() {
                return Err(AigError::param(which, "non-finite entry"));
            }
            if (a - b).abs() > SYMMETRY_TOL * scale.max(f64::MIN_POSITIVE) {
                return Err(AigError::param(
                    which,
                    format!("not symmetric at ({i},{j}): {a} vs {b}"),
                ));
            }
        }
    }
    Ok(())
}

/// M^p for symmetric positive definite M via eigendecomposition.
pub fn sym_pow(m: &DMatrix<f64>, p: f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let vals = eig.eigenvalues.map(|x| x.powf(p));
    let q = &eig.eigenvectors;
    q * DMatrix::from_diagonal(&vals) * q.transpose()
}

/// Symmetrise to remove roundoff asymmetry from products like A B A.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(symmetrize(m))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}
