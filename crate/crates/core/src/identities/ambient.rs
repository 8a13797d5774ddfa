use serde::{Deserialize, Serialize};

use crate::{Error, Matrix, Result, Vector};

/// Tolerance for atoms to count as lying on the ambient manifold.
pub const MANIFOLD_TOLERANCE: f64 = 1e-10;

/// A Riemannian ambient manifold embedded in `ℝ^D`.
///
/// Only the round unit sphere `S^{D−1}` is available. Its tangent projection
/// `S(x) = I − x xᵀ` is extended off the sphere as `I − x xᵀ/|x|²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmbientManifold {
    UnitSphere,
}

impl AmbientManifold {
    /// Tangent projection `S(x)`.
    pub fn projection<const D: usize>(&self, x: &Vector<D>) -> Matrix<D> {
        Matrix::<D>::identity() - x * x.transpose() / x.norm_squared()
    }

    /// `Ā_ijk = S_ir D_r S_jk`; on the sphere this is `−(S_ij x_k + S_ik x_j)`.
    pub fn a_bar<const D: usize>(&self, x: &Vector<D>) -> [[[f64; D]; D]; D] {
        let s = self.projection(x);
        std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|k| -(s[(i, j)] * x[k] + s[(i, k)] * x[j]))))
    }

    /// `B̄_ij^k = −S_ij x_k`, the part of `Ā` with `Ā_irb = B̄_ir^b + B̄_ib^r`.
    pub fn b_bar<const D: usize>(&self, x: &Vector<D>) -> [[[f64; D]; D]; D] {
        let s = self.projection(x);
        std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|k| -s[(i, j)] * x[k])))
    }

    /// Checks that `x` lies on the manifold and `v` is a unit tangent vector there.
    pub fn check_atom<const D: usize>(&self, index: usize, x: &Vector<D>, v: &Vector<D>) -> Result<()> {
        let off = (x.norm() - 1.0).abs();
        if !(off <= MANIFOLD_TOLERANCE) {
            return Err(Error::OffManifold { index, reason: format!("| |x| − 1 | = {off:e}") });
        }
        let normal_part = (self.projection(x) * v - v).norm();
        if !(normal_part <= MANIFOLD_TOLERANCE) {
            return Err(Error::OffManifold { index, reason: format!("|S(x)v − v| = {normal_part:e}") });
        }
        Ok(())
    }
}
