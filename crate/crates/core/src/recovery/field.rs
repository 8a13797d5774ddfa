use serde::{Deserialize, Serialize};

use crate::geometry::Hypersurface;
use crate::varifold::OrientedVarifold;
use crate::{Error, Matrix, Result, Vector};

/// Which structural properties are built into the parametrization of `W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Constraints {
    /// `W = Wᵀ`.
    pub symmetric: bool,
    /// `W v = 0`.
    pub tangential: bool,
    /// `W(x, −v) = −W(x, v)`: both sheets share one patch.
    pub odd: bool,
}

impl Constraints {
    pub const NONE: Self = Self { symmetric: false, tangential: false, odd: false };
}

impl Default for Constraints {
    fn default() -> Self {
        Self { symmetric: true, tangential: true, odd: false }
    }
}

/// Solver diagnostics attached to a recovered field.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldDiagnostics {
    /// `‖r‖₂` over all (test function, component) residuals.
    pub residual_norm: f64,
    /// Tikhonov weight actually used.
    pub regularization: f64,
    /// Numerical rank of the unregularized normal matrix.
    pub rank: usize,
    pub unknowns: usize,
}

/// Curvature coefficients `W_ia` at every atom, grouped into patches.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField<const D: usize> {
    w: Vec<Matrix<D>>,
    patch_of_atom: Vec<Option<usize>>,
    patch_count: usize,
    pub constraints: Constraints,
    /// Set when the coefficients are a fit rather than exact (meshes, recovery).
    pub approximate: bool,
    pub diagnostics: Option<FieldDiagnostics>,
}

impl<const D: usize> CurvatureField<D> {
    /// One matrix per atom, each atom its own patch.
    pub fn from_matrices(w: Vec<Matrix<D>>) -> Self {
        let n = w.len();
        Self {
            w,
            patch_of_atom: (0..n).map(Some).collect(),
            patch_count: n,
            constraints: Constraints::NONE,
            approximate: false,
            diagnostics: None,
        }
    }

    pub(crate) fn from_patches(
        w: Vec<Matrix<D>>,
        patch_of_atom: Vec<Option<usize>>,
        patch_count: usize,
        constraints: Constraints,
        diagnostics: FieldDiagnostics,
    ) -> Self {
        Self { w, patch_of_atom, patch_count, constraints, approximate: true, diagnostics: Some(diagnostics) }
    }

    /// `W(x, v)` from a closure, one patch per atom.
    pub fn from_fn<F>(varifold: &OrientedVarifold<D>, f: F) -> Self
    where
        F: Fn(&Vector<D>, &Vector<D>) -> Matrix<D>,
    {
        Self::from_matrices(varifold.atoms().iter().map(|a| f(&a.x, &a.v)).collect())
    }

    pub fn zero(varifold: &OrientedVarifold<D>) -> Self {
        Self::from_matrices(vec![Matrix::zeros(); varifold.len()])
    }

    /// Shape-operator coefficients of the surface the atoms were sampled from.
    pub fn geometric(surface: &Hypersurface<D>, varifold: &OrientedVarifold<D>) -> Result<Self> {
        let w = varifold
            .atoms()
            .iter()
            .map(|a| surface.geometric_curvature(&a.x, &a.v))
            .collect::<Result<Vec<_>>>()?;
        let mut field = Self::from_matrices(w);
        field.constraints = Constraints { symmetric: true, tangential: true, odd: true };
        field.approximate = surface.is_curvature_approximate();
        Ok(field)
    }

    pub fn matrices(&self) -> &[Matrix<D>] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// Patch of each atom; `None` for atoms no test function sees.
    pub fn patch_of_atom(&self) -> &[Option<usize>] {
        &self.patch_of_atom
    }

    pub fn patch_count(&self) -> usize {
        self.patch_count
    }

    /// Writes `patch_id,i,a,W_ia` with `W` taken at the first atom of each patch
    /// (indices are 1-based).
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
        out.write_record(["patch_id", "i", "a", "W_ia"]).map_err(csv_err)?;
        let mut seen = vec![false; self.patch_count];
        for (atom, patch) in self.patch_of_atom.iter().enumerate() {
            let Some(patch) = *patch else { continue };
            if std::mem::replace(&mut seen[patch], true) {
                continue;
            }
            let w = &self.w[atom];
            for i in 0..D {
                for a in 0..D {
                    out.write_record([
                        patch.to_string(),
                        (i + 1).to_string(),
                        (a + 1).to_string(),
                        format!("{:.16e}", w[(i, a)]),
                    ])
                    .map_err(csv_err)?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }
}
