use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::{Constraints, CurvatureField, FieldDiagnostics};
use super::{oddness_defect, structure_defects, OddnessDefect, StructureDefects};
use crate::geometry::{cross, least_aligned_axis};
use crate::identities::{mean_from_w, Jet, TestFunction};
use crate::varifold::OrientedVarifold;
use crate::{Error, Matrix, Result, Vector};

/// How atoms are grouped into patches sharing one coefficient matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Patching {
    /// Cubic cells (`cells` per axis over the cube circumscribing the atoms),
    /// split by sheet unless the odd constraint ties the sheets together.
    Voxel { cells: usize },
}

impl Default for Patching {
    fn default() -> Self {
        Patching::Voxel { cells: 3 }
    }
}

/// Tikhonov weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Regularization {
    /// Multiple of the largest diagonal entry of the normal matrix.
    Relative(f64),
    Absolute(f64),
}

impl Default for Regularization {
    fn default() -> Self {
        Regularization::Relative(1e-8)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecoveryConfig {
    pub patching: Patching,
    pub constraints: Constraints,
    pub regularization: Regularization,
    /// Eigenvalues below `rank_tolerance · λ_max` count as zero.
    pub rank_tolerance: f64,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            patching: Patching::default(),
            constraints: Constraints::default(),
            regularization: Regularization::default(),
            rank_tolerance: 1e-10,
        }
    }
}

/// Relative rank deficiency above which a recovery is flagged ill-posed.
pub const ILL_POSED_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    /// `‖r(W)‖ / ‖r(0)‖` over all (test function, component) residuals.
    pub relative_residual: f64,
    pub residual_norm: f64,
    pub symmetry_defect: f64,
    pub tangency_defect: f64,
    pub oddness_defect: f64,
    pub oddness_note: Option<String>,
    pub equations: usize,
    pub unknowns: usize,
    pub patches: usize,
    /// Atoms outside every test-function support (assigned `W = 0`).
    pub uncovered_atoms: usize,
    pub rank: usize,
    pub relative_rank_deficiency: f64,
    pub ill_posed: bool,
    /// `λ_max / λ_min` over eigenvalues above the rank tolerance.
    pub condition_number: f64,
    pub regularization: f64,
    pub basis: String,
}

/// Patch layout plus the local frame data used to parametrize `W` at each atom.
struct Layout<const D: usize> {
    patch_of_atom: Vec<usize>,
    patch_count: usize,
    /// `±1`: orientation of the atom relative to its patch's reference sheet.
    sign: Vec<f64>,
    /// Unit mean of the reference-sheet normals, per patch.
    mean_normal: Vec<Vector<D>>,
}

/// Patch id for atoms that no test function sees; their coefficients are set to zero.
const UNCOVERED: usize = usize::MAX;

fn layout<const D: usize>(varifold: &OrientedVarifold<D>, covered: &[bool], config: &RecoveryConfig) -> Result<Layout<D>> {
    let Patching::Voxel { cells } = config.patching;
    if cells == 0 {
        return Err(Error::Config("voxel patching needs at least one cell per axis".into()));
    }
    let Some((lo, hi)) = varifold.bounding_box() else {
        return Ok(Layout { patch_of_atom: vec![], patch_count: 0, sign: vec![], mean_normal: vec![] });
    };
    let center = (lo + hi) / 2.0;
    let half = ((hi - lo) / 2.0).max().max(1e-12) * (1.0 + 1e-9);
    let cell_of = |x: &Vector<D>| -> usize {
        let mut flat = 0;
        for k in 0..D {
            let t = ((x[k] - center[k] + half) / (2.0 * half) * cells as f64).floor();
            flat = flat * cells + (t.max(0.0) as usize).min(cells - 1);
        }
        flat
    };
    // (cell, sheet) -> patch, patches numbered by first appearance.
    let mut reference: BTreeMap<usize, Vector<D>> = BTreeMap::new();
    let mut ids: BTreeMap<(usize, bool), usize> = BTreeMap::new();
    let mut patch_of_atom = Vec::with_capacity(varifold.len());
    let mut sign = Vec::with_capacity(varifold.len());
    let mut normal_sums: Vec<Vector<D>> = Vec::new();
    let mut first_normal: Vec<Vector<D>> = Vec::new();
    for (atom, &covered) in varifold.atoms().iter().zip(covered) {
        if !covered {
            patch_of_atom.push(UNCOVERED);
            sign.push(1.0);
            continue;
        }
        let cell = cell_of(&atom.x);
        let r = *reference.entry(cell).or_insert(atom.v);
        let s = if atom.v.dot(&r) >= 0.0 { 1.0 } else { -1.0 };
        let key = (cell, config.constraints.odd || s > 0.0);
        let next = ids.len();
        let id = *ids.entry(key).or_insert(next);
        // Frames are built from σv with σ = s only when the sheets share patches.
        let sigma = if config.constraints.odd { s } else { 1.0 };
        if id == normal_sums.len() {
            normal_sums.push(Vector::zeros());
            first_normal.push(atom.v * sigma);
        }
        normal_sums[id] += atom.v * sigma;
        patch_of_atom.push(id);
        sign.push(sigma);
    }
    let mean_normal = normal_sums
        .iter()
        .zip(&first_normal)
        .map(|(sum, first)| if sum.norm() > 1e-8 { sum.normalize() } else { *first })
        .collect();
    Ok(Layout { patch_count: ids.len(), patch_of_atom, sign, mean_normal })
}

/// Orthonormal frame `[t_1, …, t_{D−1}, u]` with `u` last.
fn frame<const D: usize>(u: &Vector<D>, axis: usize) -> Matrix<D> {
    let mut f = Matrix::<D>::zeros();
    f.set_column(D - 1, u);
    if D == 2 {
        f[(0, 0)] = -u[1];
        f[(1, 0)] = u[0];
        return f;
    }
    let mut k = axis;
    let mut e = Vector::<D>::zeros();
    e[k] = 1.0;
    if (e - u * u[k]).norm() < 0.3 {
        k = least_aligned_axis(u);
        e = Vector::zeros();
        e[k] = 1.0;
    }
    let t1 = (e - u * u[k]).normalize();
    f.set_column(0, &t1);
    f.set_column(1, &cross(u, &t1));
    f
}

/// Frame at `u` obtained by turning the patch frame `patch` (built at the mean
/// normal `n`) along the shortest rotation taking `n` to `u`.
///
/// Two patch frames at `n` differ by an orthogonal map fixing `n`, so the
/// atom frames differ by that same map and span the same coefficient space.
/// This keeps recovery equivariant when ties in the axis choice break
/// differently under a rotation.
fn atom_frame<const D: usize>(n: &Vector<D>, patch: &Matrix<D>, u: &Vector<D>) -> Matrix<D> {
    let c = n.dot(u);
    if D == 2 || c <= -0.5 {
        return frame(u, least_aligned_axis(u));
    }
    let k = u * n.transpose() - n * u.transpose();
    (Matrix::<D>::identity() + k + k * k / (1.0 + c)) * patch
}

/// Frobenius-orthonormal basis of the admissible frame matrices `C` (normal direction last).
pub(crate) fn parameter_basis<const D: usize>(constraints: &Constraints) -> Vec<Matrix<D>> {
    let n = if constraints.tangential { D - 1 } else { D };
    let mut out = Vec::new();
    if constraints.symmetric {
        for a in 0..n {
            for b in a..n {
                let mut m = Matrix::<D>::zeros();
                if a == b {
                    m[(a, a)] = 1.0;
                } else {
                    m[(a, b)] = std::f64::consts::FRAC_1_SQRT_2;
                    m[(b, a)] = std::f64::consts::FRAC_1_SQRT_2;
                }
                out.push(m);
            }
        }
    } else {
        for a in 0..D {
            for b in 0..n {
                let mut m = Matrix::<D>::zeros();
                m[(a, b)] = 1.0;
                out.push(m);
            }
        }
    }
    out
}

/// Solves `min Σ_(φ,i) r_i(φ; W)² + λ‖c‖²` over patchwise coefficients `c`,
/// where `W = σ F C(c) Fᵀ` in a per-atom orthonormal frame `F` and
/// `r_i(φ; W)` is the curvature-identity residual.
///
/// The frame is built from `σv` (the reference-sheet normal), so odd patches
/// satisfy `W(x, −v) = −W(x, v)` exactly, and `C` ranges over the matrices
/// allowed by the constraints.
pub fn recover_curvature<const D: usize, F>(
    varifold: &OrientedVarifold<D>,
    basis: &[F],
    basis_description: &str,
    config: &RecoveryConfig,
) -> Result<(CurvatureField<D>, RecoveryReport)>
where
    F: TestFunction<D>,
{
    let (Regularization::Relative(l) | Regularization::Absolute(l)) = config.regularization;
    if !(l >= 0.0 && l.is_finite()) {
        return Err(Error::Config(format!("regularization weight must be a finite nonnegative number, got {l}")));
    }
    let covered: Vec<bool> = varifold
        .atoms()
        .par_iter()
        .map(|a| {
            basis.iter().any(|phi| {
                let s = phi.support();
                (a.x - s.center).norm() < s.radius
            })
        })
        .collect();
    let layout = layout(varifold, &covered, config)?;
    let params = parameter_basis::<D>(&config.constraints);
    let per_patch = params.len();
    let unknowns = layout.patch_count * per_patch;
    let equations = basis.len() * D;
    if equations < unknowns || unknowns == 0 {
        return Err(Error::Underdetermined { equations, unknowns });
    }

    let patch_frames: Vec<Matrix<D>> = layout.mean_normal.iter().map(|n| frame(n, least_aligned_axis(n))).collect();
    // Coefficient matrices W_p at every atom for every parameter p.
    let atom_params: Vec<Vec<Matrix<D>>> = varifold
        .atoms()
        .par_iter()
        .enumerate()
        .map(|(k, atom)| {
            if layout.patch_of_atom[k] == UNCOVERED {
                return Vec::new();
            }
            let s = layout.sign[k];
            let n = &layout.mean_normal[layout.patch_of_atom[k]];
            let f = atom_frame(n, &patch_frames[layout.patch_of_atom[k]], &(atom.v * s));
            params.iter().map(|g| f * g * f.transpose() * s).collect()
        })
        .collect();

    // One sparse row per (φ, i): W-independent part b_i and patch coefficients.
    struct Rows {
        b: Vec<f64>,
        coefficients: BTreeMap<usize, Vec<f64>>,
    }
    let rows: Vec<Rows> = basis
        .par_iter()
        .map(|phi| {
            let mut b = vec![0.0; D];
            let mut coefficients: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
            for (k, atom) in varifold.atoms().iter().enumerate() {
                let jet = phi.jet(&atom.x, &atom.v);
                if layout.patch_of_atom[k] == UNCOVERED || jet == Jet::zero() {
                    continue;
                }
                let a = (jet.dx - atom.v * atom.v.dot(&jet.dx)) * atom.mass;
                for i in 0..D {
                    b[i] += a[i];
                }
                let entry = coefficients.entry(layout.patch_of_atom[k]).or_insert_with(|| vec![0.0; D * per_patch]);
                for (p, wp) in atom_params[k].iter().enumerate() {
                    let r = (wp * jet.dv + mean_from_w(wp, &atom.v) * jet.value) * atom.mass;
                    for i in 0..D {
                        entry[i * per_patch + p] += r[i];
                    }
                }
            }
            Rows { b, coefficients }
        })
        .collect();

    let mut normal = DMatrix::<f64>::zeros(unknowns, unknowns);
    let mut atb = DVector::<f64>::zeros(unknowns);
    let mut btb = 0.0;
    let mut index = Vec::new();
    let mut value = Vec::new();
    for row in &rows {
        for i in 0..D {
            index.clear();
            value.clear();
            for (&patch, coeffs) in &row.coefficients {
                for p in 0..per_patch {
                    let c = coeffs[i * per_patch + p];
                    if c != 0.0 {
                        index.push(patch * per_patch + p);
                        value.push(c);
                    }
                }
            }
            let bi = row.b[i];
            btb += bi * bi;
            for (u, &gu) in index.iter().enumerate() {
                atb[gu] += value[u] * bi;
                for (w, &gw) in index.iter().enumerate() {
                    normal[(gu, gw)] += value[u] * value[w];
                }
            }
        }
    }
    if normal.iter().any(|x| !x.is_finite()) || !btb.is_finite() {
        return Err(Error::SolverFailure("normal equations contain non-finite entries".into()));
    }

    let max_diag = (0..unknowns).fold(0.0_f64, |m, k| m.max(normal[(k, k)]));
    let lambda = match config.regularization {
        Regularization::Relative(f) => f * max_diag,
        Regularization::Absolute(l) => l,
    };
    let eig = SymmetricEigen::new(normal.clone());
    let lambda_max = eig.eigenvalues.iter().fold(0.0_f64, |m, &e| m.max(e));
    let cutoff = config.rank_tolerance * lambda_max;
    let rank = eig.eigenvalues.iter().filter(|&&e| e > cutoff).count();
    let lambda_min = eig.eigenvalues.iter().filter(|&&e| e > cutoff).fold(f64::INFINITY, |m, &e| m.min(e));
    let rhs = -&atb;
    let projected = eig.eigenvectors.transpose() * &rhs;
    let mut scaled = DVector::<f64>::zeros(unknowns);
    for k in 0..unknowns {
        let e = eig.eigenvalues[k].max(0.0);
        scaled[k] = if lambda > 0.0 {
            projected[k] / (e + lambda)
        } else if e > cutoff {
            projected[k] / e
        } else {
            0.0
        };
    }
    let solution = &eig.eigenvectors * scaled;
    if solution.iter().any(|x| !x.is_finite()) {
        return Err(Error::SolverFailure("solution contains non-finite entries".into()));
    }
    let residual_sq = (solution.dot(&(&normal * &solution)) + 2.0 * solution.dot(&atb) + btb).max(0.0);
    let residual_norm = residual_sq.sqrt();

    let w: Vec<Matrix<D>> = (0..varifold.len())
        .map(|k| {
            let mut m = Matrix::<D>::zeros();
            if layout.patch_of_atom[k] == UNCOVERED {
                return m;
            }
            let base = layout.patch_of_atom[k] * per_patch;
            for (p, wp) in atom_params[k].iter().enumerate() {
                m += wp * solution[base + p];
            }
            m
        })
        .collect();
    let field = CurvatureField::from_patches(
        w,
        layout.patch_of_atom.iter().map(|&p| (p != UNCOVERED).then_some(p)).collect(),
        layout.patch_count,
        config.constraints,
        FieldDiagnostics { residual_norm, regularization: lambda, rank, unknowns },
    );
    let StructureDefects { symmetry, tangency } = structure_defects(varifold, &field);
    let OddnessDefect { value: oddness, note, .. } = oddness_defect(varifold, &field);
    let relative_rank_deficiency = (unknowns - rank) as f64 / unknowns as f64;
    let report = RecoveryReport {
        relative_residual: if btb > 0.0 { residual_norm / btb.sqrt() } else { 0.0 },
        residual_norm,
        symmetry_defect: symmetry,
        tangency_defect: tangency,
        oddness_defect: oddness,
        oddness_note: note,
        equations,
        unknowns,
        patches: field.patch_count(),
        uncovered_atoms: covered.iter().filter(|c| !**c).count(),
        rank,
        relative_rank_deficiency,
        ill_posed: relative_rank_deficiency > ILL_POSED_THRESHOLD,
        condition_number: if rank > 0 { lambda_max / lambda_min } else { f64::INFINITY },
        regularization: lambda,
        basis: basis_description.to_string(),
    };
    Ok((field, report))
}
