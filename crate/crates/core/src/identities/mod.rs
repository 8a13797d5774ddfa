//! Weak integral identities evaluated as residuals on atom measures.
//!
//! Every residual is an exact finite sum over atoms (compensated, in atom
//! order). It tends to zero under quadrature refinement exactly when the
//! supplied coefficients satisfy the identity against the given test function.

mod ambient;
mod basis;
mod test_function;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use ambient::{AmbientManifold, MANIFOLD_TOLERANCE};
pub use basis::{multi_indices, BasisConfig, SupportFilter, TestBasis};
pub use test_function::{gradient_self_test, BumpFunction, Jet, Support, TestFunction};

use crate::numeric::VectorSum;
use crate::varifold::OrientedVarifold;
use crate::{Error, Matrix, Result, Vector};

/// `M_i = −(W_rr v_i + W_ri v_r)`, the mean-curvature slot of the curvature identity.
#[inline]
pub fn mean_from_w<const D: usize>(w: &Matrix<D>, v: &Vector<D>) -> Vector<D> {
    -(v * w.trace() + w.transpose() * v)
}

/// `Σ m P_ij(v) D_j X_i` for a vector field given with its Jacobian `DX_ij = D_j X_i`.
pub fn first_variation<const D: usize, F>(varifold: &OrientedVarifold<D>, field: F) -> f64
where
    F: Fn(&Vector<D>) -> (Vector<D>, Matrix<D>),
{
    varifold.integrate(|x, v| {
        let (_, dx) = field(x);
        dx.trace() - v.dot(&(dx * v))
    })
}

/// `(δ_ij − v_i v_j) D_jφ`.
#[inline]
fn tangential_gradient<const D: usize>(v: &Vector<D>, dx: &Vector<D>) -> Vector<D> {
    dx - v * v.dot(dx)
}

fn check_len<const D: usize>(varifold: &OrientedVarifold<D>, w: &[Matrix<D>]) -> Result<()> {
    if w.len() != varifold.len() {
        return Err(Error::Config(format!("{} coefficient matrices for {} atoms", w.len(), varifold.len())));
    }
    Ok(())
}

/// `∫ ((δ_ij − v_i v_j) D_jφ + M_i φ) dV` for each `i`.
///
/// Only the position derivatives of `φ` enter; the identity is meant for
/// test functions that do not depend on `v`.
pub fn lifted_first_variation_residual<const D: usize, M, F>(varifold: &OrientedVarifold<D>, mean: M, phi: &F) -> Vector<D>
where
    M: Fn(&Vector<D>, &Vector<D>) -> Vector<D>,
    F: TestFunction<D> + ?Sized,
{
    let mut sum = VectorSum::<D>::default();
    for atom in varifold.atoms() {
        let jet = phi.jet(&atom.x, &atom.v);
        let a = tangential_gradient(&atom.v, &jet.dx);
        let c = mean(&atom.x, &atom.v) * jet.value;
        sum.add(&((a + c) * atom.mass));
    }
    sum.value()
}

/// `Σ m [(δ_ij − v_i v_j) D_jφ + W_ia D*_aφ − (W_rr v_i + W_ri v_r) φ]` for each `i`.
///
/// `w` holds one matrix per atom. For `v`-independent `φ` this is the lifted
/// first-variation residual with `M = mean_from_w(W, v)`, bit for bit.
pub fn curvature_identity_residual<const D: usize, F>(
    varifold: &OrientedVarifold<D>,
    w: &[Matrix<D>],
    phi: &F,
) -> Result<Vector<D>>
where
    F: TestFunction<D> + ?Sized,
{
    check_len(varifold, w)?;
    let mut sum = VectorSum::<D>::default();
    for (atom, w) in varifold.atoms().iter().zip(w) {
        let jet = phi.jet(&atom.x, &atom.v);
        let a = tangential_gradient(&atom.v, &jet.dx);
        let b = w * jet.dv;
        let c = mean_from_w(w, &atom.v) * jet.value;
        sum.add(&((a + b + c) * atom.mass));
    }
    Ok(sum.value())
}

/// `Σ m [(δ_is − v_i v_s) D_sφ + W_ia D*_aφ + φ g(x) v_i]` for each `i`.
pub fn prescribed_mc_residual<const D: usize, G, F>(
    varifold: &OrientedVarifold<D>,
    w: &[Matrix<D>],
    g: G,
    phi: &F,
) -> Result<Vector<D>>
where
    G: Fn(&Vector<D>) -> f64,
    F: TestFunction<D> + ?Sized,
{
    check_len(varifold, w)?;
    let mut sum = VectorSum::<D>::default();
    for (atom, w) in varifold.atoms().iter().zip(w) {
        let jet = phi.jet(&atom.x, &atom.v);
        let a = tangential_gradient(&atom.v, &jet.dx);
        let b = w * jet.dv;
        let c = atom.v * (jet.value * g(&atom.x));
        sum.add(&((a + b + c) * atom.mass));
    }
    Ok(sum.value())
}

/// Residual of the curvature identity for a varifold inside a Riemannian ambient manifold:
/// `Σ m [P_sb D_sφ + D*_aφ W_ba + P_ir B̄_ir^b φ − S_rb (W_jr v_k + W_jk v_r) S_kj φ]`
/// with `P_ij = (δ_ik − v_i v_k) S_kj`, for each `b`.
pub fn riemannian_identity_residual<const D: usize, F>(
    varifold: &OrientedVarifold<D>,
    w: &[Matrix<D>],
    ambient: &AmbientManifold,
    phi: &F,
) -> Result<Vector<D>>
where
    F: TestFunction<D> + ?Sized,
{
    check_len(varifold, w)?;
    for (index, atom) in varifold.atoms().iter().enumerate() {
        ambient.check_atom(index, &atom.x, &atom.v)?;
    }
    let mut sum = VectorSum::<D>::default();
    for (atom, w) in varifold.atoms().iter().zip(w) {
        let (x, v) = (&atom.x, &atom.v);
        let jet = phi.jet(x, v);
        let s = ambient.projection(x);
        let p = (Matrix::<D>::identity() - v * v.transpose()) * s;
        let b_bar = ambient.b_bar(x);
        let mut term = Vector::<D>::zeros();
        for b in 0..D {
            let mut t = 0.0;
            for k in 0..D {
                t += p[(k, b)] * jet.dx[k] + jet.dv[k] * w[(b, k)];
            }
            let mut curvature = 0.0;
            for i in 0..D {
                for r in 0..D {
                    curvature += p[(i, r)] * b_bar[i][r][b];
                }
            }
            let mut mean = 0.0;
            for r in 0..D {
                for j in 0..D {
                    for k in 0..D {
                        mean += s[(r, b)] * (w[(j, r)] * v[k] + w[(j, k)] * v[r]) * s[(k, j)];
                    }
                }
            }
            term[b] = t + (curvature - mean) * jet.value;
        }
        sum.add(&(term * atom.mass));
    }
    Ok(sum.value())
}

/// `max over atoms of |φ| + |D φ| + |D* φ|`, the sampled `C¹` norm used for normalization.
pub fn sampled_c1_norm<const D: usize, F>(varifold: &OrientedVarifold<D>, phi: &F) -> f64
where
    F: TestFunction<D> + ?Sized,
{
    varifold.atoms().iter().fold(0.0, |acc, atom| {
        let jet = phi.jet(&atom.x, &atom.v);
        acc.max(jet.value.abs() + jet.dx.norm() + jet.dv.norm())
    })
}

/// `raw / (mass(V)·‖φ‖_C¹)`, or 0 when the denominator vanishes.
pub fn normalize(raw: f64, mass: f64, c1_norm: f64) -> f64 {
    let scale = mass * c1_norm;
    if scale > 0.0 {
        raw / scale
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdentityKind {
    LiftedFirstVariation,
    Curvature,
    PrescribedMeanCurvature,
    Riemannian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRecord {
    pub identity: IdentityKind,
    pub index: usize,
    pub basis_id: String,
    pub raw: f64,
    pub normalized: f64,
}

/// Evaluates `residual` on every basis function (in parallel, collected in
/// basis order) and returns one record per function and component.
pub fn residual_records<const D: usize, F, R>(
    varifold: &OrientedVarifold<D>,
    basis: &[F],
    identity: IdentityKind,
    residual: R,
) -> Result<Vec<ResidualRecord>>
where
    F: TestFunction<D>,
    R: Fn(&F) -> Result<Vector<D>> + Sync,
{
    let mass = varifold.mass();
    let per_function: Vec<Result<Vec<ResidualRecord>>> = basis
        .par_iter()
        .map(|phi| {
            let raw = residual(phi)?;
            let norm = sampled_c1_norm(varifold, phi);
            let id = phi.id();
            Ok((0..D)
                .map(|index| ResidualRecord {
                    identity,
                    index,
                    basis_id: id.clone(),
                    raw: raw[index],
                    normalized: normalize(raw[index], mass, norm),
                })
                .collect())
        })
        .collect();
    let mut out = Vec::with_capacity(basis.len() * D);
    for records in per_function {
        out.extend(records?);
    }
    Ok(out)
}

/// Largest `|normalized|` over a set of records (0 when empty).
pub fn max_normalized(records: &[ResidualRecord]) -> f64 {
    records.iter().fold(0.0, |acc, r| acc.max(r.normalized.abs()))
}

/// Largest `|raw|` over a set of records (0 when empty).
pub fn max_raw(records: &[ResidualRecord]) -> f64 {
    records.iter().fold(0.0, |acc, r| acc.max(r.raw.abs()))
}

#[cfg(test)]
mod tests;
