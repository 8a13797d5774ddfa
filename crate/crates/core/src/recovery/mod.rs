//! Least-squares recovery of curvature coefficients and structural diagnostics.

mod field;
mod solve;

use serde::{Deserialize, Serialize};

pub use field::{Constraints, CurvatureField, FieldDiagnostics};
pub use solve::{recover_curvature, Patching, RecoveryConfig, RecoveryReport, Regularization, ILL_POSED_THRESHOLD};

pub use crate::identities::mean_from_w;
use crate::numeric::{frobenius_sq, CompensatedSum};
use crate::varifold::OrientedVarifold;
use crate::{Error, Matrix, Result, Vector};

/// Tolerance in `x` for two atoms to count as the two sheets of one point.
pub const PAIRING_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OddnessDefect {
    pub value: f64,
    pub pairs: usize,
    /// `"no-pairs"` when no atom has a partner on the opposite sheet.
    pub note: Option<String>,
}

/// Index pairs `(k, l)`, `k < l`, of atoms at the same point with opposite normals.
pub fn sheet_pairs<const D: usize>(varifold: &OrientedVarifold<D>) -> Vec<(usize, usize)> {
    let atoms = varifold.atoms();
    let mut order: Vec<usize> = (0..atoms.len()).collect();
    order.sort_by(|&a, &b| atoms[a].x[0].total_cmp(&atoms[b].x[0]).then(a.cmp(&b)));
    let mut taken = vec![false; atoms.len()];
    let mut pairs = Vec::new();
    for (pos, &k) in order.iter().enumerate() {
        if taken[k] {
            continue;
        }
        for &l in &order[pos + 1..] {
            if atoms[l].x[0] - atoms[k].x[0] > PAIRING_TOLERANCE {
                break;
            }
            if !taken[l]
                && (atoms[l].x - atoms[k].x).norm() <= PAIRING_TOLERANCE
                && atoms[l].v.dot(&atoms[k].v) <= -1.0 + 1e-9
            {
                taken[k] = true;
                taken[l] = true;
                pairs.push((k.min(l), k.max(l)));
                break;
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// `sqrt(Σ (m + m')|W + W'|² / Σ (m|W|² + m'|W'|²))` over sheet pairs.
///
/// An even field gives 2, an odd one 0.
pub fn oddness_defect<const D: usize>(varifold: &OrientedVarifold<D>, field: &CurvatureField<D>) -> OddnessDefect {
    let pairs = sheet_pairs(varifold);
    if pairs.is_empty() {
        return OddnessDefect { value: 0.0, pairs: 0, note: Some("no-pairs".into()) };
    }
    let atoms = varifold.atoms();
    let w = field.matrices();
    let mut num = CompensatedSum::new();
    let mut den = CompensatedSum::new();
    for &(k, l) in &pairs {
        let m = atoms[k].mass + atoms[l].mass;
        num.add(m * frobenius_sq(&(w[k] + w[l])));
        den.add(atoms[k].mass * frobenius_sq(&w[k]) + atoms[l].mass * frobenius_sq(&w[l]));
    }
    let den = den.value();
    let value = if den > 0.0 { (num.value() / den).sqrt() } else { 0.0 };
    OddnessDefect { value, pairs: pairs.len(), note: None }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureDefects {
    /// `‖W − Wᵀ‖ / ‖W‖` in `L²(V)`.
    pub symmetry: f64,
    /// `‖W v‖ / ‖W‖` in `L²(V)`.
    pub tangency: f64,
}

pub fn structure_defects<const D: usize>(varifold: &OrientedVarifold<D>, field: &CurvatureField<D>) -> StructureDefects {
    let w = field.matrices();
    let norm = weighted(varifold, |k| frobenius_sq(&w[k]));
    if norm == 0.0 {
        return StructureDefects { symmetry: 0.0, tangency: 0.0 };
    }
    let atoms = varifold.atoms();
    let sym = weighted(varifold, |k| frobenius_sq(&(w[k] - w[k].transpose())));
    let tan = weighted(varifold, |k| (w[k] * atoms[k].v).norm_squared());
    StructureDefects { symmetry: (sym / norm).sqrt(), tangency: (tan / norm).sqrt() }
}

/// `‖W − W_ref‖ / ‖W_ref‖` in `L²(V)` (Frobenius norm per atom).
pub fn relative_l2_error<const D: usize>(
    varifold: &OrientedVarifold<D>,
    field: &CurvatureField<D>,
    reference: &CurvatureField<D>,
) -> f64 {
    let (w, r) = (field.matrices(), reference.matrices());
    let den = weighted(varifold, |k| frobenius_sq(&r[k]));
    let num = weighted(varifold, |k| frobenius_sq(&(w[k] - r[k])));
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}

/// `(∫ |W|^q dV)^{1/q}` with the Frobenius norm per atom.
pub fn lq_norm<const D: usize>(varifold: &OrientedVarifold<D>, field: &CurvatureField<D>, q: f64) -> f64 {
    let w = field.matrices();
    weighted(varifold, |k| frobenius_sq(&w[k]).sqrt().powf(q)).powf(1.0 / q)
}

fn weighted<const D: usize, F: Fn(usize) -> f64>(varifold: &OrientedVarifold<D>, f: F) -> f64 {
    varifold.atoms().iter().enumerate().map(|(k, a)| a.mass * f(k)).collect::<CompensatedSum>().value()
}

/// `H = (θ1 M(x, ξ) + θ2 M(x, −ξ)) / (θ1 + θ2)`.
pub fn average_mean_curvature<const D: usize, M>(xi: &Vector<D>, theta1: f64, theta2: f64, mean: M) -> Result<Vector<D>>
where
    M: Fn(&Vector<D>) -> Vector<D>,
{
    let total = theta1 + theta2;
    if total == 0.0 {
        return Err(Error::ZeroMultiplicity);
    }
    if theta2 == 0.0 {
        return Ok(mean(xi));
    }
    if theta1 == 0.0 {
        return Ok(mean(&-xi));
    }
    let mut h = Vector::<D>::zeros();
    h += mean(xi) * theta1;
    h += mean(&-xi) * theta2;
    Ok(h / total)
}

/// Rank-3 array indexed `[i][j][p]`.
pub type Tensor3<const D: usize> = [[[f64; D]; D]; D];

/// `A_ijp = −(W_ip v_j + W_ij v_p)`, symmetric in `(j, p)` by construction.
///
/// The trace `Σ_j A_ijj = −2 (W v)_i` vanishes for tangential `W`.
pub fn to_hutchinson<const D: usize>(w: &Matrix<D>, v: &Vector<D>) -> Tensor3<D> {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| std::array::from_fn(|p| -(w[(i, p)] * v[j] + w[(i, j)] * v[p])))
    })
}

/// `W_ia = −P_ad A_idp v_p` with `P = I − v vᵀ`.
///
/// Inverts [`to_hutchinson`] on symmetric tangential `W`. For other `W` it
/// returns a projected part: the `v`-component of each row is removed.
pub fn from_hutchinson<const D: usize>(a: &Tensor3<D>, v: &Vector<D>) -> Matrix<D> {
    let p = crate::numeric::normal_projection(v);
    Matrix::<D>::from_fn(|i, col| {
        let mut s = 0.0;
        for d in 0..D {
            let mut inner = 0.0;
            for q in 0..D {
                inner += a[i][d][q] * v[q];
            }
            s += p[(col, d)] * inner;
        }
        -s
    })
}
