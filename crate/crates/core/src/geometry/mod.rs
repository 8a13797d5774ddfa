//! Analytic surface catalog, OFF meshes, and quadrature sampling into atoms.
//!
//! Every surface carries a base unit normal `ν₀` (outer normal for spheres and
//! tori, the given normal for planes, the upward normal for graphs, and the
//! southward polar direction `e_θ` for latitude circles on the unit sphere).
//! The orientation sign selects `ν = ±ν₀`. Analytic kinds provide the exact
//! shape operator `W_ia = δ_i ν_a` (tangential derivative of the normal) and are
//! the oracle for everything downstream.

mod analytic;
mod mesh;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use analytic::Shape;
pub use mesh::Mesh;

use crate::varifold::Atom;
use crate::{Error, Matrix, Result, Vector};

/// Absolute tolerance (length units) for a point to count as lying on a surface.
pub const PROJECTION_TOLERANCE: f64 = 1e-10;

/// Tolerance on `| |v·ν| − 1 |` for `v` to count as a unit normal.
pub const NORMAL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// `ν = ν₀`.
    Positive,
    /// `ν = −ν₀`.
    Negative,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Positive => 1.0,
            Orientation::Negative => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::Positive => Orientation::Negative,
            Orientation::Negative => Orientation::Positive,
        }
    }
}

/// Serialized as the integer `1` or `2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum QuadratureOrder {
    /// One point per element (midpoint / centroid).
    Midpoint,
    /// Several points per element: tensor 2-point Gauss on parametric cells,
    /// edge midpoints on triangles, 2-point Gauss on segments.
    MultiPoint,
}

impl TryFrom<u32> for QuadratureOrder {
    type Error = Error;

    fn try_from(order: u32) -> Result<Self> {
        Self::from_int(order)
    }
}

impl From<QuadratureOrder> for u32 {
    fn from(order: QuadratureOrder) -> u32 {
        order.as_int()
    }
}

impl QuadratureOrder {
    pub fn from_int(order: u32) -> Result<Self> {
        match order {
            1 => Ok(Self::Midpoint),
            2 => Ok(Self::MultiPoint),
            other => Err(Error::Config(format!("quadrature order must be 1 or 2, got {other}"))),
        }
    }

    pub fn as_int(self) -> u32 {
        match self {
            Self::Midpoint => 1,
            Self::MultiPoint => 2,
        }
    }
}

/// Quadrature sampling of an analytic surface.
///
/// `resolution` is the number of elements per quarter turn along angular
/// parameters (so a great circle gets `4·resolution` elements) and per unit
/// length along linear parameters. Meshes ignore it and use their own elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub resolution: usize,
    pub order: QuadratureOrder,
}

impl QuadratureRule {
    pub fn new(resolution: usize, order: QuadratureOrder) -> Self {
        Self { resolution, order }
    }

    pub fn midpoint(resolution: usize) -> Self {
        Self::new(resolution, QuadratureOrder::Midpoint)
    }
}

/// An oriented hypersurface (or, for latitude circles, a curve in the unit sphere).
#[derive(Debug, Clone)]
pub struct Hypersurface<const D: usize> {
    pub shape: Shape<D>,
    pub orientation: Orientation,
}

impl<const D: usize> Hypersurface<D> {
    pub fn new(shape: Shape<D>, orientation: Orientation) -> Result<Self> {
        shape.validate()?;
        Ok(Self { shape, orientation })
    }

    /// A surface with no elements.
    pub fn empty() -> Self {
        Self { shape: Shape::Mesh(Mesh::empty()), orientation: Orientation::Positive }
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    /// Dimension `n` of the surface itself.
    pub fn intrinsic_dim(&self) -> usize {
        match self.shape {
            Shape::LatitudeCircle { .. } => 1,
            _ => D - 1,
        }
    }

    /// Shape operators of meshes are fitted per element, not exact.
    pub fn is_curvature_approximate(&self) -> bool {
        matches!(self.shape, Shape::Mesh(_))
    }

    /// Closed-form area (length for curves) when available.
    pub fn area(&self) -> Option<f64> {
        self.shape.area()
    }

    /// The chosen unit normal `ν(x)`.
    pub fn unit_normal(&self, x: &Vector<D>) -> Result<Vector<D>> {
        let local = self.shape.locate(x)?;
        Ok(local.normal * self.orientation.sign())
    }

    /// Coefficients `W_ia = ±δ_i ν_a` at `(x, v)` with `v = ±ν(x)`.
    ///
    /// The sign follows `v`: the result is odd in `v`, symmetric, and
    /// annihilates `v`. Mesh surfaces return a per-element fit.
    pub fn geometric_curvature(&self, x: &Vector<D>, v: &Vector<D>) -> Result<Matrix<D>> {
        let local = self.shape.locate(x)?;
        let alignment = v.dot(&local.normal);
        if (alignment.abs() - 1.0).abs() > NORMAL_TOLERANCE {
            return Err(Error::NotNormal { alignment });
        }
        Ok(local.curvature * alignment.signum())
    }
}

/// Base normal and base shape operator at a located point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Local<const D: usize> {
    pub normal: Vector<D>,
    pub curvature: Matrix<D>,
}

/// A quadrature point on the surface before multiplicities are applied.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SurfacePoint<const D: usize> {
    pub x: Vector<D>,
    pub base_normal: Vector<D>,
    pub measure: f64,
}

/// Samples `surface` with constant multiplicities `θ1` on `(x, ν)` and `θ2` on `(x, −ν)`.
pub fn sample<const D: usize>(
    surface: &Hypersurface<D>,
    rule: &QuadratureRule,
    theta1: u32,
    theta2: u32,
) -> Result<Vec<Atom<D>>> {
    sample_with(surface, rule, |_| (theta1, theta2))
}

/// Samples `surface` with position-dependent multiplicities.
///
/// Each quadrature point with measure `dA` emits `(x, ν, θ1·dA)` when `θ1 > 0`
/// and then `(x, −ν, θ2·dA)` when `θ2 > 0`. Atoms come out in element order.
pub fn sample_with<const D: usize, F>(
    surface: &Hypersurface<D>,
    rule: &QuadratureRule,
    multiplicity: F,
) -> Result<Vec<Atom<D>>>
where
    F: Fn(&Vector<D>) -> (u32, u32) + Sync,
{
    let points = surface.shape.quadrature_points(rule)?;
    let sign = surface.orientation.sign();
    let atoms = points
        .par_iter()
        .map(|p| {
            let (t1, t2) = multiplicity(&p.x);
            let normal = p.base_normal * sign;
            let mut out = Vec::with_capacity(2);
            if t1 > 0 {
                out.push(Atom::new_unchecked(p.x, normal, t1 as f64 * p.measure));
            }
            if t2 > 0 {
                out.push(Atom::new_unchecked(p.x, -normal, t2 as f64 * p.measure));
            }
            out
        })
        .collect::<Vec<_>>();
    Ok(atoms.into_iter().flatten().collect())
}

/// Orthonormal completion of a unit vector (D = 2 or 3): columns span `v^⊥`.
pub(crate) fn tangent_basis<const D: usize>(v: &Vector<D>) -> Vec<Vector<D>> {
    match D {
        2 => vec![Vector::<D>::from_fn(|i, _| if i == 0 { v[1] } else { -v[0] })],
        3 => {
            let k = least_aligned_axis(v);
            let mut e = Vector::<D>::zeros();
            e[k] = 1.0;
            let t1 = (e - v * v.dot(&e)).normalize();
            let t2 = cross(v, &t1);
            vec![t1, t2]
        }
        _ => unreachable!("ambient dimension is 2 or 3"),
    }
}

/// Index of the coordinate axis with the smallest `|v_k|` (first one on ties).
pub(crate) fn least_aligned_axis<const D: usize>(v: &Vector<D>) -> usize {
    let mut best = 0;
    for k in 1..D {
        if v[k].abs() < v[best].abs() {
            best = k;
        }
    }
    best
}

/// Cross product for 3-vectors stored as `Vector<D>` with `D = 3`.
pub(crate) fn cross<const D: usize>(a: &Vector<D>, b: &Vector<D>) -> Vector<D> {
    debug_assert_eq!(D, 3);
    let mut c = Vector::<D>::zeros();
    c[0] = a[1] * b[2] - a[2] * b[1];
    c[1] = a[2] * b[0] - a[0] * b[2];
    c[2] = a[0] * b[1] - a[1] * b[0];
    c
}
