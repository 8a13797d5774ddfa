use std::f64::consts::{FRAC_PI_2, PI, TAU};

use super::mesh::Mesh;
use super::{tangent_basis, Local, QuadratureOrder, QuadratureRule, SurfacePoint, PROJECTION_TOLERANCE};
use crate::{Error, Matrix, Result, Vector};

/// Surface catalog.
///
/// Angles are in radians. Polar angles are measured from the last coordinate
/// axis (`+e₃` in ℝ³, `+e₂` in ℝ²).
#[derive(Debug, Clone)]
pub enum Shape<const D: usize> {
    /// Flat disc (segment when `D = 2`) of the given radius (half-length).
    Plane { center: Vector<D>, normal: Vector<D>, radius: f64 },
    /// Round sphere (circle when `D = 2`), optionally restricted to a polar band.
    Sphere { center: Vector<D>, radius: f64, polar_range: (f64, f64) },
    /// Torus with axis `e₃`. `D = 3` only.
    Torus { center: Vector<D>, major: f64, minor: f64 },
    /// Graph of the quadratic `a·u² + b·u·w + c·w²` over the disc of given radius
    /// (`a·u²` over `[−radius, radius]` when `D = 2`).
    Graph { coefficients: [f64; 3], radius: f64 },
    /// Circle of constant polar angle on the unit sphere `S² ⊂ ℝ³`. `D = 3` only.
    LatitudeCircle { polar_angle: f64 },
    Mesh(Mesh<D>),
}

impl<const D: usize> Shape<D> {
    pub fn sphere(center: Vector<D>, radius: f64) -> Self {
        let polar_range = if D == 2 { (0.0, TAU) } else { (0.0, PI) };
        Shape::Sphere { center, radius, polar_range }
    }

    pub fn plane(center: Vector<D>, normal: Vector<D>, radius: f64) -> Self {
        Shape::Plane { center, normal, radius }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if D != 2 && D != 3 {
            return Err(Error::Unsupported(format!("ambient dimension {D}")));
        }
        let positive = |name: &str, value: f64| {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {value}")))
            }
        };
        match self {
            Shape::Plane { normal, radius, .. } => {
                positive("radius", *radius)?;
                if (normal.norm() - 1.0).abs() > 1e-12 {
                    return Err(Error::Config("plane normal must be a unit vector".into()));
                }
            }
            Shape::Sphere { radius, polar_range: (lo, hi), .. } => {
                positive("radius", *radius)?;
                let max = if D == 2 { TAU } else { PI };
                if !(0.0 <= *lo && lo < hi && *hi <= max) {
                    return Err(Error::Config(format!("polar range ({lo}, {hi}) outside [0, {max}]")));
                }
            }
            Shape::Torus { major, minor, .. } => {
                if D != 3 {
                    return Err(Error::Unsupported("tori need ambient dimension 3".into()));
                }
                positive("major radius", *major)?;
                positive("minor radius", *minor)?;
                if minor >= major {
                    return Err(Error::Config("torus minor radius must be below the major radius".into()));
                }
            }
            Shape::Graph { radius, coefficients } => {
                positive("radius", *radius)?;
                if coefficients.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Config("graph coefficients must be finite".into()));
                }
            }
            Shape::LatitudeCircle { polar_angle } => {
                if D != 3 {
                    return Err(Error::Unsupported("latitude circles live on S² ⊂ ℝ³".into()));
                }
                if !(*polar_angle > 0.0 && *polar_angle < PI) {
                    return Err(Error::Config(format!("polar angle {polar_angle} outside (0, π)")));
                }
            }
            Shape::Mesh(_) => {}
        }
        Ok(())
    }

    pub(crate) fn area(&self) -> Option<f64> {
        match self {
            Shape::Plane { radius, .. } => Some(if D == 2 { 2.0 * radius } else { PI * radius * radius }),
            Shape::Sphere { radius, polar_range: (lo, hi), .. } => Some(if D == 2 {
                radius * (hi - lo)
            } else {
                TAU * radius * radius * (lo.cos() - hi.cos())
            }),
            Shape::Torus { major, minor, .. } => Some(4.0 * PI * PI * major * minor),
            Shape::Graph { .. } => None,
            Shape::LatitudeCircle { polar_angle } => Some(TAU * polar_angle.sin()),
            Shape::Mesh(mesh) => Some(mesh.total_measure()),
        }
    }

    /// Verifies `x` lies on the shape and returns the base normal and shape operator there.
    pub(crate) fn locate(&self, x: &Vector<D>) -> Result<Local<D>> {
        let tol = PROJECTION_TOLERANCE;
        let off = |distance: f64| Error::OffSurface { distance, tolerance: tol };
        match self {
            Shape::Plane { center, normal, radius } => {
                let d = x - center;
                let height = d.dot(normal);
                let radial = (d - normal * height).norm();
                let distance = height.abs().max(radial - radius);
                if distance > tol {
                    return Err(off(distance));
                }
                Ok(Local { normal: *normal, curvature: Matrix::zeros() })
            }
            Shape::Sphere { center, radius, polar_range } => {
                let d = x - center;
                let r = d.norm();
                let mut distance = (r - radius).abs();
                if r > 0.0 {
                    let theta = polar_angle_of(&d);
                    let (lo, hi) = *polar_range;
                    let outside = (lo - theta).max(theta - hi).max(0.0);
                    distance = distance.max(outside * radius);
                }
                if distance > tol || r == 0.0 {
                    return Err(off(distance));
                }
                let normal = d / r;
                let p = crate::numeric::normal_projection(&normal);
                Ok(Local { normal, curvature: p / *radius })
            }
            Shape::Torus { center, major, minor } => {
                let d = x - center;
                let rho = (d[0] * d[0] + d[1] * d[1]).sqrt();
                let dist = ((rho - major).powi(2) + d[2] * d[2]).sqrt();
                let distance = (dist - minor).abs();
                if distance > tol || rho == 0.0 {
                    return Err(off(distance));
                }
                let phi = d[1].atan2(d[0]);
                let psi = d[2].atan2(rho - major);
                let (sp, cp) = phi.sin_cos();
                let (ss, cs) = psi.sin_cos();
                let normal = vec3::<D>(cs * cp, cs * sp, ss);
                let e_phi = vec3::<D>(-sp, cp, 0.0);
                let e_psi = vec3::<D>(-ss * cp, -ss * sp, cs);
                let k_phi = cs / (major + minor * cs);
                let curvature = e_psi * e_psi.transpose() / *minor + e_phi * e_phi.transpose() * k_phi;
                Ok(Local { normal, curvature })
            }
            Shape::Graph { coefficients, radius } => {
                let [a, b, c] = *coefficients;
                if D == 2 {
                    let u = x[0];
                    let distance = (x[1] - a * u * u).abs().max(u.abs() - radius);
                    if distance > tol {
                        return Err(off(distance));
                    }
                    Ok(graph_local_2d(a, u))
                } else {
                    let (u, w) = (x[0], x[1]);
                    let height = a * u * u + b * u * w + c * w * w;
                    let distance = (x[2] - height).abs().max((u * u + w * w).sqrt() - radius);
                    if distance > tol {
                        return Err(off(distance));
                    }
                    Ok(graph_local_3d(*coefficients, u, w))
                }
            }
            Shape::LatitudeCircle { polar_angle } => {
                let (s0, c0) = polar_angle.sin_cos();
                let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
                if rho == 0.0 {
                    return Err(off(s0));
                }
                let closest = vec3::<D>(s0 * x[0] / rho, s0 * x[1] / rho, c0);
                let distance = (x - closest).norm();
                if distance > tol {
                    return Err(off(distance));
                }
                let (sp, cp) = (x[1] / rho, x[0] / rho);
                let normal = vec3::<D>(c0 * cp, c0 * sp, -s0);
                let t = vec3::<D>(-sp, cp, 0.0);
                Ok(Local { normal, curvature: t * t.transpose() * (c0 / s0) })
            }
            Shape::Mesh(mesh) => mesh.locate(x),
        }
    }

    pub(crate) fn quadrature_points(&self, rule: &QuadratureRule) -> Result<Vec<SurfacePoint<D>>> {
        if let Shape::Mesh(mesh) = self {
            return mesh.quadrature_points(rule.order);
        }
        if rule.resolution == 0 {
            return Err(Error::Config("quadrature resolution must be positive".into()));
        }
        let axes = self.param_axes();
        let nodes: Vec<Vec<(f64, f64)>> = axes.iter().map(|a| a.nodes(rule)).collect();
        let mut out = Vec::new();
        match nodes.len() {
            1 => {
                for (k, &(u, w)) in nodes[0].iter().enumerate() {
                    out.push(self.param_point(&[u], w, k)?);
                }
            }
            2 => {
                let inner = nodes[1].len();
                for (k0, &(u0, w0)) in nodes[0].iter().enumerate() {
                    for (k1, &(u1, w1)) in nodes[1].iter().enumerate() {
                        out.push(self.param_point(&[u0, u1], w0 * w1, k0 * inner + k1)?);
                    }
                }
            }
            _ => unreachable!(),
        }
        Ok(out)
    }

    fn param_axes(&self) -> Vec<ParamAxis> {
        match self {
            Shape::Plane { radius, .. } | Shape::Graph { radius, .. } => {
                if D == 2 {
                    vec![ParamAxis::linear(-radius, *radius)]
                } else {
                    vec![ParamAxis::linear(0.0, *radius), ParamAxis::angular(0.0, TAU)]
                }
            }
            Shape::Sphere { polar_range: (lo, hi), .. } => {
                if D == 2 {
                    vec![ParamAxis::angular(*lo, *hi)]
                } else {
                    vec![ParamAxis::angular(*lo, *hi), ParamAxis::angular(0.0, TAU)]
                }
            }
            Shape::Torus { .. } => vec![ParamAxis::angular(0.0, TAU), ParamAxis::angular(0.0, TAU)],
            Shape::LatitudeCircle { .. } => vec![ParamAxis::angular(0.0, TAU)],
            Shape::Mesh(_) => unreachable!(),
        }
    }

    /// Position, base normal and area element at parameter `u`, times `weight`.
    fn param_point(&self, u: &[f64], weight: f64, element: usize) -> Result<SurfacePoint<D>> {
        let (x, base_normal, jacobian) = match self {
            Shape::Plane { center, normal, .. } => {
                let t = tangent_basis(normal);
                if D == 2 {
                    (center + t[0] * u[0], *normal, 1.0)
                } else {
                    let (s, c) = u[1].sin_cos();
                    (center + (t[0] * c + t[1] * s) * u[0], *normal, u[0])
                }
            }
            Shape::Sphere { center, radius, .. } => {
                let (st, ct) = u[0].sin_cos();
                if D == 2 {
                    let n = vec2::<D>(st, ct);
                    (center + n * *radius, n, *radius)
                } else {
                    let (sp, cp) = u[1].sin_cos();
                    let n = vec3::<D>(st * cp, st * sp, ct);
                    (center + n * *radius, n, radius * radius * st)
                }
            }
            Shape::Torus { center, major, minor } => {
                let (sp, cp) = u[0].sin_cos();
                let (ss, cs) = u[1].sin_cos();
                let ring = major + minor * cs;
                let x = center + vec3::<D>(ring * cp, ring * sp, minor * ss);
                (x, vec3::<D>(cs * cp, cs * sp, ss), minor * ring)
            }
            Shape::Graph { coefficients, .. } => {
                let [a, b, c] = *coefficients;
                if D == 2 {
                    let s = u[0];
                    let slope = 2.0 * a * s;
                    let norm = (1.0 + slope * slope).sqrt();
                    (vec2::<D>(s, a * s * s), vec2::<D>(-slope, 1.0) / norm, norm)
                } else {
                    let (sp, cp) = u[1].sin_cos();
                    let (p, q) = (u[0] * cp, u[0] * sp);
                    let (fu, fw) = (2.0 * a * p + b * q, b * p + 2.0 * c * q);
                    let norm = (1.0 + fu * fu + fw * fw).sqrt();
                    let x = vec3::<D>(p, q, a * p * p + b * p * q + c * q * q);
                    (x, vec3::<D>(-fu, -fw, 1.0) / norm, u[0] * norm)
                }
            }
            Shape::LatitudeCircle { polar_angle } => {
                let (s0, c0) = polar_angle.sin_cos();
                let (sp, cp) = u[0].sin_cos();
                (vec3::<D>(s0 * cp, s0 * sp, c0), vec3::<D>(c0 * cp, c0 * sp, -s0), s0)
            }
            Shape::Mesh(_) => unreachable!(),
        };
        let measure = jacobian * weight;
        if !(measure > 0.0) {
            return Err(Error::DegenerateElement { element, measure });
        }
        Ok(SurfacePoint { x, base_normal, measure })
    }
}

fn graph_local_2d<const D: usize>(a: f64, u: f64) -> Local<D> {
    let slope = 2.0 * a * u;
    let s = (1.0 + slope * slope).sqrt();
    let normal = vec2::<D>(-slope, 1.0) / s;
    let xu = vec2::<D>(1.0, slope);
    let p = crate::numeric::normal_projection(&normal);
    let dnu = p * vec2::<D>(-2.0 * a, 0.0) / s;
    Local { normal, curvature: xu * dnu.transpose() / (s * s) }
}

fn graph_local_3d<const D: usize>(coefficients: [f64; 3], u: f64, w: f64) -> Local<D> {
    let [a, b, c] = coefficients;
    let (fu, fw) = (2.0 * a * u + b * w, b * u + 2.0 * c * w);
    let big_n = vec3::<D>(-fu, -fw, 1.0);
    let s = big_n.norm();
    let normal = big_n / s;
    let p = crate::numeric::normal_projection(&normal);
    let tangents = [vec3::<D>(1.0, 0.0, fu), vec3::<D>(0.0, 1.0, fw)];
    let dnormal = [p * vec3::<D>(-2.0 * a, -b, 0.0) / s, p * vec3::<D>(-b, -2.0 * c, 0.0) / s];
    let g = [[1.0 + fu * fu, fu * fw], [fu * fw, 1.0 + fw * fw]];
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let ginv = [[g[1][1] / det, -g[0][1] / det], [-g[1][0] / det, g[0][0] / det]];
    let mut curvature = Matrix::<D>::zeros();
    for al in 0..2 {
        for be in 0..2 {
            curvature += tangents[al] * dnormal[be].transpose() * ginv[al][be];
        }
    }
    Local { normal, curvature }
}

/// Polar angle of `d` from the last coordinate axis; in `[0, 2π)` for `D = 2`.
fn polar_angle_of<const D: usize>(d: &Vector<D>) -> f64 {
    if D == 2 {
        d[0].atan2(d[1]).rem_euclid(TAU)
    } else {
        let rho = (d[0] * d[0] + d[1] * d[1]).sqrt();
        rho.atan2(d[2])
    }
}

fn vec2<const D: usize>(a: f64, b: f64) -> Vector<D> {
    let mut v = Vector::<D>::zeros();
    v[0] = a;
    v[1] = b;
    v
}

fn vec3<const D: usize>(a: f64, b: f64, c: f64) -> Vector<D> {
    let mut v = Vector::<D>::zeros();
    v[0] = a;
    v[1] = b;
    v[2] = c;
    v
}

#[derive(Debug, Clone, Copy)]
struct ParamAxis {
    lo: f64,
    hi: f64,
    angular: bool,
}

impl ParamAxis {
    fn linear(lo: f64, hi: f64) -> Self {
        Self { lo, hi, angular: false }
    }

    fn angular(lo: f64, hi: f64) -> Self {
        Self { lo, hi, angular: true }
    }

    fn cells(&self, resolution: usize) -> usize {
        let len = self.hi - self.lo;
        let per_unit = if self.angular { resolution as f64 / FRAC_PI_2 } else { resolution as f64 };
        ((len * per_unit).round() as usize).max(1)
    }

    /// `(node, weight)` pairs for the rule; weights include the cell width.
    fn nodes(&self, rule: &QuadratureRule) -> Vec<(f64, f64)> {
        let cells = self.cells(rule.resolution);
        let h = (self.hi - self.lo) / cells as f64;
        let mut out = Vec::with_capacity(cells * 2);
        for k in 0..cells {
            let mid = self.lo + (k as f64 + 0.5) * h;
            match rule.order {
                QuadratureOrder::Midpoint => out.push((mid, h)),
                QuadratureOrder::MultiPoint => {
                    let off = 0.5 * h / 3f64.sqrt();
                    out.push((mid - off, 0.5 * h));
                    out.push((mid + off, 0.5 * h));
                }
            }
        }
        out
    }
}
