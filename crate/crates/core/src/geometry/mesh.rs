//! Oriented simplicial meshes (segments in ℝ², triangles in ℝ³) read from ASCII OFF.

use std::collections::HashMap;
use std::path::Path;

use super::{cross, Local, QuadratureOrder, SurfacePoint, PROJECTION_TOLERANCE};
use crate::numeric::normal_projection;
use crate::{Error, Matrix, Result, Vector};

/// A mesh whose elements have `D` vertices each.
///
/// Element normals follow the vertex order: the left normal of a segment
/// `(p0, p1)` and `(p1 − p0) × (p2 − p0)` for a triangle.
#[derive(Debug, Clone)]
pub struct Mesh<const D: usize> {
    vertices: Vec<Vector<D>>,
    elements: Vec<[usize; D]>,
    vertex_normals: Vec<Vector<D>>,
}

impl<const D: usize> Mesh<D> {
    pub fn empty() -> Self {
        Self { vertices: Vec::new(), elements: Vec::new(), vertex_normals: Vec::new() }
    }

    /// Builds a mesh after checking that adjacent elements agree on orientation.
    ///
    /// Inconsistent input is rejected rather than repaired.
    pub fn new(vertices: Vec<Vector<D>>, elements: Vec<[usize; D]>) -> Result<Self> {
        for (e, el) in elements.iter().enumerate() {
            if let Some(&bad) = el.iter().find(|&&i| i >= vertices.len()) {
                return Err(Error::Config(format!("element {e} references missing vertex {bad}")));
            }
        }
        check_orientation(&elements)?;
        let mut mesh = Self { vertices, elements, vertex_normals: Vec::new() };
        mesh.vertex_normals = mesh.compute_vertex_normals();
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Vector<D>] {
        &self.vertices
    }

    pub fn elements(&self) -> &[[usize; D]] {
        &self.elements
    }

    pub fn read_off(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_off(&text)
    }

    /// Parses ASCII OFF. Faces must have `D` vertices (segments in ℝ², triangles in ℝ³).
    pub fn parse_off(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| ((i + 1) as u64, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let parse_err = |line: u64, message: String| Error::Parse { line, message };

        let (line, header) = lines.next().ok_or_else(|| parse_err(1, "empty OFF file".into()))?;
        if header != "OFF" {
            return Err(parse_err(line, format!("expected `OFF` header, found `{header}`")));
        }
        let (line, counts) = lines.next().ok_or_else(|| parse_err(line, "missing counts line".into()))?;
        let counts: Vec<usize> = counts
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(line, format!("bad count `{t}`"))))
            .collect::<Result<_>>()?;
        if counts.len() < 2 {
            return Err(parse_err(line, "expected `vertices faces [edges]`".into()));
        }
        let (nv, nf) = (counts[0], counts[1]);

        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (line, l) = lines.next().ok_or_else(|| parse_err(line, "missing vertex line".into()))?;
            let coords: Vec<f64> = l
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| parse_err(line, format!("bad coordinate `{t}`"))))
                .collect::<Result<_>>()?;
            if coords.len() < D {
                return Err(parse_err(line, format!("expected at least {D} coordinates")));
            }
            if coords[D..].iter().any(|&c| c != 0.0) {
                return Err(parse_err(line, format!("vertex has nonzero coordinates beyond dimension {D}")));
            }
            vertices.push(Vector::<D>::from_fn(|i, _| coords[i]));
        }
        let mut elements = Vec::with_capacity(nf);
        for _ in 0..nf {
            let (line, l) = lines.next().ok_or_else(|| parse_err(line, "missing face line".into()))?;
            let ids: Vec<usize> = l
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| parse_err(line, format!("bad index `{t}`"))))
                .collect::<Result<_>>()?;
            if ids.first() != Some(&D) || ids.len() != D + 1 {
                return Err(parse_err(line, format!("expected faces with exactly {D} vertices")));
            }
            let mut el = [0usize; D];
            el.copy_from_slice(&ids[1..]);
            if let Some(&bad) = el.iter().find(|&&i| i >= nv) {
                return Err(parse_err(line, format!("vertex index {bad} out of range")));
            }
            elements.push(el);
        }
        Self::new(vertices, elements)
    }

    /// Unit normal and measure of element `e` (measure may be zero for degenerate elements).
    pub fn element_frame(&self, e: usize) -> (Vector<D>, f64) {
        let el = &self.elements[e];
        let p0 = self.vertices[el[0]];
        if D == 2 {
            let t = self.vertices[el[1]] - p0;
            let len = t.norm();
            let mut n = Vector::<D>::zeros();
            n[0] = -t[1];
            n[1] = t[0];
            (if len > 0.0 { n / len } else { n }, len)
        } else {
            let c = cross(&(self.vertices[el[1]] - p0), &(self.vertices[el[2]] - p0));
            let len = c.norm();
            (if len > 0.0 { c / len } else { c }, 0.5 * len)
        }
    }

    pub fn total_measure(&self) -> f64 {
        (0..self.elements.len()).map(|e| self.element_frame(e).1).sum()
    }

    fn compute_vertex_normals(&self) -> Vec<Vector<D>> {
        let mut acc = vec![Vector::<D>::zeros(); self.vertices.len()];
        for e in 0..self.elements.len() {
            let (n, m) = self.element_frame(e);
            for &v in &self.elements[e] {
                acc[v] += n * m;
            }
        }
        acc.into_iter().map(|n| if n.norm() > 0.0 { n.normalize() } else { n }).collect()
    }

    /// Shape operator fitted on element `e` from linearly interpolated vertex normals,
    /// then symmetrized and projected onto the element tangent space.
    fn element_curvature(&self, e: usize) -> Matrix<D> {
        let el = &self.elements[e];
        let (normal, _) = self.element_frame(e);
        let p0 = self.vertices[el[0]];
        let n0 = self.vertex_normals[el[0]];
        let k = D - 1;
        let tangents: Vec<Vector<D>> = (1..D).map(|j| self.vertices[el[j]] - p0).collect();
        let deltas: Vec<Vector<D>> = (1..D).map(|j| self.vertex_normals[el[j]] - n0).collect();
        let mut g = [[0.0; 2]; 2];
        for a in 0..k {
            for b in 0..k {
                g[a][b] = tangents[a].dot(&tangents[b]);
            }
        }
        let ginv = if k == 1 {
            [[1.0 / g[0][0], 0.0], [0.0, 0.0]]
        } else {
            let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
            [[g[1][1] / det, -g[0][1] / det], [-g[1][0] / det, g[0][0] / det]]
        };
        let mut w = Matrix::<D>::zeros();
        for a in 0..k {
            for b in 0..k {
                w += tangents[a] * deltas[b].transpose() * ginv[a][b];
            }
        }
        let p = normal_projection(&normal);
        p * (w + w.transpose()) * 0.5 * p
    }

    pub(crate) fn locate(&self, x: &Vector<D>) -> Result<Local<D>> {
        let mut best = f64::INFINITY;
        for e in 0..self.elements.len() {
            let d = self.distance_to_element(e, x);
            if d <= PROJECTION_TOLERANCE {
                let (normal, _) = self.element_frame(e);
                return Ok(Local { normal, curvature: self.element_curvature(e) });
            }
            best = best.min(d);
        }
        Err(Error::OffSurface { distance: best, tolerance: PROJECTION_TOLERANCE })
    }

    fn distance_to_element(&self, e: usize, x: &Vector<D>) -> f64 {
        let el = &self.elements[e];
        let p0 = self.vertices[el[0]];
        let (normal, _) = self.element_frame(e);
        let d = x - p0;
        let height = d.dot(&normal).abs();
        let in_plane = d - normal * d.dot(&normal);
        // Barycentric coordinates of the in-plane projection.
        let edges: Vec<Vector<D>> = (1..D).map(|j| self.vertices[el[j]] - p0).collect();
        let outside = if D == 2 {
            let len2 = edges[0].norm_squared();
            let s = in_plane.dot(&edges[0]) / len2;
            (-s).max(s - 1.0).max(0.0) * len2.sqrt()
        } else {
            let (e1, e2) = (edges[0], edges[1]);
            let (a, b, c) = (e1.dot(&e1), e1.dot(&e2), e2.dot(&e2));
            let (r1, r2) = (in_plane.dot(&e1), in_plane.dot(&e2));
            let det = a * c - b * b;
            let s = (c * r1 - b * r2) / det;
            let t = (a * r2 - b * r1) / det;
            let scale = a.max(c).sqrt();
            (-s).max(-t).max(s + t - 1.0).max(0.0) * scale
        };
        height.max(outside)
    }

    pub(crate) fn quadrature_points(&self, order: QuadratureOrder) -> Result<Vec<SurfacePoint<D>>> {
        let mut out = Vec::new();
        for (e, el) in self.elements.iter().enumerate() {
            let (normal, measure) = self.element_frame(e);
            if !(measure > 0.0) {
                return Err(Error::DegenerateElement { element: e, measure });
            }
            let p: Vec<Vector<D>> = el.iter().map(|&i| self.vertices[i]).collect();
            let points: Vec<(Vector<D>, f64)> = match (order, D) {
                (QuadratureOrder::Midpoint, _) => {
                    let c = p.iter().fold(Vector::<D>::zeros(), |a, b| a + b) / D as f64;
                    vec![(c, 1.0)]
                }
                (QuadratureOrder::MultiPoint, 2) => {
                    let off = 0.5 / 3f64.sqrt();
                    vec![
                        (p[0] + (p[1] - p[0]) * (0.5 - off), 0.5),
                        (p[0] + (p[1] - p[0]) * (0.5 + off), 0.5),
                    ]
                }
                (QuadratureOrder::MultiPoint, _) => vec![
                    ((p[0] + p[1]) * 0.5, 1.0 / 3.0),
                    ((p[1] + p[2]) * 0.5, 1.0 / 3.0),
                    ((p[2] + p[0]) * 0.5, 1.0 / 3.0),
                ],
            };
            for (x, w) in points {
                out.push(SurfacePoint { x, base_normal: normal, measure: w * measure });
            }
        }
        Ok(out)
    }
}

/// Each directed facet (edge of a triangle, endpoint of a segment) may appear at most once;
/// a repeat means two neighbors traverse it the same way.
fn check_orientation<const D: usize>(elements: &[[usize; D]]) -> Result<()> {
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    for (e, el) in elements.iter().enumerate() {
        let keys: Vec<(usize, usize)> = if D == 2 {
            // (vertex, role): role 0 = start, 1 = end
            vec![(el[0], 0), (el[1], 1)]
        } else {
            (0..D).map(|k| (el[k], el[(k + 1) % D])).collect()
        };
        for key in keys {
            if let Some(&first) = seen.get(&key) {
                return Err(Error::InconsistentOrientation { first, second: e });
            }
            seen.insert(key, e);
        }
    }
    Ok(())
}
