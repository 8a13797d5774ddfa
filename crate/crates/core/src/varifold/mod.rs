//! Oriented varifolds as finite atom measures on `Ω × Sⁿ`.
//!
//! An atom `(x, v, m)` is a point mass `m` at position `x` with oriented unit
//! normal `v`. A varifold `(R, ξ, θ1, θ2)` is discretized by sampling `R` and
//! folding the two multiplicities into atoms on the sheets `(x, ξ)` and `(x, −ξ)`.

mod csv_io;
mod distance;

use crate::numeric::{normal_projection, CompensatedSum};
use crate::{Error, Matrix, Result, Vector};

pub use csv_io::csv_dimension;
pub use distance::{bl_distance, DictionaryConfig, LipschitzDictionary, LipschitzFunction, VFactor, XFactor};

/// Tolerance on `| |v| − 1 |` for atom normals.
pub const UNIT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom<const D: usize> {
    pub x: Vector<D>,
    pub v: Vector<D>,
    pub mass: f64,
}

impl<const D: usize> Atom<D> {
    pub fn new(x: Vector<D>, v: Vector<D>, mass: f64) -> Result<Self> {
        let atom = Self { x, v, mass };
        atom.check().map_err(|reason| Error::InvalidAtom { index: 0, reason })?;
        Ok(atom)
    }

    pub(crate) fn new_unchecked(x: Vector<D>, v: Vector<D>, mass: f64) -> Self {
        Self { x, v, mass }
    }

    fn check(&self) -> std::result::Result<(), String> {
        if !(self.mass >= 0.0 && self.mass.is_finite()) {
            return Err(format!("mass {} is not a finite nonnegative number", self.mass));
        }
        if self.x.iter().any(|c| !c.is_finite()) {
            return Err("position is not finite".into());
        }
        let norm_err = (self.v.norm() - 1.0).abs();
        if !(norm_err <= UNIT_TOLERANCE) {
            return Err(format!("| |v| − 1 | = {norm_err:e} exceeds {UNIT_TOLERANCE:e}"));
        }
        Ok(())
    }
}

/// Image of an atom in the unoriented Grassmannian, with `P = I − v vᵀ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnorientedAtom<const D: usize> {
    pub x: Vector<D>,
    pub projection: Matrix<D>,
    pub mass: f64,
}

/// Result of integrating a function against a varifold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Number of atoms where the integrand was NaN or infinite.
    pub non_finite_terms: usize,
}

/// A finite oriented varifold: atoms plus the dimension `n` of the underlying surface.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientedVarifold<const D: usize> {
    atoms: Vec<Atom<D>>,
    dim: usize,
    provenance: String,
}

impl<const D: usize> OrientedVarifold<D> {
    pub fn new(atoms: Vec<Atom<D>>, dim: usize, provenance: impl Into<String>) -> Result<Self> {
        if dim == 0 || dim >= D {
            return Err(Error::Config(format!("surface dimension {dim} invalid in ambient dimension {D}")));
        }
        for (index, atom) in atoms.iter().enumerate() {
            atom.check().map_err(|reason| Error::InvalidAtom { index, reason })?;
        }
        Ok(Self { atoms, dim, provenance: provenance.into() })
    }

    /// Hypersurface varifold (`n = D − 1`).
    pub fn hypersurface(atoms: Vec<Atom<D>>, provenance: impl Into<String>) -> Result<Self> {
        Self::new(atoms, D - 1, provenance)
    }

    pub fn empty(dim: usize) -> Self {
        Self { atoms: Vec::new(), dim, provenance: "empty".into() }
    }

    pub fn atoms(&self) -> &[Atom<D>] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Total mass `‖V‖(Ω)`.
    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).collect::<CompensatedSum>().value()
    }

    /// `V(f) = Σ mass·f(x, v)` in atom order with compensated summation.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(&Vector<D>, &Vector<D>) -> f64,
    {
        self.integrate_flagged(f).value
    }

    /// Like [`integrate`](Self::integrate), also counting non-finite integrand values.
    pub fn integrate_flagged<F>(&self, f: F) -> Integral
    where
        F: Fn(&Vector<D>, &Vector<D>) -> f64,
    {
        let mut sum = CompensatedSum::new();
        let mut non_finite_terms = 0;
        for a in &self.atoms {
            let value = f(&a.x, &a.v);
            if !value.is_finite() {
                non_finite_terms += 1;
            }
            sum.add(a.mass * value);
        }
        let value = if non_finite_terms > 0 { f64::NAN } else { sum.value() };
        Integral { value, non_finite_terms }
    }

    /// The associated unoriented varifold `q♯V`.
    pub fn pushforward_unoriented(&self) -> Vec<UnorientedAtom<D>> {
        self.atoms
            .iter()
            .map(|a| UnorientedAtom { x: a.x, projection: normal_projection(&a.v), mass: a.mass })
            .collect()
    }

    /// Action of the associated current on the n-form `ι_Y vol`: `∫ v·Y(x) dV`.
    pub fn current_action<F>(&self, field: F) -> f64
    where
        F: Fn(&Vector<D>) -> Vector<D>,
    {
        self.integrate(|x, v| v.dot(&field(x)))
    }

    /// Sum of two measures (concatenated atom lists).
    pub fn union(&self, other: &Self) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        Self { atoms, dim: self.dim, provenance: format!("{} + {}", self.provenance, other.provenance) }
    }

    pub fn translated(&self, offset: &Vector<D>) -> Self {
        let atoms = self.atoms.iter().map(|a| Atom { x: a.x + offset, ..*a }).collect();
        Self { atoms, dim: self.dim, provenance: format!("{} translated", self.provenance) }
    }

    /// Applies an orthogonal map to positions and normals.
    pub fn rotated(&self, rotation: &Matrix<D>) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom { x: rotation * a.x, v: rotation * a.v, mass: a.mass })
            .collect();
        Self { atoms, dim: self.dim, provenance: format!("{} rotated", self.provenance) }
    }

    /// Axis-aligned bounding box of atom positions, or `None` when empty.
    pub fn bounding_box(&self) -> Option<(Vector<D>, Vector<D>)> {
        let first = self.atoms.first()?;
        let (mut lo, mut hi) = (first.x, first.x);
        for a in &self.atoms {
            lo = lo.inf(&a.x);
            hi = hi.sup(&a.x);
        }
        Some((lo, hi))
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        csv_io::write(self, writer)
    }

    pub fn read_csv<R: std::io::Read>(reader: R, provenance: impl Into<String>) -> Result<Self> {
        let atoms = csv_io::read::<D, R>(reader)?;
        Self::hypersurface(atoms, provenance)
    }
}
