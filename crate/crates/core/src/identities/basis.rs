use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::test_function::BumpFunction;
use crate::varifold::OrientedVarifold;
use crate::{Error, Result, Vector};

/// Keeps only bumps whose support ball satisfies a containment condition.
///
/// Used for surfaces with boundary, where the identities hold only for test
/// functions supported away from the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SupportFilter {
    #[default]
    None,
    /// `|c − center| + ρ ≤ radius`.
    InsideBall { center: Vec<f64>, radius: f64 },
    /// `c·normal + ρ ≤ offset`.
    InsideHalfSpace { normal: Vec<f64>, offset: f64 },
}

impl SupportFilter {
    fn accepts<const D: usize>(&self, center: &Vector<D>, rho: f64) -> bool {
        match self {
            SupportFilter::None => true,
            SupportFilter::InsideBall { center: c0, radius } => {
                let d: f64 = (0..D).map(|k| (center[k] - c0[k]).powi(2)).sum::<f64>().sqrt();
                d + rho <= *radius + 1e-12
            }
            SupportFilter::InsideHalfSpace { normal, offset } => {
                let h: f64 = (0..D).map(|k| center[k] * normal[k]).sum();
                h + rho <= *offset + 1e-12
            }
        }
    }

    fn check(&self, d: usize) -> Result<()> {
        let len = match self {
            SupportFilter::None => return Ok(()),
            SupportFilter::InsideBall { center, .. } => center.len(),
            SupportFilter::InsideHalfSpace { normal, .. } => normal.len(),
        };
        if len != d {
            return Err(Error::Config(format!("support filter has {len} coordinates, expected {d}")));
        }
        Ok(())
    }
}

/// Test-basis specification.
///
/// Bump centers sit on a `grid^D` lattice spanning a cube (by default the
/// cube circumscribing the atom bounding box, sharing its center); the bump
/// radius is `rho_factor` times the lattice spacing. Every center carries all
/// `x`-monomials up to `x_degree` and all `v`-monomials up to `v_degree`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BasisConfig {
    pub grid: usize,
    pub rho_factor: f64,
    pub x_degree: u32,
    pub v_degree: u32,
    /// Explicit `[lo, hi]` cube corners; overrides the bounding box.
    pub domain: Option<(Vec<f64>, Vec<f64>)>,
    /// Random center offsets, as a fraction of the spacing (0 disables).
    pub jitter: f64,
    pub seed: u64,
    pub filter: SupportFilter,
}

impl Default for BasisConfig {
    fn default() -> Self {
        Self {
            grid: 5,
            rho_factor: 2.0,
            x_degree: 0,
            v_degree: 2,
            domain: None,
            jitter: 0.0,
            seed: 0,
            filter: SupportFilter::None,
        }
    }
}

/// A finite list of bump test functions plus a human-readable description.
#[derive(Debug, Clone)]
pub struct TestBasis<const D: usize> {
    pub functions: Vec<BumpFunction<D>>,
    pub description: String,
}

/// All multi-indices in `D` variables with total degree `≤ max_degree`, by degree.
pub fn multi_indices<const D: usize>(max_degree: u32) -> Vec<[u32; D]> {
    let mut out = Vec::new();
    for degree in 0..=max_degree {
        let mut current = [0u32; D];
        push_with_degree(&mut out, &mut current, 0, degree);
    }
    out
}

fn push_with_degree<const D: usize>(out: &mut Vec<[u32; D]>, current: &mut [u32; D], slot: usize, remaining: u32) {
    if slot == D - 1 {
        current[slot] = remaining;
        out.push(*current);
        return;
    }
    for p in (0..=remaining).rev() {
        current[slot] = p;
        push_with_degree(out, current, slot + 1, remaining - p);
    }
}

impl<const D: usize> TestBasis<D> {
    /// Basis on `config.domain`, or else on the cube circumscribing the atom bounding box.
    pub fn build(config: &BasisConfig, varifold: &OrientedVarifold<D>) -> Result<Self> {
        let (lo, hi) = match (&config.domain, varifold.bounding_box()) {
            (None, Some((lo, hi))) => {
                let center = (lo + hi) / 2.0;
                let half = ((hi - lo) / 2.0).max().max(1e-12);
                (center.add_scalar(-half), center.add_scalar(half))
            }
            (None, None) => return Err(Error::Config("cannot place a basis on an empty varifold".into())),
            (Some(_), _) => (Vector::zeros(), Vector::zeros()),
        };
        Self::build_on(config, lo, hi)
    }

    /// Basis on `config.domain`, or else on the cube `[lo, hi]`.
    pub fn build_on(config: &BasisConfig, lo: Vector<D>, hi: Vector<D>) -> Result<Self> {
        if config.grid == 0 {
            return Err(Error::Config("basis grid must be positive".into()));
        }
        if !(config.rho_factor > 0.0 && config.rho_factor.is_finite()) {
            return Err(Error::Config("basis rho_factor must be positive".into()));
        }
        if !(config.jitter >= 0.0 && config.jitter.is_finite()) {
            return Err(Error::Config("basis jitter must be nonnegative".into()));
        }
        config.filter.check(D)?;
        let (lo, hi) = match &config.domain {
            Some((l, h)) => {
                if l.len() != D || h.len() != D {
                    return Err(Error::Config(format!("basis domain needs {D} coordinates per corner")));
                }
                let (l, h) = (Vector::<D>::from_column_slice(l), Vector::<D>::from_column_slice(h));
                if (0..D).any(|k| !(l[k] < h[k])) {
                    return Err(Error::Config("basis domain corners must satisfy lo < hi".into()));
                }
                (l, h)
            }
            None => (lo, hi),
        };
        Ok(Self::on_box(config, lo, hi))
    }

    /// Basis on the cube `[lo, hi]` (uses the largest side for the spacing).
    pub fn on_box(config: &BasisConfig, lo: Vector<D>, hi: Vector<D>) -> Self {
        let grid = config.grid;
        let side = (hi - lo).max();
        let spacing = if grid > 1 { side / (grid - 1) as f64 } else { side };
        let rho = config.rho_factor * spacing;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let x_powers = multi_indices::<D>(config.x_degree);
        let v_powers = multi_indices::<D>(config.v_degree);
        let mut functions = Vec::new();
        for flat in 0..grid.pow(D as u32) {
            let mut rest = flat;
            let mut center = Vector::<D>::zeros();
            for k in 0..D {
                let step = if grid > 1 { (rest % grid) as f64 * (hi[k] - lo[k]) / (grid - 1) as f64 } else { 0.5 * (hi[k] - lo[k]) };
                center[k] = lo[k] + step;
                rest /= grid;
            }
            if config.jitter > 0.0 {
                for k in 0..D {
                    center[k] += config.jitter * spacing * rng.random_range(-1.0..=1.0);
                }
            }
            if !config.filter.accepts(&center, rho) {
                continue;
            }
            for p in &x_powers {
                for q in &v_powers {
                    functions.push(BumpFunction { center, radius: rho, x_powers: *p, v_powers: *q });
                }
            }
        }
        let description = format!(
            "{} bumps: grid {grid}^{D} on [{}, {}], rho {rho:.4}, x-degree {}, v-degree {}, filter {:?}",
            functions.len(),
            fmt_vec(&lo),
            fmt_vec(&hi),
            config.x_degree,
            config.v_degree,
            config.filter
        );
        Self { functions, description }
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// Restriction to functions that do not depend on `v`.
    pub fn v_independent(&self) -> Self {
        let functions: Vec<_> = self.functions.iter().copied().filter(|f| f.v_powers.iter().all(|&q| q == 0)).collect();
        Self { description: format!("{} (v-independent part, {} functions)", self.description, functions.len()), functions }
    }
}

fn fmt_vec<const D: usize>(v: &Vector<D>) -> String {
    let parts: Vec<String> = v.iter().map(|c| format!("{c:.4}")).collect();
    format!("({})", parts.join(","))
}
