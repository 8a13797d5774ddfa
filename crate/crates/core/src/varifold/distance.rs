//! Dictionary lower bound for the bounded-Lipschitz distance between atom measures.
//!
//! The true distance is a supremum over all 1-Lipschitz, 1-bounded functions on
//! `Ω × ℝ^{n+1}`; here the supremum runs over a fixed dictionary, so the value
//! is a lower bound. Dictionary functions are products `s·α(x)·β(v)` of a tent
//! in `x` (flat, along a coordinate, or across a sphere of given center and
//! radius) and `β ∈ {1, v_a}`, rescaled so that the product is 1-Lipschitz.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::OrientedVarifold;
use crate::{Error, Result, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XFactor<const D: usize> {
    Constant,
    /// `max(0, w − |x_axis − c|)`.
    CoordinateTent { axis: usize, center: f64 },
    /// `max(0, w − | |x − c| − r |)`.
    ShellTent { center: Vector<D>, radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VFactor {
    One,
    Component(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzFunction<const D: usize> {
    pub x_factor: XFactor<D>,
    pub v_factor: VFactor,
    pub width: f64,
}

impl<const D: usize> LipschitzFunction<D> {
    fn scale(&self) -> f64 {
        1.0 / (1.0 + self.width * self.width).sqrt()
    }

    pub fn eval(&self, x: &Vector<D>, v: &Vector<D>) -> f64 {
        let w = self.width;
        let alpha = match self.x_factor {
            XFactor::Constant => w,
            XFactor::CoordinateTent { axis, center } => (w - (x[axis] - center).abs()).max(0.0),
            XFactor::ShellTent { center, radius } => (w - ((x - center).norm() - radius).abs()).max(0.0),
        };
        if alpha == 0.0 {
            return 0.0;
        }
        let beta = match self.v_factor {
            VFactor::One => 1.0,
            VFactor::Component(a) => v[a],
        };
        self.scale() * alpha * beta
    }

    pub fn id(&self) -> String {
        let x = match self.x_factor {
            XFactor::Constant => "const".to_string(),
            XFactor::CoordinateTent { axis, center } => format!("tent[x{}={center:.4}]", axis + 1),
            XFactor::ShellTent { center, radius } => {
                let c: Vec<String> = center.iter().map(|c| format!("{c:.4}")).collect();
                format!("shell[c=({}),r={radius:.4}]", c.join(","))
            }
        };
        let v = match self.v_factor {
            VFactor::One => "1".to_string(),
            VFactor::Component(a) => format!("v{}", a + 1),
        };
        format!("{x}*{v}")
    }
}

/// Parameters of the standard dictionary. Grids span a fixed box so that
/// distances computed against different varifolds use the same functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DictionaryConfig {
    /// Grid points per axis for tent and shell centers.
    pub grid: usize,
    /// Shell radii (length units).
    pub radii: Vec<f64>,
    /// Tent half-width `w` (length units).
    pub width: f64,
    /// Random samples per function for the Lipschitz self-check.
    pub validation_samples: usize,
    pub seed: u64,
    /// Explicit `[lo, hi]` box for the grids; callers pick one when absent.
    pub domain: Option<(Vec<f64>, Vec<f64>)>,
}

impl Default for DictionaryConfig {
    fn default() -> Self {
        Self { grid: 5, radii: vec![0.5, 1.0, 1.5], width: 0.5, validation_samples: 64, seed: 0, domain: None }
    }
}

#[derive(Debug, Clone)]
pub struct LipschitzDictionary<const D: usize> {
    functions: Vec<LipschitzFunction<D>>,
    box_lo: Vector<D>,
    box_hi: Vector<D>,
    validation_samples: usize,
    seed: u64,
}

impl<const D: usize> LipschitzDictionary<D> {
    pub fn from_functions(functions: Vec<LipschitzFunction<D>>, box_lo: Vector<D>, box_hi: Vector<D>) -> Self {
        Self { functions, box_lo, box_hi, validation_samples: 64, seed: 0 }
    }

    /// Standard dictionary over `config.domain`, falling back to `[lo, hi]`.
    pub fn configured(lo: Vector<D>, hi: Vector<D>, config: &DictionaryConfig) -> Result<Self> {
        if config.grid == 0 || !(config.width > 0.0 && config.width.is_finite()) {
            return Err(Error::Config("dictionary grid and width must be positive".into()));
        }
        if config.radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::Config("dictionary radii must be positive".into()));
        }
        let (lo, hi) = match &config.domain {
            Some((l, h)) if l.len() == D && h.len() == D => {
                (Vector::<D>::from_column_slice(l), Vector::<D>::from_column_slice(h))
            }
            Some(_) => return Err(Error::Config(format!("dictionary domain needs {D} coordinates per corner"))),
            None => (lo, hi),
        };
        Ok(Self::standard(lo, hi, config))
    }

    /// Standard dictionary over the box `[lo, hi]`.
    pub fn standard(lo: Vector<D>, hi: Vector<D>, config: &DictionaryConfig) -> Self {
        let grid = config.grid.max(1);
        let coord = |axis: usize, k: usize| {
            if grid == 1 {
                0.5 * (lo[axis] + hi[axis])
            } else {
                lo[axis] + (hi[axis] - lo[axis]) * k as f64 / (grid - 1) as f64
            }
        };
        let mut x_factors = vec![XFactor::Constant];
        for axis in 0..D {
            for k in 0..grid {
                x_factors.push(XFactor::CoordinateTent { axis, center: coord(axis, k) });
            }
        }
        let total = grid.pow(D as u32);
        for flat in 0..total {
            let mut rest = flat;
            let mut center = Vector::<D>::zeros();
            for axis in 0..D {
                center[axis] = coord(axis, rest % grid);
                rest /= grid;
            }
            for &radius in &config.radii {
                x_factors.push(XFactor::ShellTent { center, radius });
            }
        }
        let v_factors: Vec<VFactor> = std::iter::once(VFactor::One).chain((0..D).map(VFactor::Component)).collect();
        let functions = x_factors
            .iter()
            .flat_map(|&x_factor| {
                v_factors.iter().map(move |&v_factor| LipschitzFunction { x_factor, v_factor, width: config.width })
            })
            .collect();
        Self { functions, box_lo: lo, box_hi: hi, validation_samples: config.validation_samples, seed: config.seed }
    }

    pub fn functions(&self) -> &[LipschitzFunction<D>] {
        &self.functions
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// Checks `sup|φ| ≤ 1` and a sampled Lipschitz estimate `≤ 1 + 1e−6` for every function.
    pub fn validate(&self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let margin = 0.5;
        let n = self.validation_samples;
        let points: Vec<(Vector<D>, Vector<D>)> = (0..n)
            .map(|_| {
                let x = Vector::<D>::from_fn(|i, _| {
                    rng.random_range(self.box_lo[i] - margin..=self.box_hi[i] + margin)
                });
                (x, random_unit(&mut rng))
            })
            .collect();
        let steps: Vec<(Vector<D>, Vector<D>)> = (0..n)
            .map(|k| {
                let h = if k % 2 == 0 { 1e-6 } else { 0.1 };
                (random_unit::<D>(&mut rng) * h, random_unit::<D>(&mut rng) * h)
            })
            .collect();
        for f in &self.functions {
            let mut lip: f64 = 0.0;
            let mut sup: f64 = 0.0;
            for ((x, v), (dx, dv)) in points.iter().zip(&steps) {
                let a = f.eval(x, v);
                let b = f.eval(&(x + dx), &(v + dv));
                let dist = (dx.norm_squared() + dv.norm_squared()).sqrt();
                lip = lip.max((a - b).abs() / dist);
                sup = sup.max(a.abs());
            }
            if lip > 1.0 + 1e-6 {
                return Err(Error::DictionaryViolation { id: f.id(), what: "Lipschitz", estimate: lip });
            }
            if sup > 1.0 + 1e-12 {
                return Err(Error::DictionaryViolation { id: f.id(), what: "sup-norm", estimate: sup });
            }
        }
        Ok(())
    }

    /// `|V1(φ) − V2(φ)|` for every dictionary function, in dictionary order.
    pub fn differences(&self, a: &OrientedVarifold<D>, b: &OrientedVarifold<D>) -> Vec<f64> {
        self.functions
            .par_iter()
            .map(|f| {
                let fa = a.integrate(|x, v| f.eval(x, v));
                let fb = b.integrate(|x, v| f.eval(x, v));
                (fa - fb).abs()
            })
            .collect()
    }
}

fn random_unit<const D: usize>(rng: &mut ChaCha8Rng) -> Vector<D> {
    loop {
        let v = Vector::<D>::from_fn(|_, _| rng.random_range(-1.0..=1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Max over the dictionary of `|V1(φ) − V2(φ)|`; a lower bound for the
/// bounded-Lipschitz distance. Fails if the dictionary does not pass validation.
pub fn bl_distance<const D: usize>(
    a: &OrientedVarifold<D>,
    b: &OrientedVarifold<D>,
    dictionary: &LipschitzDictionary<D>,
) -> Result<f64> {
    dictionary.validate()?;
    Ok(dictionary.differences(a, b).into_iter().fold(0.0, f64::max))
}
