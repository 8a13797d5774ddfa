//! Reproducible experiments producing tables and threshold verdicts.
//!
//! A [`ScenarioSpec`] fully determines its [`ScenarioReport`]: all reductions
//! run in a fixed order and the only randomness (basis jitter) is seeded.

mod double_plane;
mod latitude;
mod report;
mod sphere;
mod translated;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use report::{Cell, Comparison, ScenarioReport, Table, Verdict};

use crate::geometry::{sample, Hypersurface, QuadratureOrder, QuadratureRule};
use crate::identities::BasisConfig;
use crate::recovery::RecoveryConfig;
use crate::varifold::{DictionaryConfig, OrientedVarifold};
use crate::{Error, Result, Vector};

pub use double_plane::scenario_double_plane;
pub use latitude::scenario_latitude_circles;
pub use sphere::scenario_sphere_verification;
pub use translated::scenario_translated_spheres;

/// Acceptance thresholds used by the scenario verdicts.
pub mod thresholds {
    pub const MIN_ORDER: f64 = 1.5;
    pub const RESIDUAL: f64 = 1e-3;
    pub const ROUNDOFF: f64 = 1e-12;
    pub const ODDNESS: f64 = 1e-3;
    pub const RECOVERY_ERROR: f64 = 0.05;
    pub const RECOVERED_STRUCTURE: f64 = 1e-2;
    pub const FLAT_RECOVERY: f64 = 1e-3;
    pub const RATIO_LO: f64 = 1.7;
    pub const RATIO_HI: f64 = 2.3;
    pub const CONTRAST: f64 = 10.0;
    pub const SPHERE_MASS: f64 = 5e-3;
}

/// Names of the acceptance criteria verdicts refer to.
pub mod criteria {
    pub const SPHERE_CONVERGENCE: &str = "1-sphere-identity-convergence";
    pub const CMC_PRESCRIPTION: &str = "2-cmc-prescription";
    pub const CANCELLATION: &str = "3-double-plane-cancellation";
    pub const ODDNESS: &str = "4-oddness-uniqueness";
    pub const STRUCTURE: &str = "5-structure";
    pub const HUTCHINSON: &str = "6-hutchinson-conversion";
    pub const TRANSLATED_SPHERES: &str = "7-translated-spheres";
    pub const RIEMANNIAN: &str = "8-riemannian-identity";
    pub const MEASURE: &str = "9-measure-plumbing";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioId {
    DoublePlane,
    TranslatedSpheres,
    SphereVerification,
    LatitudeCircles,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 4] =
        [Self::DoublePlane, Self::TranslatedSpheres, Self::SphereVerification, Self::LatitudeCircles];

    pub fn name(self) -> &'static str {
        match self {
            Self::DoublePlane => "double-plane",
            Self::TranslatedSpheres => "translated-spheres",
            Self::SphereVerification => "sphere-verification",
            Self::LatitudeCircles => "latitude-circles",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown scenario `{name}`")))
    }
}

/// A scalar field `g(x) = constant + gradient·x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarField {
    pub constant: f64,
    #[serde(default)]
    pub gradient: Vec<f64>,
}

impl ScalarField {
    pub fn constant(value: f64) -> Self {
        Self { constant: value, gradient: Vec::new() }
    }

    pub fn eval<const D: usize>(&self, x: &Vector<D>) -> f64 {
        self.constant + self.gradient.iter().zip(x.iter()).map(|(g, x)| g * x).sum::<f64>()
    }
}

/// Parameters of one scenario run. Fields a scenario does not use are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub id: ScenarioId,
    /// Quadrature resolutions (elements per quarter turn / per unit length).
    pub resolutions: Vec<usize>,
    pub order: QuadratureOrder,
    /// Translation parameters `ℓ` (offset `1/ℓ`).
    #[serde(default)]
    pub ells: Vec<f64>,
    /// Sphere radii, or the disc radius for the double plane.
    #[serde(default)]
    pub radii: Vec<f64>,
    /// Polar angles of latitude circles (radians).
    #[serde(default)]
    pub polar_angles: Vec<f64>,
    /// Prescribed mean curvature; scenarios fall back to their natural value.
    #[serde(default)]
    pub g: Option<ScalarField>,
    #[serde(default)]
    pub basis: BasisConfig,
    #[serde(default)]
    pub recovery: RecoveryConfig,
    #[serde(default)]
    pub dictionary: DictionaryConfig,
    /// Seeds basis jitter (and the dictionary self-check).
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioSpec {
    /// The documented defaults for each scenario.
    pub fn default_for(id: ScenarioId) -> Self {
        let base = Self {
            id,
            resolutions: vec![16, 32, 64],
            order: QuadratureOrder::Midpoint,
            ells: Vec::new(),
            radii: Vec::new(),
            polar_angles: Vec::new(),
            g: None,
            basis: BasisConfig::default(),
            recovery: RecoveryConfig::default(),
            dictionary: DictionaryConfig::default(),
            seed: 0,
        };
        match id {
            ScenarioId::DoublePlane => Self { resolutions: vec![8, 16, 32], radii: vec![2.0], ..base },
            ScenarioId::TranslatedSpheres => Self {
                resolutions: vec![16],
                ells: vec![4.0, 8.0, 16.0],
                basis: BasisConfig { grid: 7, ..BasisConfig::default() },
                dictionary: DictionaryConfig { grid: 7, ..DictionaryConfig::default() },
                ..base
            },
            ScenarioId::SphereVerification => Self { radii: vec![1.0, 2.0], ..base },
            ScenarioId::LatitudeCircles => Self {
                polar_angles: vec![FRAC_PI_2, FRAC_PI_4],
                basis: BasisConfig { domain: Some((vec![-1.0; 3], vec![1.0; 3])), ..BasisConfig::default() },
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let increasing = |name: &str, values: &[f64]| {
            if values.windows(2).all(|w| w[0] < w[1]) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be strictly increasing")))
            }
        };
        if self.resolutions.is_empty() || self.resolutions.contains(&0) {
            return Err(Error::Config("resolutions must be a nonempty list of positive integers".into()));
        }
        increasing("resolutions", &self.resolutions.iter().map(|&r| r as f64).collect::<Vec<_>>())?;
        increasing("ells", &self.ells)?;
        if self.ells.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::Config("ells must be positive".into()));
        }
        if self.radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::Config("radii must be positive".into()));
        }
        if self.polar_angles.iter().any(|&t| !(t > 0.0 && t < std::f64::consts::PI)) {
            return Err(Error::Config("polar angles must lie in (0, π)".into()));
        }
        let needs = |ok: bool, what: &str| if ok { Ok(()) } else { Err(Error::Config(format!("{} needs {what}", self.id.name()))) };
        match self.id {
            ScenarioId::DoublePlane => needs(self.radii.len() == 1, "exactly one disc radius"),
            ScenarioId::TranslatedSpheres => needs(!self.ells.is_empty(), "a nonempty ells list"),
            ScenarioId::SphereVerification => needs(!self.radii.is_empty(), "at least one radius"),
            ScenarioId::LatitudeCircles => needs(!self.polar_angles.is_empty(), "at least one polar angle"),
        }
    }

    /// Basis configuration with the scenario seed applied.
    pub(crate) fn basis_config(&self) -> BasisConfig {
        BasisConfig { seed: self.seed, ..self.basis.clone() }
    }

    /// First 8 hex digits of the SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("scenario specs serialize");
        short_hash(value.to_string().as_bytes())
    }

    /// `{id}-{hash}`, the stem of every output file of this run.
    pub fn file_stem(&self) -> String {
        format!("{}-{}", self.id.name(), self.hash())
    }
}

/// First 8 hex digits of the SHA-256 of `bytes`.
pub fn short_hash(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().take(4).map(|b| format!("{b:02x}")).collect()
}

/// Runs the scenario named in `spec`.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<ScenarioReport> {
    spec.validate()?;
    match spec.id {
        ScenarioId::DoublePlane => scenario_double_plane(spec),
        ScenarioId::TranslatedSpheres => scenario_translated_spheres(spec),
        ScenarioId::SphereVerification => scenario_sphere_verification(spec),
        ScenarioId::LatitudeCircles => scenario_latitude_circles(spec),
    }
}

/// Writes `{stem}.json` and one `{stem}-{table}.csv` per table into `dir`.
pub fn write_report(report: &ScenarioReport, stem: &str, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let json_path = dir.join(format!("{stem}.json"));
    std::fs::write(&json_path, report.to_json()?)?;
    written.push(json_path);
    for table in &report.tables {
        let path = dir.join(format!("{stem}-{}.csv", table.name));
        std::fs::write(&path, table.to_csv())?;
        written.push(path);
    }
    Ok(written)
}

/// Samples `surface` into a varifold of the given surface dimension.
pub fn sample_varifold<const D: usize>(
    surface: &Hypersurface<D>,
    resolution: usize,
    order: QuadratureOrder,
    theta1: u32,
    theta2: u32,
    provenance: String,
) -> Result<OrientedVarifold<D>> {
    let atoms = sample(surface, &QuadratureRule::new(resolution, order), theta1, theta2)?;
    OrientedVarifold::new(atoms, surface.intrinsic_dim(), provenance)
}

/// Observed orders between consecutive `(resolution, value)` rows.
pub fn orders(levels: &[(usize, f64)]) -> Vec<f64> {
    let levels: Vec<(f64, f64)> = levels.iter().map(|&(r, e)| (r as f64, e)).collect();
    crate::numeric::observed_orders(&levels)
}

#[cfg(test)]
mod tests;
