//! The `orvar` command line.
//!
//! Exit codes: 0 when every verdict passes, 2 when a verdict fails, 1 on
//! usage, input or validation errors. Values come from built-in defaults,
//! then flags, then the `--config` TOML file (highest precedence).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use crate::geometry::{Hypersurface, Mesh, Orientation, QuadratureOrder, Shape};
use crate::identities::{
    curvature_identity_residual, max_normalized, prescribed_mc_residual, residual_records, riemannian_identity_residual,
    AmbientManifold, BasisConfig, IdentityKind, SupportFilter, TestBasis,
};
use crate::recovery::{recover_curvature, Constraints, CurvatureField, Patching, RecoveryConfig, Regularization};
use crate::scenarios::{
    self, orders, sample_varifold, short_hash, thresholds, Cell, Comparison, ScalarField, ScenarioId, ScenarioReport,
    ScenarioSpec, Table, Verdict,
};
use crate::varifold::{bl_distance, csv_dimension, DictionaryConfig, LipschitzDictionary, OrientedVarifold};
use crate::{Error, Result, Vector};

/// Environment variable naming the output directory.
pub const OUT_DIR_ENV: &str = "ORVAR_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "orvar", version, about = "Curvature identities and coefficient recovery for oriented varifolds")]
pub struct Cli {
    /// TOML file whose values override flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for reports (default `orvar-out`).
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,
    /// Omit the timestamp so that reruns produce identical files.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    /// Worker threads for the parallel reductions.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a curvature identity on a catalog surface or mesh under refinement.
    Verify(VerifyArgs),
    /// Recover curvature coefficients from an atom CSV.
    Recover(RecoverArgs),
    /// Run a packaged scenario.
    Scenario(ScenarioArgs),
    /// Dictionary bounded-Lipschitz distance between two atom CSVs.
    Distance(DistanceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceKind {
    Sphere,
    Plane,
    Torus,
    Latitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrientationArg {
    /// Base normal (outer for spheres and tori).
    Outer,
    /// Opposite of the base normal.
    Inner,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub surface: Option<SurfaceKind>,
    /// OFF mesh instead of a catalog surface.
    #[arg(long, conflicts_with = "surface")]
    pub mesh: Option<PathBuf>,
    #[arg(long)]
    pub radius: Option<f64>,
    /// Minor radius of a torus (the major radius is `--radius`).
    #[arg(long)]
    pub minor: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub center: Option<Vec<f64>>,
    /// Polar angle of a latitude circle (radians).
    #[arg(long)]
    pub polar_angle: Option<f64>,
    #[arg(long, value_enum)]
    pub orientation: Option<OrientationArg>,
    /// Ambient dimension for spheres and planes (2 or 3).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Constant prescribed mean curvature; switches to the prescribed identity.
    #[arg(long)]
    pub g: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub resolutions: Option<Vec<usize>>,
    #[arg(long)]
    pub order: Option<u32>,
    /// Bump grid points per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub v_degree: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisPreset {
    /// `v`-monomials up to degree 2.
    Default,
    /// No `v` dependence; `x`-monomials up to degree 2 instead.
    VIndependent,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    /// Atom CSV with header `x1,..,xd,v1,..,vd,mass`.
    #[arg(long)]
    pub varifold: PathBuf,
    #[arg(long, value_enum)]
    pub basis: Option<BasisPreset>,
    /// Voxel cells per axis.
    #[arg(long)]
    pub cells: Option<usize>,
    /// Drop the symmetric and tangential constraints.
    #[arg(long)]
    pub unconstrained: bool,
    /// Tie the two sheets together with `W(x, −v) = −W(x, v)`.
    #[arg(long)]
    pub odd: bool,
    /// Tikhonov weight relative to the largest normal-matrix diagonal.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// double-plane, translated-spheres, sphere-verification or latitude-circles.
    pub name: String,
    #[arg(long, value_delimiter = ',')]
    pub resolutions: Option<Vec<usize>>,
    #[arg(long)]
    pub order: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub width: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    output: OutputSection,
    #[serde(default)]
    surface: SurfaceSection,
    #[serde(default)]
    quadrature: QuadratureSection,
    basis: Option<BasisConfig>,
    recovery: Option<RecoveryConfig>,
    dictionary: Option<DictionaryConfig>,
    #[serde(default)]
    scenario: ScenarioSection,
    #[serde(default)]
    thresholds: ThresholdSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    dir: Option<PathBuf>,
    timestamp: Option<bool>,
    jobs: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SurfaceSection {
    kind: Option<SurfaceKind>,
    mesh: Option<PathBuf>,
    radius: Option<f64>,
    minor: Option<f64>,
    center: Option<Vec<f64>>,
    polar_angle: Option<f64>,
    orientation: Option<OrientationArg>,
    dim: Option<usize>,
    g: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadratureSection {
    resolutions: Option<Vec<usize>>,
    order: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioSection {
    resolutions: Option<Vec<usize>>,
    order: Option<u32>,
    ells: Option<Vec<f64>>,
    radii: Option<Vec<f64>>,
    polar_angles: Option<Vec<f64>>,
    g: Option<ScalarField>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThresholdSection {
    residual: Option<f64>,
    min_order: Option<f64>,
}

/// Parses `argv`, runs the command, prints a summary, and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(report) => {
            for note in &report.notes {
                println!("note: {note}");
            }
            for v in &report.verdicts {
                println!("{} [{}] {}: {:e}", if v.passed { "PASS" } else { "FAIL" }, v.criterion, v.quantity, v.value);
            }
            if report.passed() {
                0
            } else {
                2
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else { return Ok(FileConfig::default()) };
    let text = std::fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))
}

/// Runs the parsed command, writes its outputs, and returns the report.
pub fn execute(cli: &Cli) -> Result<ScenarioReport> {
    let config = load_config(cli.config.as_deref())?;
    let jobs = config.output.jobs.or(cli.jobs);
    let out_dir = config.output.dir.clone().or_else(|| cli.out_dir.clone()).unwrap_or_else(|| PathBuf::from("orvar-out"));
    let timestamp = config.output.timestamp.unwrap_or(!cli.no_timestamp);
    let work = || -> Result<(ScenarioReport, String, Vec<(String, String)>)> {
        match &cli.command {
            Command::Verify(args) => verify(args, &config),
            Command::Recover(args) => recover(args, &config),
            Command::Scenario(args) => scenario(args, &config),
            Command::Distance(args) => distance(args, &config),
        }
    };
    let (mut report, stem, extra) = match jobs {
        Some(0) => return Err(Error::Config("--jobs must be positive".into())),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    if timestamp {
        report.stamp_now();
    }
    let mut written = scenarios::write_report(&report, &stem, &out_dir)?;
    for (suffix, contents) in extra {
        let path = out_dir.join(format!("{stem}-{suffix}"));
        std::fs::write(&path, contents)?;
        written.push(path);
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(report)
}

type Outcome = (ScenarioReport, String, Vec<(String, String)>);

fn order_from(value: Option<u32>) -> Result<QuadratureOrder> {
    value.map_or(Ok(QuadratureOrder::Midpoint), QuadratureOrder::from_int)
}

fn file_digest(path: &Path) -> Result<(String, String)> {
    let bytes = std::fs::read(path)?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Error::Parse { line: 1, message: "input is not UTF-8".into() })?;
    Ok((short_hash(&bytes), text))
}

fn scenario(args: &ScenarioArgs, config: &FileConfig) -> Result<Outcome> {
    let id = ScenarioId::parse(&args.name)?;
    let mut spec = ScenarioSpec::default_for(id);
    let section = &config.scenario;
    if let Some(r) = section.resolutions.clone().or_else(|| args.resolutions.clone()) {
        spec.resolutions = r;
    }
    if let Some(o) = section.order.or(args.order) {
        spec.order = QuadratureOrder::from_int(o)?;
    }
    if let Some(s) = section.seed.or(args.seed) {
        spec.seed = s;
    }
    if let Some(v) = section.ells.clone() {
        spec.ells = v;
    }
    if let Some(v) = section.radii.clone() {
        spec.radii = v;
    }
    if let Some(v) = section.polar_angles.clone() {
        spec.polar_angles = v;
    }
    if let Some(g) = section.g.clone() {
        spec.g = Some(g);
    }
    if let Some(b) = config.basis.clone() {
        spec.basis = b;
    }
    if let Some(r) = config.recovery {
        spec.recovery = r;
    }
    if let Some(d) = config.dictionary.clone() {
        spec.dictionary = d;
    }
    let report = scenarios::run_scenario(&spec)?;
    Ok((report, spec.file_stem(), Vec::new()))
}

fn verify(args: &VerifyArgs, config: &FileConfig) -> Result<Outcome> {
    let s = &config.surface;
    let q = &config.quadrature;
    let mesh = s.mesh.clone().or_else(|| args.mesh.clone());
    let kind = s.kind.or(args.surface);
    let dim = s.dim.or(args.dim).unwrap_or(3);
    let params = VerifyParams {
        radius: s.radius.or(args.radius).unwrap_or(1.0),
        minor: s.minor.or(args.minor),
        center: s.center.clone().or_else(|| args.center.clone()),
        polar_angle: s.polar_angle.or(args.polar_angle),
        orientation: match s.orientation.or(args.orientation).unwrap_or(OrientationArg::Outer) {
            OrientationArg::Outer => Orientation::Positive,
            OrientationArg::Inner => Orientation::Negative,
        },
        g: s.g.or(args.g),
        resolutions: q.resolutions.clone().or_else(|| args.resolutions.clone()).unwrap_or_else(|| vec![16, 32, 64]),
        order: order_from(q.order.or(args.order))?,
        basis: {
            let mut b = config.basis.clone().unwrap_or_default();
            if config.basis.is_none() {
                b.grid = args.grid.unwrap_or(b.grid);
                b.v_degree = args.v_degree.unwrap_or(b.v_degree);
            }
            b
        },
        residual_threshold: config.thresholds.residual.unwrap_or(thresholds::RESIDUAL),
        min_order: config.thresholds.min_order.unwrap_or(thresholds::MIN_ORDER),
    };
    if params.resolutions.is_empty() || params.resolutions.contains(&0) || params.resolutions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("resolutions must be positive and strictly increasing".into()));
    }
    if let Some(path) = mesh {
        let (digest, text) = file_digest(&path)?;
        return match off_face_size(&text)? {
            2 => verify_surface::<2>(Hypersurface::new(Shape::Mesh(Mesh::parse_off(&text)?), params.orientation)?, &params, json!({"mesh": digest}), "mesh"),
            3 => verify_surface::<3>(Hypersurface::new(Shape::Mesh(Mesh::parse_off(&text)?), params.orientation)?, &params, json!({"mesh": digest}), "mesh"),
            k => Err(Error::Unsupported(format!("OFF faces with {k} vertices"))),
        };
    }
    let kind = kind.unwrap_or(SurfaceKind::Sphere);
    let mut params = params;
    // A plane disc has a rim; keep supports inside it so boundary terms stay out.
    if kind == SurfaceKind::Plane && params.basis.filter == SupportFilter::None {
        let center = params.center.clone().unwrap_or_else(|| vec![0.0; dim]);
        params.basis.filter = SupportFilter::InsideBall { center, radius: params.radius };
    }
    match (kind, dim) {
        (SurfaceKind::Sphere | SurfaceKind::Plane, 2) => verify_surface::<2>(catalog::<2>(kind, &params)?, &params, json!({}), kind_name(kind)),
        (_, 3) => verify_surface::<3>(catalog::<3>(kind, &params)?, &params, json!({}), kind_name(kind)),
        (_, d) => Err(Error::Unsupported(format!("{} in ambient dimension {d}", kind_name(kind)))),
    }
}

fn kind_name(kind: SurfaceKind) -> &'static str {
    match kind {
        SurfaceKind::Sphere => "sphere",
        SurfaceKind::Plane => "plane",
        SurfaceKind::Torus => "torus",
        SurfaceKind::Latitude => "latitude",
    }
}

/// Number of vertices on the first face of an OFF file.
fn off_face_size(text: &str) -> Result<usize> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| ((i + 1) as u64, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let _header = lines.next();
    let Some((line, counts)) = lines.next() else { return Err(Error::Parse { line: 1, message: "missing counts line".into() }) };
    let nv: usize = counts
        .split_whitespace()
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse { line, message: "bad vertex count".into() })?;
    match lines.nth(nv) {
        Some((line, face)) => face
            .split_whitespace()
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse { line, message: "bad face line".into() }),
        None => Ok(3),
    }
}

struct VerifyParams {
    radius: f64,
    minor: Option<f64>,
    center: Option<Vec<f64>>,
    polar_angle: Option<f64>,
    orientation: Orientation,
    g: Option<f64>,
    resolutions: Vec<usize>,
    order: QuadratureOrder,
    basis: BasisConfig,
    residual_threshold: f64,
    min_order: f64,
}

fn catalog<const D: usize>(kind: SurfaceKind, p: &VerifyParams) -> Result<Hypersurface<D>> {
    let center = match &p.center {
        Some(c) if c.len() == D => Vector::<D>::from_column_slice(c),
        Some(c) => return Err(Error::Config(format!("center has {} coordinates, expected {D}", c.len()))),
        None => Vector::<D>::zeros(),
    };
    let shape = match kind {
        SurfaceKind::Sphere => Shape::sphere(center, p.radius),
        SurfaceKind::Plane => {
            let mut normal = Vector::<D>::zeros();
            normal[D - 1] = 1.0;
            Shape::plane(center, normal, p.radius)
        }
        SurfaceKind::Torus => Shape::Torus { center, major: p.radius, minor: p.minor.unwrap_or(p.radius / 4.0) },
        SurfaceKind::Latitude => Shape::LatitudeCircle { polar_angle: p.polar_angle.unwrap_or(std::f64::consts::FRAC_PI_4) },
    };
    Hypersurface::new(shape, p.orientation)
}

fn verify_surface<const D: usize>(
    surface: Hypersurface<D>,
    p: &VerifyParams,
    extra: serde_json::Value,
    name: &str,
) -> Result<Outcome> {
    let riemannian = matches!(surface.shape, Shape::LatitudeCircle { .. });
    let identity = if riemannian {
        IdentityKind::Riemannian
    } else if p.g.is_some() {
        IdentityKind::PrescribedMeanCurvature
    } else {
        IdentityKind::Curvature
    };
    let spec = json!({
        "command": "verify",
        "surface": name,
        "dim": D,
        "radius": p.radius,
        "minor": p.minor,
        "center": p.center,
        "polar_angle": p.polar_angle,
        "orientation": p.orientation,
        "g": p.g,
        "resolutions": p.resolutions,
        "order": p.order,
        "basis": p.basis,
        "identity": identity,
        "residual_threshold": p.residual_threshold,
        "min_order": p.min_order,
        "input": extra,
    });
    let mut report = ScenarioReport::custom(&format!("verify-{name}"), spec);
    let mut table = Table::new("convergence", &["resolution", "atoms", "mass", "residual", "order"]);
    let criterion = match identity {
        IdentityKind::Riemannian => scenarios::criteria::RIEMANNIAN,
        IdentityKind::PrescribedMeanCurvature => scenarios::criteria::CMC_PRESCRIPTION,
        _ if name == "sphere" => scenarios::criteria::SPHERE_CONVERGENCE,
        _ => "curvature-identity",
    };
    let mut levels = Vec::new();
    let mut basis: Option<TestBasis<D>> = None;
    let mut mesh_done = false;
    for &res in &p.resolutions {
        if mesh_done {
            break;
        }
        mesh_done = surface.is_curvature_approximate();
        let v = sample_varifold(&surface, res, p.order, 1, 0, format!("{name} res={res}"))?;
        // One basis for all levels, placed on the first level's bounding box.
        let basis = match &basis {
            Some(b) => b,
            None => basis.insert(TestBasis::build(&p.basis, &v)?),
        };
        let w = CurvatureField::geometric(&surface, &v)?;
        let records = match identity {
            IdentityKind::Riemannian => residual_records(&v, &basis.functions, identity, |phi| {
                riemannian_identity_residual(&v, w.matrices(), &AmbientManifold::UnitSphere, phi)
            })?,
            IdentityKind::PrescribedMeanCurvature => {
                let g = p.g.unwrap_or(0.0);
                residual_records(&v, &basis.functions, identity, |phi| prescribed_mc_residual(&v, w.matrices(), |_| g, phi))?
            }
            _ => residual_records(&v, &basis.functions, identity, |phi| curvature_identity_residual(&v, w.matrices(), phi))?,
        };
        let r = max_normalized(&records);
        levels.push((res, r));
        let order = scenarios_order(&levels);
        table.push(vec![res.into(), v.len().into(), v.mass().into(), r.into(), order.map_or_else(|| Cell::from(""), Cell::from)]);
        let exact = levels.iter().rev().take(2).all(|&(_, r)| r <= thresholds::ROUNDOFF);
        if let (Some(o), false) = (order, exact) {
            report.verdicts.push(Verdict::at_least(criterion, &format!("observed order at resolution {res}"), o, p.min_order));
        }
    }
    if let Some(&(res, r)) = levels.last() {
        let at = if surface.is_curvature_approximate() { "on the mesh".to_string() } else { format!("at resolution {res}") };
        report.verdicts.push(Verdict::at_most(criterion, &format!("normalized residual {at}"), r, p.residual_threshold));
    }
    if levels.iter().rev().take(2).all(|&(_, r)| r <= thresholds::ROUNDOFF) {
        report.notes.push("residual at roundoff: identity holds exactly, no order reported".into());
    }
    if surface.is_curvature_approximate() {
        report.notes.push("mesh input: one resolution, curvature fitted per element".into());
    }
    report.tables.push(table);
    let stem = format!("{}-{}", report.scenario, report.spec_hash);
    Ok((report, stem, Vec::new()))
}

fn scenarios_order(levels: &[(usize, f64)]) -> Option<f64> {
    if levels.len() < 2 {
        return None;
    }
    orders(&levels[levels.len() - 2..]).first().copied()
}

fn recover(args: &RecoverArgs, config: &FileConfig) -> Result<Outcome> {
    let (digest, text) = file_digest(&args.varifold)?;
    let mut basis = config.basis.clone().unwrap_or_else(|| {
        let mut b = BasisConfig::default();
        if args.basis == Some(BasisPreset::VIndependent) {
            b.v_degree = 0;
            b.x_degree = 2;
        }
        b.grid = args.grid.unwrap_or(b.grid);
        b
    });
    if let (Some(_), Some(BasisPreset::VIndependent)) = (&config.basis, args.basis) {
        basis.v_degree = 0;
    }
    let recovery = config.recovery.unwrap_or_else(|| {
        let mut r = RecoveryConfig::default();
        if let Some(cells) = args.cells {
            r.patching = Patching::Voxel { cells };
        }
        if args.unconstrained {
            r.constraints = Constraints::NONE;
        }
        r.constraints.odd = args.odd;
        if let Some(l) = args.lambda {
            r.regularization = Regularization::Relative(l);
        }
        r
    });
    let spec = json!({ "command": "recover", "varifold": digest, "basis": basis, "recovery": recovery });
    match csv_dimension(&text)? {
        2 => recover_dim::<2>(&text, &basis, &recovery, spec),
        3 => recover_dim::<3>(&text, &basis, &recovery, spec),
        d => Err(Error::Unsupported(format!("ambient dimension {d}"))),
    }
}

fn recover_dim<const D: usize>(text: &str, basis: &BasisConfig, config: &RecoveryConfig, spec: serde_json::Value) -> Result<Outcome> {
    let v = OrientedVarifold::<D>::read_csv(text.as_bytes(), "csv input")?;
    let basis = TestBasis::build(basis, &v)?;
    let (field, rep) = recover_curvature(&v, &basis.functions, &basis.description, config)?;
    let mut report = ScenarioReport::custom("recover", spec);
    let mut table = Table::new("recovery", &["quantity", "value"]);
    let rows: [(&str, f64); 11] = [
        ("atoms", v.len() as f64),
        ("relative_residual", rep.relative_residual),
        ("symmetry_defect", rep.symmetry_defect),
        ("tangency_defect", rep.tangency_defect),
        ("oddness_defect", rep.oddness_defect),
        ("equations", rep.equations as f64),
        ("unknowns", rep.unknowns as f64),
        ("rank", rep.rank as f64),
        ("relative_rank_deficiency", rep.relative_rank_deficiency),
        ("condition_number", rep.condition_number),
        ("regularization", rep.regularization),
    ];
    for (name, value) in rows {
        table.push(vec![name.into(), value.into()]);
    }
    report.tables.push(table);
    report.verdicts.push(Verdict::new(
        "recovery-well-posed",
        "relative rank deficiency",
        rep.relative_rank_deficiency,
        Comparison::AtMost,
        crate::recovery::ILL_POSED_THRESHOLD,
    ));
    report.notes.push(format!("basis: {}", rep.basis));
    if let Some(note) = &rep.oddness_note {
        report.notes.push(format!("oddness: {note}"));
    }
    let mut csv = Vec::new();
    field.write_csv(&mut csv)?;
    let csv = String::from_utf8(csv).expect("csv output is UTF-8");
    let stem = format!("recover-{}", report.spec_hash);
    Ok((report, stem, vec![("field.csv".into(), csv)]))
}

fn distance(args: &DistanceArgs, config: &FileConfig) -> Result<Outcome> {
    let (da, ta) = file_digest(&args.a)?;
    let (db, tb) = file_digest(&args.b)?;
    let dictionary = config.dictionary.clone().unwrap_or_else(|| DictionaryConfig {
        grid: args.grid.unwrap_or(DictionaryConfig::default().grid),
        width: args.width.unwrap_or(DictionaryConfig::default().width),
        ..DictionaryConfig::default()
    });
    let spec = json!({ "command": "distance", "a": da, "b": db, "dictionary": dictionary });
    let (da, db) = (csv_dimension(&ta)?, csv_dimension(&tb)?);
    if da != db {
        return Err(Error::Config(format!("inputs live in dimensions {da} and {db}")));
    }
    match da {
        2 => distance_dim::<2>(&ta, &tb, &dictionary, spec),
        3 => distance_dim::<3>(&ta, &tb, &dictionary, spec),
        d => Err(Error::Unsupported(format!("ambient dimension {d}"))),
    }
}

fn distance_dim<const D: usize>(ta: &str, tb: &str, config: &DictionaryConfig, spec: serde_json::Value) -> Result<Outcome> {
    let a = OrientedVarifold::<D>::read_csv(ta.as_bytes(), "a")?;
    let b = OrientedVarifold::<D>::read_csv(tb.as_bytes(), "b")?;
    let (lo, hi) = match (a.bounding_box(), b.bounding_box()) {
        (Some((l1, h1)), Some((l2, h2))) => (l1.inf(&l2), h1.sup(&h2)),
        (Some(bb), None) | (None, Some(bb)) => bb,
        (None, None) => (Vector::zeros(), Vector::zeros()),
    };
    let center = (lo + hi) / 2.0;
    let half = ((hi - lo) / 2.0).max().max(0.5);
    let dictionary = LipschitzDictionary::configured(center.add_scalar(-half), center.add_scalar(half), config)?;
    let d = bl_distance(&a, &b, &dictionary)?;
    let mut report = ScenarioReport::custom("distance", spec);
    let mut table = Table::new("distance", &["mass_a", "mass_b", "dictionary_size", "bl_distance_lower_bound"]);
    table.push(vec![a.mass().into(), b.mass().into(), dictionary.len().into(), d.into()]);
    report.tables.push(table);
    report.notes.push(format!("bl distance (dictionary lower bound): {d:e}"));
    let stem = format!("distance-{}", report.spec_hash);
    Ok((report, stem, Vec::new()))
}
