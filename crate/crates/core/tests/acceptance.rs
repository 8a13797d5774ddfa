//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs every scenario at its default spec, groups the verdicts by criterion,
//! and adds the checks no scenario records (runtime, random-atom projection
//! invariants, byte-identical reruns).

use std::collections::BTreeMap;
use std::time::Instant;

use orvar::geometry::{Hypersurface, Orientation, QuadratureOrder, Shape};
use orvar::identities::mean_from_w;
use orvar::numeric::normal_projection;
use orvar::recovery::CurvatureField;
use orvar::scenarios::{criteria, run_scenario, sample_varifold, Comparison, ScenarioId, ScenarioSpec, Verdict};
use orvar::Vector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RUNTIME_LIMIT_SECS: f64 = 60.0;
const ROUNDOFF: f64 = 1e-12;
const REPRODUCIBILITY: &str = "10-reproducibility";

/// How close a verdict is to its threshold; values above 1 fail.
fn tightness(v: &Verdict) -> f64 {
    if !v.passed {
        return f64::INFINITY;
    }
    let ratio = |num: f64, den: f64| if den == 0.0 { if num == 0.0 { 0.0 } else { f64::INFINITY } } else { num / den };
    match v.comparison {
        Comparison::AtMost | Comparison::LessThan => ratio(v.value.abs(), v.threshold.abs()),
        Comparison::AtLeast | Comparison::GreaterThan => ratio(v.threshold.abs(), v.value.abs()),
    }
}

fn symbol(c: Comparison) -> &'static str {
    match c {
        Comparison::AtMost => "<=",
        Comparison::AtLeast => ">=",
        Comparison::LessThan => "<",
        Comparison::GreaterThan => ">",
    }
}

fn unit_sphere_mean_check(verdicts: &mut Vec<Verdict>) {
    let surface = Hypersurface::new(Shape::sphere(Vector::<3>::zeros(), 2.0), Orientation::Negative).unwrap();
    let v = sample_varifold(&surface, 64, QuadratureOrder::Midpoint, 1, 0, "sphere r=2".into()).unwrap();
    let w = CurvatureField::geometric(&surface, &v).unwrap();
    let worst = v
        .atoms()
        .iter()
        .zip(w.matrices())
        .map(|(a, m)| (mean_from_w(m, &a.v).norm() - 1.0).abs())
        .fold(0.0, f64::max);
    verdicts.push(Verdict::at_most(criteria::CMC_PRESCRIPTION, "max ||M| - 1| (r=2, inner, resolution 64)", worst, ROUNDOFF));
}

fn random_projection_check(verdicts: &mut Vec<Verdict>) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let v = loop {
            let v = Vector::<3>::from_fn(|_, _| rng.random_range(-1.0..1.0));
            if v.norm() > 0.1 {
                break v.normalize();
            }
        };
        let p = normal_projection(&v);
        worst = worst.max((p * p - p).norm()).max((p.trace() - 2.0).abs()).max((p * v).norm());
    }
    verdicts.push(Verdict::at_most(criteria::MEASURE, "projection invariant defect (10^4 random atoms)", worst, ROUNDOFF));
}

fn main() {
    let mut verdicts = Vec::new();
    let mut byte_identical = 0.0;
    for id in ScenarioId::ALL {
        let spec = ScenarioSpec::default_for(id);
        let start = Instant::now();
        let report = run_scenario(&spec).expect("scenario runs");
        let elapsed = start.elapsed().as_secs_f64();
        if id == ScenarioId::SphereVerification {
            verdicts.push(Verdict::at_most(criteria::SPHERE_CONVERGENCE, "sphere scenario runtime (s)", elapsed, RUNTIME_LIMIT_SECS));
        }
        let again = run_scenario(&spec).expect("scenario reruns");
        let first = report.to_json().unwrap();
        if first != again.to_json().unwrap() {
            byte_identical = 1.0;
        }
        for table in &report.tables {
            if table.to_csv() != again.table(&table.name).unwrap().to_csv() {
                byte_identical = 1.0;
            }
        }
        verdicts.extend(report.verdicts);
    }
    verdicts.push(Verdict::at_most(REPRODUCIBILITY, "scenarios with differing reruns", byte_identical, 0.0));
    unit_sphere_mean_check(&mut verdicts);
    random_projection_check(&mut verdicts);

    let mut grouped: BTreeMap<u32, (String, Vec<Verdict>)> = BTreeMap::new();
    for name in [
        criteria::SPHERE_CONVERGENCE,
        criteria::CMC_PRESCRIPTION,
        criteria::CANCELLATION,
        criteria::ODDNESS,
        criteria::STRUCTURE,
        criteria::HUTCHINSON,
        criteria::TRANSLATED_SPHERES,
        criteria::RIEMANNIAN,
        criteria::MEASURE,
        REPRODUCIBILITY,
    ] {
        let number = name.split('-').next().unwrap().parse().unwrap();
        grouped.insert(number, (name.to_string(), Vec::new()));
    }
    for v in verdicts {
        let number: u32 = v.criterion.split('-').next().unwrap().parse().unwrap();
        grouped.get_mut(&number).expect("known criterion").1.push(v);
    }

    let mut failed = 0;
    for (name, checks) in grouped.values() {
        let passed = !checks.is_empty() && checks.iter().all(|v| v.passed);
        let worst = checks.iter().max_by(|a, b| tightness(a).total_cmp(&tightness(b)));
        let detail = match worst {
            Some(v) => format!(
                "{} checks; tightest: {} = {:e} ({} {:e})",
                checks.len(),
                v.quantity,
                v.value,
                symbol(v.comparison),
                v.threshold
            ),
            None => "no checks recorded".into(),
        };
        println!("{} [{name}] {detail}", if passed { "PASS" } else { "FAIL" });
        if !passed {
            failed += 1;
            for v in checks.iter().filter(|v| !v.passed) {
                println!("    failed: {} = {:e} ({} {:e})", v.quantity, v.value, symbol(v.comparison), v.threshold);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
