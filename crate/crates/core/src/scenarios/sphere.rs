use std::f64::consts::PI;

use super::{criteria, orders, Comparison, sample_varifold, thresholds as th, Cell, ScenarioReport, ScenarioSpec, Table, Verdict};
use crate::geometry::{Hypersurface, Orientation, Shape};
use crate::identities::{
    curvature_identity_residual, max_normalized, prescribed_mc_residual, residual_records, BasisConfig, IdentityKind,
    TestBasis,
};
use crate::numeric::CompensatedSum;
use crate::recovery::{
    from_hutchinson, mean_from_w, recover_curvature, relative_l2_error, structure_defects, to_hutchinson, Constraints,
    CurvatureField, RecoveryConfig,
};
use crate::varifold::OrientedVarifold;
use crate::{Result, Vector};

/// Largest deviation of the projection invariants `P² = P`, `tr P = n`, `P v = 0`.
pub(crate) fn projection_defect(varifold: &OrientedVarifold<3>) -> f64 {
    let n = varifold.dim() as f64;
    varifold
        .pushforward_unoriented()
        .iter()
        .zip(varifold.atoms())
        .map(|(u, a)| {
            let p = u.projection;
            (p * p - p).norm().max((p.trace() - n).abs()).max((p * a.v).norm())
        })
        .fold(0.0, f64::max)
}

pub(crate) fn pushforward_mass_gap(varifold: &OrientedVarifold<3>) -> f64 {
    let pushed: CompensatedSum = varifold.pushforward_unoriented().iter().map(|u| u.mass).collect();
    (pushed.value() - varifold.mass()).abs()
}

/// `(roundtrip error, max |A_ijp − A_ipj|, max_i |Σ_j A_ijj|)` over the atoms.
fn hutchinson_errors(varifold: &OrientedVarifold<3>, field: &CurvatureField<3>) -> (f64, f64, f64) {
    let mut out: (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (a, w) in varifold.atoms().iter().zip(field.matrices()) {
        let t = to_hutchinson(w, &a.v);
        out.0 = out.0.max((from_hutchinson(&t, &a.v) - w).norm());
        for i in 0..3 {
            out.2 = out.2.max((0..3).map(|j| t[i][j][j]).sum::<f64>().abs());
            for j in 0..3 {
                for p in 0..3 {
                    out.1 = out.1.max((t[i][j][p] - t[i][p][j]).abs());
                }
            }
        }
    }
    out
}

fn flag(b: bool) -> Cell {
    Cell::Number(if b { 1.0 } else { 0.0 })
}

pub fn scenario_sphere_verification(spec: &ScenarioSpec) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(spec);
    let basis_config = spec.basis_config();
    let finest = *spec.resolutions.last().expect("validated nonempty");
    let mut convergence = Table::new(
        "convergence",
        &[
            "radius",
            "resolution",
            "atoms",
            "mass",
            "mass_rel_error",
            "pushforward_mass_gap",
            "projection_defect",
            "curvature_residual",
            "prescribed_residual",
            "mean_curvature_error",
            "trace_error",
            "symmetry_defect",
            "tangency_defect",
            "hutchinson_roundtrip",
            "hutchinson_asymmetry",
            "hutchinson_trace",
        ],
    );
    let mut order_table = Table::new("orders", &["radius", "from", "to", "curvature_order", "prescribed_order"]);

    for &r in &spec.radii {
        let surface = Hypersurface::new(Shape::sphere(Vector::<3>::zeros(), r), Orientation::Negative)?;
        let n = 2.0;
        let g = spec.g.clone().unwrap_or_else(|| super::ScalarField::constant(n / r));
        let basis = TestBasis::build_on(&basis_config, Vector::<3>::repeat(-r), Vector::<3>::repeat(r))?;
        let area = 4.0 * PI * r * r;
        let mut curvature_levels = Vec::new();
        let mut prescribed_levels = Vec::new();
        let mut worst_mean: f64 = 0.0;
        for &res in &spec.resolutions {
            let v = sample_varifold(&surface, res, spec.order, 1, 0, format!("sphere r={r} res={res}"))?;
            let w = CurvatureField::geometric(&surface, &v)?;
            let mass = v.mass();
            let curvature = residual_records(&v, &basis.functions, IdentityKind::Curvature, |phi| {
                curvature_identity_residual(&v, w.matrices(), phi)
            })?;
            let prescribed = residual_records(&v, &basis.functions, IdentityKind::PrescribedMeanCurvature, |phi| {
                prescribed_mc_residual(&v, w.matrices(), |x| g.eval(x), phi)
            })?;
            let (mut mean_err, mut trace_err): (f64, f64) = (0.0, 0.0);
            for (a, m) in v.atoms().iter().zip(w.matrices()) {
                mean_err = mean_err.max((mean_from_w(m, &a.v) - a.v * g.eval(&a.x)).norm());
                trace_err = trace_err.max((-m.trace() - n / r).abs());
            }
            worst_mean = worst_mean.max(mean_err);
            let defects = structure_defects(&v, &w);
            let (roundtrip, asymmetry, trace) = hutchinson_errors(&v, &w);
            let (c, p) = (max_normalized(&curvature), max_normalized(&prescribed));
            curvature_levels.push((res, c));
            prescribed_levels.push((res, p));
            convergence.push(vec![
                r.into(),
                res.into(),
                v.len().into(),
                mass.into(),
                ((mass - area).abs() / area).into(),
                pushforward_mass_gap(&v).into(),
                projection_defect(&v).into(),
                c.into(),
                p.into(),
                mean_err.into(),
                trace_err.into(),
                defects.symmetry.into(),
                defects.tangency.into(),
                roundtrip.into(),
                asymmetry.into(),
                trace.into(),
            ]);
            let q = |name: &str| format!("{name} (r={r}, resolution {res})");
            report.verdicts.push(Verdict::at_most(criteria::MEASURE, &q("pushforward mass gap"), pushforward_mass_gap(&v), 0.0));
            report.verdicts.push(Verdict::at_most(criteria::MEASURE, &q("projection invariant defect"), projection_defect(&v), th::ROUNDOFF));
            report.verdicts.push(Verdict::at_most(criteria::STRUCTURE, &q("geometric symmetry defect"), defects.symmetry, th::ROUNDOFF));
            report.verdicts.push(Verdict::at_most(criteria::STRUCTURE, &q("geometric tangency defect"), defects.tangency, th::ROUNDOFF));
            report.verdicts.push(Verdict::at_most(criteria::HUTCHINSON, &q("roundtrip error"), roundtrip, th::ROUNDOFF));
            report.verdicts.push(Verdict::at_most(criteria::HUTCHINSON, &q("max |A_ijp - A_ipj|"), asymmetry, 0.0));
            report.verdicts.push(Verdict::at_most(criteria::HUTCHINSON, &q("max |A_ijj| (summed over j)"), trace, th::ROUNDOFF));
            if res == finest {
                report.verdicts.push(Verdict::at_most(criteria::MEASURE, &q("relative mass error"), (mass - area).abs() / area, th::SPHERE_MASS));
                report.verdicts.push(Verdict::at_most(criteria::SPHERE_CONVERGENCE, &q("normalized curvature residual"), c, th::RESIDUAL));
                report.verdicts.push(Verdict::at_most(criteria::CMC_PRESCRIPTION, &q("normalized prescribed residual"), p, th::RESIDUAL));
            }
        }
        let co = orders(&curvature_levels);
        let po = orders(&prescribed_levels);
        for (k, (a, b)) in co.iter().zip(&po).enumerate() {
            let (from, to) = (spec.resolutions[k], spec.resolutions[k + 1]);
            order_table.push(vec![r.into(), from.into(), to.into(), (*a).into(), (*b).into()]);
            let q = |name: &str| format!("{name} (r={r}, {from}->{to})");
            report.verdicts.push(Verdict::at_least(criteria::SPHERE_CONVERGENCE, &q("curvature residual order"), *a, th::MIN_ORDER));
            report.verdicts.push(Verdict::at_least(criteria::CMC_PRESCRIPTION, &q("prescribed residual order"), *b, th::MIN_ORDER));
        }
        report.verdicts.push(Verdict::at_most(
            criteria::CMC_PRESCRIPTION,
            &format!("max |M - g v| (r={r})"),
            worst_mean,
            th::ROUNDOFF,
        ));
    }
    report.tables.push(convergence);
    report.tables.push(order_table);
    report.tables.push(torus_structure(spec, &mut report.verdicts)?);
    report.tables.push(recovery(spec, &basis_config, finest, &mut report.verdicts)?);
    report.notes.push("spheres use the inner normal, so W = -P/r and M = (n/r) v".into());
    report.notes.push(
        "residuals are maxima over the test basis of raw / (mass * sampled C1 norm); g defaults to n/r per radius".into(),
    );
    Ok(report)
}

fn torus_structure(spec: &ScenarioSpec, verdicts: &mut Vec<Verdict>) -> Result<Table> {
    let mut table = Table::new("structure", &["surface", "resolution", "symmetry_defect", "tangency_defect"]);
    let torus = Hypersurface::new(
        Shape::Torus { center: Vector::<3>::zeros(), major: 2.0, minor: 0.5 },
        Orientation::Positive,
    )?;
    let res = *spec.resolutions.first().expect("validated nonempty");
    let v = sample_varifold(&torus, res, spec.order, 1, 1, format!("torus res={res}"))?;
    let d = structure_defects(&v, &CurvatureField::geometric(&torus, &v)?);
    table.push(vec!["torus R=2 r=0.5".into(), res.into(), d.symmetry.into(), d.tangency.into()]);
    verdicts.push(Verdict::at_most(criteria::STRUCTURE, "geometric symmetry defect (torus)", d.symmetry, th::ROUNDOFF));
    verdicts.push(Verdict::at_most(criteria::STRUCTURE, "geometric tangency defect (torus)", d.tangency, th::ROUNDOFF));
    Ok(table)
}

/// Recovery on the unit sphere (or the first radius) at the finest resolution.
fn recovery(spec: &ScenarioSpec, basis_config: &BasisConfig, res: usize, verdicts: &mut Vec<Verdict>) -> Result<Table> {
    let mut table = Table::new(
        "recovery",
        &[
            "case",
            "resolution",
            "relative_error",
            "relative_residual",
            "oddness_defect",
            "symmetry_defect",
            "tangency_defect",
            "rank",
            "unknowns",
            "ill_posed",
        ],
    );
    let r = if spec.radii.contains(&1.0) { 1.0 } else { spec.radii[0] };
    let surface = Hypersurface::new(Shape::sphere(Vector::<3>::zeros(), r), Orientation::Negative)?;
    let (lo, hi) = (Vector::<3>::repeat(-r), Vector::<3>::repeat(r));
    let v_aware = TestBasis::build_on(basis_config, lo, hi)?;
    let v_free = TestBasis::build_on(&BasisConfig { v_degree: 0, x_degree: 2, ..basis_config.clone() }, lo, hi)?;
    let unconstrained = RecoveryConfig { constraints: Constraints::NONE, ..spec.recovery };
    let cases = [
        ("single-sheet, default constraints", 0, &v_aware, spec.recovery),
        ("double-sheet, unconstrained, v-aware basis", 1, &v_aware, unconstrained),
        ("double-sheet, unconstrained, v-independent basis", 1, &v_free, unconstrained),
    ];
    for (k, (name, theta2, basis, config)) in cases.into_iter().enumerate() {
        let v = sample_varifold(&surface, res, spec.order, 1, theta2, format!("sphere r={r} res={res}"))?;
        let oracle = CurvatureField::geometric(&surface, &v)?;
        let (field, rep) = recover_curvature(&v, &basis.functions, &basis.description, &config)?;
        let error = relative_l2_error(&v, &field, &oracle);
        table.push(vec![
            name.into(),
            res.into(),
            error.into(),
            rep.relative_residual.into(),
            rep.oddness_defect.into(),
            rep.symmetry_defect.into(),
            rep.tangency_defect.into(),
            rep.rank.into(),
            rep.unknowns.into(),
            flag(rep.ill_posed),
        ]);
        let q = |quantity: &str| format!("{quantity} ({name})");
        match k {
            0 => verdicts.push(Verdict::at_most(criteria::ODDNESS, &q("relative error vs oracle"), error, th::RECOVERY_ERROR)),
            1 => {
                verdicts.push(Verdict::at_most(criteria::ODDNESS, &q("oddness defect"), rep.oddness_defect, th::ODDNESS));
                verdicts.push(Verdict::at_most(criteria::ODDNESS, &q("relative error vs oracle"), error, th::RECOVERY_ERROR));
                verdicts.push(Verdict::at_most(criteria::STRUCTURE, &q("symmetry defect"), rep.symmetry_defect, th::RECOVERED_STRUCTURE));
                verdicts.push(Verdict::at_most(criteria::STRUCTURE, &q("tangency defect"), rep.tangency_defect, th::RECOVERED_STRUCTURE));
            }
            _ => verdicts.push(Verdict::new(
                criteria::ODDNESS,
                &q("relative rank deficiency"),
                rep.relative_rank_deficiency,
                Comparison::GreaterThan,
                crate::recovery::ILL_POSED_THRESHOLD,
            )),
        }
    }
    Ok(table)
}
