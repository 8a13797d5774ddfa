use std::f64::consts::PI;

use super::sphere::pushforward_mass_gap;
use super::{criteria, sample_varifold, thresholds as th, Comparison, ScalarField, ScenarioReport, ScenarioSpec, Table, Verdict};
use crate::geometry::{Hypersurface, Orientation, Shape};
use crate::identities::{
    lifted_first_variation_residual, max_normalized, residual_records, BasisConfig, IdentityKind, SupportFilter, TestBasis,
};
use crate::recovery::{average_mean_curvature, lq_norm, recover_curvature, sheet_pairs, Constraints, RecoveryConfig};
use crate::{Result, Vector};

pub fn scenario_double_plane(spec: &ScenarioSpec) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(spec);
    let radius = spec.radii[0];
    let g = spec.g.clone().unwrap_or_else(|| ScalarField::constant(1.0));
    let surface = Hypersurface::new(Shape::plane(Vector::<3>::zeros(), Vector::<3>::z(), radius), Orientation::Positive)?;
    let mut basis_config = spec.basis_config();
    if basis_config.filter == SupportFilter::None {
        basis_config.filter = SupportFilter::InsideBall { center: vec![0.0; 3], radius };
    }
    let (lo, hi) = (Vector::<3>::repeat(-radius / 2.0), Vector::<3>::repeat(radius / 2.0));
    let lifted_basis = TestBasis::build_on(&BasisConfig { v_degree: 0, ..basis_config.clone() }, lo, hi)?;

    let mut table = Table::new(
        "cancellation",
        &[
            "resolution",
            "atoms",
            "mass",
            "mass_rel_error",
            "pushforward_mass_gap",
            "projection_mismatch",
            "current_action_e3",
            "current_action_mixed",
            "h_avg_max",
            "lifted_residual",
        ],
    );
    let finest = *spec.resolutions.last().expect("validated nonempty");
    let area = 2.0 * PI * radius * radius;
    for &res in &spec.resolutions {
        let v = sample_varifold(&surface, res, spec.order, 1, 1, format!("double plane res={res}"))?;
        let mass = v.mass();
        let current_e3 = v.current_action(|_| Vector::<3>::z());
        let current_mixed = v.current_action(|x| Vector::<3>::new(x[1], x[0] * x[2], 1.0 + x[0]));
        let atoms = v.atoms();
        let pushed = v.pushforward_unoriented();
        let mut h_avg: f64 = 0.0;
        let mut mismatch: f64 = 0.0;
        for (k, l) in sheet_pairs(&v) {
            let x = atoms[k].x;
            let theta1 = atoms[k].mass;
            let theta2 = atoms[l].mass;
            let h = average_mean_curvature(&atoms[k].v, theta1, theta2, |u| u * g.eval(&x))?;
            h_avg = h_avg.max(h.norm());
            mismatch = mismatch.max((pushed[k].projection - pushed[l].projection).norm());
        }
        let lifted = residual_records(&v, &lifted_basis.functions, IdentityKind::LiftedFirstVariation, |phi| {
            Ok(lifted_first_variation_residual(&v, |x, u| u * g.eval(x), phi))
        })?;
        let lifted = max_normalized(&lifted);
        table.push(vec![
            res.into(),
            v.len().into(),
            mass.into(),
            ((mass - area).abs() / area).into(),
            pushforward_mass_gap(&v).into(),
            mismatch.into(),
            current_e3.into(),
            current_mixed.into(),
            h_avg.into(),
            lifted.into(),
        ]);
        let q = |name: &str| format!("{name} (resolution {res})");
        report.verdicts.push(Verdict::at_most(criteria::CANCELLATION, &q("max |H_avg|"), h_avg, th::ROUNDOFF));
        report.verdicts.push(Verdict::at_most(criteria::CANCELLATION, &q("|current action|, Y = e3"), current_e3.abs(), 0.0));
        report.verdicts.push(Verdict::at_most(criteria::CANCELLATION, &q("|current action|, mixed Y"), current_mixed.abs(), 0.0));
        report.verdicts.push(Verdict::at_most(criteria::MEASURE, &q("pushforward mass gap"), pushforward_mass_gap(&v), 0.0));
        if res == finest {
            report.verdicts.push(Verdict::at_most(criteria::CANCELLATION, &q("normalized lifted residual"), lifted, th::RESIDUAL));
        }
    }
    report.tables.push(table);

    let v = sample_varifold(&surface, finest, spec.order, 1, 1, format!("double plane res={finest}"))?;
    let mut recovery = Table::new("recovery", &["case", "resolution", "rms_w", "relative_rank_deficiency", "ill_posed"]);
    let config = RecoveryConfig { constraints: Constraints::NONE, ..spec.recovery };
    let v_aware = TestBasis::build_on(&basis_config, lo, hi)?;
    let v_free = TestBasis::build_on(&BasisConfig { v_degree: 0, x_degree: 2, ..basis_config.clone() }, lo, hi)?;
    for (name, basis) in [("v-aware basis", &v_aware), ("v-independent basis", &v_free)] {
        let (field, rep) = recover_curvature(&v, &basis.functions, &basis.description, &config)?;
        let rms = lq_norm(&v, &field, 2.0) / v.mass().sqrt();
        recovery.push(vec![
            name.into(),
            finest.into(),
            rms.into(),
            rep.relative_rank_deficiency.into(),
            (if rep.ill_posed { 1.0 } else { 0.0 }).into(),
        ]);
        if basis.functions.iter().any(|f| f.v_powers.iter().any(|&q| q > 0)) {
            report.verdicts.push(Verdict::at_most(criteria::CANCELLATION, "rms of recovered W (v-aware basis)", rms, th::FLAT_RECOVERY));
        } else {
            report.verdicts.push(Verdict::new(
                criteria::ODDNESS,
                "relative rank deficiency (v-independent basis)",
                rep.relative_rank_deficiency,
                Comparison::GreaterThan,
                crate::recovery::ILL_POSED_THRESHOLD,
            ));
        }
    }
    report.tables.push(recovery);
    report.notes.push(format!("disc of radius {radius} in the plane x3 = 0 with multiplicities 1 and 1; M(x, v) = g(x) v"));
    report.notes.push("H_avg is evaluated at every sheet pair with the pair's atom masses as weights".into());
    Ok(report)
}
