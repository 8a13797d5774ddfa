use std::f64::consts::{FRAC_PI_2, PI};

use super::{criteria, sample_varifold, thresholds as th, Comparison, ScalarField, ScenarioReport, ScenarioSpec, Table, Verdict};
use crate::geometry::{Hypersurface, Orientation, Shape};
use crate::identities::{max_normalized, prescribed_mc_residual, residual_records, IdentityKind, SupportFilter, TestBasis};
use crate::recovery::{average_mean_curvature, mean_from_w, CurvatureField};
use crate::varifold::{bl_distance, LipschitzDictionary};
use crate::{Result, Vector};

/// Two copies of the lower unit hemisphere shifted by `±e₃/ℓ`, both with the
/// upward (inner) normal, against their limit: the hemisphere with multiplicity 2.
pub fn scenario_translated_spheres(spec: &ScenarioSpec) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(spec);
    let g = spec.g.clone().unwrap_or_else(|| ScalarField::constant(2.0));
    let res = *spec.resolutions.last().expect("validated nonempty");
    let cap = Hypersurface::new(
        Shape::Sphere { center: Vector::<3>::zeros(), radius: 1.0, polar_range: (FRAC_PI_2, PI) },
        Orientation::Negative,
    )?;
    let single = sample_varifold(&cap, res, spec.order, 1, 0, format!("lower hemisphere res={res}"))?;
    let limit = sample_varifold(&cap, res, spec.order, 2, 0, format!("lower hemisphere x2 res={res}"))?;
    let dictionary_config = crate::varifold::DictionaryConfig { seed: spec.seed, ..spec.dictionary.clone() };
    let dictionary = LipschitzDictionary::configured(Vector::<3>::repeat(-1.5), Vector::<3>::repeat(1.5), &dictionary_config)?;

    let mut table = Table::new("distances", &["ell", "offset", "bl_distance", "ratio"]);
    let mut previous: Option<f64> = None;
    for &ell in &spec.ells {
        let offset = Vector::<3>::new(0.0, 0.0, 1.0 / ell);
        let v = single.translated(&offset).union(&single.translated(&-offset));
        let d = bl_distance(&v, &limit, &dictionary)?;
        let ratio = previous.map(|p| p / d);
        table.push(vec![
            ell.into(),
            (1.0 / ell).into(),
            d.into(),
            ratio.map_or_else(|| "".into(), |r| r.into()),
        ]);
        if let (Some(p), Some(r)) = (previous, ratio) {
            let q = |name: &str| format!("{name} (ell = {ell})");
            report.verdicts.push(Verdict::new(criteria::TRANSLATED_SPHERES, &q("distance decrease d_ell / d_prev"), d / p, Comparison::LessThan, 1.0));
            report.verdicts.push(Verdict::at_least(criteria::TRANSLATED_SPHERES, &q("distance ratio"), r, th::RATIO_LO));
            report.verdicts.push(Verdict::at_most(criteria::TRANSLATED_SPHERES, &q("distance ratio"), r, th::RATIO_HI));
        }
        previous = Some(d);
    }
    report.tables.push(table);

    // Limit: multiplicities θ1 = 2, θ2 = 0, so H = M(x, ξ) = 2ξ.
    let field = CurvatureField::geometric(&cap, &limit)?;
    let mut worst_h: f64 = 0.0;
    let mut worst_lift: f64 = 0.0;
    for (a, w) in limit.atoms().iter().zip(field.matrices()) {
        let h = average_mean_curvature(&a.v, 2.0, 0.0, |u| mean_from_w(&(w * u.dot(&a.v)), u))?;
        worst_h = worst_h.max((h.norm() - 2.0).abs());
        worst_lift = worst_lift.max((mean_from_w(w, &a.v) - a.v * g.eval(&a.x)).norm());
    }
    let mut basis_config = spec.basis_config();
    if basis_config.filter == SupportFilter::None {
        basis_config.filter = SupportFilter::InsideHalfSpace { normal: vec![0.0, 0.0, 1.0], offset: 0.0 };
    }
    let basis = TestBasis::build_on(&basis_config, Vector::<3>::repeat(-1.0), Vector::<3>::repeat(1.0))?;
    let prescribed = residual_records(&limit, &basis.functions, IdentityKind::PrescribedMeanCurvature, |phi| {
        prescribed_mc_residual(&limit, field.matrices(), |x| g.eval(x), phi)
    })?;
    let mut limit_table = Table::new("limit", &["resolution", "atoms", "mass", "max_abs_h_minus_2", "max_lift_error", "prescribed_residual"]);
    limit_table.push(vec![
        res.into(),
        limit.len().into(),
        limit.mass().into(),
        worst_h.into(),
        worst_lift.into(),
        max_normalized(&prescribed).into(),
    ]);
    report.tables.push(limit_table);
    report.verdicts.push(Verdict::at_most(criteria::TRANSLATED_SPHERES, "max ||H| - 2| at the limit", worst_h, th::ROUNDOFF));
    report.verdicts.push(Verdict::at_most(criteria::TRANSLATED_SPHERES, "max |M - g v| at the limit", worst_lift, th::ROUNDOFF));
    report.notes.push(format!(
        "bl_distance is a lower bound over a fixed dictionary of {} functions (default box [-1.5, 1.5]^3)",
        dictionary.len()
    ));
    report.notes.push("test functions are supported in x3 < 0, away from the hemisphere boundary".into());
    Ok(report)
}
