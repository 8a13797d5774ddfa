use super::{criteria, orders, sample_varifold, thresholds as th, ScenarioReport, ScenarioSpec, Table, Verdict};
use crate::geometry::{Hypersurface, Orientation, Shape};
use crate::identities::{max_normalized, residual_records, riemannian_identity_residual, AmbientManifold, IdentityKind, TestBasis};
use crate::recovery::CurvatureField;
use crate::{Result, Vector};

/// Contrast coefficients: `W = 0` off the equator; on the equator (where the
/// correct field is 0) the field of a curve with `k_g = 1`, i.e. `t tᵀ` up to sign.
fn contrast(curve: &Hypersurface<3>, v: &crate::varifold::OrientedVarifold<3>, geodesic: bool) -> Result<CurvatureField<3>> {
    if !geodesic {
        return Ok(CurvatureField::zero(v));
    }
    let mut w = Vec::with_capacity(v.len());
    for a in v.atoms() {
        let nu = curve.unit_normal(&a.x)?;
        let t = Vector::<3>::new(-a.x[1], a.x[0], 0.0).normalize();
        w.push(t * t.transpose() * nu.dot(&a.v));
    }
    Ok(CurvatureField::from_matrices(w))
}

pub fn scenario_latitude_circles(spec: &ScenarioSpec) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(spec);
    let basis = TestBasis::build_on(&spec.basis_config(), Vector::<3>::repeat(-1.0), Vector::<3>::repeat(1.0))?;
    let ambient = AmbientManifold::UnitSphere;
    let mut table = Table::new(
        "convergence",
        &["polar_angle", "geodesic_curvature", "resolution", "atoms", "length", "residual", "contrast_residual", "contrast_ratio"],
    );
    let mut order_table = Table::new("orders", &["polar_angle", "from", "to", "residual_order"]);
    let finest = *spec.resolutions.last().expect("validated nonempty");
    for &theta in &spec.polar_angles {
        let curve = Hypersurface::new(Shape::LatitudeCircle { polar_angle: theta }, Orientation::Positive)?;
        let k_g = theta.cos() / theta.sin();
        let geodesic = k_g.abs() < 1e-12;
        let mut levels = Vec::new();
        for &res in &spec.resolutions {
            let v = sample_varifold(&curve, res, spec.order, 1, 0, format!("latitude {theta} res={res}"))?;
            let w = CurvatureField::geometric(&curve, &v)?;
            let wrong = contrast(&curve, &v, geodesic)?;
            let good = residual_records(&v, &basis.functions, IdentityKind::Riemannian, |phi| {
                riemannian_identity_residual(&v, w.matrices(), &ambient, phi)
            })?;
            let bad = residual_records(&v, &basis.functions, IdentityKind::Riemannian, |phi| {
                riemannian_identity_residual(&v, wrong.matrices(), &ambient, phi)
            })?;
            let (good, bad) = (max_normalized(&good), max_normalized(&bad));
            levels.push((res, good));
            table.push(vec![
                theta.into(),
                k_g.into(),
                res.into(),
                v.len().into(),
                v.mass().into(),
                good.into(),
                bad.into(),
                (bad / good).into(),
            ]);
            if res == finest {
                let q = |name: &str| format!("{name} (polar angle {theta:.6}, resolution {res})");
                report.verdicts.push(Verdict::at_most(criteria::RIEMANNIAN, &q("normalized residual"), good, th::RESIDUAL));
                report.verdicts.push(Verdict::at_least(criteria::RIEMANNIAN, &q("contrast / residual"), bad / good, th::CONTRAST));
            }
        }
        for (k, p) in orders(&levels).into_iter().enumerate() {
            order_table.push(vec![theta.into(), spec.resolutions[k].into(), spec.resolutions[k + 1].into(), p.into()]);
        }
    }
    report.tables.push(table);
    report.tables.push(order_table);
    report.notes.push("ambient manifold: unit sphere S^2; the curve normal is the unit conormal e_theta inside S^2".into());
    report.notes.push("contrast: W = 0 off the equator, the k_g = 1 field on the equator".into());
    Ok(report)
}
