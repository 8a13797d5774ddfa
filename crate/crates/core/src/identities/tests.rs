use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::geometry::{Hypersurface, Orientation, QuadratureOrder, Shape};
use crate::recovery::CurvatureField;
use crate::scenarios::sample_varifold;

fn v3(a: f64, b: f64, c: f64) -> Vector<3> {
    Vector::<3>::new(a, b, c)
}

fn sphere(radius: f64, orientation: Orientation) -> Hypersurface<3> {
    Hypersurface::new(Shape::sphere(Vector::zeros(), radius), orientation).unwrap()
}

fn disc() -> Hypersurface<3> {
    Hypersurface::new(Shape::plane(Vector::zeros(), v3(0.0, 0.0, 1.0), 2.0), Orientation::Positive).unwrap()
}

fn varifold(surface: &Hypersurface<3>, res: usize, t1: u32, t2: u32) -> OrientedVarifold<3> {
    sample_varifold(surface, res, QuadratureOrder::Midpoint, t1, t2, "test".into()).unwrap()
}

fn small_basis(v: &OrientedVarifold<3>, v_degree: u32) -> TestBasis<3> {
    TestBasis::build(&BasisConfig { grid: 3, v_degree, ..BasisConfig::default() }, v).unwrap()
}

/// Bumps well inside the disc of radius 2.
fn interior_bumps() -> Vec<BumpFunction<3>> {
    let q = [[0, 0, 0], [1, 0, 0], [0, 0, 1], [0, 1, 1]];
    [v3(0.0, 0.0, 0.0), v3(0.4, -0.3, 0.0)]
        .into_iter()
        .flat_map(|c| q.map(|q| BumpFunction::plain(c, 0.9).with_v_powers(q)))
        .collect()
}

fn worst<F>(basis: &[BumpFunction<3>], mut residual: F) -> f64
where
    F: FnMut(&BumpFunction<3>) -> Vector<3>,
{
    basis.iter().fold(0.0, |acc, phi| acc.max(residual(phi).amax()))
}

#[test]
fn first_variation_of_position_field_on_circle() {
    for r in [0.5, 2.0] {
        let c = Hypersurface::new(Shape::<2>::sphere(Vector::zeros(), r), Orientation::Negative).unwrap();
        let v = sample_varifold(&c, 64, QuadratureOrder::Midpoint, 1, 0, "circle".into()).unwrap();
        let fv = first_variation(&v, |x| (*x, Matrix::<2>::identity()));
        assert!((fv - 2.0 * PI * r).abs() < 1e-3 * r, "r {r}: {fv}");
    }
}

#[test]
fn first_variation_of_constant_field_vanishes() {
    let v = varifold(&sphere(1.0, Orientation::Positive), 16, 1, 0);
    assert_eq!(first_variation(&v, |_| (v3(0.0, 0.0, 1.0), Matrix::zeros())), 0.0);
    assert_eq!(first_variation(&v, |_| (v3(1.0, -2.0, 3.0), Matrix::zeros())), 0.0);
}

#[test]
fn lifted_residual_on_sphere_with_mean_n_v() {
    let s = sphere(1.0, Orientation::Negative);
    let coarse = varifold(&s, 16, 1, 0);
    let fine = varifold(&s, 64, 1, 0);
    let basis = small_basis(&fine, 0);
    let r = |v: &OrientedVarifold<3>| {
        let records = residual_records(v, &basis.functions, IdentityKind::LiftedFirstVariation, |phi| {
            Ok(lifted_first_variation_residual(v, |_, u| u * 2.0, phi))
        })
        .unwrap();
        max_normalized(&records)
    };
    let (rc, rf) = (r(&coarse), r(&fine));
    assert!(rf < 1e-3, "{rf}");
    assert!(rc / rf > 8.0, "{rc} → {rf}");
}

#[test]
fn lifted_residual_cannot_see_sheet_average() {
    // On the double plane the lift g·v cancels between sheets, just like H = 0.
    let basis: Vec<_> = interior_bumps().into_iter().filter(|b| !b.depends_on_v()).collect();
    let worst_at = |res| {
        let v = varifold(&disc(), res, 1, 1);
        worst(&basis, |phi| {
            let with_g = lifted_first_variation_residual(&v, |_, u| *u, phi);
            let zero = lifted_first_variation_residual(&v, |_, _| Vector::zeros(), phi);
            assert!((with_g - zero).amax() < 1e-15);
            with_g
        })
    };
    let (rc, rf) = (worst_at(16), worst_at(64));
    assert!(rf < 1e-3 && rc / rf > 8.0, "{rc} → {rf}");
}

#[test]
fn curvature_residual_on_flat_patch_with_zero_w() {
    let worst_at = |res, order| {
        let v = sample_varifold(&disc(), res, order, 1, 0, "disc".into()).unwrap();
        let w = CurvatureField::zero(&v);
        worst(&interior_bumps(), |phi| curvature_identity_residual(&v, w.matrices(), phi).unwrap())
    };
    for order in [QuadratureOrder::Midpoint, QuadratureOrder::MultiPoint] {
        let (rc, rf) = (worst_at(16, order), worst_at(64, order));
        assert!(rf < 1e-4 && rc / rf > 12.0, "{order:?}: {rc} → {rf}");
    }
}

#[test]
fn curvature_residual_converges_on_sphere() {
    let s = sphere(1.0, Orientation::Positive);
    let levels: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&res| {
            let v = varifold(&s, res, 1, 0);
            let w = CurvatureField::geometric(&s, &v).unwrap();
            let basis = TestBasis::build_on(&BasisConfig { grid: 3, ..BasisConfig::default() }, v3(-1.0, -1.0, -1.0), v3(1.0, 1.0, 1.0))
                .unwrap();
            let records = residual_records(&v, &basis.functions, IdentityKind::Curvature, |phi| {
                curvature_identity_residual(&v, w.matrices(), phi)
            })
            .unwrap();
            max_normalized(&records)
        })
        .collect();
    for pair in levels.windows(2) {
        assert!((pair[0] / pair[1]).log2() >= 1.5, "{levels:?}");
    }
}

#[test]
fn wrong_coefficients_leave_a_residual() {
    let s = sphere(1.0, Orientation::Positive);
    let phi = BumpFunction::plain(v3(0.0, 0.0, 0.8), 0.6).with_v_powers([0, 0, 1]);
    for res in [16, 32, 64] {
        let v = varifold(&s, res, 1, 0);
        let zero = CurvatureField::zero(&v);
        let r = curvature_identity_residual(&v, zero.matrices(), &phi).unwrap();
        assert!(r.amax() > 1e-2, "res {res}: {r}");
    }
}

#[test]
fn curvature_residual_reduces_to_lifted_residual_bitwise() {
    let s = Hypersurface::new(Shape::<3>::Torus { center: Vector::zeros(), major: 1.0, minor: 0.4 }, Orientation::Positive)
        .unwrap();
    let v = varifold(&s, 6, 1, 1);
    let w = CurvatureField::geometric(&s, &v).unwrap();
    let basis = small_basis(&v, 0);
    let mean_at: std::collections::HashMap<(u64, u64, u64, u64, u64, u64), Vector<3>> = v
        .atoms()
        .iter()
        .zip(w.matrices())
        .map(|(a, w)| (key(&a.x, &a.v), mean_from_w(w, &a.v)))
        .collect();
    for phi in &basis.functions {
        let c = curvature_identity_residual(&v, w.matrices(), phi).unwrap();
        let l = lifted_first_variation_residual(&v, |x, u| mean_at[&key(x, u)], phi);
        assert_eq!(c, l);
    }
}

fn key(x: &Vector<3>, v: &Vector<3>) -> (u64, u64, u64, u64, u64, u64) {
    (x[0].to_bits(), x[1].to_bits(), x[2].to_bits(), v[0].to_bits(), v[1].to_bits(), v[2].to_bits())
}

#[test]
fn cmc_one_sphere_satisfies_prescribed_identity() {
    let s = sphere(2.0, Orientation::Negative);
    let v = varifold(&s, 16, 1, 0);
    let w = CurvatureField::geometric(&s, &v).unwrap();
    for a in v.atoms().iter().zip(w.matrices()) {
        assert!((mean_from_w(a.1, &a.0.v) - a.0.v).norm() < 1e-15);
    }
    let phi = BumpFunction::plain(v3(0.0, 0.0, 1.8), 1.0).with_v_powers([0, 0, 1]);
    let coarse = prescribed_mc_residual(&v, w.matrices(), |_| 1.0, &phi).unwrap();
    let v2 = varifold(&s, 64, 1, 0);
    let w2 = CurvatureField::geometric(&s, &v2).unwrap();
    let fine = prescribed_mc_residual(&v2, w2.matrices(), |_| 1.0, &phi).unwrap();
    let wrong = prescribed_mc_residual(&v2, w2.matrices(), |_| 0.0, &phi).unwrap();
    assert!(fine.amax() < 1e-3 && fine.amax() < coarse.amax() / 8.0);
    // Setting g = 0 leaves exactly the mean-curvature term ∫ φ v.
    let expected = v2.atoms().iter().fold(Vector::<3>::zeros(), |acc, a| acc - a.v * (a.mass * phi.eval(&a.x, &a.v)));
    assert!((wrong - fine - expected).amax() < 1e-12);
    assert!(wrong.amax() > 0.1);
}

#[test]
fn empty_varifold_has_zero_residuals() {
    let v = OrientedVarifold::<3>::empty(2);
    let phi = BumpFunction::plain(Vector::zeros(), 1.0);
    assert_eq!(prescribed_mc_residual(&v, &[], |_| 1.0, &phi).unwrap(), Vector::<3>::zeros());
    assert_eq!(curvature_identity_residual(&v, &[], &phi).unwrap(), Vector::<3>::zeros());
}

#[test]
fn coefficient_count_must_match_atoms() {
    let v = varifold(&disc(), 4, 1, 0);
    let phi = BumpFunction::plain(Vector::zeros(), 1.0);
    assert!(curvature_identity_residual(&v, &[Matrix::zeros()], &phi).is_err());
}

fn latitude(theta: f64, res: usize) -> (Hypersurface<3>, OrientedVarifold<3>) {
    let c = Hypersurface::new(Shape::LatitudeCircle { polar_angle: theta }, Orientation::Positive).unwrap();
    let v = sample_varifold(&c, res, QuadratureOrder::Midpoint, 1, 0, "latitude".into()).unwrap();
    (c, v)
}

fn riemannian_worst(v: &OrientedVarifold<3>, w: &[Matrix<3>]) -> f64 {
    let basis =
        TestBasis::build_on(&BasisConfig { grid: 3, ..BasisConfig::default() }, Vector::repeat(-1.0), Vector::repeat(1.0)).unwrap();
    let records = residual_records(v, &basis.functions, IdentityKind::Riemannian, |phi| {
        riemannian_identity_residual(v, w, &AmbientManifold::UnitSphere, phi)
    })
    .unwrap();
    max_normalized(&records)
}

#[test]
fn equator_with_zero_coefficients() {
    let (_, v) = latitude(FRAC_PI_2, 64);
    assert!(riemannian_worst(&v, CurvatureField::zero(&v).matrices()) < 1e-3);
}

#[test]
fn latitude_circle_with_geodesic_curvature_one() {
    let (c, coarse) = latitude(FRAC_PI_4, 16);
    let (_, fine) = latitude(FRAC_PI_4, 64);
    let wc = CurvatureField::geometric(&c, &coarse).unwrap();
    let wf = CurvatureField::geometric(&c, &fine).unwrap();
    // k_g = cot(π/4) = 1: W = ±t tᵀ.
    for (a, w) in fine.atoms().iter().zip(wf.matrices()) {
        assert_abs_diff_eq!(w.trace().abs(), 1.0, epsilon = 1e-12);
        assert!((w * a.v).norm() < 1e-12);
    }
    let (rc, rf) = (riemannian_worst(&coarse, wc.matrices()), riemannian_worst(&fine, wf.matrices()));
    assert!(rf < 1e-3 && rc / rf > 4.0, "{rc} → {rf}");
}

#[test]
fn equator_with_wrong_coefficients() {
    let (c, v) = latitude(FRAC_PI_2, 64);
    let w: Vec<Matrix<3>> = v
        .atoms()
        .iter()
        .map(|a| {
            let t = v3(-a.x[1], a.x[0], 0.0).normalize();
            t * t.transpose() * c.unit_normal(&a.x).unwrap().dot(&a.v)
        })
        .collect();
    assert!(riemannian_worst(&v, &w) > 1e-2);
}

#[test]
fn off_manifold_atoms_are_rejected() {
    let v = varifold(&sphere(2.0, Orientation::Positive), 4, 1, 0);
    let phi = BumpFunction::plain(Vector::zeros(), 3.0);
    let w = CurvatureField::zero(&v);
    let r = riemannian_identity_residual(&v, w.matrices(), &AmbientManifold::UnitSphere, &phi);
    assert!(matches!(r, Err(Error::OffManifold { index: 0, .. })));
    // On S² but with v normal to the sphere.
    let v = varifold(&sphere(1.0, Orientation::Positive), 4, 1, 0);
    let r = riemannian_identity_residual(&v, CurvatureField::zero(&v).matrices(), &AmbientManifold::UnitSphere, &phi);
    assert!(matches!(r, Err(Error::OffManifold { .. })));
}

#[test]
fn default_basis_size() {
    let v = varifold(&sphere(1.0, Orientation::Positive), 8, 1, 0);
    let basis = TestBasis::build(&BasisConfig::default(), &v).unwrap();
    assert_eq!(basis.len(), 125 * 10);
    assert_eq!(basis.v_independent().len(), 125);
    assert!(basis.v_independent().functions.iter().all(|f| !f.depends_on_v()));
    assert_eq!(multi_indices::<3>(2).len(), 10);
    assert_eq!(multi_indices::<2>(2).len(), 6);
    assert_eq!(multi_indices::<3>(0), vec![[0, 0, 0]]);
}

#[test]
fn basis_filters_and_validation() {
    let cfg = BasisConfig {
        grid: 5,
        v_degree: 0,
        filter: SupportFilter::InsideBall { center: vec![0.0; 3], radius: 1.0 },
        ..BasisConfig::default()
    };
    let b = TestBasis::<3>::build_on(&cfg, Vector::repeat(-1.0), Vector::repeat(1.0)).unwrap();
    assert!(!b.is_empty());
    for f in &b.functions {
        assert!(f.center.norm() + f.radius <= 1.0 + 1e-12);
    }
    let bad = BasisConfig { grid: 0, ..BasisConfig::default() };
    assert!(TestBasis::<3>::build_on(&bad, Vector::zeros(), Vector::repeat(1.0)).is_err());
    let bad = BasisConfig { domain: Some((vec![0.0; 2], vec![1.0; 2])), ..BasisConfig::default() };
    assert!(TestBasis::<3>::build_on(&bad, Vector::zeros(), Vector::repeat(1.0)).is_err());
    assert!(TestBasis::build(&BasisConfig::default(), &OrientedVarifold::<3>::empty(2)).is_err());
}

#[test]
fn residual_records_follow_basis_order() {
    let v = varifold(&sphere(1.0, Orientation::Positive), 8, 1, 0);
    let w = CurvatureField::geometric(&sphere(1.0, Orientation::Positive), &v).unwrap();
    let basis = small_basis(&v, 1);
    let run = || {
        residual_records(&v, &basis.functions, IdentityKind::Curvature, |phi| {
            curvature_identity_residual(&v, w.matrices(), phi)
        })
        .unwrap()
    };
    let a = run();
    assert_eq!(a, run());
    assert_eq!(a.len(), 3 * basis.len());
    for (k, r) in a.iter().enumerate() {
        assert_eq!(r.index, k % 3);
        assert_eq!(r.basis_id, basis.functions[k / 3].id());
    }
    assert!(max_raw(&a) >= max_normalized(&a) * 0.0);
    assert_eq!(normalize(1.0, 0.0, 1.0), 0.0);
}

#[test]
fn sphere_ambient_structure() {
    let m = AmbientManifold::UnitSphere;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let x = v3(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)).normalize();
        let s = m.projection(&x);
        assert!((s - s.transpose()).norm() <= 1e-15);
        assert!((s * s - s).norm() <= 1e-12);
        assert!((s.trace() - 2.0).abs() <= 1e-12);
        let a = m.a_bar(&x);
        let b = m.b_bar(&x);
        let t = s * v3(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let mut btt = Vector::<3>::zeros();
        for i in 0..3 {
            for r in 0..3 {
                for k in 0..3 {
                    assert_abs_diff_eq!(a[i][r][k], a[i][k][r], epsilon = 1e-15);
                    assert_abs_diff_eq!(a[i][r][k], b[i][r][k] + b[i][k][r], epsilon = 1e-15);
                    btt[k] += b[i][r][k] * t[i] * t[r];
                }
            }
        }
        assert!((s * btt).norm() <= 1e-12);
    }
}

#[test]
fn ambient_a_bar_matches_finite_differences() {
    let m = AmbientManifold::UnitSphere;
    let x = v3(0.3, -0.5, 0.2).normalize();
    let s = m.projection(&x);
    let a = m.a_bar(&x);
    let h = 1e-6;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let mut fd = 0.0;
                for r in 0..3 {
                    let mut e = Vector::<3>::zeros();
                    e[r] = h;
                    let d = (m.projection(&(x + e))[(j, k)] - m.projection(&(x - e))[(j, k)]) / (2.0 * h);
                    fd += s[(i, r)] * d;
                }
                assert_abs_diff_eq!(a[i][j][k], fd, epsilon = 1e-8);
            }
        }
    }
}

fn arb_bump() -> impl Strategy<Value = BumpFunction<3>> {
    (
        prop::array::uniform3(-1.0f64..1.0),
        0.3f64..2.0,
        prop::array::uniform3(0u32..3),
        prop::array::uniform3(0u32..3),
    )
        .prop_map(|(c, r, p, q)| BumpFunction { center: Vector::from(c), radius: r, x_powers: p, v_powers: q })
}

fn arb_w() -> impl Strategy<Value = Matrix<3>> {
    prop::array::uniform9(-2.0f64..2.0).prop_map(|m| Matrix::<3>::from_column_slice(&m))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bump_gradients_match_finite_differences(phi in arb_bump(), seed in any::<u64>()) {
        prop_assert!(gradient_self_test(&phi, 100, seed) <= 1e-6);
    }

    #[test]
    fn bump_vanishes_outside_support(phi in arb_bump(), dir in prop::array::uniform3(-1.0f64..1.0), extra in 0.0f64..2.0) {
        let d = Vector::<3>::from(dir);
        prop_assume!(d.norm() > 1e-3);
        let x = phi.center + d.normalize() * phi.radius * (1.0 + extra);
        prop_assert_eq!(phi.jet(&x, &v3(0.0, 0.6, 0.8)), Jet::zero());
    }

    #[test]
    fn residuals_are_linear_in_w_and_phi(
        w1 in arb_w(), w2 in arb_w(), f1 in arb_bump(), f2 in arb_bump(), a in -2.0f64..2.0, b in -2.0f64..2.0,
    ) {
        let v = varifold(&sphere(1.0, Orientation::Positive), 6, 1, 1);
        let n = v.len();
        let (m1, m2) = (vec![w1; n], vec![w2; n]);
        let mix: Vec<Matrix<3>> = vec![w1 * a + w2 * b; n];
        let lhs = curvature_identity_residual(&v, &mix, &f1).unwrap();
        let rhs = curvature_identity_residual(&v, &m1, &f1).unwrap() * a + curvature_identity_residual(&v, &m2, &f1).unwrap() * b
            - curvature_identity_residual(&v, &vec![Matrix::zeros(); n], &f1).unwrap() * (a + b - 1.0);
        prop_assert!((lhs - rhs).amax() <= 1e-12 * (1.0 + lhs.amax()));
        let sum = Sum(f1, f2, a, b);
        let lhs = curvature_identity_residual(&v, &m1, &sum).unwrap();
        let rhs = curvature_identity_residual(&v, &m1, &f1).unwrap() * a + curvature_identity_residual(&v, &m1, &f2).unwrap() * b;
        prop_assert!((lhs - rhs).amax() <= 1e-12 * (1.0 + lhs.amax()));
    }

    #[test]
    fn mean_from_w_on_tangential_symmetric_w_is_trace_times_v(w in arb_w(), t in 0.0f64..PI, p in 0.0f64..2.0 * PI) {
        let v = v3(t.sin() * p.cos(), t.sin() * p.sin(), t.cos());
        let proj = crate::numeric::normal_projection(&v);
        let w = proj * (w + w.transpose()) * proj;
        prop_assert!((mean_from_w(&w, &v) + v * w.trace()).norm() <= 1e-12);
    }
}

/// `a·f + b·g` as a test function.
struct Sum(BumpFunction<3>, BumpFunction<3>, f64, f64);

impl TestFunction<3> for Sum {
    fn jet(&self, x: &Vector<3>, v: &Vector<3>) -> Jet<3> {
        let (f, g) = (self.0.jet(x, v), self.1.jet(x, v));
        Jet { value: f.value * self.2 + g.value * self.3, dx: f.dx * self.2 + g.dx * self.3, dv: f.dv * self.2 + g.dv * self.3 }
    }

    fn support(&self) -> Support<3> {
        let s = self.0.support();
        Support { radius: s.radius + self.1.support().radius + (self.0.center - self.1.center).norm(), ..s }
    }

    fn id(&self) -> String {
        format!("{}+{}", self.0.id(), self.1.id())
    }
}
