use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Vector;

/// Value and first derivatives of a test function at `(x, v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<const D: usize> {
    pub value: f64,
    /// `D_jφ`, derivatives in position.
    pub dx: Vector<D>,
    /// `D*_aφ`, derivatives in the normal slot (taken in the ambient `ℝ^D`).
    pub dv: Vector<D>,
}

impl<const D: usize> Jet<D> {
    pub fn zero() -> Self {
        Self { value: 0.0, dx: Vector::zeros(), dv: Vector::zeros() }
    }
}

/// Closed ball in `x` outside which the function vanishes, plus its polynomial degree in `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support<const D: usize> {
    pub center: Vector<D>,
    pub radius: f64,
    pub v_degree: u32,
}

/// A `C¹` function `φ(x, v)` with compact support in `x`.
pub trait TestFunction<const D: usize>: Send + Sync {
    fn jet(&self, x: &Vector<D>, v: &Vector<D>) -> Jet<D>;

    fn support(&self) -> Support<D>;

    fn id(&self) -> String;

    fn depends_on_v(&self) -> bool {
        self.support().v_degree > 0
    }

    fn eval(&self, x: &Vector<D>, v: &Vector<D>) -> f64 {
        self.jet(x, v).value
    }
}

/// `φ(x, v) = (1 − |y|²)₊³ · yᵖ · vᵠ` with `y = (x − c)/ρ` and multi-indices `p`, `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpFunction<const D: usize> {
    pub center: Vector<D>,
    pub radius: f64,
    pub x_powers: [u32; D],
    pub v_powers: [u32; D],
}

impl<const D: usize> BumpFunction<D> {
    /// Bump without polynomial factors.
    pub fn plain(center: Vector<D>, radius: f64) -> Self {
        Self { center, radius, x_powers: [0; D], v_powers: [0; D] }
    }

    pub fn with_v_powers(mut self, v_powers: [u32; D]) -> Self {
        self.v_powers = v_powers;
        self
    }

    pub fn with_x_powers(mut self, x_powers: [u32; D]) -> Self {
        self.x_powers = x_powers;
        self
    }
}

/// Monomial `Π z_k^{p_k}` and its gradient.
fn monomial<const D: usize>(z: &Vector<D>, powers: &[u32; D]) -> (f64, Vector<D>) {
    let value: f64 = (0..D).map(|k| z[k].powi(powers[k] as i32)).product();
    let grad = Vector::<D>::from_fn(|k, _| {
        if powers[k] == 0 {
            return 0.0;
        }
        let mut g = powers[k] as f64 * z[k].powi(powers[k] as i32 - 1);
        for j in (0..D).filter(|&j| j != k) {
            g *= z[j].powi(powers[j] as i32);
        }
        g
    });
    (value, grad)
}

impl<const D: usize> TestFunction<D> for BumpFunction<D> {
    fn jet(&self, x: &Vector<D>, v: &Vector<D>) -> Jet<D> {
        let y = (x - self.center) / self.radius;
        let s = 1.0 - y.norm_squared();
        if s <= 0.0 {
            return Jet::zero();
        }
        let bump = s * s * s;
        let d_bump = y * (-6.0 * s * s / self.radius);
        let (p, dp) = monomial(&y, &self.x_powers);
        let (b, db) = monomial(v, &self.v_powers);
        let alpha = bump * p;
        let d_alpha = d_bump * p + dp * (bump / self.radius);
        Jet { value: alpha * b, dx: d_alpha * b, dv: db * alpha }
    }

    fn support(&self) -> Support<D> {
        Support { center: self.center, radius: self.radius, v_degree: self.v_powers.iter().sum() }
    }

    fn id(&self) -> String {
        let c: Vec<String> = self.center.iter().map(|c| format!("{c:.4}")).collect();
        let p: Vec<String> = self.x_powers.iter().map(|p| p.to_string()).collect();
        let q: Vec<String> = self.v_powers.iter().map(|q| q.to_string()).collect();
        format!("bump[c=({}),rho={:.4},x^({}),v^({})]", c.join(","), self.radius, p.join(""), q.join(""))
    }
}

/// Largest relative mismatch between analytic gradients and centered finite
/// differences at `samples` random points in the support (seeded).
///
/// Mismatch is measured componentwise against `max(1, |∇φ|)` so that points
/// with tiny gradients do not dominate.
pub fn gradient_self_test<const D: usize, F: TestFunction<D> + ?Sized>(f: &F, samples: usize, seed: u64) -> f64 {
    let support = f.support();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-5 * support.radius.min(1.0);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x = Vector::<D>::from_fn(|_, _| rng.random_range(-1.0..=1.0)) * support.radius + support.center;
        let v = loop {
            let v = Vector::<D>::from_fn(|_, _| rng.random_range(-1.0..=1.0));
            if v.norm() > 0.1 {
                break v.normalize();
            }
        };
        let jet = f.jet(&x, &v);
        let scale = (jet.dx.norm_squared() + jet.dv.norm_squared()).sqrt().max(1.0);
        for k in 0..D {
            let mut e = Vector::<D>::zeros();
            e[k] = h;
            let fd_x = (f.eval(&(x + e), &v) - f.eval(&(x - e), &v)) / (2.0 * h);
            let fd_v = (f.eval(&x, &(v + e)) - f.eval(&x, &(v - e))) / (2.0 * h);
            worst = worst.max((fd_x - jet.dx[k]).abs() / scale).max((fd_v - jet.dv[k]).abs() / scale);
        }
    }
    worst
}
