//! Small numeric helpers shared by the reductions in this crate.

use crate::{Matrix, Vector};

/// Neumaier (improved Kahan) compensated summation.
///
/// Sums are accumulated in insertion order, so the result is bitwise
/// reproducible for a fixed input sequence.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for v in iter {
            s.add(v);
        }
        s
    }
}

/// Compensated accumulator for vectors, one [`CompensatedSum`] per component.
#[derive(Debug, Clone, Copy)]
pub struct VectorSum<const D: usize> {
    parts: [CompensatedSum; D],
}

impl<const D: usize> Default for VectorSum<D> {
    fn default() -> Self {
        Self { parts: [CompensatedSum::default(); D] }
    }
}

impl<const D: usize> VectorSum<D> {
    #[inline]
    pub fn add(&mut self, v: &Vector<D>) {
        for (p, x) in self.parts.iter_mut().zip(v.iter()) {
            p.add(*x);
        }
    }

    pub fn value(&self) -> Vector<D> {
        Vector::<D>::from_fn(|i, _| self.parts[i].value())
    }
}

/// Orthogonal projection onto the hyperplane orthogonal to `v`: `I − v vᵀ`.
#[inline]
pub fn normal_projection<const D: usize>(v: &Vector<D>) -> Matrix<D> {
    Matrix::<D>::identity() - v * v.transpose()
}

/// Observed convergence order between consecutive refinement levels.
///
/// `levels` holds `(resolution, error)` pairs in increasing resolution.
/// Returns one order per consecutive pair: `log(e_k / e_{k+1}) / log(h_k / h_{k+1})`.
pub fn observed_orders(levels: &[(f64, f64)]) -> Vec<f64> {
    levels
        .windows(2)
        .map(|w| {
            let (r0, e0) = w[0];
            let (r1, e1) = w[1];
            (e0 / e1).ln() / (r1 / r0).ln()
        })
        .collect()
}

/// Frobenius norm squared of a square matrix.
#[inline]
pub fn frobenius_sq<const D: usize>(m: &Matrix<D>) -> f64 {
    m.iter().map(|x| x * x).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1.0);
        s.add(1e-16);
        s.add(-1.0);
        assert_eq!(s.value(), 1e-16);
    }

    #[test]
    fn cancelling_pairs_sum_to_exact_zero() {
        let values = [0.1, -0.1, 0.7, -0.7, 1e-9, -1e-9];
        let s: CompensatedSum = values.iter().copied().collect();
        assert_eq!(s.value(), 0.0);
    }

    #[test]
    fn second_order_sequence_has_order_two() {
        let levels: Vec<(f64, f64)> = [8.0, 16.0, 32.0].iter().map(|&n| (n, 3.0 / (n * n))).collect();
        for p in observed_orders(&levels) {
            assert!((p - 2.0).abs() < 1e-12);
        }
    }
}
