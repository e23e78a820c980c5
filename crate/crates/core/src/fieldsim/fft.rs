//! Two-dimensional DFT on the `m × m` torus from one-dimensional row passes.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::scalar::Real;

/// Planned forward and inverse transforms of an `m × m` row-major grid.
/// Neither direction is normalised, so a round trip multiplies by `m²`.
#[derive(Clone)]
pub(crate) struct Fft2<T: Real> {
    m: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> fmt::Debug for Fft2<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fft2").field("m", &self.m).finish()
    }
}

impl<T: Real> Fft2<T> {
    pub(crate) fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            m,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        }
    }

    pub(crate) fn scratch(&self) -> Vec<Complex<T>> {
        let len = self
            .forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len());
        vec![Complex::new(T::zero(), T::zero()); len]
    }

    pub(crate) fn process(&self, buf: &mut [Complex<T>], inverse: bool, scratch: &mut [Complex<T>]) {
        debug_assert_eq!(buf.len(), self.m * self.m);
        let plan = if inverse { &self.inverse } else { &self.forward };
        plan.process_with_scratch(buf, scratch);
        transpose(buf, self.m);
        plan.process_with_scratch(buf, scratch);
        transpose(buf, self.m);
    }
}

fn transpose<T: Copy>(buf: &mut [T], m: usize) {
    for r in 0..m {
        for c in r + 1..m {
            buf.swap(r * m + c, c * m + r);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft2(x: &[Complex<f64>], m: usize) -> Vec<Complex<f64>> {
        (0..m * m)
            .map(|k| {
                let (kr, kc) = (k / m, k % m);
                x.iter().enumerate().fold(Complex::new(0.0, 0.0), |acc, (j, &v)| {
                    let (jr, jc) = (j / m, j % m);
                    let a = -2.0 * std::f64::consts::PI * ((jr * kr + jc * kc) % m) as f64 / m as f64;
                    acc + v * Complex::new(a.cos(), a.sin())
                })
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_and_round_trips() {
        for m in [2usize, 4, 8] {
            let x: Vec<Complex<f64>> = (0..m * m)
                .map(|i| Complex::new((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()))
                .collect();
            let fft = Fft2::<f64>::new(m);
            let mut scratch = fft.scratch();
            let mut y = x.clone();
            fft.process(&mut y, false, &mut scratch);
            for (a, b) in y.iter().zip(naive_dft2(&x, m)) {
                assert!((a - b).norm() < 1e-12);
            }
            fft.process(&mut y, true, &mut scratch);
            let k = (m * m) as f64;
            for (a, b) in y.iter().zip(&x) {
                assert!((a / k - b).norm() < 1e-14);
            }
        }
    }
}
