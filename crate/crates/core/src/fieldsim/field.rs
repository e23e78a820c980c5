//! Stationary Gaussian fields on the discrete torus `(ℤ/mℤ)²`, obtained by
//! circular convolution of white noise with a Gaussian filter.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use rustfft::num_complex::Complex;

use super::fft::Fft2;
use crate::error::{Error, Result};
use crate::sample::{MeanVector, Sample};
use crate::scalar::Real;
use crate::seed::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusFieldConfig {
    /// Side length; `K = m²` coordinates.
    pub m: usize,
    /// Filter bandwidth in pixels.
    pub b: f64,
    /// Sample size.
    pub n: usize,
    pub seed: u64,
}

impl TorusFieldConfig {
    pub fn new(m: usize, b: f64, n: usize, seed: u64) -> Result<Self> {
        let c = Self { m, b, n, seed };
        c.validate()?;
        Ok(c)
    }

    pub fn k(&self) -> usize {
        self.m * self.m
    }

    pub fn validate(&self) -> Result<()> {
        check_grid(self.m, self.b)?;
        if self.n < 2 {
            return Err(Error::TooFewObservations(self.n));
        }
        Ok(())
    }
}

fn check_grid(m: usize, b: f64) -> Result<()> {
    if m < 2 || !m.is_power_of_two() {
        return Err(Error::invalid(format!("m must be a power of two ≥ 2, got {m}")));
    }
    if !(b.is_finite() && b >= 0.0) {
        return Err(Error::invalid(format!("bandwidth b must be finite and ≥ 0, got {b}")));
    }
    Ok(())
}

/// Squared wrap-around distance from the origin to pixel `(r, c)`.
pub fn torus_dist2(m: usize, r: usize, c: usize) -> f64 {
    let dr = r.min(m - r) as f64;
    let dc = c.min(m - c) as f64;
    dr * dr + dc * dc
}

/// `F_b(t) = C_b·exp(−d(0,t)²/b²)` on the `m×m` torus (row-major), scaled so
/// that `Σ F_b² = 1`. `b = 0` gives the delta kernel.
pub fn gaussian_filter<T: Real>(m: usize, b: f64) -> Result<Vec<T>> {
    check_grid(m, b)?;
    let mut f = vec![0.0f64; m * m];
    if b == 0.0 {
        f[0] = 1.0;
    } else {
        for r in 0..m {
            for c in 0..m {
                f[r * m + c] = (-torus_dist2(m, r, c) / (b * b)).exp();
            }
        }
        let norm = f.iter().map(|x| x * x).sum::<f64>().sqrt();
        f.iter_mut().for_each(|x| *x /= norm);
    }
    Ok(f.into_iter().map(T::lit).collect())
}

/// A field generator with the filter spectrum precomputed.
#[derive(Debug, Clone)]
pub struct TorusField<T: Real> {
    m: usize,
    b: f64,
    /// `DFT(F_b) / K`, folding the inverse-transform normalisation in.
    spectrum: Vec<Complex<T>>,
    fft: Fft2<T>,
}

impl<T: Real> TorusField<T> {
    pub fn new(m: usize, b: f64) -> Result<Self> {
        let k = m * m;
        let mut spectrum: Vec<Complex<T>> = gaussian_filter::<T>(m, b)?
            .into_iter()
            .map(|x| Complex::new(x, T::zero()))
            .collect();
        let fft = Fft2::new(m);
        fft.process(&mut spectrum, false, &mut fft.scratch());
        let scale = T::one() / T::lit(k as f64);
        spectrum.iter_mut().for_each(|z| *z = *z * scale);
        Ok(Self { m, b, spectrum, fft })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn k(&self) -> usize {
        self.m * self.m
    }

    /// `count` independent fields, row-major (`count × K`). Field `i` is a
    /// function of `(seed, i)` only.
    ///
    /// The filter is real, so two fields are convolved per complex transform:
    /// field `2j` rides on the real part and field `2j+1` on the imaginary part.
    pub fn fields(&self, seed: u64, count: usize) -> Vec<T> {
        let k = self.k();
        let mut out = vec![T::zero(); count * k];
        out.par_chunks_mut(2 * k).enumerate().for_each(|(pair, chunk)| {
            let first = 2 * pair as u64;
            let mut re = stream_rng(seed, first);
            let mut im = stream_rng(seed, first + 1);
            let both = chunk.len() == 2 * k;
            let mut buf: Vec<Complex<T>> = (0..k)
                .map(|_| {
                    let a: f64 = StandardNormal.sample(&mut re);
                    let b: f64 = if both { StandardNormal.sample(&mut im) } else { 0.0 };
                    Complex::new(T::lit(a), T::lit(b))
                })
                .collect();
            let mut scratch = self.fft.scratch();
            self.fft.process(&mut buf, false, &mut scratch);
            for (z, s) in buf.iter_mut().zip(&self.spectrum) {
                *z = *z * *s;
            }
            self.fft.process(&mut buf, true, &mut scratch);
            let (lo, hi) = chunk.split_at_mut(k);
            for (o, z) in lo.iter_mut().zip(&buf) {
                *o = z.re;
            }
            for (o, z) in hi.iter_mut().zip(&buf) {
                *o = z.im;
            }
        });
        out
    }

    /// `n` i.i.d. observations `Yⁱ = μ + Gⁱ`.
    pub fn sample(&self, n: usize, mu: &MeanVector<T>, seed: u64) -> Result<Sample<T>> {
        let k = self.k();
        if mu.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: mu.len(),
            });
        }
        if n < 2 {
            return Err(Error::TooFewObservations(n));
        }
        let mut data = self.fields(seed, n);
        for col in data.chunks_exact_mut(k) {
            for (x, &m) in col.iter_mut().zip(mu.values()) {
                *x = *x + m;
            }
        }
        Sample::from_column_major(k, n, data)
    }
}

/// One sample of `config.n` fields shifted by `mu`.
pub fn generate_sample<T: Real>(config: &TorusFieldConfig, mu: &MeanVector<T>) -> Result<Sample<T>> {
    config.validate()?;
    TorusField::new(config.m, config.b)?.sample(config.n, mu, config.seed)
}
