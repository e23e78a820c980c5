//! The constants `A_W, B_W, C_W, D_W` of a weight law:
//!
//! * `A_W = E|W₁ − W̄|`
//! * `B_W = E[(n⁻¹ Σ (W_i − W̄)²)^½]`
//! * `C_W = (n/(n−1) · E[(W₁ − W̄)²])^½`
//! * `D_W = a + E|W̄ − x₀|` when `|W_i − x₀| = a` almost surely
//!
//! For regular V-fold weights the constants are those of the block-mean
//! process, which makes `C_W = √n/(V−1)`.

use std::fmt;

use rayon::prelude::*;

use super::scheme::{SchemeKind, WeightScheme};
use super::weights::draw_weights_into;
use crate::error::{Error, Result};
use crate::seed::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstantName {
    A,
    B,
    C,
    D,
}

impl fmt::Display for ConstantName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstantName::A => "A",
            ConstantName::B => "B",
            ConstantName::C => "C",
            ConstantName::D => "D",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Accuracy {
    Exact,
    /// Only an enclosure is known; `value` holds the end that makes upper
    /// thresholds conservative.
    Bounds { lo: f64, hi: f64 },
    MonteCarlo { draws: usize, stderr: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant {
    pub value: f64,
    pub accuracy: Accuracy,
}

impl Constant {
    fn exact(value: f64) -> Self {
        Self {
            value,
            accuracy: Accuracy::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResamplingConstants {
    pub a: Constant,
    pub b: Constant,
    pub c: Constant,
    /// Absent when no `(x₀, a)` with `|W_i − x₀| = a` exists (Efron).
    pub d: Option<Constant>,
}

impl ResamplingConstants {
    pub fn get(&self, which: ConstantName) -> Option<Constant> {
        match which {
            ConstantName::A => Some(self.a),
            ConstantName::B => Some(self.b),
            ConstantName::C => Some(self.c),
            ConstantName::D => self.d,
        }
    }

    /// `C_W / B_W`, the accuracy index of a scheme.
    pub fn accuracy_index(&self) -> f64 {
        self.c.value / self.b.value
    }

    /// Replaces every `Bounds` entry by a Monte Carlo estimate.
    pub fn refine_with_monte_carlo(
        &mut self,
        scheme: &WeightScheme,
        draws: usize,
        seed: u64,
    ) -> Result<()> {
        for (name, slot) in [
            (ConstantName::A, Some(&mut self.a)),
            (ConstantName::B, Some(&mut self.b)),
            (ConstantName::C, Some(&mut self.c)),
            (ConstantName::D, self.d.as_mut()),
        ] {
            if let Some(c) = slot {
                if matches!(c.accuracy, Accuracy::Bounds { .. }) {
                    let (value, stderr) = estimate_constant_mc(scheme, name, draws, seed)?;
                    *c = Constant {
                        value,
                        accuracy: Accuracy::MonteCarlo { draws, stderr },
                    };
                }
            }
        }
        Ok(())
    }
}

/// Closed-form constants of a scheme.
///
/// Rademacher `A`, `B`, `D` have no elementary closed form; they are computed
/// exactly from the Binomial(n, ½) law of the number of positive signs `S`,
/// using `W̄ = (2S − n)/n`:
/// `A = (n−1)/n`, `B = E(1 − W̄²)^½`, `D = 1 + E|W̄|`.
/// Efron `B` is only known through the enclosure `[A, ((n−1)/n)^½]`.
pub fn scheme_constants(scheme: &WeightScheme) -> Result<ResamplingConstants> {
    let n = scheme.n() as f64;
    match scheme.kind() {
        SchemeKind::RandomHoldOut { q } if q == scheme.n() => Err(Error::InvalidScheme(
            "random hold-out with q = n has constant weights".into(),
        )),
        SchemeKind::RandomHoldOut { q } => {
            let q = q as f64;
            let r = (n / q - 1.0).sqrt();
            Ok(ResamplingConstants {
                a: Constant::exact(2.0 * (1.0 - q / n)),
                b: Constant::exact(r),
                c: Constant::exact((n / (n - 1.0)).sqrt() * r),
                d: Some(Constant::exact(n / (2.0 * q) + (1.0 - n / (2.0 * q)).abs())),
            })
        }
        SchemeKind::LeaveOneOut => Ok(ResamplingConstants {
            a: Constant::exact(2.0 / n),
            b: Constant::exact(1.0 / (n - 1.0).sqrt()),
            c: Constant::exact(n.sqrt() / (n - 1.0)),
            d: Some(Constant::exact(1.0)),
        }),
        SchemeKind::VFold { v } => {
            let v = v as f64;
            Ok(ResamplingConstants {
                a: Constant::exact(2.0 / v),
                b: Constant::exact(1.0 / (v - 1.0).sqrt()),
                c: Constant::exact(n.sqrt() / (v - 1.0)),
                d: Some(Constant::exact(1.0)),
            })
        }
        SchemeKind::Efron => {
            let a = 2.0 * (1.0 - 1.0 / n).powf(n);
            Ok(ResamplingConstants {
                a: Constant::exact(a),
                b: Constant {
                    value: a,
                    accuracy: Accuracy::Bounds {
                        lo: a,
                        hi: ((n - 1.0) / n).sqrt(),
                    },
                },
                c: Constant::exact(1.0),
                d: None,
            })
        }
        SchemeKind::Rademacher => {
            let (b, mean_abs) = rademacher_moments(scheme.n());
            Ok(ResamplingConstants {
                a: Constant::exact((n - 1.0) / n),
                b: Constant::exact(b),
                c: Constant::exact(1.0),
                d: Some(Constant::exact(1.0 + mean_abs)),
            })
        }
    }
}

/// `(E(1 − W̄²)^½, E|W̄|)` for i.i.d. signs, summed over the Binomial(n, ½)
/// count with log-space probabilities.
fn rademacher_moments(n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mut log_c = 0.0f64; // ln C(n, s)
    let log_half_n = -nf * std::f64::consts::LN_2;
    let (mut b, mut m) = (0.0, 0.0);
    for s in 0..=n {
        if s > 0 {
            log_c += ((n - s + 1) as f64).ln() - (s as f64).ln();
        }
        let p = (log_c + log_half_n).exp();
        let wbar = (2.0 * s as f64 - nf) / nf;
        b += p * (1.0 - wbar * wbar).max(0.0).sqrt();
        m += p * wbar.abs();
    }
    (b, m)
}

/// Closed-form enclosure of a Rademacher or Efron constant, where one is known.
pub fn table_bounds(scheme: &WeightScheme, which: ConstantName) -> Option<(f64, f64)> {
    let n = scheme.n() as f64;
    match (scheme.kind(), which) {
        (SchemeKind::Rademacher, ConstantName::A | ConstantName::B) => {
            Some((1.0 - 1.0 / n.sqrt(), (1.0 - 1.0 / n).sqrt()))
        }
        (SchemeKind::Rademacher, ConstantName::C) => Some((1.0, 1.0)),
        (SchemeKind::Rademacher, ConstantName::D) => Some((1.0, 1.0 + 1.0 / n.sqrt())),
        (SchemeKind::Efron, ConstantName::A | ConstantName::B) => {
            Some((2.0 * (1.0 - 1.0 / n).powf(n), ((n - 1.0) / n).sqrt()))
        }
        (SchemeKind::Efron, ConstantName::C) => Some((1.0, 1.0)),
        _ => None,
    }
}

/// Monte Carlo estimate of one constant from `draws` weight vectors, with its
/// standard error. Draw `d` uses stream `d` of `seed`.
///
/// Per draw the statistic is averaged over coordinates, which keeps it
/// unbiased under (piece-wise) exchangeability and lowers its variance.
pub fn estimate_constant_mc(
    scheme: &WeightScheme,
    which: ConstantName,
    draws: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if draws < 100 {
        return Err(Error::invalid(format!(
            "Monte Carlo constants need at least 100 draws, got {draws}"
        )));
    }
    let center = match which {
        ConstantName::D => Some(scheme.two_point_center().ok_or_else(|| {
            Error::Unsupported(format!("D_W undefined for Efron (n = {})", scheme.n()))
        })?),
        _ => None,
    };
    let n = scheme.n();
    let stats: Vec<f64> = (0..draws)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |w, d| {
                draw_weights_into(scheme, &mut stream_rng(seed, d as u64), w);
                let wbar = w.iter().sum::<f64>() / n as f64;
                match which {
                    ConstantName::A => w.iter().map(|x| (x - wbar).abs()).sum::<f64>() / n as f64,
                    ConstantName::B => {
                        (w.iter().map(|x| (x - wbar).powi(2)).sum::<f64>() / n as f64).sqrt()
                    }
                    ConstantName::C => w.iter().map(|x| (x - wbar).powi(2)).sum::<f64>() / n as f64,
                    ConstantName::D => {
                        let (x0, a) = center.unwrap();
                        a + (wbar - x0).abs()
                    }
                }
            },
        )
        .collect();
    let m = draws as f64;
    let mean = stats.iter().sum::<f64>() / m;
    let var = stats.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let se = (var / m).sqrt();
    if which == ConstantName::C {
        // C = (scale · E[mean square])^½; delta method for the error
        let scale = match scheme.kind() {
            SchemeKind::VFold { v } => n as f64 / (v as f64 - 1.0),
            _ => n as f64 / (n as f64 - 1.0),
        };
        let c = (scale * mean).sqrt();
        let c_se = if c > 0.0 { scale * se / (2.0 * c) } else { 0.0 };
        return Ok((c, c_se));
    }
    Ok((mean, se))
}
