//! Drawing weight vectors from a scheme's law, and enumerating its support.

use rand::seq::index;
use rand::Rng;

use super::scheme::{binomial_u128, SchemeKind, WeightScheme};
use crate::error::{Error, Result};
use crate::seed::stream_rng;

/// Draws one weight vector into `out` (length `n`).
pub fn draw_weights_into<R: Rng + ?Sized>(scheme: &WeightScheme, rng: &mut R, out: &mut [f64]) {
    let n = scheme.n();
    debug_assert_eq!(out.len(), n);
    match scheme.kind() {
        SchemeKind::Rademacher => {
            // 64 signs per u64
            let mut bits = 0u64;
            for (i, w) in out.iter_mut().enumerate() {
                if i % 64 == 0 {
                    bits = rng.random();
                }
                *w = if bits & 1 == 1 { 1.0 } else { -1.0 };
                bits >>= 1;
            }
        }
        SchemeKind::Efron => {
            out.fill(0.0);
            for _ in 0..n {
                out[rng.random_range(0..n)] += 1.0;
            }
        }
        SchemeKind::RandomHoldOut { .. } | SchemeKind::LeaveOneOut => {
            let q = scheme.hold_out_size().unwrap();
            let scale = n as f64 / q as f64;
            out.fill(0.0);
            for i in index::sample(rng, n, q) {
                out[i] = scale;
            }
        }
        SchemeKind::VFold { v } => {
            let held = rng.random_range(0..v);
            fill_v_fold(n, v, held, out);
        }
    }
}

pub fn draw_weights<R: Rng + ?Sized>(scheme: &WeightScheme, rng: &mut R) -> Vec<f64> {
    let mut out = vec![0.0; scheme.n()];
    draw_weights_into(scheme, rng, &mut out);
    out
}

/// One weight vector from the stream `0` of `seed`.
pub fn draw_weights_seeded(scheme: &WeightScheme, seed: u64) -> Vec<f64> {
    draw_weights(scheme, &mut stream_rng(seed, 0))
}

fn fill_v_fold(n: usize, v: usize, held: usize, out: &mut [f64]) {
    let size = n / v;
    let keep = v as f64 / (v as f64 - 1.0);
    for (i, w) in out.iter_mut().enumerate() {
        *w = if i / size == held { 0.0 } else { keep };
    }
}

/// The finite support of a scheme's law, every atom carrying equal mass.
#[derive(Debug, Clone, Copy)]
pub struct Support {
    scheme: WeightScheme,
    atoms: usize,
}

impl Support {
    /// Fails for Efron (never enumerated) and when the atom count exceeds `cap`.
    /// Leave-one-out and V-fold supports are linear in `n` and bypass the cap.
    pub fn new(scheme: &WeightScheme, cap: usize) -> Result<Self> {
        let too_large = || Error::SupportTooLarge {
            cardinality: scheme.complexity_label(),
            cap,
        };
        let atoms = match scheme.kind() {
            SchemeKind::Efron => {
                return Err(Error::Unsupported(format!(
                    "exact enumeration is not available for Efron weights (support {})",
                    scheme.complexity_label()
                )))
            }
            SchemeKind::LeaveOneOut | SchemeKind::VFold { .. } => {
                scheme.support_cardinality().unwrap() as usize
            }
            _ => {
                let card = scheme.support_cardinality().ok_or_else(too_large)?;
                if card > cap as u128 {
                    return Err(too_large());
                }
                card as usize
            }
        };
        Ok(Self {
            scheme: *scheme,
            atoms,
        })
    }

    pub fn len(&self) -> usize {
        self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms == 0
    }

    /// Writes atom `index` into `out`.
    pub fn atom_into(&self, index: usize, out: &mut [f64]) {
        let n = self.scheme.n();
        match self.scheme.kind() {
            SchemeKind::Rademacher => {
                for (i, w) in out.iter_mut().enumerate() {
                    *w = if (index >> i) & 1 == 1 { 1.0 } else { -1.0 };
                }
            }
            SchemeKind::LeaveOneOut => {
                out.fill(n as f64 / (n as f64 - 1.0));
                out[index] = 0.0;
            }
            SchemeKind::VFold { v } => fill_v_fold(n, v, index, out),
            SchemeKind::RandomHoldOut { q } => {
                out.fill(0.0);
                let scale = n as f64 / q as f64;
                for i in unrank_combination(n, q, index) {
                    out[i] = scale;
                }
            }
            SchemeKind::Efron => unreachable!("Efron support is never enumerated"),
        }
    }

    pub fn atoms(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.atoms).map(move |i| {
            let mut w = vec![0.0; self.scheme.n()];
            self.atom_into(i, &mut w);
            w
        })
    }
}

/// The `rank`-th `q`-subset of `0..n` in lexicographic order.
fn unrank_combination(n: usize, q: usize, mut rank: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(q);
    let mut next = 0;
    for remaining in (1..=q).rev() {
        loop {
            // subsets starting with `next`
            let count = binomial_u128(n - next - 1, remaining - 1).unwrap() as usize;
            if rank < count {
                break;
            }
            rank -= count;
            next += 1;
        }
        out.push(next);
        next += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn draws_respect_their_law() {
        let mut rng = stream_rng(7, 0);
        for _ in 0..200 {
            let r = draw_weights(&WeightScheme::rademacher(70).unwrap(), &mut rng);
            assert!(r.iter().all(|&w| w == 1.0 || w == -1.0));

            let e = draw_weights(&WeightScheme::efron(13).unwrap(), &mut rng);
            assert_eq!(e.iter().sum::<f64>(), 13.0);
            assert!(e.iter().all(|&w| w >= 0.0 && w.fract() == 0.0));

            let h = draw_weights(&WeightScheme::random_hold_out(10, 4).unwrap(), &mut rng);
            assert_eq!(h.iter().filter(|&&w| w == 2.5).count(), 4);
            assert_eq!(h.iter().filter(|&&w| w == 0.0).count(), 6);

            let v = draw_weights(&WeightScheme::v_fold(12, 4).unwrap(), &mut rng);
            assert_eq!(v.iter().sum::<f64>() / 12.0, 1.0);
            let zeros: Vec<usize> = (0..12).filter(|&i| v[i] == 0.0).collect();
            assert_eq!(zeros.len(), 3);
            assert_eq!(zeros[2] - zeros[0], 2);
            assert_eq!(zeros[0] % 3, 0);
        }
    }

    #[test]
    fn seeded_draws_are_reproducible() {
        let s = WeightScheme::efron(30).unwrap();
        assert_eq!(draw_weights_seeded(&s, 5), draw_weights_seeded(&s, 5));
        assert_ne!(draw_weights_seeded(&s, 5), draw_weights_seeded(&s, 6));
    }

    #[test]
    fn hold_out_support_is_all_subsets() {
        let s = WeightScheme::random_hold_out(7, 3).unwrap();
        let sup = Support::new(&s, 4096).unwrap();
        assert_eq!(sup.len(), 35);
        let sets: HashSet<Vec<usize>> = sup
            .atoms()
            .map(|w| (0..7).filter(|&i| w[i] > 0.0).collect())
            .collect();
        assert_eq!(sets.len(), 35);
        assert!(sets.iter().all(|s| s.len() == 3));
    }

    #[test]
    fn support_caps() {
        assert!(Support::new(&WeightScheme::rademacher(12).unwrap(), 4096).is_ok());
        assert!(matches!(
            Support::new(&WeightScheme::rademacher(13).unwrap(), 4096),
            Err(Error::SupportTooLarge { .. })
        ));
        assert!(Support::new(&WeightScheme::leave_one_out(10_000).unwrap(), 4096).is_ok());
        assert!(Support::new(&WeightScheme::efron(3).unwrap(), 4096).is_err());
        assert!(Support::new(&WeightScheme::random_hold_out(20, 10).unwrap(), 4096).is_err());
    }
}
