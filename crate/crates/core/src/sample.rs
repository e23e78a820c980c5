//! Observation matrices and the elementary statistics computed from them.
//!
//! A [`Sample`] holds `n` observations of a `K`-dimensional vector. Storage is
//! column-major: observation `i` occupies `data[i*K..(i+1)*K]`, so every
//! resampling pass walks memory linearly.

use std::io::Read;

use crate::error::{Error, Result};
use crate::phi::PExponent;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    k: usize,
    n: usize,
    data: Vec<T>,
}

impl<T: Real> Sample<T> {
    /// Builds a sample from observation-contiguous storage of length `k * n`.
    pub fn from_column_major(k: usize, n: usize, data: Vec<T>) -> Result<Self> {
        if k == 0 {
            return Err(Error::NoCoordinates);
        }
        if n < 2 {
            return Err(Error::TooFewObservations(n));
        }
        if data.len() != k * n {
            return Err(Error::DimensionMismatch {
                expected: k * n,
                got: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                coord: pos % k,
                obs: pos / k,
            });
        }
        Ok(Self { k, n, data })
    }

    /// Builds a sample from a list of observations (columns).
    pub fn from_columns(columns: &[Vec<T>]) -> Result<Self> {
        let k = columns.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(k * columns.len());
        for col in columns {
            if col.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    got: col.len(),
                });
            }
            data.extend_from_slice(col);
        }
        Self::from_column_major(k, columns.len(), data)
    }

    /// Builds a sample from one row per coordinate, each of length `n`.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let k = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
        }
        let mut data = Vec::with_capacity(k * n);
        for i in 0..n {
            data.extend(rows.iter().map(|r| r[i]));
        }
        Self::from_column_major(k, n, data)
    }

    /// Number of coordinates `K`.
    pub fn dim(&self) -> usize {
        self.k
    }

    /// Number of observations `n`.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn column(&self, i: usize) -> &[T] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn columns(&self) -> impl DoubleEndedIterator<Item = &[T]> + ExactSizeIterator + '_ {
        self.data.chunks_exact(self.k)
    }

    pub fn as_column_major(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, coord: usize, obs: usize) -> T {
        self.data[obs * self.k + coord]
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Per-coordinate empirical mean `Ȳ`.
    ///
    /// Accumulates deviations from the first observation, which makes the
    /// mean of a constant sample equal to that constant bit for bit.
    pub fn empirical_mean(&self) -> MeanVector<T> {
        let first = self.column(0);
        let mut acc = vec![T::zero(); self.k];
        for col in self.columns().skip(1) {
            for ((a, &y), &y0) in acc.iter_mut().zip(col).zip(first) {
                *a = *a + (y - y0);
            }
        }
        let inv_n = T::one() / T::lit(self.n as f64);
        let values = acc
            .into_iter()
            .zip(first)
            .map(|(d, &y0)| y0 + d * inv_n)
            .collect();
        MeanVector(values)
    }

    /// `Y − Ȳ`: every observation minus the empirical mean.
    pub fn center_columns(&self) -> Sample<T> {
        self.subtract(&self.empirical_mean())
            .expect("mean has the sample dimension")
    }

    /// `Y − μ` for an arbitrary vector `μ`.
    pub fn subtract(&self, mu: &MeanVector<T>) -> Result<Sample<T>> {
        if mu.len() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                got: mu.len(),
            });
        }
        let data = self
            .data
            .chunks_exact(self.k)
            .flat_map(|col| col.iter().zip(mu.values()).map(|(&y, &m)| y - m))
            .collect();
        Ok(Sample {
            k: self.k,
            n: self.n,
            data,
        })
    }

    /// Multiplies observation `i` by `signs[i]`.
    pub fn reweight_signs(&self, signs: &[bool]) -> Result<Sample<T>> {
        if signs.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: signs.len(),
            });
        }
        let data = self
            .data
            .chunks_exact(self.k)
            .zip(signs)
            .flat_map(|(col, &neg)| col.iter().map(move |&y| if neg { -y } else { y }))
            .collect();
        Ok(Sample {
            k: self.k,
            n: self.n,
            data,
        })
    }

    /// Means of `V` contiguous regular blocks of observations, as a `K×V`
    /// sample. Block-wise Rademacher resampling runs the ordinary Rademacher
    /// engine on this reduced sample.
    pub fn block_means(&self, blocks: usize) -> Result<Sample<T>> {
        if blocks < 2 || blocks > self.n || !self.n.is_multiple_of(blocks) {
            return Err(Error::invalid(format!(
                "block count {blocks} must divide n = {} and lie in 2..=n",
                self.n
            )));
        }
        let size = self.n / blocks;
        let cols: Vec<Vec<T>> = (0..blocks)
            .map(|j| {
                let sub = Sample {
                    k: self.k,
                    n: size,
                    data: self.data[j * size * self.k..(j + 1) * size * self.k].to_vec(),
                };
                sub.empirical_mean().0
            })
            .collect();
        Sample::from_columns(&cols)
    }

    /// Unbiased per-coordinate standard deviation. Used only as a plug-in when
    /// no known variance bound is available.
    pub fn coordinate_std(&self) -> MeanVector<T> {
        let mean = self.empirical_mean();
        let mut ss = vec![T::zero(); self.k];
        for col in self.columns() {
            for ((s, &y), &m) in ss.iter_mut().zip(col).zip(mean.values()) {
                let d = y - m;
                *s = *s + d * d;
            }
        }
        let denom = T::lit((self.n - 1) as f64);
        MeanVector(ss.into_iter().map(|s| (s / denom).sqrt()).collect())
    }

    pub fn cast<U: Real>(&self) -> Sample<U> {
        Sample {
            k: self.k,
            n: self.n,
            data: self.data.iter().map(|x| U::lit(x.to_f64_lossy())).collect(),
        }
    }
}

impl Sample<f64> {
    /// Reads the sample CSV format: one row per coordinate, `n` comma-separated
    /// values per row. A header row is recognised when its first cell does not
    /// parse as a number.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .flexible(true)
            .from_reader(reader);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut width = None;
        let mut first = true;
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Csv {
                line: e.position().map_or(0, |p| p.line()),
                msg: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.iter().all(str::is_empty) {
                continue;
            }
            if first {
                first = false;
                if rec.get(0).is_some_and(|c| c.parse::<f64>().is_err()) {
                    continue;
                }
            }
            let row = rec
                .iter()
                .enumerate()
                .map(|(j, cell)| {
                    cell.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| Error::Csv {
                            line,
                            msg: format!("field {} is not a finite number: {cell:?}", j + 1),
                        })
                })
                .collect::<Result<Vec<_>>>()?;
            match width {
                None => width = Some(row.len()),
                Some(w) if w != row.len() => {
                    return Err(Error::Csv {
                        line,
                        msg: format!("expected {w} values, found {}", row.len()),
                    })
                }
                _ => {}
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Csv {
                line: 0,
                msg: "no data rows".into(),
            });
        }
        Sample::from_rows(&rows)
    }
}

/// A length-`K` vector: a mean `μ`, an empirical mean `Ȳ`, or the vector `σ`
/// of per-coordinate standard deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanVector<T>(pub Vec<T>);

impl<T: Real> MeanVector<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self(values)
    }

    pub fn constant(k: usize, value: T) -> Self {
        Self(vec![value; k])
    }

    pub fn values(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `‖v‖_p`, with max-rescaling for finite `p`.
    pub fn norm(&self, p: PExponent) -> T {
        crate::phi::p_norm(&self.0, p)
    }
}
