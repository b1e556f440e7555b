//! Per-feature max-abs scaling to `[-1, 1]`, fit on training data.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MaxAbsScaler {
    /// Multiplier per feature; 0 for features that were always zero.
    pub factors: Vec<f64>,
}

impl MaxAbsScaler {
    pub fn fit(samples: &[Vec<f64>]) -> Result<Self> {
        let first = samples.first().ok_or(Error::Degenerate("no samples to scale".into()))?;
        let dim = first.len();
        let mut max = vec![0.0f64; dim];
        for s in samples {
            if s.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: s.len(),
                });
            }
            for (m, v) in max.iter_mut().zip(s) {
                *m = m.max(v.abs());
            }
        }
        let factors = max
            .into_iter()
            .map(|m| if m > 0.0 { 1.0 / m } else { 0.0 })
            .collect();
        Ok(Self { factors })
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn transform_one(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok(x.iter().zip(&self.factors).map(|(v, f)| v * f).collect())
    }

    pub fn transform(&self, xs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        xs.iter().map(|x| self.transform_one(x)).collect()
    }

    /// Header line with the dimension, then one factor per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.dim());
        for f in &self.factors {
            out.push_str(&format!("{f:e}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, 1, "empty scaler file"))?;
        let dim: usize = header
            .trim()
            .parse()
            .map_err(|_| Error::parse(1, 1, "expected dimension"))?;
        let factors = lines
            .map(|(i, l)| {
                l.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|f| f.is_finite())
                    .ok_or_else(|| Error::parse(i + 1, 1, format!("bad factor {l:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if factors.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: factors.len(),
            });
        }
        Ok(Self { factors })
    }
}
