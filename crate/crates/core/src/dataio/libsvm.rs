//! LibSVM sparse ASCII datasets.
//!
//! One sample per line: an integer label, then ascending `index:value`
//! pairs for the non-zero features, 1-based.
//!
//! ```text
//! -1 1:1 11:1 18:1 20:1 37:1 42:1 59:1
//! +1 5:1 18:1 19:1 39:1 40:1 63:1
//! ```
//!
//! The canonical writer follows every token with a single space, writes the
//! label `1` as `+1`, and prints values in shortest round-trip form.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::features::{BehaviorLabel, FeatureKind, FeatureVector};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseSample {
    pub label: i32,
    /// `(index, value)` with strictly increasing 1-based indices and no zeros.
    pub entries: Vec<(usize, f64)>,
}

impl SparseSample {
    pub fn new(label: i32, entries: Vec<(usize, f64)>) -> Result<Self> {
        let mut prev = 0;
        for &(idx, value) in &entries {
            if idx == 0 {
                return Err(Error::param("libsvm indices are 1-based"));
            }
            if idx <= prev {
                return Err(Error::param(format!("non-increasing index {idx} after {prev}")));
            }
            if value == 0.0 || !value.is_finite() {
                return Err(Error::param(format!("index {idx} holds non-storable value {value}")));
            }
            prev = idx;
        }
        Ok(Self { label, entries })
    }

    /// Keeps the non-zero entries of a dense vector.
    pub fn from_dense(label: i32, values: &[f64]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (i + 1, v))
            .collect();
        Self { label, entries }
    }

    pub fn max_index(&self) -> usize {
        self.entries.last().map_or(0, |&(i, _)| i)
    }

    pub fn to_dense(&self, dim: usize) -> Result<Vec<f64>> {
        if self.max_index() > dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: self.max_index(),
            });
        }
        let mut out = vec![0.0; dim];
        for &(i, v) in &self.entries {
            out[i - 1] = v;
        }
        Ok(out)
    }

    pub fn to_line(&self) -> String {
        let mut line = if self.label == 1 {
            "+1 ".to_string()
        } else {
            format!("{} ", self.label)
        };
        for (i, v) in &self.entries {
            line.push_str(&format!("{i}:{v} "));
        }
        line.push('\n');
        line
    }
}

/// Dense feature vector with the label decoded from the class-code table
/// (Keep=0, ChangeLeft=1, ChangeRight=2, Unknown=3). Other codes leave the
/// label empty.
pub fn densify(sample: &SparseSample, dim: usize, kind: FeatureKind) -> Result<FeatureVector> {
    Ok(FeatureVector {
        values: sample.to_dense(dim)?,
        kind,
        label: BehaviorLabel::from_code(sample.label),
    })
}

/// Inverse of [`densify`]; unlabeled vectors get code `-1`.
pub fn sparsify(vector: &FeatureVector) -> SparseSample {
    let label = vector.label.map_or(-1, BehaviorLabel::code);
    SparseSample::from_dense(label, &vector.values)
}

pub fn format_libsvm(samples: &[SparseSample]) -> String {
    samples.iter().map(SparseSample::to_line).collect()
}

pub fn write_libsvm<W: Write>(samples: &[SparseSample], mut out: W) -> Result<()> {
    for s in samples {
        out.write_all(s.to_line().as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

fn parse_line(line: &str, line_no: usize) -> Result<Option<SparseSample>> {
    let mut tokens = Vec::new();
    let mut start = None;
    for (pos, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push((s, &line[s..pos]));
            }
        } else if start.is_none() {
            start = Some(pos);
        }
    }
    if let Some(s) = start {
        tokens.push((s, &line[s..]));
    }
    let Some(&(label_col, label_tok)) = tokens.first() else {
        return Ok(None);
    };
    let label: i32 = label_tok.parse().map_err(|_| {
        Error::parse(line_no, label_col + 1, format!("invalid label {label_tok:?}"))
    })?;

    let mut entries = Vec::with_capacity(tokens.len() - 1);
    let mut prev = 0usize;
    for &(col, tok) in &tokens[1..] {
        let col = col + 1;
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| Error::parse(line_no, col, format!("malformed pair {tok:?}")))?;
        let idx: usize = idx
            .parse()
            .map_err(|_| Error::parse(line_no, col, format!("invalid index {idx:?}")))?;
        if idx == 0 {
            return Err(Error::parse(line_no, col, "index 0"));
        }
        if idx == prev {
            return Err(Error::parse(line_no, col, format!("duplicate index {idx}")));
        }
        if idx < prev {
            return Err(Error::parse(line_no, col, "non-increasing index"));
        }
        let value: f64 = val
            .parse()
            .map_err(|_| Error::parse(line_no, col, format!("invalid value {val:?}")))?;
        if !value.is_finite() {
            return Err(Error::parse(line_no, col, format!("non-finite value {val:?}")));
        }
        prev = idx;
        if value != 0.0 {
            entries.push((idx, value));
        }
    }
    Ok(Some(SparseSample { label, entries }))
}

pub fn parse_libsvm(text: &str) -> Result<Vec<SparseSample>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if let Some(s) = parse_line(line, i + 1)? {
            out.push(s);
        }
    }
    Ok(out)
}

pub fn read_libsvm<R: BufRead>(source: R) -> Result<Vec<SparseSample>> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        if let Some(s) = parse_line(&line?, i + 1)? {
            out.push(s);
        }
    }
    Ok(out)
}
