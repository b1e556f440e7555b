//! Confusion matrices and accuracy rates.
//!
//! Rows are ground truth, columns are predictions.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::features::BehaviorLabel;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self> {
        if counts.len() != labels.len() || counts.iter().any(|r| r.len() != labels.len()) {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                actual: counts.len(),
            });
        }
        Ok(Self { labels, counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn get(&self, truth: &str, predicted: &str) -> Option<u64> {
        Some(self.counts[self.index_of(truth)?][self.index_of(predicted)?])
    }

    pub fn accuracy(&self) -> Result<f64> {
        let total = self.total();
        if total == 0 {
            return Err(Error::Degenerate("confusion matrix is empty".into()));
        }
        Ok(self.trace() as f64 / total as f64)
    }

    /// Accuracy with ground-truth Unknown predicted as Keep counted correct.
    pub fn adjusted_accuracy(&self) -> Result<f64> {
        let unknown = BehaviorLabel::Unknown.short_name();
        let keep = BehaviorLabel::Keep.short_name();
        let extra = self.get(unknown, keep).ok_or_else(|| {
            Error::param(format!("adjusted accuracy needs {unknown:?} and {keep:?} labels"))
        })?;
        let total = self.total();
        if total == 0 {
            return Err(Error::Degenerate("confusion matrix is empty".into()));
        }
        Ok((self.trace() + extra) as f64 / total as f64)
    }

    /// Fixed-width table, then total and accuracy lines. `names` overrides
    /// the row and column headings.
    pub fn report(&self, names: Option<&[&str]>) -> Result<String> {
        let names: Vec<&str> = match names {
            Some(n) if n.len() == self.labels.len() => n.to_vec(),
            Some(n) => {
                return Err(Error::DimensionMismatch {
                    expected: self.labels.len(),
                    actual: n.len(),
                })
            }
            None => self.labels.iter().map(String::as_str).collect(),
        };
        let corner = "GT \\ Res.";
        let first = names.iter().map(|n| n.len()).chain([corner.len()]).max().unwrap_or(0);
        let widths: Vec<usize> = names
            .iter()
            .enumerate()
            .map(|(j, n)| {
                let widest = self.counts.iter().map(|r| r[j].to_string().len()).max().unwrap_or(1);
                n.len().max(widest)
            })
            .collect();

        let mut out = format!("{corner:<first$}");
        for (n, w) in names.iter().zip(&widths) {
            let _ = write!(out, "  {n:>w$}");
        }
        out.push('\n');
        for (name, row) in names.iter().zip(&self.counts) {
            let _ = write!(out, "{name:<first$}");
            for (c, w) in row.iter().zip(&widths) {
                let _ = write!(out, "  {c:>w$}");
            }
            out.push('\n');
        }
        let _ = writeln!(out, "total {}", self.total());
        if let Ok(acc) = self.accuracy() {
            let _ = writeln!(out, "accuracy {:.1}%", 100.0 * acc);
        }
        if let Ok(adj) = self.adjusted_accuracy() {
            let _ = writeln!(out, "adjusted accuracy {:.1}%", 100.0 * adj);
        }
        Ok(out)
    }

    /// `label,count...` rows under a header of column labels.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (l, row) in self.labels.iter().zip(&self.counts) {
            out.push_str(l);
            for c in row {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        out
    }
}

/// Tallies `(truth, predicted)` pairs over an explicit label order.
pub fn confusion<L: PartialEq + ToString>(
    labels: &[L],
    truth: &[L],
    predicted: &[L],
) -> Result<ConfusionMatrix> {
    if truth.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: predicted.len(),
        });
    }
    let k = labels.len();
    let index = |l: &L| {
        labels
            .iter()
            .position(|x| x == l)
            .ok_or_else(|| Error::param(format!("label {:?} is not in the label list", l.to_string())))
    };
    let mut counts = vec![vec![0u64; k]; k];
    for (t, p) in truth.iter().zip(predicted) {
        counts[index(t)?][index(p)?] += 1;
    }
    Ok(ConfusionMatrix {
        labels: labels.iter().map(ToString::to_string).collect(),
        counts,
    })
}

/// Four-class matrix in Keep, Left, Right, Unknown order.
pub fn behavior_confusion(
    truth: &[BehaviorLabel],
    predicted: &[BehaviorLabel],
) -> Result<ConfusionMatrix> {
    let names: Vec<&str> = BehaviorLabel::ALL.iter().map(|l| l.short_name()).collect();
    let t: Vec<&str> = truth.iter().map(|l| l.short_name()).collect();
    let p: Vec<&str> = predicted.iter().map(|l| l.short_name()).collect();
    confusion(&names, &t, &p)
}
