//! Soft-margin binary C-SVM trained with sequential minimal optimization,
//! and the three-stage decision cascade built from it.
//!
//! The dual solved here is
//!
//! ```text
//! min ½ αᵀQα − eᵀα   s.t.  0 ≤ α_i ≤ C,  yᵀα = 0,   Q_ij = y_i y_j K(x_i, x_j)
//! ```
//!
//! Working pairs are the maximal KKT violators; iteration stops once the
//! violation gap drops below `tol`.

use std::collections::{HashMap, VecDeque};
use std::fmt::{self, Write as _};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::BehaviorLabel;
use crate::linalg::{dot, squared_distance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    /// RBF with `gamma = 1 / dim`.
    pub fn rbf_for_dim(dim: usize) -> Self {
        Kernel::Rbf {
            gamma: 1.0 / dim.max(1) as f64,
        }
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot(a, b),
            Kernel::Rbf { gamma } => (-gamma * squared_distance(a, b)).exp(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Kernel::Rbf { gamma } if !(gamma > 0.0 && gamma.is_finite()) => Err(Error::param(
                format!("rbf gamma must be > 0, got {gamma}"),
            )),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Linear => f.write_str("linear"),
            Kernel::Rbf { gamma } => write!(f, "rbf(gamma={gamma})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub kernel: Kernel,
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            kernel: Kernel::Linear,
            c: 1.0,
            tol: 1e-3,
            max_iter: 10_000_000,
        }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::param(format!("C must be > 0, got {}", self.c)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::param(format!("tol must be > 0, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Full Gram matrix up to this many samples; a row LRU beyond.
pub const FULL_CACHE_LIMIT: usize = 4096;
const LRU_ROWS: usize = 1024;

enum KernelCache<'a> {
    Full(Vec<Arc<[f64]>>),
    Lru {
        samples: &'a [Vec<f64>],
        kernel: Kernel,
        rows: HashMap<usize, Arc<[f64]>>,
        order: VecDeque<usize>,
    },
}

impl<'a> KernelCache<'a> {
    fn new(samples: &'a [Vec<f64>], kernel: Kernel) -> Self {
        if samples.len() <= FULL_CACHE_LIMIT {
            let n = samples.len();
            let upper: Vec<Vec<f64>> = (0..n)
                .into_par_iter()
                .map(|i| samples[i..].iter().map(|b| kernel.eval(&samples[i], b)).collect())
                .collect();
            let rows = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| if j >= i { upper[i][j - i] } else { upper[j][i - j] })
                        .collect()
                })
                .collect();
            KernelCache::Full(rows)
        } else {
            KernelCache::Lru {
                samples,
                kernel,
                rows: HashMap::new(),
                order: VecDeque::new(),
            }
        }
    }

    fn row(&mut self, i: usize) -> Arc<[f64]> {
        match self {
            KernelCache::Full(rows) => rows[i].clone(),
            KernelCache::Lru {
                samples,
                kernel,
                rows,
                order,
            } => {
                if let Some(row) = rows.get(&i) {
                    let row = row.clone();
                    if let Some(pos) = order.iter().position(|&k| k == i) {
                        order.remove(pos);
                    }
                    order.push_back(i);
                    return row;
                }
                let a = &samples[i];
                let row: Arc<[f64]> = samples.par_iter().map(|b| kernel.eval(a, b)).collect();
                if rows.len() >= LRU_ROWS {
                    if let Some(old) = order.pop_front() {
                        rows.remove(&old);
                    }
                }
                rows.insert(i, row.clone());
                order.push_back(i);
                row
            }
        }
    }
}

/// Raw solution of the dual problem.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// `b` in `f(x) = Σ y_i α_i K(x_i, x) + b`.
    pub bias: f64,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn check_training_set(samples: &[Vec<f64>], targets: &[f64]) -> Result<usize> {
    if samples.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: samples.len(),
            actual: targets.len(),
        });
    }
    let dim = samples.first().map(Vec::len).unwrap_or(0);
    if let Some(bad) = samples.iter().find(|s| s.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: bad.len(),
        });
    }
    if targets.iter().any(|&y| y != 1.0 && y != -1.0) {
        return Err(Error::param("svm targets must be +1 or -1"));
    }
    let pos = targets.iter().filter(|&&y| y > 0.0).count();
    if pos == 0 || pos == targets.len() {
        return Err(Error::SingleClass {
            stage: "svm".into(),
            detail: format!("{pos} positive of {} samples", targets.len()),
        });
    }
    Ok(dim)
}

/// Runs SMO on the C-SVC dual.
pub fn solve_dual(samples: &[Vec<f64>], targets: &[f64], params: &SvmParams) -> Result<DualSolution> {
    params.validate()?;
    check_training_set(samples, targets)?;
    let n = samples.len();
    let c = params.c;
    let y = targets;
    let mut cache = KernelCache::new(samples, params.kernel);
    let diag: Vec<f64> = samples.iter().map(|s| params.kernel.eval(s, s)).collect();

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < params.max_iter {
        // maximal violating pair; strict comparisons keep the lowest index on ties
        let mut i = usize::MAX;
        let mut gmax = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut gmin = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            let up = if y[t] > 0.0 { alpha[t] < c } else { alpha[t] > 0.0 };
            let low = if y[t] > 0.0 { alpha[t] > 0.0 } else { alpha[t] < c };
            if up && v > gmax {
                gmax = v;
                i = t;
            }
            if low && v < gmin {
                gmin = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < params.tol {
            converged = true;
            break;
        }
        iterations += 1;

        let row_i = cache.row(i);
        let row_j = cache.row(j);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut quad = diag[i] + diag[j] - 2.0 * row_i[j];
        if quad <= 0.0 {
            quad = 1e-12;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let di = alpha[i] - old_i;
        let dj = alpha[j] - old_j;
        for t in 0..n {
            grad[t] += y[t] * (y[i] * row_i[t] * di + y[j] * row_j[t] * dj);
        }
    }

    // rho from free vectors, or the midpoint of the feasible interval
    let mut upper = f64::INFINITY;
    let mut lower = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut free = 0usize;
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 {
        free_sum / free as f64
    } else {
        (upper + lower) / 2.0
    };

    // ½ αᵀQα − eᵀα = ½ Σ α_t (G_t − 1)
    let primal_like: f64 = alpha
        .iter()
        .zip(&grad)
        .map(|(a, g)| a * (g - 1.0))
        .sum::<f64>()
        / 2.0;
    Ok(DualSolution {
        alpha,
        bias: -rho,
        objective: -primal_like,
        iterations,
        converged,
    })
}

/// Dual objective `Σα − ½ΣΣ α_iα_j y_iy_j K(x_i, x_j)` evaluated from scratch.
pub fn dual_objective(samples: &[Vec<f64>], targets: &[f64], alpha: &[f64], kernel: Kernel) -> f64 {
    let mut quad = 0.0;
    for i in 0..samples.len() {
        if alpha[i] == 0.0 {
            continue;
        }
        for j in 0..samples.len() {
            if alpha[j] == 0.0 {
                continue;
            }
            quad += alpha[i] * alpha[j] * targets[i] * targets[j] * kernel.eval(&samples[i], &samples[j]);
        }
    }
    alpha.iter().sum::<f64>() - quad / 2.0
}

/// A trained binary classifier. `class_pair` holds the external codes of the
/// positive and negative sides.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub c: f64,
    pub support_vectors: Vec<Vec<f64>>,
    /// `y_i α_i` per support vector.
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub class_pair: (i32, i32),
    pub dim: usize,
}

pub fn train(samples: &[Vec<f64>], targets: &[f64], params: &SvmParams) -> Result<SvmModel> {
    let dim = check_training_set(samples, targets)?;
    let sol = solve_dual(samples, targets, params)?;
    let (support_vectors, coefficients) = sol
        .alpha
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > 0.0)
        .map(|(i, &a)| (samples[i].clone(), targets[i] * a))
        .unzip();
    Ok(SvmModel {
        kernel: params.kernel,
        c: params.c,
        support_vectors,
        coefficients,
        bias: sol.bias,
        class_pair: (1, -1),
        dim,
    })
}

impl SvmModel {
    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, coef)| coef * self.kernel.eval(sv, x))
            .sum::<f64>()
            + self.bias)
    }

    /// Positive side strictly above zero; ties go to the negative side.
    pub fn predict(&self, x: &[f64]) -> Result<bool> {
        Ok(self.decision(x)? > 0.0)
    }

    /// Header lines (`kernel`, `gamma`, `c`, `bias`, `class_pair`, `n_sv`,
    /// `dim`), then one line per support vector: the signed coefficient
    /// followed by sparse `index:value` pairs.
    pub fn to_text(&self) -> String {
        let (kind, gamma) = match self.kernel {
            Kernel::Linear => ("linear", 0.0),
            Kernel::Rbf { gamma } => ("rbf", gamma),
        };
        let mut out = String::new();
        let _ = writeln!(out, "kernel {kind}");
        let _ = writeln!(out, "gamma {gamma:.16e}");
        let _ = writeln!(out, "c {:.16e}", self.c);
        let _ = writeln!(out, "bias {:.16e}", self.bias);
        let _ = writeln!(out, "class_pair {} {}", self.class_pair.0, self.class_pair.1);
        let _ = writeln!(out, "n_sv {}", self.support_vectors.len());
        let _ = writeln!(out, "dim {}", self.dim);
        for (sv, coef) in self.support_vectors.iter().zip(&self.coefficients) {
            let _ = write!(out, "{coef:.16e}");
            for (k, v) in sv.iter().enumerate() {
                if *v != 0.0 {
                    let _ = write!(out, " {}:{v}", k + 1);
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let mut header = |key: &str| -> Result<(usize, String)> {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| Error::parse(0, 0, format!("svm model truncated before {key}")))?;
            let rest = line
                .strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .ok_or_else(|| Error::parse(ln + 1, 1, format!("expected `{key}`")))?;
            Ok((ln + 1, rest.to_string()))
        };
        fn num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T>
        where
            T::Err: fmt::Display,
        {
            s.trim()
                .parse()
                .map_err(|e| Error::parse(line, 1, format!("bad value {s:?}: {e}")))
        }

        let (ln, kind) = header("kernel")?;
        let (gl, gamma) = header("gamma")?;
        let gamma: f64 = num(gl, &gamma)?;
        let kernel = match kind.as_str() {
            "linear" => Kernel::Linear,
            "rbf" => Kernel::Rbf { gamma },
            other => return Err(Error::parse(ln, 8, format!("unknown kernel {other:?}"))),
        };
        let (l, c) = header("c")?;
        let c = num(l, &c)?;
        let (l, bias) = header("bias")?;
        let bias = num(l, &bias)?;
        let (l, pair) = header("class_pair")?;
        let pair: Vec<i32> = pair
            .split_whitespace()
            .map(|t| num(l, t))
            .collect::<Result<_>>()?;
        if pair.len() != 2 {
            return Err(Error::parse(l, 1, "class_pair needs two codes"));
        }
        let (l, n_sv) = header("n_sv")?;
        let n_sv: usize = num(l, &n_sv)?;
        let (l, dim) = header("dim")?;
        let dim: usize = num(l, &dim)?;

        let mut support_vectors = Vec::with_capacity(n_sv);
        let mut coefficients = Vec::with_capacity(n_sv);
        for (ln, line) in lines {
            let ln = ln + 1;
            let mut tokens = line.split_whitespace();
            let Some(first) = tokens.next() else { continue };
            coefficients.push(num(ln, first)?);
            let mut sv = vec![0.0; dim];
            for tok in tokens {
                let (idx, val) = tok
                    .split_once(':')
                    .ok_or_else(|| Error::parse(ln, 1, format!("malformed pair {tok:?}")))?;
                let idx: usize = num(ln, idx)?;
                if idx == 0 || idx > dim {
                    return Err(Error::parse(ln, 1, format!("index {idx} outside 1..={dim}")));
                }
                sv[idx - 1] = num(ln, val)?;
            }
            support_vectors.push(sv);
        }
        if support_vectors.len() != n_sv {
            return Err(Error::parse(
                0,
                0,
                format!("expected {n_sv} support vectors, found {}", support_vectors.len()),
            ));
        }
        Ok(Self {
            kernel,
            c,
            support_vectors,
            coefficients,
            bias,
            class_pair: (pair[0], pair[1]),
            dim,
        })
    }
}

/// Three binary stages: Unknown/Known, then Keep/Change, then Left/Right.
/// In each stage the first-named class is the negative side and wins ties.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeModel {
    pub known: SvmModel,
    pub change: SvmModel,
    pub direction: SvmModel,
}

pub const STAGE_NAMES: [&str; 3] = [
    "stage0 (Unknown vs Known)",
    "stage1 (Keep vs Change)",
    "stage2 (ChangeLeft vs ChangeRight)",
];

impl CascadeModel {
    pub fn new(known: SvmModel, change: SvmModel, direction: SvmModel) -> Result<Self> {
        let dim = known.dim;
        for stage in [&change, &direction] {
            if stage.dim != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: stage.dim,
                });
            }
        }
        Ok(Self {
            known,
            change,
            direction,
        })
    }

    pub fn dim(&self) -> usize {
        self.known.dim
    }

    pub fn stages(&self) -> [&SvmModel; 3] {
        [&self.known, &self.change, &self.direction]
    }

    pub fn classify(&self, x: &[f64]) -> Result<BehaviorLabel> {
        if !self.known.predict(x)? {
            return Ok(BehaviorLabel::Unknown);
        }
        if !self.change.predict(x)? {
            return Ok(BehaviorLabel::Keep);
        }
        Ok(if self.direction.predict(x)? {
            BehaviorLabel::ChangeRight
        } else {
            BehaviorLabel::ChangeLeft
        })
    }
}

fn stage_data(
    samples: &[Vec<f64>],
    labels: &[BehaviorLabel],
    stage: usize,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    use BehaviorLabel::*;
    samples
        .iter()
        .zip(labels)
        .filter_map(|(x, &l)| {
            let target = match (stage, l) {
                (0, Unknown) => -1.0,
                (0, _) => 1.0,
                (1, Keep) => -1.0,
                (1, ChangeLeft | ChangeRight) => 1.0,
                (2, ChangeLeft) => -1.0,
                (2, ChangeRight) => 1.0,
                _ => return None,
            };
            Some((x.clone(), target))
        })
        .unzip()
}

fn train_stage(
    samples: &[Vec<f64>],
    labels: &[BehaviorLabel],
    stage: usize,
    params: &SvmParams,
) -> Result<SvmModel> {
    let (xs, ys) = stage_data(samples, labels, stage);
    let pos = ys.iter().filter(|&&y| y > 0.0).count();
    if pos == 0 || pos == ys.len() {
        return Err(Error::SingleClass {
            stage: STAGE_NAMES[stage].into(),
            detail: format!("{pos} positive of {} samples", ys.len()),
        });
    }
    train(&xs, &ys, params)
}

/// Trains the three stages, each on its own slice of the data.
pub fn train_cascade(
    samples: &[Vec<f64>],
    labels: &[BehaviorLabel],
    params: &SvmParams,
) -> Result<CascadeModel> {
    if samples.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: samples.len(),
            actual: labels.len(),
        });
    }
    let (known, (change, direction)) = rayon::join(
        || train_stage(samples, labels, 0, params),
        || {
            rayon::join(
                || train_stage(samples, labels, 1, params),
                || train_stage(samples, labels, 2, params),
            )
        },
    );
    CascadeModel::new(known?, change?, direction?)
}
