//! Principal component analysis with energy-based component selection.
//!
//! With `d` features and `N` samples, the centered data matrix `X` is `d×N`.
//! When `d > N` the `N×N` Gram matrix `XᵀX` is decomposed instead of the
//! `d×d` scatter `XXᵀ`; each Gram eigenvector `u` maps back to a principal
//! direction `X·u / ‖X·u‖`. Eigenvalues follow the `Σ = XXᵀ / N` convention.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{canonical_sign, dot, gram, jacobi_eigen, norm};

pub const DEFAULT_ENERGY_RATIO: f64 = 0.98;

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Gram matrix when `d > N`, scatter matrix otherwise.
    #[default]
    Auto,
    Gram,
    Direct,
}

/// Covariance spectrum of centered data.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Descending, non-negative, `min(d, N)` or `d` entries depending on the path.
    pub values: Vec<f64>,
    /// Unit principal directions for the non-zero eigenvalues, same order.
    pub vectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    /// Columns of the projection matrix, each of length `d`.
    pub projection: Vec<Vec<f64>>,
    pub energy_ratio: f64,
    pub total_energy: f64,
}

fn clamp_spectrum(values: &mut [f64]) {
    let top = values.first().copied().unwrap_or(0.0).max(0.0);
    for v in values.iter_mut() {
        if *v <= RANK_TOLERANCE * top {
            *v = 0.0;
        }
    }
}

/// Column mean and mean-subtracted copies of the samples.
pub fn center(data: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let d = data.first().map(Vec::len).unwrap_or(0);
    if d == 0 {
        return Err(Error::param("pca needs at least one feature"));
    }
    if let Some(bad) = data.iter().find(|s| s.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: bad.len(),
        });
    }
    let n = data.len() as f64;
    let mut mean = vec![0.0; d];
    for s in data {
        for (m, x) in mean.iter_mut().zip(s) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let centered = data
        .iter()
        .map(|s| s.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();
    Ok((mean, centered))
}

/// Spectrum via the `N×N` Gram matrix of centered samples.
pub fn gram_spectrum(centered: &[Vec<f64>]) -> Spectrum {
    let n = centered.len();
    let d = centered.first().map(Vec::len).unwrap_or(0);
    let eig = jacobi_eigen(&gram(centered), n);
    let mut values: Vec<f64> = eig.values.iter().map(|v| v / n as f64).collect();
    clamp_spectrum(&mut values);

    let mut vectors = Vec::new();
    for (k, u) in eig.vectors.iter().enumerate() {
        if values[k] == 0.0 {
            break;
        }
        let mut v = vec![0.0; d];
        for (coef, sample) in u.iter().zip(centered) {
            for (acc, x) in v.iter_mut().zip(sample) {
                *acc += coef * x;
            }
        }
        let len = norm(&v);
        v.iter_mut().for_each(|x| *x /= len);
        canonical_sign(&mut v);
        // Rayleigh quotient of the mapped direction under Σ = XXᵀ/N
        values[k] = centered.iter().map(|s| dot(s, &v).powi(2)).sum::<f64>() / n as f64;
        vectors.push(v);
    }
    // the Rayleigh refinement can swap near-ties by an ulp
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    let head: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    values[..head.len()].copy_from_slice(&head);
    let vectors = order.into_iter().map(|i| vectors[i].clone()).collect();
    Spectrum { values, vectors }
}

/// Spectrum via the `d×d` scatter matrix.
pub fn direct_spectrum(centered: &[Vec<f64>]) -> Spectrum {
    let n = centered.len() as f64;
    let d = centered.first().map(Vec::len).unwrap_or(0);
    let mut scatter = vec![0.0; d * d];
    for s in centered {
        for i in 0..d {
            let si = s[i];
            if si == 0.0 {
                continue;
            }
            for j in i..d {
                scatter[i * d + j] += si * s[j];
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            let v = scatter[i * d + j] / n;
            scatter[i * d + j] = v;
            scatter[j * d + i] = v;
        }
    }
    let eig = jacobi_eigen(&scatter, d);
    let mut values = eig.values;
    clamp_spectrum(&mut values);
    let vectors = eig
        .vectors
        .into_iter()
        .zip(&values)
        .take_while(|(_, &v)| v > 0.0)
        .map(|(mut v, _)| {
            canonical_sign(&mut v);
            v
        })
        .collect();
    Spectrum { values, vectors }
}

/// Smallest `M` whose leading eigenvalues hold at least `ratio` of the total.
pub fn select_components(eigenvalues: &[f64], ratio: f64) -> Result<usize> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::param(format!("energy ratio must be in (0, 1], got {ratio}")));
    }
    if eigenvalues.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::param("eigenvalues must be finite and non-negative"));
    }
    if eigenvalues.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::param("eigenvalues must be sorted in descending order"));
    }
    let total: f64 = eigenvalues.iter().sum();
    if total <= 0.0 {
        return Err(Error::Degenerate("all eigenvalues are zero".into()));
    }
    let target = ratio * total;
    let mut prefix = 0.0;
    for (i, &v) in eigenvalues.iter().enumerate() {
        prefix += v;
        if prefix >= target {
            return Ok(i + 1);
        }
    }
    Ok(eigenvalues.len())
}

impl PcaModel {
    pub fn fit(data: &[Vec<f64>], energy_ratio: f64) -> Result<Self> {
        Self::fit_with(data, energy_ratio, Strategy::Auto)
    }

    pub fn fit_with(data: &[Vec<f64>], energy_ratio: f64, strategy: Strategy) -> Result<Self> {
        if data.len() < 2 {
            return Err(Error::param(format!(
                "pca needs at least 2 samples, got {}",
                data.len()
            )));
        }
        if !(energy_ratio > 0.0 && energy_ratio <= 1.0) {
            return Err(Error::param(format!(
                "energy ratio must be in (0, 1], got {energy_ratio}"
            )));
        }
        let (mean, centered) = center(data)?;
        let d = mean.len();
        let use_gram = match strategy {
            Strategy::Auto => d > data.len(),
            Strategy::Gram => true,
            Strategy::Direct => false,
        };
        let spectrum = if use_gram {
            gram_spectrum(&centered)
        } else {
            direct_spectrum(&centered)
        };
        if spectrum.vectors.is_empty() {
            return Err(Error::Degenerate(
                "all samples are identical; no principal directions".into(),
            ));
        }
        let mut eigenvalues = spectrum.values;
        eigenvalues.truncate(d.min(data.len()));
        let m = select_components(&eigenvalues, energy_ratio)?.min(spectrum.vectors.len());
        let total_energy = eigenvalues.iter().sum();
        let mut projection = spectrum.vectors;
        projection.truncate(m);
        Ok(Self {
            mean,
            eigenvalues,
            projection,
            energy_ratio,
            total_energy,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn output_dim(&self) -> usize {
        self.projection.len()
    }

    /// `Pᵀ(y − μ)` for one sample.
    pub fn project_one(&self, sample: &[f64]) -> Result<Vec<f64>> {
        if sample.len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                actual: sample.len(),
            });
        }
        let centered: Vec<f64> = sample.iter().zip(&self.mean).map(|(x, m)| x - m).collect();
        Ok(self.projection.iter().map(|p| dot(p, &centered)).collect())
    }

    pub fn project(&self, data: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        data.iter().map(|s| self.project_one(s)).collect()
    }

    /// `P·y + μ`.
    pub fn reconstruct(&self, reduced: &[f64]) -> Result<Vec<f64>> {
        if reduced.len() != self.projection.len() {
            return Err(Error::DimensionMismatch {
                expected: self.projection.len(),
                actual: reduced.len(),
            });
        }
        let mut out = self.mean.clone();
        for (coef, p) in reduced.iter().zip(&self.projection) {
            for (o, x) in out.iter_mut().zip(p) {
                *o += coef * x;
            }
        }
        Ok(out)
    }

    /// Text form: a `d M r Λ` header, then the mean, the eigenvalues and one
    /// projection column per line, floats with 17 significant digits.
    pub fn to_text(&self) -> String {
        let row = |xs: &[f64]| {
            xs.iter()
                .map(|x| format!("{x:.16e}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} {:.16e} {:.16e}",
            self.input_dim(),
            self.output_dim(),
            self.energy_ratio,
            self.total_energy
        );
        let _ = writeln!(out, "{}", row(&self.mean));
        let _ = writeln!(out, "{}", row(&self.eigenvalues));
        for col in &self.projection {
            let _ = writeln!(out, "{}", row(col));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| Error::parse(0, 0, format!("pca model truncated before {what}")))
        };
        let floats = |line: usize, s: &str| -> Result<Vec<f64>> {
            s.split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|e| Error::parse(line + 1, 1, format!("bad number {t:?}: {e}")))
                })
                .collect()
        };

        let (ln, header) = next("header")?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::parse(ln + 1, 1, "header must be `d M r total_energy`"));
        }
        let int = |t: &str| {
            t.parse::<usize>()
                .map_err(|e| Error::parse(ln + 1, 1, format!("bad count {t:?}: {e}")))
        };
        let d = int(fields[0])?;
        let m = int(fields[1])?;
        let rt = floats(ln, &fields[2..].join(" "))?;

        let (ln, mean_line) = next("mean")?;
        let mean = floats(ln, mean_line)?;
        if mean.len() != d {
            return Err(Error::parse(ln + 1, 1, format!("mean has {} values, expected {d}", mean.len())));
        }
        let (ln, eig_line) = next("eigenvalues")?;
        let eigenvalues = floats(ln, eig_line)?;
        let mut projection = Vec::with_capacity(m);
        for _ in 0..m {
            let (ln, col) = next("projection column")?;
            let col = floats(ln, col)?;
            if col.len() != d {
                return Err(Error::parse(ln + 1, 1, format!("column has {} values, expected {d}", col.len())));
            }
            projection.push(col);
        }
        Ok(Self {
            mean,
            eigenvalues,
            projection,
            energy_ratio: rt[0],
            total_energy: rt[1],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::squared_distance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_data(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn two_points_have_one_direction() {
        let data = vec![vec![1.0, 2.0, 3.0], vec![3.0, 2.0, -1.0]];
        let model = PcaModel::fit(&data, 1.0).unwrap();
        let nonzero = model.eigenvalues.iter().filter(|&&v| v > 0.0).count();
        assert_eq!(nonzero, 1);
        assert_eq!(model.output_dim(), 1);
        let diff = [2.0, 0.0, -4.0];
        let len = norm(&diff);
        let expected: Vec<f64> = diff.iter().map(|x| x / len).collect();
        let p = &model.projection[0];
        let sign = if dot(p, &expected) < 0.0 { -1.0 } else { 1.0 };
        for (a, b) in p.iter().zip(&expected) {
            assert!((a - sign * b).abs() < 1e-12);
        }
        // λ = ‖diff‖² / 4 for two points under the 1/N convention
        assert!((model.eigenvalues[0] - 20.0 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn select_components_examples() {
        assert_eq!(select_components(&[4.0, 3.0, 2.0, 1.0], 0.6).unwrap(), 2);
        for r in [0.01, 0.5, 1.0] {
            assert_eq!(select_components(&[5.0, 0.0, 0.0], r).unwrap(), 1);
        }
        assert_eq!(select_components(&[4.0, 3.0, 2.0, 1.0], 1.0).unwrap(), 4);
        assert!(select_components(&[1.0, 2.0], 0.5).is_err());
        assert!(select_components(&[1.0, -0.5], 0.5).is_err());
        assert!(select_components(&[0.0, 0.0], 0.5).is_err());
        assert!(select_components(&[1.0], 1.5).is_err());
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(PcaModel::fit(&[vec![1.0, 2.0]], 0.9).is_err());
        assert!(PcaModel::fit(&random_data(4, 3, 1), 0.0).is_err());
        let same = vec![vec![1.0, 2.0]; 5];
        assert!(matches!(PcaModel::fit(&same, 0.9), Err(Error::Degenerate(_))));
    }

    #[test]
    fn full_energy_reconstructs_exactly() {
        for (n, d) in [(20, 50), (30, 6)] {
            let data = random_data(n, d, 7);
            let model = PcaModel::fit(&data, 1.0).unwrap();
            let nonzero = model.eigenvalues.iter().filter(|&&v| v > 0.0).count();
            assert_eq!(model.output_dim(), nonzero);
            for s in &data {
                let back = model.reconstruct(&model.project_one(s).unwrap()).unwrap();
                assert!(squared_distance(s, &back).sqrt() < 1e-8);
            }
        }
    }

    #[test]
    fn mean_projects_to_origin() {
        let data = random_data(10, 25, 3);
        let model = PcaModel::fit(&data, 0.9).unwrap();
        let y = model.project_one(&model.mean).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-12));
        assert!(model.project_one(&[1.0]).is_err());
    }

    #[test]
    fn projection_columns_are_orthonormal() {
        let model = PcaModel::fit(&random_data(12, 40, 11), 0.98).unwrap();
        for (i, a) in model.projection.iter().enumerate() {
            for (j, b) in model.projection.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot(a, b) - expected).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn prefix_property_holds() {
        let model = PcaModel::fit(&random_data(15, 30, 5), 0.8).unwrap();
        let m = model.output_dim();
        let target = model.energy_ratio * model.total_energy;
        let prefix = |k: usize| model.eigenvalues[..k].iter().sum::<f64>();
        assert!(prefix(m) >= target);
        assert!(prefix(m - 1) < target);
    }

    #[test]
    fn text_round_trip() {
        let model = PcaModel::fit(&random_data(6, 9, 2), 0.9).unwrap();
        let text = model.to_text();
        let back = PcaModel::from_text(&text).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.to_text(), text);
        assert!(PcaModel::from_text("3 1 0.5").is_err());
    }
}
