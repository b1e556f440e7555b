//! Feature extraction, training and evaluation glue.
//!
//! A trained [`Classifier`] applies, in order: max-abs scaling, optional
//! PCA projection, and the three-stage cascade.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::eval::{behavior_confusion, ConfusionMatrix};
use crate::features::{extract_canny_stack, extract_hog, BehaviorLabel, FeatureKind, FeatureVector, HogParams, RoiSpec};
use crate::imaging::{CannyParams, RgbImage};
use crate::pca::PcaModel;
use crate::scale::MaxAbsScaler;
use crate::svm::{train_cascade, CascadeModel, Kernel, SvmModel, SvmParams};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExtractConfig {
    pub kind: FeatureKind,
    pub roi: RoiSpec,
    pub canny: CannyParams,
    pub hog: HogParams,
}

impl ExtractConfig {
    pub fn dim(&self) -> Result<usize> {
        match self.kind {
            FeatureKind::CannyStack => Ok(self.roi.canny_dim()),
            FeatureKind::Hog => self.roi.hog_dim(&self.hog),
        }
    }
}

pub fn extract_features(frame: &RgbImage, cfg: &ExtractConfig) -> Result<FeatureVector> {
    match cfg.kind {
        FeatureKind::CannyStack => extract_canny_stack(frame, &cfg.roi, &cfg.canny),
        FeatureKind::Hog => extract_hog(frame, &cfg.roi, &cfg.hog),
    }
}

/// Extracts in parallel; output order follows `frames`.
pub fn extract_batch(frames: &[RgbImage], cfg: &ExtractConfig) -> Result<Vec<FeatureVector>> {
    frames.par_iter().map(|f| extract_features(f, cfg)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelKind {
    Linear,
    #[default]
    Rbf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub kernel: KernelKind,
    /// RBF width; `None` means 1 / (dimension seen by the SVM).
    pub gamma: Option<f64>,
    pub c: f64,
    pub tol: f64,
    /// Energy ratio for PCA, or `None` to skip it.
    pub pca_ratio: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let svm = SvmParams::default();
        Self {
            kernel: KernelKind::Rbf,
            gamma: None,
            c: svm.c,
            tol: svm.tol,
            pca_ratio: None,
        }
    }
}

impl TrainConfig {
    fn svm_params(&self, dim: usize) -> SvmParams {
        let kernel = match (self.kernel, self.gamma) {
            (KernelKind::Linear, _) => Kernel::Linear,
            (KernelKind::Rbf, Some(gamma)) => Kernel::Rbf { gamma },
            (KernelKind::Rbf, None) => Kernel::rbf_for_dim(dim),
        };
        SvmParams {
            kernel,
            c: self.c,
            tol: self.tol,
            ..SvmParams::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    pub kind: FeatureKind,
    pub scaler: MaxAbsScaler,
    pub pca: Option<PcaModel>,
    pub cascade: CascadeModel,
}

pub const MANIFEST_FILE: &str = "manifest.txt";
const SCALER_FILE: &str = "scaler.txt";
const PCA_FILE: &str = "pca.txt";
const STAGE_FILES: [&str; 3] = ["stage0.svm", "stage1.svm", "stage2.svm"];

impl Classifier {
    pub fn train(
        kind: FeatureKind,
        samples: &[Vec<f64>],
        labels: &[BehaviorLabel],
        cfg: &TrainConfig,
    ) -> Result<Self> {
        let scaler = MaxAbsScaler::fit(samples)?;
        let scaled = scaler.transform(samples)?;
        let (pca, reduced) = match cfg.pca_ratio {
            Some(r) => {
                let model = PcaModel::fit(&scaled, r)?;
                let reduced = model.project(&scaled)?;
                (Some(model), reduced)
            }
            None => (None, scaled),
        };
        let dim = reduced.first().map_or(0, Vec::len);
        let cascade = train_cascade(&reduced, labels, &cfg.svm_params(dim))?;
        Ok(Self {
            kind,
            scaler,
            pca,
            cascade,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.scaler.dim()
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        let scaled = self.scaler.transform_one(x)?;
        match &self.pca {
            Some(p) => p.project_one(&scaled),
            None => Ok(scaled),
        }
    }

    pub fn classify(&self, x: &[f64]) -> Result<BehaviorLabel> {
        self.cascade.classify(&self.transform(x)?)
    }

    pub fn classify_all(&self, xs: &[Vec<f64>]) -> Result<Vec<BehaviorLabel>> {
        xs.par_iter().map(|x| self.classify(x)).collect()
    }

    pub fn evaluate(&self, xs: &[Vec<f64>], truth: &[BehaviorLabel]) -> Result<ConfusionMatrix> {
        behavior_confusion(truth, &self.classify_all(xs)?)
    }

    pub fn manifest(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "feature {}", self.kind.name());
        let _ = writeln!(out, "input_dim {}", self.input_dim());
        let _ = writeln!(out, "scaler {SCALER_FILE}");
        match &self.pca {
            Some(p) => {
                let _ = writeln!(out, "pca {PCA_FILE} {}", p.output_dim());
            }
            None => out.push_str("pca none\n"),
        }
        for (i, f) in STAGE_FILES.iter().enumerate() {
            let _ = writeln!(out, "stage{i} {f}");
        }
        out
    }

    /// Writes the manifest and one file per component into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(SCALER_FILE), self.scaler.to_text())?;
        let pca_path = dir.join(PCA_FILE);
        match &self.pca {
            Some(p) => fs::write(&pca_path, p.to_text())?,
            None if pca_path.exists() => fs::remove_file(&pca_path)?,
            None => {}
        }
        for (stage, file) in self.cascade.stages().iter().zip(STAGE_FILES) {
            fs::write(dir.join(file), stage.to_text())?;
        }
        fs::write(dir.join(MANIFEST_FILE), self.manifest())?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let manifest = fs::read_to_string(dir.join(MANIFEST_FILE))?;
        let mut kind = None;
        let mut input_dim = None;
        let mut scaler = None;
        let mut pca = None;
        let mut stages: [Option<SvmModel>; 3] = [None, None, None];
        for (i, line) in manifest.lines().enumerate() {
            let line_no = i + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            let Some((&key, rest)) = fields.split_first() else {
                continue;
            };
            let value = *rest
                .first()
                .ok_or_else(|| Error::parse(line_no, 1, format!("`{key}` has no value")))?;
            match key {
                "feature" => kind = Some(value.parse::<FeatureKind>()?),
                "input_dim" => {
                    input_dim = Some(
                        value
                            .parse::<usize>()
                            .map_err(|_| Error::parse(line_no, key.len() + 2, "bad dimension"))?,
                    )
                }
                "scaler" => {
                    scaler = Some(MaxAbsScaler::from_text(&fs::read_to_string(dir.join(value))?)?)
                }
                "pca" if value == "none" => {}
                "pca" => pca = Some(PcaModel::from_text(&fs::read_to_string(dir.join(value))?)?),
                "stage0" | "stage1" | "stage2" => {
                    let idx = usize::from(key.as_bytes()[5] - b'0');
                    stages[idx] = Some(SvmModel::from_text(&fs::read_to_string(dir.join(value))?)?);
                }
                other => {
                    return Err(Error::parse(line_no, 1, format!("unknown manifest key {other:?}")))
                }
            }
        }
        let missing = |what: &str| Error::parse(manifest.lines().count() + 1, 1, format!("manifest lacks {what}"));
        let kind = kind.ok_or_else(|| missing("feature"))?;
        let scaler = scaler.ok_or_else(|| missing("scaler"))?;
        let [s0, s1, s2] = stages;
        let cascade = CascadeModel::new(
            s0.ok_or_else(|| missing("stage0"))?,
            s1.ok_or_else(|| missing("stage1"))?,
            s2.ok_or_else(|| missing("stage2"))?,
        )?;
        if let Some(d) = input_dim {
            if d != scaler.dim() {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: scaler.dim(),
                });
            }
        }
        let svm_dim = match &pca {
            Some(p) => {
                if p.input_dim() != scaler.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: scaler.dim(),
                        actual: p.input_dim(),
                    });
                }
                p.output_dim()
            }
            None => scaler.dim(),
        };
        if cascade.dim() != svm_dim {
            return Err(Error::DimensionMismatch {
                expected: svm_dim,
                actual: cascade.dim(),
            });
        }
        Ok(Self {
            kind,
            scaler,
            pca,
            cascade,
        })
    }
}
