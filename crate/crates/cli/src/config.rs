//! TOML pipeline configuration. Every field has a default, so an empty file
//! (or no file) is valid.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use lanecue_core::dataio::synth::SceneParams;
use lanecue_core::pipeline::{ExtractConfig, KernelKind, TrainConfig};
use lanecue_core::svm::SvmParams;
use lanecue_core::{CannyParams, FeatureKind, HogParams, Rect, RoiSpec};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub roi: RoiSection,
    pub features: FeatureSection,
    pub canny: CannySection,
    pub hog: HogSection,
    pub pca: PcaSection,
    pub svm: SvmSection,
    pub paths: PathsSection,
    pub synth: SynthSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoiSection {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
    pub layer_rows: [usize; 4],
    pub layer_height: usize,
}

impl Default for RoiSection {
    fn default() -> Self {
        let roi = RoiSpec::default();
        Self {
            x: roi.rect.x,
            y: roi.rect.y,
            width: roi.rect.width,
            height: roi.rect.height,
            layer_rows: roi.layer_rows,
            layer_height: roi.layer_height,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureSection {
    /// `hog` or `canny`.
    pub kind: String,
}

impl Default for FeatureSection {
    fn default() -> Self {
        Self { kind: "hog".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CannySection {
    pub low: f64,
    pub high: f64,
    pub blur_kernel: usize,
    pub blur_sigma: f64,
}

impl Default for CannySection {
    fn default() -> Self {
        let c = CannyParams::default();
        Self {
            low: c.low,
            high: c.high,
            blur_kernel: c.blur_kernel,
            blur_sigma: c.blur_sigma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HogSection {
    pub cell: usize,
    pub bins: usize,
}

impl Default for HogSection {
    fn default() -> Self {
        let h = HogParams::default();
        Self {
            cell: h.cell,
            bins: h.bins,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PcaSection {
    /// Unset means on for Canny stacks and off for HoG.
    pub enabled: Option<bool>,
    pub ratio: f64,
}

impl Default for PcaSection {
    fn default() -> Self {
        Self {
            enabled: None,
            ratio: lanecue_core::pca::DEFAULT_ENERGY_RATIO,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmSection {
    /// `linear` or `rbf`.
    pub kernel: String,
    pub c: f64,
    /// Unset means 1 / feature dimension.
    pub gamma: Option<f64>,
    pub tol: f64,
}

impl Default for SvmSection {
    fn default() -> Self {
        let p = SvmParams::default();
        Self {
            kernel: "rbf".into(),
            c: p.c,
            gamma: None,
            tol: p.tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSection {
    pub frames: PathBuf,
    pub labels: PathBuf,
    pub model: PathBuf,
    /// Static assets of the labeling UI.
    pub ui: PathBuf,
}

impl Default for PathsSection {
    fn default() -> Self {
        Self {
            frames: "frames".into(),
            labels: "labels.csv".into(),
            model: "model".into(),
            ui: "ui/dist".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub width: usize,
    pub height: usize,
    pub lane_width: f64,
    pub vanishing_point: [f64; 2],
    pub marker_period: f64,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Segments as `trajectory:frames`, comma separated.
    pub plan: String,
    pub fps: f64,
}

impl Default for SynthSection {
    fn default() -> Self {
        let s = SceneParams::full_hd();
        Self {
            width: s.width,
            height: s.height,
            lane_width: s.lane_width,
            vanishing_point: [s.vanishing_point.0, s.vanishing_point.1],
            marker_period: s.marker_period,
            noise_sigma: 6.0,
            seed: 0,
            plan: "keep:40,left:40,right:40,intersection:40".into(),
            fps: 30.0,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.feature_kind()?;
        self.kernel_kind()?;
        self.extract_config().roi.validate_layers()?;
        self.canny_params().validate()?;
        if self.hog.cell == 0 || self.hog.bins == 0 {
            bail!("hog cell and bins must be positive");
        }
        if !(self.pca.ratio > 0.0 && self.pca.ratio <= 1.0) {
            bail!("pca ratio must be in (0, 1], got {}", self.pca.ratio);
        }
        if !(self.svm.c > 0.0) || !(self.svm.tol > 0.0) {
            bail!("svm c and tol must be positive");
        }
        if let Some(g) = self.svm.gamma {
            if !(g > 0.0) {
                bail!("svm gamma must be positive, got {g}");
            }
        }
        if !(self.synth.fps > 0.0) {
            bail!("synth fps must be positive");
        }
        Ok(())
    }

    pub fn feature_kind(&self) -> Result<FeatureKind> {
        Ok(self.features.kind.parse::<FeatureKind>()?)
    }

    pub fn kernel_kind(&self) -> Result<KernelKind> {
        match self.svm.kernel.as_str() {
            "linear" => Ok(KernelKind::Linear),
            "rbf" => Ok(KernelKind::Rbf),
            other => bail!("unknown kernel {other:?}, expected linear or rbf"),
        }
    }

    pub fn roi(&self) -> RoiSpec {
        RoiSpec {
            rect: Rect {
                x: self.roi.x,
                y: self.roi.y,
                width: self.roi.width,
                height: self.roi.height,
            },
            layer_rows: self.roi.layer_rows,
            layer_height: self.roi.layer_height,
        }
    }

    pub fn canny_params(&self) -> CannyParams {
        CannyParams {
            low: self.canny.low,
            high: self.canny.high,
            blur_kernel: self.canny.blur_kernel,
            blur_sigma: self.canny.blur_sigma,
        }
    }

    pub fn extract_config(&self) -> ExtractConfig {
        ExtractConfig {
            kind: self.feature_kind().unwrap_or_default(),
            roi: self.roi(),
            canny: self.canny_params(),
            hog: HogParams {
                cell: self.hog.cell,
                bins: self.hog.bins,
            },
        }
    }

    pub fn pca_enabled(&self) -> bool {
        self.pca
            .enabled
            .unwrap_or(self.feature_kind().ok() == Some(FeatureKind::CannyStack))
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        Ok(TrainConfig {
            kernel: self.kernel_kind()?,
            gamma: self.svm.gamma,
            c: self.svm.c,
            tol: self.svm.tol,
            pca_ratio: self.pca_enabled().then_some(self.pca.ratio),
        })
    }

    pub fn scene(&self) -> SceneParams {
        SceneParams {
            width: self.synth.width,
            height: self.synth.height,
            lane_width: self.synth.lane_width,
            vanishing_point: (self.synth.vanishing_point[0], self.synth.vanishing_point[1]),
            marker_period: self.synth.marker_period,
            noise_sigma: self.synth.noise_sigma,
            seed: self.synth.seed,
            ..SceneParams::default()
        }
    }
}
