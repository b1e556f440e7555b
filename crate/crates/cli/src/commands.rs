//! Batch commands: synth, extract, train, eval.

use std::fs;
use std::io::BufReader;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;

use lanecue_core::dataio::libsvm::{densify, read_libsvm, sparsify, write_libsvm, SparseSample};
use lanecue_core::dataio::synth::{parse_plan, plan_frames};
use lanecue_core::dataio::{LabelRecord, LabelStore};
use lanecue_core::eval::ConfusionMatrix;
use lanecue_core::pipeline::{extract_features, Classifier};
use lanecue_core::BehaviorLabel;

use crate::config::PipelineConfig;
use crate::imageio::{frame_name, list_frames, load_png, save_png};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthSummary {
    pub frames: usize,
    pub per_label: [usize; 4],
}

/// Renders the configured plan into the frames directory and writes the
/// ground-truth label file.
pub fn synth(cfg: &PipelineConfig) -> Result<SynthSummary> {
    let plan = parse_plan(&cfg.synth.plan)?;
    let frames = plan_frames(&cfg.scene(), &plan)?;
    let dir = &cfg.paths.frames;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    if !list_frames(dir)?.is_empty() {
        bail!("{} already contains frames", dir.display());
    }
    frames
        .par_iter()
        .enumerate()
        .try_for_each(|(i, f)| save_png(&f.render()?, &dir.join(format!("{}.png", frame_name(i + 1)))))?;

    let mut store = LabelStore::new();
    let mut per_label = [0; 4];
    for (i, f) in frames.iter().enumerate() {
        store.insert(LabelRecord::new(frame_name(i + 1), f.label, i as f64 / cfg.synth.fps)?);
        per_label[f.label.code() as usize] += 1;
    }
    store
        .write(&cfg.paths.labels)
        .with_context(|| format!("writing {}", cfg.paths.labels.display()))?;
    Ok(SynthSummary {
        frames: frames.len(),
        per_label,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractSummary {
    pub written: usize,
    pub unlabeled: usize,
}

/// One LibSVM line per labeled frame, in frame order. Unlabeled frames are
/// skipped and counted.
pub fn extract(cfg: &PipelineConfig, out: &Path) -> Result<ExtractSummary> {
    let frames_dir = &cfg.paths.frames;
    ensure!(frames_dir.is_dir(), "frames directory {} does not exist", frames_dir.display());
    ensure!(cfg.paths.labels.is_file(), "label file {} does not exist", cfg.paths.labels.display());
    let labels = LabelStore::load(&cfg.paths.labels)?;
    let frames = list_frames(frames_dir)?;
    let labeled: Vec<_> = frames
        .iter()
        .filter_map(|(id, path)| labels.get(id).map(|r| (id, path, r.label)))
        .collect();
    let extract_cfg = cfg.extract_config();
    let samples: Vec<SparseSample> = labeled
        .par_iter()
        .map(|(id, path, label)| {
            let frame = load_png(path)?;
            let v = extract_features(&frame, &extract_cfg).with_context(|| format!("frame {id}"))?;
            Ok(sparsify(&v.with_label(*label)))
        })
        .collect::<Result<_>>()?;
    let file = fs::File::create(out).with_context(|| format!("creating {}", out.display()))?;
    write_libsvm(&samples, std::io::BufWriter::new(file))?;
    Ok(ExtractSummary {
        written: samples.len(),
        unlabeled: frames.len() - labeled.len(),
    })
}

fn read_dataset(path: &Path, dim: usize, cfg: &PipelineConfig) -> Result<(Vec<Vec<f64>>, Vec<BehaviorLabel>)> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let samples = read_libsvm(BufReader::new(file)).with_context(|| format!("parsing {}", path.display()))?;
    let kind = cfg.feature_kind()?;
    let mut xs = Vec::with_capacity(samples.len());
    let mut ys = Vec::with_capacity(samples.len());
    for (i, s) in samples.iter().enumerate() {
        let v = densify(s, dim, kind).with_context(|| format!("{} sample {}", path.display(), i + 1))?;
        let label = v
            .label
            .with_context(|| format!("{} sample {}: label code {} is not a class", path.display(), i + 1, s.label))?;
        xs.push(v.values);
        ys.push(label);
    }
    Ok((xs, ys))
}

/// Trains on a LibSVM file and writes the model into the model directory.
pub fn train(cfg: &PipelineConfig, data: &Path) -> Result<Classifier> {
    let dim = cfg.extract_config().dim()?;
    let (xs, ys) = read_dataset(data, dim, cfg)?;
    ensure!(!xs.is_empty(), "{} holds no samples", data.display());
    let clf = Classifier::train(cfg.feature_kind()?, &xs, &ys, &cfg.train_config()?)?;
    clf.save(&cfg.paths.model)
        .with_context(|| format!("writing model to {}", cfg.paths.model.display()))?;
    Ok(clf)
}

/// Classifies every sample of a LibSVM file with the stored model.
pub fn eval(cfg: &PipelineConfig, data: &Path) -> Result<ConfusionMatrix> {
    let clf = Classifier::load(&cfg.paths.model)
        .with_context(|| format!("loading model from {}", cfg.paths.model.display()))?;
    let kind = cfg.feature_kind()?;
    if clf.kind != kind {
        bail!(
            "model expects {} features ({} dims) but the configuration selects {} ({} dims)",
            clf.kind.name(),
            clf.input_dim(),
            kind.name(),
            cfg.extract_config().dim()?
        );
    }
    let (xs, ys) = read_dataset(data, clf.input_dim(), cfg)?;
    Ok(clf.evaluate(&xs, &ys)?)
}
