use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use lanecue::config::PipelineConfig;
use lanecue::{commands, server};

#[derive(Parser)]
#[command(name = "lanecue", version, about = "Lane-change behavior classification")]
struct Cli {
    /// TOML configuration file; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FeatureArg {
    Hog,
    Canny,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Linear,
    Rbf,
}

#[derive(Args)]
struct Overrides {
    #[arg(long, global = true)]
    feature: Option<FeatureArg>,
    #[arg(long, global = true)]
    kernel: Option<KernelArg>,
    #[arg(long, global = true)]
    c: Option<f64>,
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Enables PCA with this energy ratio.
    #[arg(long, global = true)]
    pca_ratio: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    frames: Option<PathBuf>,
    #[arg(long, global = true)]
    labels: Option<PathBuf>,
    #[arg(long, global = true)]
    model: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Render synthetic frames and their ground-truth labels.
    Synth {
        /// Segments such as `keep:40,left:40`.
        #[arg(long)]
        plan: Option<String>,
    },
    /// Write features of every labeled frame to a LibSVM file.
    Extract {
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Train the classifier cascade on a LibSVM file.
    Train {
        #[arg(long, short)]
        data: PathBuf,
    },
    /// Score the stored model on a LibSVM file.
    Eval {
        #[arg(long, short)]
        data: PathBuf,
        /// Also write the text report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also write the matrix as CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Serve the labeling API and UI on localhost.
    LabelServe {
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
}

fn apply(cfg: &mut PipelineConfig, o: &Overrides) {
    if let Some(f) = o.feature {
        cfg.features.kind = match f {
            FeatureArg::Hog => "hog",
            FeatureArg::Canny => "canny",
        }
        .into();
    }
    if let Some(k) = o.kernel {
        cfg.svm.kernel = match k {
            KernelArg::Linear => "linear",
            KernelArg::Rbf => "rbf",
        }
        .into();
    }
    if let Some(c) = o.c {
        cfg.svm.c = c;
    }
    if o.gamma.is_some() {
        cfg.svm.gamma = o.gamma;
    }
    if let Some(r) = o.pca_ratio {
        cfg.pca.enabled = Some(true);
        cfg.pca.ratio = r;
    }
    if let Some(s) = o.seed {
        cfg.synth.seed = s;
    }
    if let Some(p) = &o.frames {
        cfg.paths.frames = p.clone();
    }
    if let Some(p) = &o.labels {
        cfg.paths.labels = p.clone();
    }
    if let Some(p) = &o.model {
        cfg.paths.model = p.clone();
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    apply(&mut cfg, &cli.overrides);
    if let Command::Synth { plan: Some(plan) } = &cli.command {
        cfg.synth.plan = plan.clone();
    }
    cfg.validate()?;

    match cli.command {
        Command::Synth { .. } => {
            let s = commands::synth(&cfg)?;
            println!(
                "wrote {} frames to {} (Keep {}, ChangeLeft {}, ChangeRight {}, Unknown {})",
                s.frames,
                cfg.paths.frames.display(),
                s.per_label[0],
                s.per_label[1],
                s.per_label[2],
                s.per_label[3]
            );
        }
        Command::Extract { out } => {
            let s = commands::extract(&cfg, &out)?;
            if s.written == 0 {
                eprintln!("warning: no labeled frames found; {} is empty", out.display());
            }
            if s.unlabeled > 0 {
                eprintln!("warning: skipped {} unlabeled frames", s.unlabeled);
            }
            println!("wrote {} samples to {}", s.written, out.display());
        }
        Command::Train { data } => {
            let clf = commands::train(&cfg, &data)?;
            let pca = clf
                .pca
                .as_ref()
                .map_or("none".to_string(), |p| format!("{} -> {}", p.input_dim(), p.output_dim()));
            let svs: Vec<String> = clf
                .cascade
                .stages()
                .iter()
                .map(|s| s.support_vectors.len().to_string())
                .collect();
            println!(
                "trained {} model in {} (pca {pca}, support vectors {})",
                clf.kind.name(),
                cfg.paths.model.display(),
                svs.join("/")
            );
        }
        Command::Eval { data, report, csv } => {
            let cm = commands::eval(&cfg, &data)?;
            let text = cm.report(None)?;
            print!("{text}");
            if let Some(path) = report {
                std::fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(path) = csv {
                std::fs::write(&path, cm.to_csv()).with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::LabelServe { port } => {
            let state = server::AppState::open(&cfg.paths.frames, cfg.paths.labels.clone())?;
            tokio::runtime::Runtime::new()?.block_on(server::serve(state, Some(cfg.paths.ui.clone()), port))?;
        }
    }
    Ok(())
}
