//! Command-line interface.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use mlptopo_core::mlp::forward_all;
use mlptopo_core::persistence::bottleneck;
use mlptopo_core::tower::ScaleSchedule;

use crate::config::{resolve, Overrides, Preset, RunConfig};
use crate::error::{Error, Result};
use crate::formats::{self, TowerDoc, TrajectoriesDoc};
use crate::pipeline;

#[derive(Debug, Parser)]
#[command(name = "mlptopo", version, about = "Topology of MLP layer activations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Where the run configuration comes from.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct ConfigArgs {
    /// TOML run configuration.
    #[arg(long, short = 'c')]
    pub config: Option<PathBuf>,
    /// Built-in configuration, used when no file is given.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[command(flatten)]
    pub overrides: Overrides,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig> {
        resolve(self.preset, self.config.as_deref(), &self.overrides)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Builds the dataset and writes a cloud file.
    Generate {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Trains over the configured seeds and writes the model.
    Train {
        #[arg(long)]
        cloud: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, short)]
        out: PathBuf,
        /// Training report (JSON).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Writes the image of the cloud at every layer.
    Activations {
        #[arg(long)]
        cloud: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Rips persistence of each layer; writes `layer{i}.csv` and `.json`.
    LayerPersistence {
        #[arg(long)]
        images: PathBuf,
        #[arg(long, default_value_t = 2)]
        max_dim: usize,
        /// Largest scale per layer, comma separated (`inf` allowed).
        #[arg(long, value_delimiter = ',', value_parser = formats::parse_value)]
        max_eps: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.0)]
        sparsify: f64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Layer-indexed persistence of the layer-wise tower.
    MlpPersistence {
        #[arg(long)]
        images: PathBuf,
        /// One scale per layer, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        schedule: Vec<f64>,
        #[arg(long, default_value_t = 2)]
        max_dim: usize,
        #[arg(long, default_value_t = 0.0)]
        sparsify: f64,
        /// Barcode CSV with layer indices.
        #[arg(long, short)]
        out: PathBuf,
        /// Diagram JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Tower edge sets (JSON).
        #[arg(long)]
        tower: Option<PathBuf>,
    },
    /// Component trajectories; writes `trajectories.json` and `.dot`.
    Trajectories {
        #[arg(long)]
        images: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        schedule: Vec<f64>,
        #[arg(long, default_value_t = 2)]
        top: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Bottleneck distance between two diagram files.
    Bottleneck {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 0)]
        dim: usize,
    },
    /// Runs the whole pipeline and writes every artifact and a summary.
    Reproduce {
        #[arg(value_enum)]
        preset: Preset,
        /// TOML file replacing the preset.
        #[arg(long, short = 'c')]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Prints the resolved configuration as TOML.
    PrintConfig {
        #[command(flatten)]
        config: ConfigArgs,
    },
}

fn schedule_for(values: Vec<f64>, layers: usize) -> Result<ScaleSchedule> {
    if values.len() != layers {
        return Err(Error::config(format!("schedule has {} scales but the network has {layers} layers", values.len())));
    }
    ScaleSchedule::new(values).map_err(Error::config)
}

/// Runs one command; messages go to stdout and errors are returned.
pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { config, out } => {
            let config = config.resolve()?;
            let grouped = pipeline::load_dataset(&config.dataset)?;
            formats::save_cloud(&out, &grouped.cloud)?;
            println!(
                "{} points of dimension {} ({} dropped rows) -> {}",
                grouped.cloud.len(),
                grouped.cloud.dim(),
                grouped.dropped_rows,
                out.display()
            );
        }
        Command::Train { cloud, config, out, report } => {
            let config = config.resolve()?;
            let cloud = formats::load_cloud(&cloud)?;
            let outcome = pipeline::train_model(&config, &cloud)?;
            formats::save_model(&out, &outcome.model)?;
            if let Some(path) = report {
                formats::write_json(&path, &TrainSummary::from(&outcome))?;
            }
            println!(
                "seed {} accuracy {} loss {} -> {}",
                outcome.seed,
                outcome.report.accuracy,
                outcome.report.final_loss,
                out.display()
            );
        }
        Command::Activations { cloud, model, out } => {
            let cloud = formats::load_cloud(&cloud)?;
            let model = formats::load_model(&model)?;
            let images = forward_all(&model, &cloud)?;
            formats::save_images(&out, &images)?;
            println!("{} layers -> {}", images.layer_count(), out.display());
        }
        Command::LayerPersistence { images, max_dim, max_eps, sparsify, out_dir } => {
            let images = formats::load_images(&images)?;
            check_threshold(sparsify)?;
            let caps = max_eps.unwrap_or_else(|| vec![f64::INFINITY; images.layer_count()]);
            let (diagrams, sizes) = pipeline::sparse_layer_persistence(&images, max_dim, &caps, sparsify)?;
            for (i, d) in diagrams.iter().enumerate() {
                formats::write_text(&out_dir.join(format!("layer{i}.csv")), &formats::diagram_to_csv(d))?;
                formats::write_text(&out_dir.join(format!("layer{i}.json")), &formats::diagram_to_json(d))?;
                println!("layer {i}: {} points, {} features", sizes[i], d.len());
            }
        }
        Command::MlpPersistence { images, schedule, max_dim, sparsify, out, json, tower } => {
            let images = formats::load_images(&images)?;
            let schedule = schedule_for(schedule, images.layer_count())?;
            check_threshold(sparsify)?;
            let (subset, t, diagram) = pipeline::mlp_analysis(&images, &schedule, max_dim, sparsify)?;
            formats::write_text(&out, &formats::barcode_to_csv(&diagram))?;
            if let Some(path) = json {
                formats::write_text(&path, &formats::diagram_to_json(&diagram))?;
            }
            if let Some(path) = tower {
                formats::write_json(&path, &TowerDoc::new(&t, subset.ids()))?;
            }
            println!("{} points, {} bars -> {}", subset.len(), diagram.len(), out.display());
        }
        Command::Trajectories { images, schedule, top, out_dir } => {
            let images = formats::load_images(&images)?;
            let schedule = schedule_for(schedule, images.layer_count())?;
            let analysis = pipeline::trajectory_analysis(&images, &schedule, top)?;
            let doc = TrajectoriesDoc::new(&analysis.trajectories, images.ids(), images.labels(), &analysis.dominant);
            formats::write_json(&out_dir.join("trajectories.json"), &doc)?;
            formats::write_text(&out_dir.join("trajectories.dot"), &formats::graph_to_dot(&analysis.graph))?;
            for p in &analysis.dominant {
                println!("{:?}: {} points, purity {:.4}", p.path.path(), p.count, p.purity());
            }
        }
        Command::Bottleneck { a, b, dim } => {
            let da = formats::load_diagram(&a)?;
            let db = formats::load_diagram(&b)?;
            println!("{}", bottleneck(&da, &db, dim));
        }
        Command::Reproduce { preset, config, overrides } => {
            let config = resolve(Some(preset), config.as_deref(), &overrides)?;
            let outcome = pipeline::run(&config)?;
            let written = pipeline::write_outcome(&outcome, &config.output_dir)?;
            report_run(&outcome.summary, &config.output_dir, written.len());
        }
        Command::PrintConfig { config } => {
            print!("{}", config.resolve()?.to_toml());
        }
    }
    Ok(())
}

fn check_threshold(min_sq_dist: f64) -> Result<()> {
    if min_sq_dist >= 0.0 && min_sq_dist.is_finite() {
        Ok(())
    } else {
        Err(Error::config("--sparsify must be finite and nonnegative"))
    }
}

fn report_run(s: &pipeline::Summary, dir: &Path, files: usize) {
    println!("seed {} accuracy {}", s.seed, s.accuracy);
    println!("components per layer {:?}", s.components_per_layer);
    for p in &s.dominant {
        println!("trajectory {:?}: {} points, purity {:.4}", p.path, p.count, p.purity);
    }
    if let Some(layer) = s.stable_from_layer {
        println!("partition unchanged after layer {layer}");
    }
    for c in &s.checks {
        println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    println!("{files} files -> {}", dir.display());
}

#[derive(Debug, serde::Serialize)]
struct TrainSummary {
    seed: u64,
    accuracy: f64,
    final_loss: f64,
    epochs: usize,
    attempts: Vec<(u64, f64)>,
    loss_trace: Vec<f64>,
}

impl From<&mlptopo_core::mlp::SweepOutcome> for TrainSummary {
    fn from(o: &mlptopo_core::mlp::SweepOutcome) -> Self {
        Self {
            seed: o.seed,
            accuracy: o.report.accuracy,
            final_loss: o.report.final_loss,
            epochs: o.report.epochs,
            attempts: o.attempts.clone(),
            loss_trace: o.report.loss_trace.clone(),
        }
    }
}
