//! End-to-end runs and the analysis steps shared with the single commands.

use std::path::{Path, PathBuf};

use mlptopo_core::dataset::{generate_circles, sparsify, GroupedCloud, LabeledPointCloud};
use mlptopo_core::mlp::{forward_all, seed_sweep, LayerImages, MlpModel, SweepOutcome};
use mlptopo_core::persistence::PersistenceDiagram;
use mlptopo_core::tower::{
    layer_persistence, layerwise_tower, mlp_persistence, separability_nerve_check, LayerwiseTower, ScaleSchedule,
    SeparabilityReport,
};
use mlptopo_core::trajectory::{
    build_graph, component_trajectories, dominant_trajectories, node_purity, partition_changes, stable_from,
    PathCount, Trajectory, TrajectoryGraph,
};
use serde::Serialize;

use crate::config::{DatasetSpec, RunConfig};
use crate::error::{Error, Result};
use crate::formats::{self, TowerDoc, TrajectoriesDoc};
use crate::table::load_table;

pub fn load_dataset(spec: &DatasetSpec) -> Result<GroupedCloud> {
    match spec {
        DatasetSpec::Circles(c) => Ok(GroupedCloud {
            cloud: generate_circles(c.n_per_class, c.r_inner, c.r_outer, c.noise_std, c.seed)?,
            dropped_rows: 0,
        }),
        DatasetSpec::Table(t) => load_table(&t.path, &t.table_spec()),
    }
}

pub fn train_model(config: &RunConfig, cloud: &LabeledPointCloud) -> Result<SweepOutcome> {
    if cloud.dim() != config.model.layers[0] {
        return Err(Error::config(format!(
            "data has dimension {} but the model input width is {}",
            cloud.dim(),
            config.model.layers[0]
        )));
    }
    Ok(seed_sweep(
        &config.model.layers,
        config.model.activation()?,
        cloud,
        &config.train.train_config(),
        config.train.seeds.iter().copied(),
        config.train.target_accuracy,
    )?)
}

/// Ids kept by sparsifying the input layer (all ids when `min_sq_dist` is 0).
pub fn input_subset(images: &LayerImages, min_sq_dist: f64) -> Vec<usize> {
    if min_sq_dist > 0.0 {
        sparsify(&images.labeled_layer(0), min_sq_dist)
    } else {
        images.ids().to_vec()
    }
}

/// Rips persistence of every layer, each layer sparsified on its own.
/// Returns the diagrams and the number of points used per layer.
pub fn sparse_layer_persistence(
    images: &LayerImages,
    max_dim: usize,
    caps: &[f64],
    min_sq_dist: f64,
) -> Result<(Vec<PersistenceDiagram>, Vec<usize>)> {
    if caps.len() != images.layer_count() {
        return Err(Error::config(format!(
            "{} layer caps for {} layers",
            caps.len(),
            images.layer_count()
        )));
    }
    if min_sq_dist <= 0.0 {
        return Ok((layer_persistence(images, max_dim, caps)?, vec![images.len(); images.layer_count()]));
    }
    let mut diagrams = Vec::new();
    let mut sizes = Vec::new();
    for (i, &cap) in caps.iter().enumerate() {
        let layer = images.labeled_layer(i);
        let kept = layer.select_ids(&sparsify(&layer, min_sq_dist));
        let single = LayerImages::new(vec![kept.points().clone()], kept.ids().to_vec(), kept.labels().to_vec())?;
        sizes.push(kept.len());
        diagrams.extend(layer_persistence(&single, max_dim, &[cap])?);
    }
    Ok((diagrams, sizes))
}

/// Tower and its layer-indexed persistence on the input-sparsified subset.
pub fn mlp_analysis(
    images: &LayerImages,
    schedule: &ScaleSchedule,
    max_dim: usize,
    min_sq_dist: f64,
) -> Result<(LayerImages, LayerwiseTower, PersistenceDiagram)> {
    let subset = images.select_ids(&input_subset(images, min_sq_dist));
    let tower = layerwise_tower(&subset, schedule, max_dim)?;
    let diagram = mlp_persistence(&tower)?;
    Ok((subset, tower, diagram))
}

#[derive(Debug, Clone)]
pub struct TrajectoryAnalysis {
    pub tower: LayerwiseTower,
    pub trajectories: Vec<Trajectory>,
    pub graph: TrajectoryGraph,
    pub dominant: Vec<PathCount>,
}

/// Component trajectories of every point through the layer-wise tower.
pub fn trajectory_analysis(images: &LayerImages, schedule: &ScaleSchedule, top: usize) -> Result<TrajectoryAnalysis> {
    let tower = layerwise_tower(images, schedule, 1)?;
    trajectories_of(tower, images, top)
}

fn trajectories_of(tower: LayerwiseTower, images: &LayerImages, top: usize) -> Result<TrajectoryAnalysis> {
    let trajectories = component_trajectories(&tower);
    let graph = build_graph(&trajectories, images.labels())?;
    let dominant = dominant_trajectories(&trajectories, Some(images.labels()), top);
    Ok(TrajectoryAnalysis { tower, trajectories, graph, dominant })
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: RunConfig,
    pub cloud: LabeledPointCloud,
    pub dropped_rows: usize,
    pub training: SweepOutcome,
    pub images: LayerImages,
    pub layer_diagrams: Vec<PersistenceDiagram>,
    pub layer_sizes: Vec<usize>,
    pub mlp_images: LayerImages,
    pub mlp_tower: LayerwiseTower,
    pub mlp_diagram: PersistenceDiagram,
    pub trajectories: TrajectoryAnalysis,
    pub separability: Option<SeparabilityReport>,
    pub summary: Summary,
}

impl RunOutcome {
    pub fn model(&self) -> &MlpModel {
        &self.training.model
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub points: usize,
    pub dim: usize,
    pub class_counts: [usize; 2],
    pub dropped_rows: usize,
    pub seed: u64,
    pub accuracy: f64,
    pub final_loss: f64,
    pub attempts: Vec<(u64, f64)>,
    pub layers: Vec<LayerSummary>,
    pub mlp_points: usize,
    /// Features per dimension of the layer-indexed diagram.
    pub mlp_features: Vec<usize>,
    pub mlp_essential: Vec<usize>,
    pub components_per_layer: Vec<usize>,
    pub dominant: Vec<formats::PathDoc>,
    pub dominant_coverage: f64,
    pub all_nodes_pure: bool,
    pub min_node_purity: f64,
    pub separability: Option<SeparabilitySummary>,
    /// Per transition between consecutive layers, whether the component
    /// partition of the points changes.
    pub partition_changes: Vec<bool>,
    /// Layers after this one leave the partition unchanged and may be
    /// redundant.
    pub stable_from_layer: Option<usize>,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerSummary {
    pub dim: usize,
    pub points: usize,
    /// Features per dimension, zero-length ones excluded.
    pub features: Vec<usize>,
    /// Largest persistences per dimension, at most five each, finite or `inf`.
    pub top_persistence: Vec<Vec<formats::Bound>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparabilitySummary {
    pub separable: bool,
    pub margin: f64,
    pub nerve_components: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn per_dim(d: &PersistenceDiagram, reported: usize, f: impl Fn(usize) -> usize) -> Vec<usize> {
    let top = d.max_dim().map_or(0, |m| m + 1).max(reported);
    (0..top).map(f).collect()
}

fn layer_summary(points: &mlptopo_core::dataset::PointCloud, used: usize, d: &PersistenceDiagram) -> LayerSummary {
    let features = per_dim(d, 1, |p| d.in_dim(p).count());
    let top_persistence = (0..features.len())
        .map(|p| {
            let mut pers: Vec<f64> = d.in_dim(p).map(|f| f.persistence()).collect();
            pers.sort_by(|a, b| b.total_cmp(a));
            pers.truncate(5);
            pers.into_iter()
                .map(|x| if x.is_infinite() { formats::Bound::Text("inf".into()) } else { formats::Bound::Finite(x) })
                .collect()
        })
        .collect();
    LayerSummary { dim: points.dim(), points: used, features, top_persistence }
}

/// Runs the whole pipeline in memory.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let GroupedCloud { cloud, dropped_rows } = load_dataset(&config.dataset)?;
    let training = train_model(config, &cloud)?;
    let images = forward_all(&training.model, &cloud)?;
    let analysis = &config.analysis;
    let layers = images.layer_count();
    let (layer_diagrams, layer_sizes) =
        sparse_layer_persistence(&images, analysis.max_dim, &analysis.layer_caps(layers), analysis.sparsify_min_sq_dist)?;
    let schedule = ScaleSchedule::new(analysis.schedule.clone())?;
    let (mlp_images, mlp_tower, mlp_diagram) =
        mlp_analysis(&images, &schedule, analysis.max_dim, analysis.sparsify_min_sq_dist)?;
    let trajectories = if mlp_images.len() == images.len() {
        trajectories_of(mlp_tower.clone(), &images, analysis.top_trajectories)?
    } else {
        trajectory_analysis(&images, &schedule, analysis.top_trajectories)?
    };
    let separability = if training.report.accuracy >= 1.0 {
        Some(separability_nerve_check(images.output(), images.labels())?)
    } else {
        None
    };

    let purities = trajectories.graph.nodes.iter().map(node_purity).collect::<mlptopo_core::Result<Vec<f64>>>()?;
    let covered: usize = trajectories.dominant.iter().map(|p| p.count).sum();
    let mut summary = Summary {
        points: cloud.len(),
        dim: cloud.dim(),
        class_counts: cloud.class_counts(),
        dropped_rows,
        seed: training.seed,
        accuracy: training.report.accuracy,
        final_loss: training.report.final_loss,
        attempts: training.attempts.clone(),
        layers: (0..layers).map(|i| layer_summary(images.layer(i), layer_sizes[i], &layer_diagrams[i])).collect(),
        mlp_points: mlp_images.len(),
        mlp_features: per_dim(&mlp_diagram, 2, |p| mlp_diagram.in_dim(p).count()),
        mlp_essential: per_dim(&mlp_diagram, 2, |p| mlp_diagram.essential_count(p)),
        components_per_layer: (0..layers).map(|i| trajectories.tower.components(i).count()).collect(),
        dominant: trajectories.dominant.iter().map(formats::PathDoc::from).collect(),
        dominant_coverage: covered as f64 / images.len() as f64,
        all_nodes_pure: purities.iter().all(|&p| p == 1.0),
        min_node_purity: purities.iter().copied().fold(1.0, f64::min),
        separability: separability.map(|s| SeparabilitySummary {
            separable: s.separable,
            margin: s.margin,
            nerve_components: s.nerve_components,
        }),
        partition_changes: partition_changes(&trajectories.trajectories),
        stable_from_layer: stable_from(&trajectories.trajectories),
        checks: Vec::new(),
    };
    summary.checks = checks(config, &summary, &layer_diagrams, &mlp_diagram);
    Ok(RunOutcome {
        config: config.clone(),
        cloud,
        dropped_rows,
        training,
        images,
        layer_diagrams,
        layer_sizes,
        mlp_images,
        mlp_tower,
        mlp_diagram,
        trajectories,
        separability,
        summary,
    })
}

fn checks(config: &RunConfig, s: &Summary, layers: &[PersistenceDiagram], mlp: &PersistenceDiagram) -> Vec<Check> {
    let mut out = Vec::new();
    let mut check = |name: &str, passed: bool, detail: String| {
        out.push(Check { name: name.into(), passed, detail })
    };
    check(
        "accuracy",
        s.accuracy >= config.train.target_accuracy,
        format!("{} (target {})", s.accuracy, config.train.target_accuracy),
    );
    let expect = &config.expect;
    if let Some((count, threshold)) = expect.input_h1_prominent {
        let found = layers[0].count_persistent(1, threshold);
        check("input_h1_prominent", found == count, format!("{found} H1 features above {threshold}, expected {count}"));
    }
    if let Some(count) = expect.essential_h0 {
        let found = mlp.essential_count(0);
        check("essential_h0", found == count, format!("{found} H0 classes reach the output, expected {count}"));
    }
    if let Some(min) = expect.dominant_coverage {
        check(
            "dominant_coverage",
            s.dominant_coverage >= min,
            format!("top trajectories hold {:.4} of the points (minimum {min})", s.dominant_coverage),
        );
    }
    if let Some(min) = expect.dominant_purity {
        let worst = s.dominant.iter().map(|p| p.purity).fold(1.0, f64::min);
        check(
            "dominant_purity",
            !s.dominant.is_empty() && worst >= min,
            format!("lowest top-trajectory purity {worst:.4} (minimum {min})"),
        );
    }
    out
}

/// Writes every artifact of a run under `dir` and returns the paths.
pub fn write_outcome(outcome: &RunOutcome, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut put = |name: &str, text: String| -> Result<()> {
        let path = dir.join(name);
        formats::write_text(&path, &text)?;
        written.push(path);
        Ok(())
    };
    put("config.toml", outcome.config.to_toml())?;
    put("cloud.json", formats::to_json(&formats::CloudDoc::from(&outcome.cloud)))?;
    put("model.json", formats::to_json(&formats::ModelDoc::from(outcome.model())))?;
    put("images.json", formats::to_json(&formats::ImagesDoc::from(&outcome.images)))?;
    for (i, d) in outcome.layer_diagrams.iter().enumerate() {
        put(&format!("layer{i}.csv"), formats::diagram_to_csv(d))?;
        put(&format!("layer{i}.json"), formats::diagram_to_json(d))?;
    }
    put("mlp_barcode.csv", formats::barcode_to_csv(&outcome.mlp_diagram))?;
    put("mlp_diagram.json", formats::diagram_to_json(&outcome.mlp_diagram))?;
    put("tower.json", formats::to_json(&TowerDoc::new(&outcome.mlp_tower, outcome.mlp_images.ids())))?;
    let t = &outcome.trajectories;
    put(
        "trajectories.json",
        formats::to_json(&TrajectoriesDoc::new(&t.trajectories, outcome.images.ids(), outcome.images.labels(), &t.dominant)),
    )?;
    put("trajectories.dot", formats::graph_to_dot(&t.graph))?;
    put("summary.json", formats::to_json(&outcome.summary))?;
    Ok(written)
}
