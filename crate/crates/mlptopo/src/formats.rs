//! Artifact file formats.
//!
//! JSON documents are written with shortest round-trip float formatting and
//! parsed with exact float parsing, so every value re-imports bit for bit.
//! Infinite deaths are written as the string `"inf"` in both CSV and JSON.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use mlptopo_core::complex::{Cover, Filtration};
use mlptopo_core::dataset::{Label, LabeledPointCloud, PointCloud};
use mlptopo_core::mlp::{Activation, LayerImages, MlpModel};
use mlptopo_core::persistence::{Feature, PersistenceDiagram};
use mlptopo_core::tower::LayerwiseTower;
use mlptopo_core::trajectory::{node_purity, PathCount, Trajectory, TrajectoryGraph};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| Error::Write { path: dir.to_path_buf(), source })?;
    }
    fs::write(path, text).map_err(|source| Error::Write { path: path.to_path_buf(), source })
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::artifact(path, e))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifact documents serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &to_json(value))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::artifact(path, e))
}

/// `{dim, points, labels, ids}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudDoc {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
    pub ids: Vec<usize>,
}

impl From<&LabeledPointCloud> for CloudDoc {
    fn from(c: &LabeledPointCloud) -> Self {
        Self {
            dim: c.dim(),
            points: c.points().iter().map(<[f64]>::to_vec).collect(),
            labels: c.labels().to_vec(),
            ids: c.ids().to_vec(),
        }
    }
}

impl CloudDoc {
    pub fn into_cloud(self) -> Result<LabeledPointCloud> {
        if let Some(row) = self.points.iter().find(|p| p.len() != self.dim) {
            return Err(Error::config(format!("point of dimension {} in a cloud of dimension {}", row.len(), self.dim)));
        }
        let points = PointCloud::new(self.dim, self.points.concat())?;
        Ok(LabeledPointCloud::with_ids(points, self.labels, self.ids)?)
    }
}

pub fn save_cloud(path: &Path, cloud: &LabeledPointCloud) -> Result<()> {
    write_json(path, &CloudDoc::from(cloud))
}

pub fn load_cloud(path: &Path) -> Result<LabeledPointCloud> {
    read_json::<CloudDoc>(path)?.into_cloud().map_err(|e| Error::artifact(path, e))
}

/// `{layer_dims, activation, weights, biases}`; weights are row-major
/// (`outputs × inputs`) per layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDoc {
    pub layer_dims: Vec<usize>,
    pub activation: String,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl From<&MlpModel> for ModelDoc {
    fn from(m: &MlpModel) -> Self {
        Self {
            layer_dims: m.layer_dims().to_vec(),
            activation: m.activation().name().to_string(),
            weights: m.layers().iter().map(|l| l.weights.clone()).collect(),
            biases: m.layers().iter().map(|l| l.biases.clone()).collect(),
        }
    }
}

impl ModelDoc {
    pub fn into_model(self) -> Result<MlpModel> {
        let activation: Activation = self.activation.parse().map_err(Error::config)?;
        Ok(MlpModel::from_parts(self.layer_dims, activation, self.weights, self.biases)?)
    }
}

pub fn save_model(path: &Path, model: &MlpModel) -> Result<()> {
    write_json(path, &ModelDoc::from(model))
}

pub fn load_model(path: &Path) -> Result<MlpModel> {
    read_json::<ModelDoc>(path)?.into_model().map_err(|e| Error::artifact(path, e))
}

/// Points of every layer with the shared ids and labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImagesDoc {
    pub ids: Vec<usize>,
    pub labels: Vec<Label>,
    pub layers: Vec<LayerDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerDoc {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
}

impl From<&LayerImages> for ImagesDoc {
    fn from(im: &LayerImages) -> Self {
        Self {
            ids: im.ids().to_vec(),
            labels: im.labels().to_vec(),
            layers: im
                .layers()
                .iter()
                .map(|l| LayerDoc { dim: l.dim(), points: l.iter().map(<[f64]>::to_vec).collect() })
                .collect(),
        }
    }
}

impl ImagesDoc {
    pub fn into_images(self) -> Result<LayerImages> {
        let layers = self
            .layers
            .into_iter()
            .map(|l| {
                if l.points.iter().any(|p| p.len() != l.dim) {
                    return Err(Error::config("point dimension differs from its layer"));
                }
                Ok(PointCloud::new(l.dim, l.points.concat())?)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LayerImages::new(layers, self.ids, self.labels)?)
    }
}

pub fn save_images(path: &Path, images: &LayerImages) -> Result<()> {
    write_json(path, &ImagesDoc::from(images))
}

pub fn load_images(path: &Path) -> Result<LayerImages> {
    read_json::<ImagesDoc>(path)?.into_images().map_err(|e| Error::artifact(path, e))
}

/// A real number or `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Finite(f64),
    Text(String),
}

fn bound(x: f64) -> Bound {
    if x == f64::INFINITY {
        Bound::Text("inf".into())
    } else {
        Bound::Finite(x)
    }
}

fn unbound(b: &Bound) -> std::result::Result<f64, String> {
    match b {
        Bound::Finite(x) => Ok(*x),
        Bound::Text(s) => parse_value(s),
    }
}

/// Parses a number, accepting `inf` for `+∞`.
pub fn parse_value(s: &str) -> std::result::Result<f64, String> {
    match s.trim() {
        "inf" | "+inf" | "Infinity" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|_| format!("not a number: {t:?}")),
    }
}

fn format_value(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDoc {
    pub dim: usize,
    pub birth: Bound,
    pub death: Bound,
}

/// `{features, zero_length}`; `zero_length[p]` counts the omitted features
/// of dimension `p` with equal birth and death.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramDoc {
    pub features: Vec<FeatureDoc>,
    #[serde(default)]
    pub zero_length: Vec<usize>,
}

impl From<&PersistenceDiagram> for DiagramDoc {
    fn from(d: &PersistenceDiagram) -> Self {
        let top = d.max_dim().map_or(0, |m| m + 1);
        let mut zero_length: Vec<usize> = (0..top.max(4)).map(|p| d.zero_length_count(p)).collect();
        while zero_length.last() == Some(&0) {
            zero_length.pop();
        }
        Self {
            features: d
                .features()
                .iter()
                .map(|f| FeatureDoc { dim: f.dim, birth: bound(f.birth), death: bound(f.death) })
                .collect(),
            zero_length,
        }
    }
}

impl DiagramDoc {
    pub fn into_diagram(self) -> std::result::Result<PersistenceDiagram, String> {
        let mut features = self
            .features
            .iter()
            .map(|f| Ok(Feature::new(f.dim, unbound(&f.birth)?, unbound(&f.death)?)))
            .collect::<std::result::Result<Vec<_>, String>>()?;
        check_features(&features)?;
        for (dim, &count) in self.zero_length.iter().enumerate() {
            features.extend(std::iter::repeat_n(Feature::new(dim, 0.0, 0.0), count));
        }
        Ok(PersistenceDiagram::new(features))
    }
}

fn check_features(features: &[Feature]) -> std::result::Result<(), String> {
    match features.iter().find(|f| f.birth.is_nan() || f.death.is_nan() || f.birth > f.death) {
        Some(f) => Err(format!("invalid feature ({}, {}, {})", f.dim, f.birth, f.death)),
        None => Ok(()),
    }
}

pub fn diagram_to_json(d: &PersistenceDiagram) -> String {
    to_json(&DiagramDoc::from(d))
}

pub fn diagram_from_json(text: &str) -> std::result::Result<PersistenceDiagram, String> {
    serde_json::from_str::<DiagramDoc>(text).map_err(|e| e.to_string())?.into_diagram()
}

/// CSV rows `dim,birth,death` sorted by `(dim, birth, death)`. Zero-length
/// features are not listed.
pub fn diagram_to_csv(d: &PersistenceDiagram) -> String {
    let mut out = String::from("dim,birth,death\n");
    for f in d.features() {
        let _ = writeln!(out, "{},{},{}", f.dim, format_value(f.birth), format_value(f.death));
    }
    out
}

pub fn diagram_from_csv(text: &str) -> std::result::Result<PersistenceDiagram, String> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| e.to_string())?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name).ok_or(format!("missing column {name:?}"));
    let (cd, cb, ce) = (column("dim")?, column("birth")?, column("death")?);
    let mut features = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let field = |i: usize| record.get(i).ok_or(format!("row {}: missing field", row + 1));
        let dim = field(cd)?.parse::<usize>().map_err(|_| format!("row {}: bad dimension", row + 1))?;
        features.push(Feature::new(dim, parse_value(field(cb)?)?, parse_value(field(ce)?)?));
    }
    check_features(&features)?;
    Ok(PersistenceDiagram::new(features))
}

/// Reads a diagram from `.json` or (otherwise) CSV.
pub fn load_diagram(path: &Path) -> Result<PersistenceDiagram> {
    let text = read_text(path)?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        diagram_from_json(&text)
    } else {
        diagram_from_csv(&text)
    };
    parsed.map_err(|e| Error::artifact(path, e))
}

pub fn save_diagram(path: &Path, d: &PersistenceDiagram) -> Result<()> {
    if path.extension().is_some_and(|e| e == "json") {
        write_text(path, &diagram_to_json(d))
    } else {
        write_text(path, &diagram_to_csv(d))
    }
}

/// Layer-indexed barcode CSV `dim,birth_layer,death_layer`.
pub fn barcode_to_csv(d: &PersistenceDiagram) -> String {
    let mut out = String::from("dim,birth_layer,death_layer\n");
    let layer = |x: f64| if x == f64::INFINITY { "inf".to_string() } else { format!("{}", x as usize) };
    for f in d.features() {
        let _ = writeln!(out, "{},{},{}", f.dim, layer(f.birth), layer(f.death));
    }
    out
}

pub fn barcode_from_csv(text: &str) -> std::result::Result<PersistenceDiagram, String> {
    let renamed = text.replacen("dim,birth_layer,death_layer", "dim,birth,death", 1);
    diagram_from_csv(&renamed)
}

/// Filtration entries in filtration order, vertices mapped through `ids`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiltrationEntryDoc {
    pub vertices: Vec<usize>,
    pub value: Bound,
}

pub fn filtration_doc(f: &Filtration, ids: Option<&[usize]>) -> Vec<FiltrationEntryDoc> {
    f.entries()
        .iter()
        .map(|(s, v)| FiltrationEntryDoc {
            vertices: s.vertices().iter().map(|&p| ids.map_or(p, |ids| ids[p])).collect(),
            value: bound(*v),
        })
        .collect()
}

/// `{schedule, max_dim, ids, edges, output_cover}`; edges and cover elements
/// are given by point id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowerDoc {
    pub schedule: Vec<f64>,
    pub max_dim: usize,
    pub ids: Vec<usize>,
    pub edges: Vec<Vec<[usize; 2]>>,
    pub output_cover: Vec<Vec<usize>>,
}

impl TowerDoc {
    pub fn new(tower: &LayerwiseTower, ids: &[usize]) -> Self {
        Self {
            schedule: tower.schedule().as_slice().to_vec(),
            max_dim: tower.max_dim(),
            ids: ids.to_vec(),
            edges: (0..tower.layer_count())
                .map(|i| tower.edges(i).iter().map(|&(a, b)| [ids[a], ids[b]]).collect())
                .collect(),
            output_cover: cover_ids(tower.output_cover(), ids),
        }
    }
}

pub fn cover_ids(cover: &Cover, ids: &[usize]) -> Vec<Vec<usize>> {
    cover.elements().iter().map(|e| e.iter().map(|&p| ids[p]).collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointTrajectoryDoc {
    pub id: usize,
    pub label: Label,
    pub path: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathDoc {
    pub path: Vec<usize>,
    pub count: usize,
    pub class_counts: [usize; 2],
    pub purity: f64,
}

impl From<&PathCount> for PathDoc {
    fn from(p: &PathCount) -> Self {
        Self { path: p.path.path().to_vec(), count: p.count, class_counts: p.class_counts, purity: p.purity() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoriesDoc {
    pub layer_count: usize,
    pub points: Vec<PointTrajectoryDoc>,
    pub dominant: Vec<PathDoc>,
}

impl TrajectoriesDoc {
    pub fn new(trajectories: &[Trajectory], ids: &[usize], labels: &[Label], dominant: &[PathCount]) -> Self {
        Self {
            layer_count: trajectories.first().map_or(0, Trajectory::len),
            points: trajectories
                .iter()
                .zip(ids.iter().zip(labels))
                .map(|(t, (&id, &label))| PointTrajectoryDoc { id, label, path: t.path().to_vec() })
                .collect(),
            dominant: dominant.iter().map(PathDoc::from).collect(),
        }
    }
}

/// Layered DOT graph; node label `L{layer}:C{id} n={count} p={purity}` and
/// attribute `class` holding the predominant class.
pub fn graph_to_dot(graph: &TrajectoryGraph) -> String {
    let mut out = String::from("digraph trajectories {\n  rankdir=LR;\n  node [shape=box];\n");
    let name = |layer: usize, element: usize| format!("\"L{layer}:C{element}\"");
    for n in &graph.nodes {
        let purity = node_purity(n).expect("graph nodes hold points");
        let _ = writeln!(
            out,
            "  {} [label=\"L{}:C{} n={} p={:.3}\", class={}];",
            name(n.layer, n.element),
            n.layer,
            n.element,
            n.count,
            purity,
            n.predominant_class()
        );
    }
    for e in &graph.edges {
        let _ = writeln!(
            out,
            "  {} -> {} [label=\"{}\", weight={}];",
            name(e.layer, e.from),
            name(e.layer + 1, e.to),
            e.count,
            e.count
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use mlptopo_core::dataset::generate_circles;
    use mlptopo_core::mlp::init_model;

    #[test]
    fn inf_round_trips_in_both_formats() {
        let d = PersistenceDiagram::new(vec![
            Feature::new(0, 0.0, f64::INFINITY),
            Feature::new(0, 0.0, 0.1 + 0.2),
            Feature::new(1, 0.3, 0.3),
        ]);
        let csv = diagram_to_csv(&d);
        assert_eq!(csv, "dim,birth,death\n0,0,0.30000000000000004\n0,0,inf\n");
        assert_eq!(diagram_from_csv(&csv).unwrap().features(), d.features());
        assert_eq!(diagram_from_json(&diagram_to_json(&d)).unwrap(), d);
        assert!(diagram_to_json(&d).contains("\"inf\""));
    }

    #[test]
    fn csv_rejects_bad_rows() {
        assert!(diagram_from_csv("dim,birth,death\n0,x,1\n").is_err());
        assert!(diagram_from_csv("dim,birth,death\n0,2,1\n").is_err());
        assert!(diagram_from_csv("dim,birth\n0,1\n").is_err());
    }

    #[test]
    fn barcode_uses_layer_indices() {
        let d = PersistenceDiagram::new(vec![Feature::new(0, 0.0, 2.0), Feature::new(1, 1.0, f64::INFINITY)]);
        let csv = barcode_to_csv(&d);
        assert_eq!(csv, "dim,birth_layer,death_layer\n0,0,2\n1,1,inf\n");
        assert_eq!(barcode_from_csv(&csv).unwrap(), d);
    }

    #[test]
    fn model_and_cloud_documents_round_trip() {
        let model = init_model(&[2, 3, 1], Activation::Tanh, 9).unwrap();
        let text = to_json(&ModelDoc::from(&model));
        let back = serde_json::from_str::<ModelDoc>(&text).unwrap().into_model().unwrap();
        assert_eq!(back, model);
        let cloud = generate_circles(5, 0.5, 1.0, 0.05, 2).unwrap().select(&[7, 1, 3]);
        let text = to_json(&CloudDoc::from(&cloud));
        assert_eq!(serde_json::from_str::<CloudDoc>(&text).unwrap().into_cloud().unwrap(), cloud);
    }

    #[test]
    fn bad_model_document_is_rejected() {
        let doc = ModelDoc { layer_dims: vec![2, 1], activation: "swish".into(), weights: vec![], biases: vec![] };
        assert!(doc.into_model().is_err());
    }
}
