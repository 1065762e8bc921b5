//! Trajectories of points through a tower and the trajectory graph.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::complex::Components;
use crate::dataset::Label;
use crate::tower::{CoverTower, LayerwiseTower};
use crate::{Error, Result};

/// Element (cover element or component) ids visited by one point, one per layer.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Trajectory(pub Vec<usize>);

impl Trajectory {
    pub fn path(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Something a point can be followed through: an element at layer 0 and a
/// map from each layer's elements to the next layer's.
pub trait TrajectorySource {
    fn layer_count(&self) -> usize;

    /// Element of layer 0 holding `point`.
    fn start(&self, point: usize) -> Result<usize>;

    /// Image of `element` of `layer` in `layer + 1`.
    fn step(&self, layer: usize, element: usize) -> usize;
}

impl TrajectorySource for CoverTower {
    fn layer_count(&self) -> usize {
        self.covers().len()
    }

    /// Lowest element containing the point when covers overlap.
    fn start(&self, point: usize) -> Result<usize> {
        self.covers()[0].first_element_containing(point).ok_or(Error::UncoveredPoint(point))
    }

    fn step(&self, layer: usize, element: usize) -> usize {
        self.maps()[layer].apply(element)
    }
}

/// Connected components of every `K_i` with the containment maps between
/// them; a component of `K_i` lies inside one component of `K_{i+1}` because
/// the edge sets are nested.
#[derive(Debug, Clone)]
pub struct ComponentTower {
    components: Vec<Components>,
    steps: Vec<Vec<usize>>,
}

impl ComponentTower {
    pub fn new(tower: &LayerwiseTower) -> Self {
        let components: Vec<Components> = (0..tower.layer_count()).map(|i| tower.components(i)).collect();
        let steps = components
            .windows(2)
            .map(|w| {
                w[0].groups()
                    .iter()
                    .map(|g| w[1].component_of(g[0]).expect("layers share their vertices"))
                    .collect()
            })
            .collect();
        Self { components, steps }
    }

    pub fn components(&self, layer: usize) -> &Components {
        &self.components[layer]
    }
}

impl TrajectorySource for ComponentTower {
    fn layer_count(&self) -> usize {
        self.components.len()
    }

    fn start(&self, point: usize) -> Result<usize> {
        self.components[0].component_of(point).ok_or(Error::UncoveredPoint(point))
    }

    fn step(&self, layer: usize, element: usize) -> usize {
        self.steps[layer][element]
    }
}

/// Trajectory of every point position `0..point_count`.
pub fn point_trajectories(source: &impl TrajectorySource, point_count: usize) -> Result<Vec<Trajectory>> {
    let layers = source.layer_count();
    (0..point_count)
        .map(|p| {
            let mut path = Vec::with_capacity(layers);
            path.push(source.start(p)?);
            for layer in 0..layers.saturating_sub(1) {
                path.push(source.step(layer, *path.last().unwrap()));
            }
            Ok(Trajectory(path))
        })
        .collect()
}

/// Trajectories through the components of a layer-wise tower.
pub fn component_trajectories(tower: &LayerwiseTower) -> Vec<Trajectory> {
    point_trajectories(&ComponentTower::new(tower), tower.vertex_count())
        .expect("every vertex has a component")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphNode {
    pub layer: usize,
    pub element: usize,
    pub count: usize,
    pub class_counts: [usize; 2],
}

impl GraphNode {
    /// Majority class; ties go to class 0.
    pub fn predominant_class(&self) -> Label {
        if self.class_counts[1] > self.class_counts[0] {
            1
        } else {
            0
        }
    }
}

/// Share of the node's points in its predominant class.
pub fn node_purity(node: &GraphNode) -> Result<f64> {
    if node.count == 0 {
        return Err(Error::EmptyNode);
    }
    Ok(node.class_counts[0].max(node.class_counts[1]) as f64 / node.count as f64)
}

/// Edge from element `from` of `layer` to element `to` of `layer + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphEdge {
    pub layer: usize,
    pub from: usize,
    pub to: usize,
    pub count: usize,
}

/// Layered graph of trajectories. Nodes are sorted by `(layer, element)`,
/// edges by `(layer, from, to)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectoryGraph {
    pub layer_count: usize,
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

impl TrajectoryGraph {
    pub fn nodes_in_layer(&self, layer: usize) -> impl Iterator<Item = &GraphNode> + '_ {
        self.nodes.iter().filter(move |n| n.layer == layer)
    }

    pub fn node(&self, layer: usize, element: usize) -> Option<&GraphNode> {
        self.nodes
            .binary_search_by(|n| (n.layer, n.element).cmp(&(layer, element)))
            .ok()
            .map(|i| &self.nodes[i])
    }

    /// Total flow leaving a node.
    pub fn out_flow(&self, layer: usize, element: usize) -> usize {
        self.edges.iter().filter(|e| e.layer == layer && e.from == element).map(|e| e.count).sum()
    }

    pub fn in_flow(&self, layer: usize, element: usize) -> usize {
        self.edges.iter().filter(|e| e.layer + 1 == layer && e.to == element).map(|e| e.count).sum()
    }
}

pub fn build_graph(trajectories: &[Trajectory], labels: &[Label]) -> Result<TrajectoryGraph> {
    if trajectories.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: trajectories.len(), found: labels.len() });
    }
    let layer_count = trajectories.first().map_or(0, Trajectory::len);
    if let Some(t) = trajectories.iter().find(|t| t.len() != layer_count) {
        return Err(Error::DimensionMismatch { expected: layer_count, found: t.len() });
    }
    let mut nodes: BTreeMap<(usize, usize), [usize; 2]> = BTreeMap::new();
    let mut edges: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
    for (t, &label) in trajectories.iter().zip(labels) {
        for (layer, &element) in t.0.iter().enumerate() {
            nodes.entry((layer, element)).or_insert([0, 0])[label as usize] += 1;
        }
        for (layer, w) in t.0.windows(2).enumerate() {
            *edges.entry((layer, w[0], w[1])).or_insert(0) += 1;
        }
    }
    Ok(TrajectoryGraph {
        layer_count,
        nodes: nodes
            .into_iter()
            .map(|((layer, element), class_counts)| GraphNode {
                layer,
                element,
                count: class_counts[0] + class_counts[1],
                class_counts,
            })
            .collect(),
        edges: edges.into_iter().map(|((layer, from, to), count)| GraphEdge { layer, from, to, count }).collect(),
    })
}

/// A distinct path with the number and classes of points following it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathCount {
    pub path: Trajectory,
    pub count: usize,
    pub class_counts: [usize; 2],
}

impl PathCount {
    pub fn purity(&self) -> f64 {
        self.class_counts[0].max(self.class_counts[1]) as f64 / self.count as f64
    }
}

/// The `k` most followed paths, by decreasing count then lexicographic path.
/// Without labels every point counts as class 0.
pub fn dominant_trajectories(trajectories: &[Trajectory], labels: Option<&[Label]>, k: usize) -> Vec<PathCount> {
    let mut counts: BTreeMap<&Trajectory, [usize; 2]> = BTreeMap::new();
    for (i, t) in trajectories.iter().enumerate() {
        let label = labels.map_or(0, |l| l[i] as usize);
        counts.entry(t).or_insert([0, 0])[label] += 1;
    }
    let mut paths: Vec<PathCount> = counts
        .into_iter()
        .map(|(path, class_counts)| PathCount {
            path: path.clone(),
            count: class_counts[0] + class_counts[1],
            class_counts,
        })
        .collect();
    paths.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.path.cmp(&b.path)));
    paths.truncate(k);
    paths
}

/// For each transition `i → i + 1`, whether the partition of the points into
/// elements changes. The next partition is always a coarsening, so it is
/// unchanged exactly when both layers have the same number of occupied
/// elements.
pub fn partition_changes(trajectories: &[Trajectory]) -> Vec<bool> {
    let layers = trajectories.first().map_or(0, Trajectory::len);
    let occupied = |layer: usize| {
        let mut ids: Vec<usize> = trajectories.iter().map(|t| t.0[layer]).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    };
    let counts: Vec<usize> = (0..layers).map(occupied).collect();
    counts.windows(2).map(|w| w[0] != w[1]).collect()
}

/// First layer after which the partition never changes again, when that
/// leaves at least one layer redundant.
pub fn stable_from(trajectories: &[Trajectory]) -> Option<usize> {
    let changes = partition_changes(trajectories);
    let last_change = changes.iter().rposition(|&c| c).map_or(0, |i| i + 1);
    (last_change < changes.len()).then_some(last_change)
}

/// Elements per layer, for sizing node tables.
pub fn elements_per_layer(trajectories: &[Trajectory]) -> Vec<usize> {
    let layers = trajectories.first().map_or(0, Trajectory::len);
    let mut out = vec![0; layers];
    for t in trajectories {
        for (layer, &e) in t.0.iter().enumerate() {
            out[layer] = out[layer].max(e + 1);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(path: &[usize]) -> Trajectory {
        Trajectory(path.to_vec())
    }

    #[test]
    fn graph_counts_and_purity() {
        let ts = [t(&[0, 0]), t(&[0, 0]), t(&[1, 0]), t(&[2, 1])];
        let g = build_graph(&ts, &[0, 0, 1, 1]).unwrap();
        assert_eq!(g.nodes.len(), 5);
        let merged = g.node(1, 0).unwrap();
        assert_eq!((merged.count, merged.class_counts), (3, [2, 1]));
        assert!((node_purity(merged).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(g.out_flow(0, 0), 2);
        assert_eq!(g.in_flow(1, 0), 3);
        let single = build_graph(&[t(&[3, 1, 0])], &[1]).unwrap();
        assert_eq!((single.nodes.len(), single.edges.len()), (3, 2));
    }

    #[test]
    fn purity_values() {
        let pure = GraphNode { layer: 0, element: 0, count: 4, class_counts: [4, 0] };
        assert_eq!(node_purity(&pure).unwrap(), 1.0);
        let mixed = GraphNode { layer: 0, element: 0, count: 4, class_counts: [1, 3] };
        assert_eq!(node_purity(&mixed).unwrap(), 0.75);
        assert_eq!(mixed.predominant_class(), 1);
        let empty = GraphNode { layer: 0, element: 0, count: 0, class_counts: [0, 0] };
        assert_eq!(node_purity(&empty), Err(Error::EmptyNode));
    }

    #[test]
    fn dominant_paths_sorted_by_count_then_path() {
        let ts = [t(&[1, 1]), t(&[0, 0]), t(&[1, 1]), t(&[0, 0]), t(&[2, 0])];
        let top = dominant_trajectories(&ts, None, 2);
        assert_eq!(top[0].path, t(&[0, 0]));
        assert_eq!(top[1].path, t(&[1, 1]));
        assert_eq!(dominant_trajectories(&ts, None, 10).len(), 3);
        let same = [t(&[0]), t(&[0])];
        assert_eq!(dominant_trajectories(&same, None, 1)[0].count, 2);
    }

    #[test]
    fn redundancy_detection() {
        let ts = [t(&[0, 0, 0, 0]), t(&[1, 0, 0, 0]), t(&[2, 1, 1, 1])];
        assert_eq!(partition_changes(&ts), alloc::vec![true, false, false]);
        assert_eq!(stable_from(&ts), Some(1));
        let changing = [t(&[0, 0]), t(&[1, 0])];
        assert_eq!(stable_from(&changing), None);
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        assert!(build_graph(&[t(&[0, 1]), t(&[0])], &[0, 0]).is_err());
        assert!(build_graph(&[t(&[0])], &[]).is_err());
    }
}
