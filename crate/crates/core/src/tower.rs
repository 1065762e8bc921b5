//! Cover towers and layer-wise complexes of a network's latent spaces.
//!
//! Points are identified by their position in [`LayerImages`], which is the
//! same in every layer, so complexes of different layers share one vertex set
//! and the maps between them are inclusions.
//!
//! Two constructions are provided:
//!
//! * [`nerve_tower`] pulls an output cover back through the layers. Each
//!   element of the cover at layer `i + 1` is split into the connected
//!   components of the `ε_i`-proximity graph of its points at layer `i`.
//! * [`layerwise_tower`] builds `K_{m+1}` from the output values and, going
//!   backwards, keeps an edge in `K_i` when it is an edge of `K_{i+1}` and its
//!   endpoints are `ε_i`-close in layer `i`. The edge sets are nested by
//!   construction, hence so are the clique complexes, and MLP persistence is
//!   ordinary persistence of the filtration by first layer index.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::complex::{
    clique_complex, connected_components, nerve, normalize_edges, proximity_graph, Components, Cover, CoverMap, Edge,
    Filtration, Simplex, SimplicialComplex,
};
use crate::dataset::{distance, Label, PointCloud};
use crate::mlp::LayerImages;
use crate::persistence::{reduce, PersistenceDiagram};
use crate::union_find::UnionFind;
use crate::{complex, Error, Result};

/// Default cap on simplex dimension (homology reported for H_0 and H_1).
pub const DEFAULT_MAX_DIM: usize = 2;

/// One scale per layer, input layer first.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleSchedule(Vec<f64>);

impl ScaleSchedule {
    pub fn new(eps: Vec<f64>) -> Result<Self> {
        if eps.is_empty() {
            return Err(Error::InvalidArgument("empty scale schedule".into()));
        }
        if let Some(bad) = eps.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
            return Err(Error::InvalidArgument(format!("scale {bad} is not a finite non-negative number")));
        }
        Ok(Self(eps))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn eps(&self, layer: usize) -> f64 {
        self.0[layer]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    fn check_layers(&self, images: &LayerImages) -> Result<()> {
        if self.len() != images.layer_count() {
            return Err(Error::ScheduleLength { expected: images.layer_count(), found: self.len() });
        }
        Ok(())
    }
}

/// Splits sorted 1-D output values into maximal runs whose consecutive gaps
/// are `<= eps_out`. Elements hold point positions and are ordered by their
/// smallest value.
pub fn output_cover(final_layer: &PointCloud, eps_out: f64) -> Result<Cover> {
    if final_layer.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: final_layer.dim() });
    }
    if final_layer.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let values = final_layer.coords();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut elements: Vec<Vec<usize>> = vec![vec![order[0]]];
    for w in order.windows(2) {
        if values[w[1]] - values[w[0]] > eps_out {
            elements.push(Vec::new());
        }
        elements.last_mut().unwrap().push(w[1]);
    }
    Cover::new(elements)
}

/// Pullback of `target` (a cover of the positions of `source`): every target
/// element is split into the connected components of the
/// `cluster_eps`-proximity graph restricted to its points. Source elements are
/// listed target element by target element, each group ordered by smallest
/// position, and mapped to the element they came from.
pub fn pullback_cover(source: &PointCloud, target: &Cover, cluster_eps: f64) -> Result<(Cover, CoverMap)> {
    let all: Vec<usize> = (0..source.len()).collect();
    if !target.covers(&all) {
        return Err(Error::InvalidArgument("target cover does not cover every point".into()));
    }
    if let Some(&bad) = target.covered_ids().last().filter(|&&id| id >= source.len()) {
        return Err(Error::InvalidArgument(format!("cover mentions point {bad} of {}", source.len())));
    }
    let mut elements = Vec::new();
    let mut assignment = Vec::new();
    for (u_index, members) in target.elements().iter().enumerate() {
        let mut edges = Vec::new();
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                if source.distance(a, b) <= cluster_eps {
                    edges.push((a, b));
                }
            }
        }
        for group in connected_components(&edges, members).groups() {
            elements.push(group);
            assignment.push(u_index);
        }
    }
    let map = CoverMap::new(assignment, target.len())?;
    Ok((Cover::new(elements)?, map))
}

/// A cover per layer and the cover maps between consecutive layers.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverTower {
    covers: Vec<Cover>,
    maps: Vec<CoverMap>,
}

impl CoverTower {
    pub fn new(covers: Vec<Cover>, maps: Vec<CoverMap>) -> Result<Self> {
        if covers.is_empty() || maps.len() + 1 != covers.len() {
            return Err(Error::InvalidArgument("a tower of n covers needs n - 1 maps".into()));
        }
        for (i, map) in maps.iter().enumerate() {
            if map.source_len() != covers[i].len() || map.target_len() != covers[i + 1].len() {
                return Err(Error::InvalidArgument(format!("map {i} does not match its covers")));
            }
        }
        Ok(Self { covers, maps })
    }

    pub fn covers(&self) -> &[Cover] {
        &self.covers
    }

    pub fn maps(&self) -> &[CoverMap] {
        &self.maps
    }

    pub fn layer_count(&self) -> usize {
        self.covers.len()
    }

    /// Composite of the maps from layer `from` to layer `to` (`from <= to`).
    pub fn compose(&self, from: usize, to: usize) -> CoverMap {
        self.maps[from..to].iter().fold(CoverMap::identity(self.covers[from].len()), |acc, m| acc.then(m))
    }

    /// Map from layer `from` to layer `to` read off point membership: each
    /// element goes to the lowest element of layer `to` containing all of its
    /// points.
    pub fn direct_map(&self, from: usize, to: usize) -> Result<CoverMap> {
        let target = &self.covers[to];
        let assignment = self.covers[from]
            .elements()
            .iter()
            .map(|e| {
                target
                    .elements()
                    .iter()
                    .position(|t| e.iter().all(|p| t.binary_search(p).is_ok()))
                    .ok_or_else(|| Error::InvalidArgument(format!("an element of layer {from} is split at layer {to}")))
            })
            .collect::<Result<Vec<_>>>()?;
        CoverMap::new(assignment, target.len())
    }
}

/// Result of [`nerve_tower`].
#[derive(Debug, Clone, PartialEq)]
pub struct NerveTower {
    pub tower: CoverTower,
    /// Nerve of each cover.
    pub nerves: Vec<SimplicialComplex>,
}

impl NerveTower {
    /// Vertex map between the nerves of layers `i` and `i + 1`.
    pub fn vertex_map(&self, i: usize) -> &[usize] {
        self.tower.maps[i].assignment()
    }

    /// True when every vertex map sends simplices to simplices.
    pub fn maps_are_simplicial(&self) -> bool {
        (0..self.tower.maps.len()).all(|i| {
            let map = self.vertex_map(i);
            self.nerves[i].iter().all(|s| {
                let image = Simplex::new(dedup_sorted(s.vertices().iter().map(|&v| map[v]).collect()))
                    .expect("non-empty image");
                self.nerves[i + 1].contains(&image)
            })
        })
    }
}

fn dedup_sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

/// Output cover at the last layer from `ε_{m+1}`, then pullback covers layer
/// by layer down to the input with `ε_i` as the clustering scale.
pub fn nerve_tower(images: &LayerImages, schedule: &ScaleSchedule) -> Result<NerveTower> {
    schedule.check_layers(images)?;
    let top = output_cover(images.output(), schedule.eps(images.layer_count() - 1))?;
    nerve_tower_with_cover(images, schedule, top, DEFAULT_MAX_DIM)
}

/// [`nerve_tower`] from an explicit output cover (over point positions).
pub fn nerve_tower_with_cover(
    images: &LayerImages,
    schedule: &ScaleSchedule,
    output: Cover,
    max_dim: usize,
) -> Result<NerveTower> {
    schedule.check_layers(images)?;
    let layers = images.layer_count();
    let mut covers = vec![output];
    let mut maps = Vec::new();
    for i in (0..layers - 1).rev() {
        let (cover, map) = pullback_cover(images.layer(i), covers.last().unwrap(), schedule.eps(i))?;
        covers.push(cover);
        maps.push(map);
    }
    covers.reverse();
    maps.reverse();
    let nerves = covers.iter().map(|c| nerve(c, max_dim)).collect();
    Ok(NerveTower { tower: CoverTower::new(covers, maps)?, nerves })
}

/// The layer-wise clique complexes `K_0 ⊆ … ⊆ K_{m+1}`, stored as nested
/// edge sets over point positions. Complexes are built on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerwiseTower {
    schedule: ScaleSchedule,
    max_dim: usize,
    vertex_count: usize,
    output_cover: Cover,
    edges: Vec<Vec<Edge>>,
}

impl LayerwiseTower {
    pub fn schedule(&self) -> &ScaleSchedule {
        &self.schedule
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn output_cover(&self) -> &Cover {
        &self.output_cover
    }

    pub fn layer_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Sorted edges of `K_i`.
    pub fn edges(&self, layer: usize) -> &[Edge] {
        &self.edges[layer]
    }

    fn vertices(&self) -> Vec<usize> {
        (0..self.vertex_count).collect()
    }

    pub fn complex(&self, layer: usize) -> SimplicialComplex {
        clique_complex(&self.edges[layer], &self.vertices(), self.max_dim)
    }

    pub fn complexes(&self) -> Vec<SimplicialComplex> {
        (0..self.layer_count()).map(|i| self.complex(i)).collect()
    }

    pub fn components(&self, layer: usize) -> Components {
        connected_components(&self.edges[layer], &self.vertices())
    }

    /// Edge sets are nested layer over layer.
    pub fn check_edge_nesting(&self) -> Result<()> {
        for i in 1..self.layer_count() {
            if !self.edges[i - 1].iter().all(|e| self.edges[i].binary_search(e).is_ok()) {
                return Err(Error::NestingViolation { layer: i - 1, next: i });
            }
        }
        Ok(())
    }

    /// Every simplex of `K_{i-1}` is a simplex of `K_i`, checked exhaustively.
    pub fn check_simplex_nesting(&self) -> Result<()> {
        let mut previous = self.complex(0);
        for i in 1..self.layer_count() {
            let current = self.complex(i);
            if !previous.is_subcomplex_of(&current) {
                return Err(Error::NestingViolation { layer: i - 1, next: i });
            }
            previous = current;
        }
        Ok(())
    }

    /// First layer containing the edge, if any.
    pub fn edge_birth(&self, edge: Edge) -> Option<usize> {
        (0..self.layer_count()).find(|&i| self.edges[i].binary_search(&edge).is_ok())
    }

    /// Filtration of `K_{m+1}` where every simplex enters at the first layer
    /// containing it. Vertices enter at layer 0.
    pub fn filtration(&self) -> Result<Filtration> {
        let top = self.layer_count() - 1;
        let complex = self.complex(top);
        Filtration::from_complex(&complex, self.max_dim, |s| {
            let v = s.vertices();
            let mut layer = 0;
            for (i, &a) in v.iter().enumerate() {
                for &b in &v[i + 1..] {
                    layer = layer.max(self.edge_birth((a, b)).expect("edges of a clique lie in the top layer"));
                }
            }
            layer as f64
        })
    }
}

/// Layer-wise tower with the output cover taken as the connected components
/// of the outputs at scale `ε_{m+1}`.
pub fn layerwise_tower(images: &LayerImages, schedule: &ScaleSchedule, max_dim: usize) -> Result<LayerwiseTower> {
    schedule.check_layers(images)?;
    let cover = output_cover(images.output(), schedule.eps(images.layer_count() - 1))?;
    layerwise_tower_with_cover(images, schedule, cover, max_dim)
}

/// Layer-wise tower for an explicit output cover over point positions.
pub fn layerwise_tower_with_cover(
    images: &LayerImages,
    schedule: &ScaleSchedule,
    output_cover: Cover,
    max_dim: usize,
) -> Result<LayerwiseTower> {
    schedule.check_layers(images)?;
    if max_dim == 0 {
        return Err(Error::InvalidArgument("max_dim must be at least 1".into()));
    }
    let n = images.len();
    let all: Vec<usize> = (0..n).collect();
    if !output_cover.covers(&all) {
        return Err(Error::InvalidArgument("output cover does not cover every point".into()));
    }
    let layers = images.layer_count();
    let membership = output_cover.membership();
    let share_element = |a: usize, b: usize| {
        let (ea, eb) = (&membership[&a], &membership[&b]);
        ea.iter().any(|e| eb.binary_search(e).is_ok())
    };
    let top: Vec<Edge> = proximity_graph(images.output(), schedule.eps(layers - 1))
        .into_iter()
        .filter(|&(a, b)| share_element(a, b))
        .collect();
    let mut edges = vec![top];
    for i in (0..layers - 1).rev() {
        let points = images.layer(i);
        let eps = schedule.eps(i);
        let kept: Vec<Edge> =
            edges.last().unwrap().iter().copied().filter(|&(a, b)| points.distance(a, b) <= eps).collect();
        edges.push(kept);
    }
    edges.reverse();
    let tower = LayerwiseTower {
        schedule: schedule.clone(),
        max_dim,
        vertex_count: n,
        output_cover,
        edges: edges.into_iter().map(normalize_edges).collect(),
    };
    tower.check_edge_nesting()?;
    Ok(tower)
}

/// Persistence of the layer-wise tower along the layer index. Births and
/// deaths are layer indices; classes alive at the last layer never die.
pub fn mlp_persistence(tower: &LayerwiseTower) -> Result<PersistenceDiagram> {
    tower.check_edge_nesting()?;
    reduce(&tower.filtration()?)
}

/// Vietoris–Rips persistence of each layer separately, up to
/// `max_eps_per_layer[i]` (`f64::INFINITY` for the full filtration).
///
/// The dimension cap of layer `i` is `min(max_dim, n_i)`: a layer of width 1
/// only reports components.
pub fn layer_persistence(
    images: &LayerImages,
    max_dim: usize,
    max_eps_per_layer: &[f64],
) -> Result<Vec<PersistenceDiagram>> {
    if max_eps_per_layer.len() != images.layer_count() {
        return Err(Error::ScheduleLength { expected: images.layer_count(), found: max_eps_per_layer.len() });
    }
    images
        .layers()
        .iter()
        .zip(max_eps_per_layer)
        .map(|(points, &max_eps)| {
            let cap = max_dim.min(points.dim()).max(1);
            reduce(&complex::vr_filtration(points, cap, max_eps)?)
        })
        .collect()
}

/// Outcome of [`separability_nerve_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparabilityReport {
    pub separable: bool,
    /// Gap between the two classes along the output (negative when they
    /// overlap; the larger of the two orientations).
    pub margin: f64,
    /// Class whose outputs lie below the threshold, when separable.
    pub lower_class: Option<Label>,
    /// Components of the nerve of the ball cover (0 when not separable).
    pub nerve_components: usize,
    /// Whether some nerve edge joins the two classes.
    pub mixed_edges: bool,
}

/// Checks that the classes are separated by a threshold on the 1-D outputs
/// and, if so, that the nerve of a ball cover splits into one component per
/// class.
///
/// Each point gets the open ball reaching up to the midpoint `t` between the
/// classes (radius `|x - t|`). Balls of one class all contain points just on
/// their side of `t`, so they pairwise intersect, and no ball crosses `t`.
pub fn separability_nerve_check(final_layer: &PointCloud, labels: &[Label]) -> Result<SeparabilityReport> {
    if final_layer.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: final_layer.dim() });
    }
    if labels.len() != final_layer.len() {
        return Err(Error::DimensionMismatch { expected: final_layer.len(), found: labels.len() });
    }
    let values = final_layer.coords();
    let range = |class: Label| {
        values
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == class)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (&v, _)| (lo.min(v), hi.max(v)))
    };
    let (r0, r1) = (range(0), range(1));
    let not_separable =
        |margin: f64| SeparabilityReport { separable: false, margin, lower_class: None, nerve_components: 0, mixed_edges: false };
    if !r0.0.is_finite() || !r1.0.is_finite() {
        return Ok(not_separable(f64::NEG_INFINITY));
    }
    let gap_0_low = r1.0 - r0.1;
    let gap_1_low = r0.0 - r1.1;
    let (margin, lower) = if gap_0_low >= gap_1_low { (gap_0_low, 0) } else { (gap_1_low, 1) };
    if margin <= 0.0 {
        return Ok(not_separable(margin));
    }
    let threshold = if lower == 0 { r0.1 + margin / 2.0 } else { r1.1 + margin / 2.0 };
    let balls: Vec<(f64, f64)> = values
        .iter()
        .map(|&x| {
            // the inner end is the threshold itself; `x ± r` can round past it
            if x < threshold {
                (x - (threshold - x), threshold)
            } else {
                (threshold, x + (x - threshold))
            }
        })
        .collect();
    let n = values.len();
    let mut uf = UnionFind::new(n);
    let mut mixed_edges = false;
    for a in 0..n {
        for b in a + 1..n {
            // open intervals meet iff the larger left end is below the smaller right end
            if balls[a].0.max(balls[b].0) < balls[a].1.min(balls[b].1) {
                uf.union(a, b);
                mixed_edges |= labels[a] != labels[b];
            }
        }
    }
    let mut roots: Vec<usize> = (0..n).map(|i| uf.find(i)).collect();
    roots.sort_unstable();
    roots.dedup();
    Ok(SeparabilityReport {
        separable: true,
        margin,
        lower_class: Some(lower),
        nerve_components: roots.len(),
        mixed_edges,
    })
}

/// Largest pairwise distance in each layer.
pub fn layer_diameters(images: &LayerImages) -> Vec<f64> {
    images.layers().iter().map(PointCloud::diameter).collect()
}

/// Distance between two positions of one layer.
pub fn layer_distance(images: &LayerImages, layer: usize, a: usize, b: usize) -> f64 {
    distance(images.layer(layer).point(a), images.layer(layer).point(b))
}
