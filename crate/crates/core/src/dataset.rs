//! Labelled point clouds: synthetic generation, grouping of raw class labels,
//! standardisation and greedy sparsification.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::{Error, Result};

/// Binary class label.
pub type Label = u8;

/// A finite set of points in `R^dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("point dimension must be positive".into()));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidArgument(format!(
                "{} coordinates do not form points of dimension {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coordinate".into()));
        }
        Ok(Self { dim, coords })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).ok_or(Error::EmptyCloud)?;
        let mut coords = Vec::with_capacity(dim * rows.len());
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            coords.extend_from_slice(row);
        }
        Self::new(dim, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> core::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Rows at the given positions, in that order.
    pub fn select(&self, positions: &[usize]) -> Self {
        let mut coords = Vec::with_capacity(positions.len() * self.dim);
        for &p in positions {
            coords.extend_from_slice(self.point(p));
        }
        Self { dim: self.dim, coords }
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        distance(self.point(a), self.point(b))
    }

    /// Largest pairwise distance (0 for fewer than two points).
    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut best = 0.0f64;
        for a in 0..n {
            for b in a + 1..n {
                best = best.max(self.distance(a, b));
            }
        }
        best
    }
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(squared_distance(a, b))
}

/// Points with binary labels and stable integer identifiers.
///
/// Freshly built clouds carry ids `0..N`; subsets keep the ids of the points
/// they were taken from.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPointCloud {
    points: PointCloud,
    labels: Vec<Label>,
    ids: Vec<usize>,
}

impl LabeledPointCloud {
    pub fn new(points: PointCloud, labels: Vec<Label>) -> Result<Self> {
        let ids = (0..labels.len()).collect();
        Self::with_ids(points, labels, ids)
    }

    pub fn with_ids(points: PointCloud, labels: Vec<Label>, ids: Vec<usize>) -> Result<Self> {
        if points.len() != labels.len() || labels.len() != ids.len() {
            return Err(Error::InvalidArgument(format!(
                "{} points, {} labels and {} ids",
                points.len(),
                labels.len(),
                ids.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidArgument(format!("label {bad} is not binary")));
        }
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("duplicate point ids".into()));
        }
        Ok(Self { points, labels, ids })
    }

    pub fn points(&self) -> &PointCloud {
        &self.points
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Position of the point with identifier `id`.
    pub fn position_of(&self, id: usize) -> Option<usize> {
        self.ids.iter().position(|&i| i == id)
    }

    /// Sub-cloud made of the points at `positions`, keeping their ids.
    pub fn select(&self, positions: &[usize]) -> Self {
        Self {
            points: self.points.select(positions),
            labels: positions.iter().map(|&p| self.labels[p]).collect(),
            ids: positions.iter().map(|&p| self.ids[p]).collect(),
        }
    }

    /// Sub-cloud of the points whose id is in `ids`, in cloud order.
    pub fn select_ids(&self, ids: &[usize]) -> Self {
        let mut wanted: Vec<usize> = ids.to_vec();
        wanted.sort_unstable();
        let positions: Vec<usize> = (0..self.len())
            .filter(|&p| wanted.binary_search(&self.ids[p]).is_ok())
            .collect();
        self.select(&positions)
    }

    /// Standardises every coordinate to zero mean and unit (population)
    /// variance. Constant coordinates become 0.
    pub fn standardize(&mut self) {
        let n = self.len();
        if n == 0 {
            return;
        }
        let dim = self.dim();
        for c in 0..dim {
            let mean = self.points.coords.iter().skip(c).step_by(dim).sum::<f64>() / n as f64;
            let var = self
                .points
                .coords
                .iter()
                .skip(c)
                .step_by(dim)
                .map(|x| (x - mean) * (x - mean))
                .sum::<f64>()
                / n as f64;
            let scale = if var > 0.0 { 1.0 / libm::sqrt(var) } else { 0.0 };
            for x in self.points.coords.iter_mut().skip(c).step_by(dim) {
                *x = (*x - mean) * scale;
            }
        }
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let mut counts = [0; 2];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }
}

/// Samples two noisy concentric circles in the plane.
///
/// Class 0 lies on the circle of radius `r_inner` and takes ids
/// `0..n_per_class`; class 1 lies on radius `r_outer` and takes the next
/// `n_per_class` ids. The `k`-th point of a class sits at angle
/// `2πk / n_per_class`, then every coordinate receives independent Gaussian
/// noise of standard deviation `noise_std`.
pub fn generate_circles(
    n_per_class: usize,
    r_inner: f64,
    r_outer: f64,
    noise_std: f64,
    seed: u64,
) -> Result<LabeledPointCloud> {
    if n_per_class == 0 {
        return Err(Error::InvalidArgument("n_per_class must be positive".into()));
    }
    if !(r_inner > 0.0 && r_outer > 0.0 && r_inner.is_finite() && r_outer.is_finite()) {
        return Err(Error::InvalidArgument("radii must be positive and finite".into()));
    }
    if r_inner >= r_outer {
        return Err(Error::InvalidArgument("r_inner must be smaller than r_outer".into()));
    }
    if !(noise_std >= 0.0 && noise_std.is_finite()) {
        return Err(Error::InvalidArgument("noise_std must be non-negative and finite".into()));
    }
    let noise = Normal::new(0.0, noise_std)
        .map_err(|_| Error::InvalidArgument("noise_std must be non-negative and finite".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity(4 * n_per_class);
    let mut labels = Vec::with_capacity(2 * n_per_class);
    for (label, radius) in [(0u8, r_inner), (1u8, r_outer)] {
        for k in 0..n_per_class {
            let angle = 2.0 * PI * k as f64 / n_per_class as f64;
            let x = radius * libm::cos(angle);
            let y = radius * libm::sin(angle);
            if noise_std > 0.0 {
                coords.push(x + noise.sample(&mut rng));
                coords.push(y + noise.sample(&mut rng));
            } else {
                coords.push(x);
                coords.push(y);
            }
            labels.push(label);
        }
    }
    LabeledPointCloud::new(PointCloud::new(2, coords)?, labels)
}

/// Maps raw class labels onto the two classes, or explicitly drops them.
///
/// Raw labels are compared after [`ClassGrouping::normalize_raw`], so `"3"`,
/// `" 3 "` and `"3.0"` are the same key.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClassGrouping {
    map: BTreeMap<String, Option<Label>>,
}

impl ClassGrouping {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn assign(mut self, raw: &str, class: Label) -> Self {
        self.map.insert(Self::normalize_raw(raw), Some(class));
        self
    }

    /// Rows carrying `raw` are skipped and counted instead of rejected.
    pub fn drop_label(mut self, raw: &str) -> Self {
        self.map.insert(Self::normalize_raw(raw), None);
        self
    }

    /// NST classes 1-4 (normal) against 7-10 (concerning); 5 and 6 dropped.
    pub fn cardiotocography() -> Self {
        let mut g = Self::new();
        for c in 1..=4 {
            g = g.assign(&c.to_string(), 0);
        }
        for c in 5..=6 {
            g = g.drop_label(&c.to_string());
        }
        for c in 7..=10 {
            g = g.assign(&c.to_string(), 1);
        }
        g
    }

    pub fn normalize_raw(raw: &str) -> String {
        let raw = raw.trim();
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() && v == libm::trunc(v) && libm::fabs(v) < 1e15 => {
                format!("{}", v as i64)
            }
            _ => raw.to_string(),
        }
    }

    /// `Ok(Some(class))`, `Ok(None)` for dropped labels, error if unmapped.
    pub fn classify(&self, raw: &str) -> Result<Option<Label>> {
        let key = Self::normalize_raw(raw);
        match self.map.get(&key) {
            Some(class) => Ok(*class),
            None => Err(Error::UnmappedClass(key)),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, Option<Label>)> {
        self.map.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// Result of grouping raw rows into a binary cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedCloud {
    pub cloud: LabeledPointCloud,
    /// Rows skipped because their label is dropped by the grouping.
    pub dropped_rows: usize,
}

/// Builds a cloud from feature rows and raw labels. Ids follow the order of
/// the kept rows.
pub fn group_rows<R: AsRef<[f64]>, S: AsRef<str>>(
    rows: &[R],
    raw_labels: &[S],
    grouping: &ClassGrouping,
    normalize: bool,
) -> Result<GroupedCloud> {
    if rows.len() != raw_labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} rows but {} labels",
            rows.len(),
            raw_labels.len()
        )));
    }
    let mut kept = Vec::new();
    let mut labels = Vec::new();
    let mut dropped_rows = 0;
    for (row, raw) in rows.iter().zip(raw_labels) {
        match grouping.classify(raw.as_ref())? {
            Some(class) => {
                kept.push(row.as_ref());
                labels.push(class);
            }
            None => dropped_rows += 1,
        }
    }
    let mut cloud = LabeledPointCloud::new(PointCloud::from_rows(&kept)?, labels)?;
    if normalize {
        cloud.standardize();
    }
    Ok(GroupedCloud { cloud, dropped_rows })
}

/// Greedy sparsification in ascending id order: a point is kept iff its
/// squared distance to every previously kept point is at least
/// `min_sq_dist`. Returns the kept ids in ascending order.
pub fn sparsify(cloud: &LabeledPointCloud, min_sq_dist: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..cloud.len()).collect();
    order.sort_unstable_by_key(|&p| cloud.ids()[p]);
    let mut kept: Vec<usize> = Vec::new();
    for p in order {
        let x = cloud.points().point(p);
        if kept
            .iter()
            .all(|&q| squared_distance(x, cloud.points().point(q)) >= min_sq_dist)
        {
            kept.push(p);
        }
    }
    kept.iter().map(|&p| cloud.ids()[p]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> LabeledPointCloud {
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| alloc::vec![x, 0.0]).collect();
        LabeledPointCloud::new(PointCloud::from_rows(&rows).unwrap(), alloc::vec![0; xs.len()]).unwrap()
    }

    #[test]
    fn circles_shape_and_determinism() {
        let a = generate_circles(150, 0.5, 1.0, 0.05, 7).unwrap();
        let b = generate_circles(150, 0.5, 1.0, 0.05, 7).unwrap();
        assert_eq!(a.len(), 300);
        assert_eq!(a.dim(), 2);
        assert_eq!(a.class_counts(), [150, 150]);
        let bits = |c: &LabeledPointCloud| c.points().coords().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(a, generate_circles(150, 0.5, 1.0, 0.05, 8).unwrap());
    }

    #[test]
    fn noiseless_circles_lie_on_their_radii() {
        let c = generate_circles(50, 1.0, 2.0, 0.0, 0).unwrap();
        for (p, &l) in c.points().iter().zip(c.labels()) {
            let r = libm::sqrt(p[0] * p[0] + p[1] * p[1]);
            let expected = if l == 0 { 1.0 } else { 2.0 };
            assert!((r - expected).abs() <= 1e-12);
        }
        let tiny = generate_circles(1, 0.3, 0.9, 0.0, 0).unwrap();
        assert_eq!(tiny.len(), 2);
    }

    #[test]
    fn circles_reject_bad_arguments() {
        assert!(generate_circles(0, 0.5, 1.0, 0.0, 0).is_err());
        assert!(generate_circles(5, -0.5, 1.0, 0.0, 0).is_err());
        assert!(generate_circles(5, 1.0, 1.0, 0.0, 0).is_err());
        assert!(generate_circles(5, 0.5, 1.0, -1.0, 0).is_err());
    }

    #[test]
    fn sparsify_drops_close_points() {
        let c = line(&[0.0, 0.1, 1.0]);
        assert_eq!(sparsify(&c, 0.05), alloc::vec![0, 2]);
        assert_eq!(sparsify(&c, 0.0), alloc::vec![0, 1, 2]);
    }

    #[test]
    fn sparsify_follows_id_order_not_position() {
        let c = line(&[0.0, 0.1]);
        let swapped = LabeledPointCloud::with_ids(c.points().clone(), alloc::vec![0, 0], alloc::vec![1, 0]).unwrap();
        // id 0 sits at x = 0.1 and is visited first
        assert_eq!(sparsify(&swapped, 0.05), alloc::vec![0]);
    }

    #[test]
    fn grouping_normalizes_and_drops() {
        let g = ClassGrouping::cardiotocography();
        assert_eq!(g.classify("3").unwrap(), Some(0));
        assert_eq!(g.classify(" 8.0 ").unwrap(), Some(1));
        assert_eq!(g.classify("5").unwrap(), None);
        assert_eq!(g.classify("11"), Err(Error::UnmappedClass("11".into())));
        let rows = [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]];
        let grouped = group_rows(&rows, &["1", "6", "9"], &g, false).unwrap();
        assert_eq!(grouped.dropped_rows, 1);
        assert_eq!(grouped.cloud.labels(), &[0, 1]);
        assert_eq!(grouped.cloud.points().point(1), &[5.0, 6.0]);
    }

    #[test]
    fn standardize_guards_constant_columns() {
        let rows = [[1.0, 7.0], [2.0, 7.0], [4.0, 7.0]];
        let mut c = LabeledPointCloud::new(PointCloud::from_rows(&rows).unwrap(), alloc::vec![0, 1, 0]).unwrap();
        c.standardize();
        let col: Vec<f64> = c.points().iter().map(|p| p[0]).collect();
        let mean = col.iter().sum::<f64>() / 3.0;
        let var = col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 3.0;
        assert!(mean.abs() <= 1e-9 && (var - 1.0).abs() <= 1e-9);
        assert!(c.points().iter().all(|p| p[1] == 0.0));
    }

    #[test]
    fn cloud_validation() {
        assert!(PointCloud::new(2, alloc::vec![1.0, 2.0, 3.0]).is_err());
        assert!(PointCloud::new(1, alloc::vec![f64::NAN]).is_err());
        let pts = PointCloud::new(1, alloc::vec![0.0, 1.0]).unwrap();
        assert!(LabeledPointCloud::new(pts.clone(), alloc::vec![0, 2]).is_err());
        assert!(LabeledPointCloud::with_ids(pts, alloc::vec![0, 1], alloc::vec![3, 3]).is_err());
    }
}
