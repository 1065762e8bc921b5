//! Persistent homology over Z/2 and the bottleneck distance.
//!
//! Pairs are computed by reducing the coboundary matrix one dimension at a
//! time, lowest dimension first. Simplices already paired as deaths in the
//! previous dimension have zero cocolumns and are skipped (clearing). This
//! gives the same pairs as the usual boundary-matrix reduction while only
//! touching columns of dimension below the filtration's cap, which keeps
//! Vietoris–Rips filtrations with millions of triangles tractable.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use crate::complex::{Filtration, Simplex};
use crate::{Error, Result};

/// One persistence pair. `death` is `f64::INFINITY` for essential classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feature {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
}

impl Feature {
    pub fn new(dim: usize, birth: f64, death: f64) -> Self {
        Self { dim, birth, death }
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_essential(&self) -> bool {
        self.death == f64::INFINITY
    }

    /// Alive on the half-open interval `[birth, death)`.
    pub fn is_alive_at(&self, t: f64) -> bool {
        self.birth <= t && t < self.death
    }
}

fn feature_order(a: &Feature, b: &Feature) -> Ordering {
    a.dim.cmp(&b.dim).then(a.birth.total_cmp(&b.birth)).then(a.death.total_cmp(&b.death))
}

/// Multiset of features sorted by `(dim, birth, death)`. Features with
/// `birth == death` are not stored; their number per dimension is kept in
/// [`PersistenceDiagram::zero_length_count`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceDiagram {
    features: Vec<Feature>,
    zero_length: Vec<usize>,
}

impl PersistenceDiagram {
    pub fn new(features: Vec<Feature>) -> Self {
        let mut features = features;
        let mut zero_length = Vec::new();
        features.retain(|f| {
            if f.birth == f.death {
                if zero_length.len() <= f.dim {
                    zero_length.resize(f.dim + 1, 0);
                }
                zero_length[f.dim] += 1;
                false
            } else {
                true
            }
        });
        features.sort_by(feature_order);
        Self { features, zero_length }
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn in_dim(&self, dim: usize) -> impl Iterator<Item = &Feature> + '_ {
        self.features.iter().filter(move |f| f.dim == dim)
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn zero_length_count(&self, dim: usize) -> usize {
        self.zero_length.get(dim).copied().unwrap_or(0)
    }

    /// Number of `dim`-features alive at `t`; the `t`-th Betti number of the
    /// filtration when `dim` is below its cap.
    pub fn betti_at(&self, dim: usize, t: f64) -> usize {
        self.in_dim(dim).filter(|f| f.is_alive_at(t)).count()
    }

    pub fn essential_count(&self, dim: usize) -> usize {
        self.in_dim(dim).filter(|f| f.is_essential()).count()
    }

    /// Features of `dim` with persistence strictly above `threshold`.
    pub fn count_persistent(&self, dim: usize, threshold: f64) -> usize {
        self.in_dim(dim).filter(|f| f.persistence() > threshold).count()
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.features.last().map(|f| f.dim)
    }
}

/// Persistence diagram of a filtration.
///
/// Homology is reported in dimensions `p < max_dim` (just `H_0` when the cap
/// is 0), since `H_{max_dim}` would count classes the missing
/// `(max_dim + 1)`-simplices might have killed.
pub fn reduce(filtration: &Filtration) -> Result<PersistenceDiagram> {
    let entries = filtration.entries();
    let reported = filtration.max_dim().max(1);
    let index = DimIndex::new(entries, reported + 1);

    let mut features = Vec::new();
    let mut cleared = vec![false; entries.len()];
    for p in 0..reported {
        let rows = &index.ordered[p];
        let cols = &index.ordered[p + 1];
        let coboundary = Coboundary::build(entries, &index, p)?;
        // owner[pivot]: reduction (set of rows) of the column that has this pivot
        let mut owner: Vec<u32> = vec![u32::MAX; cols.len()];
        let mut reductions: Vec<Vec<u32>> = Vec::new();
        let mut heap: BinaryHeap<Reverse<u32>> = BinaryHeap::new();
        for (local, &sigma) in rows.iter().enumerate().rev() {
            let sigma = sigma as usize;
            if cleared[sigma] {
                continue;
            }
            let own = coboundary.of(local);
            // apparent pairs need no reduction
            let mut pivot = own.first().copied();
            let mut reduction = vec![local as u32];
            if let Some(first) = pivot {
                if owner[first as usize] != u32::MAX {
                    heap.clear();
                    heap.extend(own.iter().map(|&c| Reverse(c)));
                    pivot = pop_pivot(&mut heap);
                    while let Some(pv) = pivot {
                        let o = owner[pv as usize];
                        if o == u32::MAX {
                            break;
                        }
                        for &r in &reductions[o as usize] {
                            reduction.push(r);
                            heap.extend(coboundary.of(r as usize).iter().map(|&c| Reverse(c)));
                        }
                        pivot = pop_pivot(&mut heap);
                    }
                }
            }
            match pivot {
                None => features.push(Feature::new(p, entries[sigma].1, f64::INFINITY)),
                Some(pv) => {
                    let tau = cols[pv as usize] as usize;
                    features.push(Feature::new(p, entries[sigma].1, entries[tau].1));
                    cleared[tau] = true;
                    owner[pv as usize] = reductions.len() as u32;
                    reductions.push(cancel_pairs(reduction));
                }
            }
        }
    }
    if index.ordered.len() > reported + 1 {
        // simplices above the reported range still have to be monotone
        for p in reported..index.ordered.len() - 1 {
            Coboundary::build(entries, &index, p)?;
        }
    }
    Ok(PersistenceDiagram::new(features))
}

/// Per-dimension views of a filtration.
struct DimIndex {
    /// Filtration indices of each dimension, ascending.
    ordered: Vec<Vec<u32>>,
    /// Position of every simplex within `ordered[dim]`.
    local: Vec<u32>,
    /// Per dimension, filtration indices sorted by vertex list.
    lex: Vec<Vec<u32>>,
    /// Per dimension, `(first vertex, start in lex)` for each distinct first vertex.
    starts: Vec<Vec<(usize, usize)>>,
}

impl DimIndex {
    /// Lists at least `min_dims` dimensions, padding with empty ones.
    fn new(entries: &[(Simplex, f64)], min_dims: usize) -> Self {
        let top = entries.iter().map(|(s, _)| s.dim() + 1).max().unwrap_or(0).max(min_dims);
        let mut ordered: Vec<Vec<u32>> = vec![Vec::new(); top];
        let mut local = vec![0u32; entries.len()];
        for (i, (s, _)) in entries.iter().enumerate() {
            let list = &mut ordered[s.dim()];
            local[i] = list.len() as u32;
            list.push(i as u32);
        }
        let lex: Vec<Vec<u32>> = ordered
            .iter()
            .map(|list| {
                let mut sorted = list.clone();
                sorted.sort_unstable_by(|&a, &b| entries[a as usize].0.cmp(&entries[b as usize].0));
                sorted
            })
            .collect();
        let starts = lex
            .iter()
            .map(|list| {
                let mut out: Vec<(usize, usize)> = Vec::new();
                for (k, &i) in list.iter().enumerate() {
                    let first = entries[i as usize].0.vertices()[0];
                    if out.last().is_none_or(|&(v, _)| v != first) {
                        out.push((first, k));
                    }
                }
                out
            })
            .collect();
        Self { ordered, local, lex, starts }
    }

    /// Filtration index of the simplex with these vertices.
    fn find(&self, entries: &[(Simplex, f64)], vertices: &[usize]) -> Option<usize> {
        let dim = vertices.len() - 1;
        let starts = self.starts.get(dim)?;
        let lex = &self.lex[dim];
        let k = starts.binary_search_by(|&(v, _)| v.cmp(&vertices[0])).ok()?;
        let end = starts.get(k + 1).map_or(lex.len(), |&(_, e)| e);
        let range = &lex[starts[k].1..end];
        range
            .binary_search_by(|&i| entries[i as usize].0.vertices().cmp(vertices))
            .ok()
            .map(|j| range[j] as usize)
    }
}

/// Cofacets of every `p`-simplex, as ascending local indices into the list of
/// `(p + 1)`-simplices, stored in compressed rows.
struct Coboundary {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Coboundary {
    /// Also checks that every facet of a `(p + 1)`-simplex is present with a
    /// value no larger.
    fn build(entries: &[(Simplex, f64)], index: &DimIndex, p: usize) -> Result<Self> {
        let rows = index.ordered[p].len();
        let cols = &index.ordered[p + 1];
        let mut counts = vec![0usize; rows + 1];
        let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(cols.len() * (p + 2));
        let mut facet: Vec<usize> = Vec::with_capacity(p + 1);
        for (col, &global) in cols.iter().enumerate() {
            let (s, value) = &entries[global as usize];
            let vertices = s.vertices();
            for skip in 0..vertices.len() {
                facet.clear();
                facet.extend(vertices.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v));
                match index.find(entries, &facet) {
                    Some(f) if entries[f].1 <= *value => {
                        let row = index.local[f] as usize;
                        counts[row + 1] += 1;
                        pairs.push((row as u32, col as u32));
                    }
                    _ => return Err(Error::NonMonotoneFiltration { index: global as usize }),
                }
            }
        }
        for i in 0..rows {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut targets = vec![0u32; pairs.len()];
        // columns are visited in ascending order, so every row comes out sorted
        for (row, col) in pairs {
            targets[fill[row as usize]] = col;
            fill[row as usize] += 1;
        }
        Ok(Self { offsets: counts, targets })
    }

    fn of(&self, row: usize) -> &[u32] {
        &self.targets[self.offsets[row]..self.offsets[row + 1]]
    }
}

/// Smallest entry occurring an odd number of times; entries above it are
/// left in the heap, entries below it are consumed.
fn pop_pivot(heap: &mut BinaryHeap<Reverse<u32>>) -> Option<u32> {
    while let Some(Reverse(top)) = heap.pop() {
        if heap.peek() == Some(&Reverse(top)) {
            heap.pop();
        } else {
            heap.push(Reverse(top));
            return Some(top);
        }
    }
    None
}

/// Sorted entries occurring an odd number of times.
fn cancel_pairs(mut items: Vec<u32>) -> Vec<u32> {
    items.sort_unstable();
    let mut out = Vec::with_capacity(items.len());
    for x in items {
        if out.last() == Some(&x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

/// Exact bottleneck distance between the `dim`-parts of two diagrams.
///
/// Finite features may be matched to each other at L∞ cost or to the
/// diagonal at half their persistence. Essential features can only be matched
/// to essential features (at the difference of their births); differing
/// essential counts give `+∞`.
pub fn bottleneck(a: &PersistenceDiagram, b: &PersistenceDiagram, dim: usize) -> f64 {
    let split = |d: &PersistenceDiagram| {
        let (mut fin, mut ess) = (Vec::new(), Vec::new());
        for f in d.in_dim(dim) {
            if f.is_essential() {
                ess.push(f.birth);
            } else {
                fin.push((f.birth, f.death));
            }
        }
        ess.sort_by(f64::total_cmp);
        (fin, ess)
    };
    let (fa, ea) = split(a);
    let (fb, eb) = split(b);
    if ea.len() != eb.len() {
        return f64::INFINITY;
    }
    // on the line, matching in sorted order minimises the largest gap
    let essential = ea.iter().zip(&eb).map(|(x, y)| libm::fabs(x - y)).fold(0.0, f64::max);
    essential.max(finite_bottleneck(&fa, &fb))
}

pub(crate) fn linf(p: (f64, f64), q: (f64, f64)) -> f64 {
    libm::fabs(p.0 - q.0).max(libm::fabs(p.1 - q.1))
}

pub(crate) fn diagonal_cost(p: (f64, f64)) -> f64 {
    (p.1 - p.0) / 2.0
}

fn finite_bottleneck(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let (n, m) = (a.len(), b.len());
    if n + m == 0 {
        return 0.0;
    }
    let mut candidates: Vec<f64> = Vec::with_capacity(n * m + n + m + 1);
    candidates.push(0.0);
    for &p in a {
        candidates.extend(b.iter().map(|&q| linf(p, q)));
        candidates.push(diagonal_cost(p));
    }
    candidates.extend(b.iter().map(|&q| diagonal_cost(q)));
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    // left: a_0..a_n, then diagonal copies of b; right: b_0..b_m, then
    // diagonal copies of a
    let feasible = |c: f64| {
        let adjacency: Vec<Vec<usize>> = (0..n + m)
            .map(|l| {
                if l < n {
                    let mut adj: Vec<usize> = (0..m).filter(|&j| linf(a[l], b[j]) <= c).collect();
                    if diagonal_cost(a[l]) <= c {
                        adj.push(m + l);
                    }
                    adj
                } else {
                    let j = l - n;
                    let mut adj = Vec::with_capacity(n + 1);
                    if diagonal_cost(b[j]) <= c {
                        adj.push(j);
                    }
                    adj.extend(m..m + n);
                    adj
                }
            })
            .collect();
        crate::matching::maximum_matching(&adjacency, n + m) == n + m
    };
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}
