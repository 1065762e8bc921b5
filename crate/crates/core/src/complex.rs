//! Simplicial complexes over integer vertex ids, clique (Vietoris–Rips)
//! complexes, nerves of covers and connected components.
//!
//! Distances are compared with a closed threshold everywhere: two points are
//! adjacent at scale `eps` iff their distance is `<= eps`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use smallvec::SmallVec;

use crate::dataset::PointCloud;
use crate::union_find::UnionFind;
use crate::{Error, Result};

/// An undirected edge `(u, v)` with `u < v`.
pub type Edge = (usize, usize);

/// A non-empty, strictly increasing list of vertex ids.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Simplex(SmallVec<[usize; 4]>);

impl Simplex {
    pub fn new(vertices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut v: SmallVec<[usize; 4]> = vertices.into_iter().collect();
        if v.is_empty() {
            return Err(Error::InvalidArgument("a simplex needs at least one vertex".into()));
        }
        v.sort_unstable();
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("repeated vertex in simplex".into()));
        }
        Ok(Self(v))
    }

    /// Caller guarantees the slice is non-empty and strictly increasing.
    pub(crate) fn from_sorted(vertices: &[usize]) -> Self {
        debug_assert!(!vertices.is_empty() && vertices.windows(2).all(|w| w[0] < w[1]));
        Self(SmallVec::from_slice(vertices))
    }

    pub fn vertex(v: usize) -> Self {
        Self::from_sorted(&[v])
    }

    pub fn edge(u: usize, v: usize) -> Self {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        Self::new([a, b]).expect("edge endpoints must differ")
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// Codimension-one faces, each obtained by dropping one vertex.
    pub fn facets(&self) -> impl Iterator<Item = Simplex> + '_ {
        let n = if self.0.len() > 1 { self.0.len() } else { 0 };
        (0..n).map(move |skip| {
            Simplex(self.0.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect())
        })
    }

    /// All non-empty faces, the simplex itself included.
    pub fn faces(&self) -> Vec<Simplex> {
        let n = self.0.len();
        (1u64..(1u64 << n))
            .map(|mask| Simplex((0..n).filter(|i| mask >> i & 1 == 1).map(|i| self.0[i]).collect()))
            .collect()
    }
}

/// A face-closed set of simplices, stored per dimension in lexicographic order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimplicialComplex {
    vertex_ids: Vec<usize>,
    by_dim: Vec<Vec<Simplex>>,
}

impl SimplicialComplex {
    /// Builds a complex and checks that it is closed under faces.
    pub fn new(simplices: impl IntoIterator<Item = Simplex>) -> Result<Self> {
        let complex = Self::from_simplices(simplices);
        if !complex.is_face_closed() {
            return Err(Error::InvalidArgument("simplex set is not closed under faces".into()));
        }
        Ok(complex)
    }

    /// The smallest complex containing every given simplex.
    pub fn closure(simplices: impl IntoIterator<Item = Simplex>) -> Self {
        Self::from_simplices(simplices.into_iter().flat_map(|s| s.faces()))
    }

    fn from_simplices(simplices: impl IntoIterator<Item = Simplex>) -> Self {
        let mut by_dim: Vec<Vec<Simplex>> = Vec::new();
        for s in simplices {
            let d = s.dim();
            if by_dim.len() <= d {
                by_dim.resize_with(d + 1, Vec::new);
            }
            by_dim[d].push(s);
        }
        for list in &mut by_dim {
            list.sort_unstable();
            list.dedup();
        }
        let vertex_ids = by_dim.first().map(|vs| vs.iter().map(|s| s.0[0]).collect()).unwrap_or_default();
        Self { vertex_ids, by_dim }
    }

    /// Assumes each list is sorted, deduplicated and the whole is face-closed.
    pub(crate) fn from_sorted_parts(by_dim: Vec<Vec<Simplex>>) -> Self {
        let vertex_ids = by_dim.first().map(|vs| vs.iter().map(|s| s.0[0]).collect()).unwrap_or_default();
        Self { vertex_ids, by_dim }
    }

    pub fn vertex_ids(&self) -> &[usize] {
        &self.vertex_ids
    }

    /// Top dimension, or `None` for the empty complex.
    pub fn dimension(&self) -> Option<usize> {
        self.by_dim.iter().rposition(|l| !l.is_empty())
    }

    pub fn simplices(&self, dim: usize) -> &[Simplex] {
        self.by_dim.get(dim).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn count(&self, dim: usize) -> usize {
        self.simplices(dim).len()
    }

    pub fn len(&self) -> usize {
        self.by_dim.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &Simplex> {
        self.by_dim.iter().flatten()
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.simplices(s.dim()).binary_search(s).is_ok()
    }

    pub fn edges(&self) -> Vec<Edge> {
        self.simplices(1).iter().map(|s| (s.0[0], s.0[1])).collect()
    }

    pub fn is_face_closed(&self) -> bool {
        self.iter().all(|s| s.facets().all(|f| self.contains(&f)))
    }

    /// Every simplex of `self` is a simplex of `other`.
    pub fn is_subcomplex_of(&self, other: &SimplicialComplex) -> bool {
        self.iter().all(|s| other.contains(s))
    }

    /// The `k`-skeleton.
    pub fn skeleton(&self, k: usize) -> Self {
        Self::from_sorted_parts(self.by_dim.iter().take(k + 1).cloned().collect())
    }
}

/// Normalises an edge list: orders endpoints, drops self-loops, sorts and
/// deduplicates.
pub fn normalize_edges(edges: impl IntoIterator<Item = Edge>) -> Vec<Edge> {
    let mut out: Vec<Edge> = edges
        .into_iter()
        .filter(|(u, v)| u != v)
        .map(|(u, v)| if u < v { (u, v) } else { (v, u) })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Pairs of positions at distance `<= eps`, sorted.
pub fn proximity_graph(points: &PointCloud, eps: f64) -> Vec<Edge> {
    let n = points.len();
    let mut edges = Vec::new();
    for u in 0..n {
        let pu = points.point(u);
        for v in u + 1..n {
            if crate::dataset::distance(pu, points.point(v)) <= eps {
                edges.push((u, v));
            }
        }
    }
    edges
}

/// Compact adjacency: vertices renumbered `0..n` in id order, and for each the
/// sorted list of neighbours with a larger index.
struct UpperAdjacency {
    ids: Vec<usize>,
    upper: Vec<Vec<usize>>,
}

impl UpperAdjacency {
    fn new(edges: &[Edge], vertex_ids: &[usize]) -> Self {
        let mut ids: Vec<usize> = vertex_ids.to_vec();
        ids.extend(edges.iter().flat_map(|&(u, v)| [u, v]));
        ids.sort_unstable();
        ids.dedup();
        let mut upper = vec![Vec::new(); ids.len()];
        for (u, v) in normalize_edges(edges.iter().copied()) {
            let a = ids.binary_search(&u).unwrap();
            let b = ids.binary_search(&v).unwrap();
            upper[a].push(b);
        }
        for list in &mut upper {
            list.sort_unstable();
        }
        Self { ids, upper }
    }

    /// Depth-first enumeration of all cliques with at most `max_dim + 1`
    /// vertices. Cliques reach `visit` in lexicographic order within each size.
    fn for_each_clique(&self, max_dim: usize, mut visit: impl FnMut(&[usize])) {
        let mut stack: Vec<usize> = Vec::with_capacity(max_dim + 1);
        for v in 0..self.ids.len() {
            stack.push(v);
            self.extend(&mut stack, &self.upper[v], max_dim, &mut visit);
            stack.pop();
        }
    }

    fn extend(&self, stack: &mut Vec<usize>, candidates: &[usize], max_dim: usize, visit: &mut impl FnMut(&[usize])) {
        visit(stack);
        if stack.len() > max_dim {
            return;
        }
        for (i, &w) in candidates.iter().enumerate() {
            let next = intersect_sorted(&candidates[i + 1..], &self.upper[w]);
            stack.push(w);
            self.extend(stack, &next, max_dim, visit);
            stack.pop();
        }
    }
}

fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// All cliques of the graph with dimension `<= max_dim`, every vertex of
/// `vertex_ids` (and every edge endpoint) included as a 0-simplex.
pub fn clique_complex(edges: &[Edge], vertex_ids: &[usize], max_dim: usize) -> SimplicialComplex {
    let adj = UpperAdjacency::new(edges, vertex_ids);
    let mut by_dim: Vec<Vec<Simplex>> = vec![Vec::new(); max_dim + 1];
    let mut buf: SmallVec<[usize; 4]> = SmallVec::new();
    adj.for_each_clique(max_dim, |clique| {
        buf.clear();
        buf.extend(clique.iter().map(|&c| adj.ids[c]));
        by_dim[clique.len() - 1].push(Simplex(buf.clone()));
    });
    while by_dim.len() > 1 && by_dim.last().is_some_and(Vec::is_empty) {
        by_dim.pop();
    }
    SimplicialComplex::from_sorted_parts(by_dim)
}

/// A family of non-empty sets of point ids. Element `i` is the `i`-th set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cover {
    elements: Vec<Vec<usize>>,
}

impl Cover {
    pub fn new(elements: Vec<Vec<usize>>) -> Result<Self> {
        let mut elements = elements;
        for (i, e) in elements.iter_mut().enumerate() {
            if e.is_empty() {
                return Err(Error::InvalidArgument(format!("cover element {i} is empty")));
            }
            e.sort_unstable();
            e.dedup();
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[Vec<usize>] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &[usize] {
        &self.elements[i]
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Sorted union of all elements.
    pub fn covered_ids(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.elements.iter().flatten().copied().collect();
        set.into_iter().collect()
    }

    pub fn covers(&self, ids: &[usize]) -> bool {
        let covered = self.covered_ids();
        ids.iter().all(|id| covered.binary_search(id).is_ok())
    }

    /// Id → sorted element indices containing it.
    pub fn membership(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut map: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (e, members) in self.elements.iter().enumerate() {
            for &id in members {
                map.entry(id).or_default().push(e);
            }
        }
        map
    }

    /// Lowest-index element containing `id`.
    pub fn first_element_containing(&self, id: usize) -> Option<usize> {
        self.elements.iter().position(|e| e.binary_search(&id).is_ok())
    }

    pub fn is_partition(&self) -> bool {
        let total: usize = self.elements.iter().map(Vec::len).sum();
        total == self.covered_ids().len()
    }

    /// True when every element of `self` lies inside some element of `finer`'s
    /// counterpart, i.e. `finer` refines `self`.
    pub fn is_coarsening_of(&self, finer: &Cover) -> bool {
        finer.elements.iter().all(|f| {
            self.elements.iter().any(|c| f.iter().all(|id| c.binary_search(id).is_ok()))
        })
    }
}

/// A total map from the elements of one cover to the elements of another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverMap {
    assignment: Vec<usize>,
    target_len: usize,
}

impl CoverMap {
    pub fn new(assignment: Vec<usize>, target_len: usize) -> Result<Self> {
        if let Some(&bad) = assignment.iter().find(|&&t| t >= target_len) {
            return Err(Error::InvalidArgument(format!("cover map sends an element to {bad} of {target_len}")));
        }
        Ok(Self { assignment, target_len })
    }

    pub fn apply(&self, element: usize) -> usize {
        self.assignment[element]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn source_len(&self) -> usize {
        self.assignment.len()
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &CoverMap) -> CoverMap {
        CoverMap { assignment: self.assignment.iter().map(|&t| next.apply(t)).collect(), target_len: next.target_len }
    }

    pub fn identity(len: usize) -> CoverMap {
        CoverMap { assignment: (0..len).collect(), target_len: len }
    }
}

/// Nerve of a cover: one vertex per element, and a simplex for every family of
/// elements with a common point, up to dimension `max_dim`.
pub fn nerve(cover: &Cover, max_dim: usize) -> SimplicialComplex {
    let mut simplices: BTreeSet<Simplex> = (0..cover.len()).map(Simplex::vertex).collect();
    // each point contributes every subset of the elements containing it
    let membership = cover.membership();
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    for elems in membership.values() {
        if elems.len() < 2 || !seen.insert(elems.clone()) {
            continue;
        }
        let mut stack = Vec::new();
        subsets_up_to(elems, max_dim + 1, 0, &mut stack, &mut |s| {
            if s.len() >= 2 {
                simplices.insert(Simplex::from_sorted(s));
            }
        });
    }
    SimplicialComplex::from_simplices(simplices)
}

fn subsets_up_to(items: &[usize], max_len: usize, start: usize, stack: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    f(stack);
    if stack.len() == max_len {
        return;
    }
    for i in start..items.len() {
        stack.push(items[i]);
        subsets_up_to(items, max_len, i + 1, stack, f);
        stack.pop();
    }
}

/// Connected-component labelling of a graph.
///
/// Component ids are `0..count`, numbered in order of each component's
/// smallest vertex id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    vertex_ids: Vec<usize>,
    labels: Vec<usize>,
    count: usize,
}

impl Components {
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn vertex_ids(&self) -> &[usize] {
        &self.vertex_ids
    }

    /// Labels aligned with [`Components::vertex_ids`].
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn component_of(&self, vertex: usize) -> Option<usize> {
        self.vertex_ids.binary_search(&vertex).ok().map(|i| self.labels[i])
    }

    /// Members of each component, as sorted vertex-id lists.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.count];
        for (&v, &c) in self.vertex_ids.iter().zip(&self.labels) {
            groups[c].push(v);
        }
        groups
    }
}

pub fn connected_components(edges: &[Edge], vertex_ids: &[usize]) -> Components {
    let mut ids: Vec<usize> = vertex_ids.to_vec();
    ids.extend(edges.iter().flat_map(|&(u, v)| [u, v]));
    ids.sort_unstable();
    ids.dedup();
    let mut uf = UnionFind::new(ids.len());
    for &(u, v) in edges {
        let a = ids.binary_search(&u).unwrap();
        let b = ids.binary_search(&v).unwrap();
        uf.union(a, b);
    }
    let mut root_label: BTreeMap<usize, usize> = BTreeMap::new();
    let mut labels = Vec::with_capacity(ids.len());
    for i in 0..ids.len() {
        let root = uf.find(i);
        let next = root_label.len();
        labels.push(*root_label.entry(root).or_insert(next));
    }
    Components { vertex_ids: ids, labels, count: root_label.len() }
}

/// Simplices with their appearance values, sorted by
/// `(value, dimension, lexicographic vertices)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Filtration {
    entries: Vec<(Simplex, f64)>,
    max_dim: usize,
}

fn entry_order(a: &(Simplex, f64), b: &(Simplex, f64)) -> Ordering {
    a.1.total_cmp(&b.1).then(a.0.dim().cmp(&b.0.dim())).then_with(|| a.0.cmp(&b.0))
}

impl Filtration {
    /// Sorts `entries` into filtration order. `max_dim` is the dimension cap
    /// the simplices were generated with; it bounds the reliable homology.
    /// Monotonicity is checked by [`Filtration::check_monotone`].
    pub fn new(mut entries: Vec<(Simplex, f64)>, max_dim: usize) -> Result<Self> {
        if entries.iter().any(|(_, v)| v.is_nan()) {
            return Err(Error::InvalidArgument("NaN filtration value".into()));
        }
        entries.sort_by(entry_order);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidArgument("simplex listed twice in filtration".into()));
        }
        if let Some((s, _)) = entries.iter().find(|(s, _)| s.dim() > max_dim) {
            return Err(Error::InvalidArgument(format!("simplex of dimension {} above cap {max_dim}", s.dim())));
        }
        Ok(Self { entries, max_dim })
    }

    /// Filtration of a complex where every simplex gets `value(simplex)`.
    pub fn from_complex(complex: &SimplicialComplex, max_dim: usize, value: impl Fn(&Simplex) -> f64) -> Result<Self> {
        Self::new(complex.iter().filter(|s| s.dim() <= max_dim).map(|s| (s.clone(), value(s))).collect(), max_dim)
    }

    pub fn entries(&self) -> &[(Simplex, f64)] {
        &self.entries
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Per dimension, `(simplex, filtration index)` sorted lexicographically.
    pub(crate) fn index_by_dim(&self) -> Vec<Vec<(&Simplex, usize)>> {
        let top = self.entries.iter().map(|(s, _)| s.dim()).max().map_or(0, |d| d + 1);
        let mut by_dim: Vec<Vec<(&Simplex, usize)>> = vec![Vec::new(); top];
        for (i, (s, _)) in self.entries.iter().enumerate() {
            by_dim[s.dim()].push((s, i));
        }
        for list in &mut by_dim {
            list.sort_unstable_by(|a, b| a.0.cmp(b.0));
        }
        by_dim
    }

    /// Every facet of every simplex is present with a value no larger.
    pub fn check_monotone(&self) -> Result<()> {
        let index = self.index_by_dim();
        for (i, (s, value)) in self.entries.iter().enumerate() {
            if s.dim() == 0 {
                continue;
            }
            let faces = &index[s.dim() - 1];
            for f in s.facets() {
                match faces.binary_search_by(|(t, _)| (*t).cmp(&f)) {
                    Ok(k) if self.entries[faces[k].1].1 <= *value => {}
                    _ => return Err(Error::NonMonotoneFiltration { index: i }),
                }
            }
        }
        Ok(())
    }

    /// The complex of all simplices with value `<= t`.
    pub fn complex_at(&self, t: f64) -> SimplicialComplex {
        SimplicialComplex::from_simplices(self.entries.iter().filter(|(_, v)| *v <= t).map(|(s, _)| s.clone()))
    }

    /// Distinct finite values, ascending.
    pub fn critical_values(&self) -> Vec<f64> {
        let mut values: Vec<f64> = self.entries.iter().map(|(_, v)| *v).filter(|v| v.is_finite()).collect();
        values.dedup();
        values
    }
}

/// Vietoris–Rips filtration over point positions: a simplex enters at the
/// largest pairwise distance among its vertices (vertices at 0), and only
/// simplices with value `<= max_eps` are kept.
pub fn vr_filtration(points: &PointCloud, max_dim: usize, max_eps: f64) -> Result<Filtration> {
    if max_dim == 0 {
        return Err(Error::InvalidArgument("max_dim must be at least 1".into()));
    }
    let n = points.len();
    let edges = proximity_graph(points, max_eps);
    let positions: Vec<usize> = (0..n).collect();
    let adj = UpperAdjacency::new(&edges, &positions);
    let mut dist = vec![0.0; n * n];
    for &(u, v) in &edges {
        let d = points.distance(u, v);
        dist[u * n + v] = d;
        dist[v * n + u] = d;
    }
    let mut entries = Vec::new();
    adj.for_each_clique(max_dim, |clique| {
        let mut value = 0.0f64;
        for (i, &a) in clique.iter().enumerate() {
            for &b in &clique[i + 1..] {
                value = value.max(dist[a * n + b]);
            }
        }
        entries.push((Simplex::from_sorted(clique), value));
    });
    Filtration::new(entries, max_dim)
}

/// Largest complex size accepted by [`betti_bruteforce`].
pub const BRUTEFORCE_LIMIT: usize = 1 << 12;

/// Betti number `β_p` over Z/2 by dense Gaussian elimination of the boundary
/// matrices.
pub fn betti_bruteforce(complex: &SimplicialComplex, p: usize) -> Result<usize> {
    if complex.len() > BRUTEFORCE_LIMIT {
        return Err(Error::SizeGuard { size: complex.len(), limit: BRUTEFORCE_LIMIT });
    }
    let n_p = complex.count(p);
    let rank_p = if p == 0 { 0 } else { boundary_rank(complex, p) };
    let rank_next = boundary_rank(complex, p + 1);
    Ok(n_p - rank_p - rank_next)
}

/// Rank over Z/2 of the boundary map from dimension `d` to `d - 1`.
fn boundary_rank(complex: &SimplicialComplex, d: usize) -> usize {
    let rows = complex.simplices(d - 1);
    let cols = complex.simplices(d);
    if rows.is_empty() || cols.is_empty() {
        return 0;
    }
    let words = rows.len().div_ceil(64);
    let mut matrix: Vec<Vec<u64>> = cols
        .iter()
        .map(|s| {
            let mut bits = vec![0u64; words];
            for f in s.facets() {
                let r = rows.binary_search(&f).expect("complex is face-closed");
                bits[r / 64] ^= 1 << (r % 64);
            }
            bits
        })
        .collect();
    let mut rank = 0;
    for bit in 0..rows.len() {
        let (w, mask) = (bit / 64, 1u64 << (bit % 64));
        let Some(pivot) = (rank..matrix.len()).find(|&c| matrix[c][w] & mask != 0) else {
            continue;
        };
        matrix.swap(rank, pivot);
        let pivot_row = matrix[rank].clone();
        for row in matrix.iter_mut().skip(rank + 1) {
            if row[w] & mask != 0 {
                for (a, b) in row.iter_mut().zip(&pivot_row) {
                    *a ^= b;
                }
            }
        }
        rank += 1;
    }
    rank
}
