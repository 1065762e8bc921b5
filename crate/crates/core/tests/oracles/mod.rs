//! Independent reference implementations used by the property and
//! acceptance tests. Everything here is deliberately naive.
#![allow(dead_code)]

use std::collections::VecDeque;

use mlptopo_core::complex::{betti_bruteforce, Edge, Filtration};
use mlptopo_core::dataset::{LabeledPointCloud, PointCloud};
use mlptopo_core::mlp::{loss, MlpModel};
use mlptopo_core::persistence::PersistenceDiagram;

/// Component label per vertex by breadth-first search, labels numbered in
/// order of smallest vertex.
pub fn bfs_components(n: usize, edges: &[Edge]) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = next;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if label[w] == usize::MAX {
                    label[w] = next;
                    queue.push_back(w);
                }
            }
        }
        next += 1;
    }
    label
}

/// Minimum over every matching of the largest cost, by enumeration.
///
/// Finite points pair with finite points at L∞ cost or go to the diagonal at
/// half their persistence; essential features pair with essential features
/// at the difference of their births.
pub fn exhaustive_bottleneck(a: &PersistenceDiagram, b: &PersistenceDiagram, dim: usize) -> f64 {
    let split = |d: &PersistenceDiagram| {
        let mut fin = Vec::new();
        let mut ess = Vec::new();
        for f in d.in_dim(dim) {
            if f.death.is_infinite() {
                ess.push(f.birth);
            } else {
                fin.push((f.birth, f.death));
            }
        }
        (fin, ess)
    };
    let (fa, ea) = split(a);
    let (fb, eb) = split(b);
    if ea.len() != eb.len() {
        return f64::INFINITY;
    }
    let ess = best_permutation(&ea, &eb);
    let fin = best_partial(&fa, &fb, 0, &mut vec![false; fb.len()], 0.0);
    ess.max(fin)
}

fn best_permutation(a: &[f64], b: &[f64]) -> f64 {
    fn go(a: &[f64], b: &[f64], used: &mut Vec<bool>, i: usize, cost: f64) -> f64 {
        if i == a.len() {
            return cost;
        }
        let mut best = f64::INFINITY;
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                best = best.min(go(a, b, used, i + 1, cost.max((a[i] - b[j]).abs())));
                used[j] = false;
            }
        }
        best
    }
    go(a, b, &mut vec![false; b.len()], 0, 0.0)
}

fn best_partial(a: &[(f64, f64)], b: &[(f64, f64)], i: usize, used: &mut Vec<bool>, cost: f64) -> f64 {
    let diag = |p: (f64, f64)| (p.1 - p.0) / 2.0;
    if i == a.len() {
        let rest = b.iter().zip(used.iter()).filter(|(_, &u)| !u).map(|(&p, _)| diag(p)).fold(0.0, f64::max);
        return cost.max(rest);
    }
    let mut best = best_partial(a, b, i + 1, used, cost.max(diag(a[i])));
    for j in 0..b.len() {
        if !used[j] {
            used[j] = true;
            let c = (a[i].0 - b[j].0).abs().max((a[i].1 - b[j].1).abs());
            best = best.min(best_partial(a, b, i + 1, used, cost.max(c)));
            used[j] = false;
        }
    }
    best
}

/// Checks `betti_at` of `diagram` against dense Betti numbers of the
/// filtration's complex at every critical value, for `p < max(max_dim, 1)`.
pub fn betti_curves_agree(filtration: &Filtration, diagram: &PersistenceDiagram) -> Result<(), String> {
    let reported = filtration.max_dim().max(1);
    for t in filtration.critical_values() {
        let complex = filtration.complex_at(t);
        for p in 0..reported {
            let expected = betti_bruteforce(&complex, p).map_err(|e| e.to_string())?;
            let found = diagram.betti_at(p, t);
            if expected != found {
                return Err(format!("β_{p} at t = {t}: oracle {expected}, diagram {found}"));
            }
        }
    }
    Ok(())
}

/// Central finite-difference gradient of the mean loss.
pub fn finite_difference_gradient(model: &MlpModel, cloud: &LabeledPointCloud, h: f64) -> Vec<f64> {
    let base = model.params();
    let mut probe = model.clone();
    (0..base.len())
        .map(|k| {
            let mut p = base.clone();
            p[k] = base[k] + h;
            probe.set_params(&p).unwrap();
            let up = loss(&probe, cloud).unwrap();
            p[k] = base[k] - h;
            probe.set_params(&p).unwrap();
            let down = loss(&probe, cloud).unwrap();
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Largest componentwise relative error `|a - b| / max(|a|, |b|, floor)`.
pub fn max_relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(floor)).fold(0.0, f64::max)
}

/// Every pair of points within the cloud, brute force.
pub fn all_pairs_within(points: &PointCloud, eps: f64) -> Vec<Edge> {
    let mut out = Vec::new();
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            let d: f64 = points.point(a).iter().zip(points.point(b)).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            if d <= eps {
                out.push((a, b));
            }
        }
    }
    out
}
