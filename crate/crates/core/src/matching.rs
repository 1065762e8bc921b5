//! Hopcroft–Karp maximum bipartite matching.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

const FREE: usize = usize::MAX;

/// Size of a maximum matching. `adjacency[l]` lists the right vertices
/// (`0..n_right`) adjacent to left vertex `l`.
pub(crate) fn maximum_matching(adjacency: &[Vec<usize>], n_right: usize) -> usize {
    let n_left = adjacency.len();
    let mut match_left = vec![FREE; n_left];
    let mut match_right = vec![FREE; n_right];
    let mut dist = vec![0usize; n_left];
    let mut size = 0;
    loop {
        // layer the free left vertices by alternating BFS
        let mut queue = VecDeque::new();
        for l in 0..n_left {
            if match_left[l] == FREE {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(l) = queue.pop_front() {
            for &r in &adjacency[l] {
                let next = match_right[r];
                if next == FREE {
                    found = true;
                } else if dist[next] == usize::MAX {
                    dist[next] = dist[l] + 1;
                    queue.push_back(next);
                }
            }
        }
        if !found {
            return size;
        }
        let mut cursor = vec![0usize; n_left];
        for l in 0..n_left {
            if match_left[l] == FREE && augment(l, adjacency, &mut match_left, &mut match_right, &mut dist, &mut cursor) {
                size += 1;
            }
        }
    }
}

fn augment(
    start: usize,
    adjacency: &[Vec<usize>],
    match_left: &mut [usize],
    match_right: &mut [usize],
    dist: &mut [usize],
    cursor: &mut [usize],
) -> bool {
    // iterative DFS along the BFS layers
    let mut path: Vec<usize> = vec![start];
    while let Some(&l) = path.last() {
        if cursor[l] == adjacency[l].len() {
            dist[l] = usize::MAX;
            path.pop();
            continue;
        }
        let r = adjacency[l][cursor[l]];
        cursor[l] += 1;
        let next = match_right[r];
        if next == FREE {
            // flip the alternating path ending at r
            let mut r = r;
            while let Some(l) = path.pop() {
                let previous = match_left[l];
                match_left[l] = r;
                match_right[r] = l;
                r = previous;
            }
            return true;
        }
        if dist[next] == dist[l].wrapping_add(1) {
            path.push(next);
        }
    }
    false
}
