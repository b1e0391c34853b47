//! Hop-count distances, shortest-path enumeration and metric balls.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

pub const DEFAULT_PATH_CAP: usize = 10_000;

/// BFS hop counts from `x`; `None` marks vertices in other components.
pub fn distances_from(g: &WeightedGraph, x: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.len()];
    let mut queue = VecDeque::new();
    dist[x] = Some(0);
    queue.push_back(x);
    while let Some(v) = queue.pop_front() {
        let d = dist[v].unwrap_or(0);
        for &(w, _) in g.neighbors(v) {
            if dist[w].is_none() {
                dist[w] = Some(d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Number of edges on a shortest path, `None` when disconnected.
pub fn distance(g: &WeightedGraph, x: usize, y: usize) -> Option<usize> {
    distances_from(g, x)[y]
}

/// All-pairs hop counts, row `x` holding distances from `x`.
pub fn distance_matrix(g: &WeightedGraph) -> Vec<Vec<Option<usize>>> {
    (0..g.len()).map(|x| distances_from(g, x)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShortestPaths {
    /// Each path runs from `x` to `y` and has `dist(x, y) + 1` vertices.
    pub paths: Vec<Vec<usize>>,
    /// Set when more paths exist than the cap allowed.
    pub truncated: bool,
}

/// Enumerates shortest paths from `x` to `y` in lexicographic order of
/// vertex indices, walking the BFS layer DAG towards `y`.
pub fn shortest_paths(g: &WeightedGraph, x: usize, y: usize, cap: usize) -> Result<ShortestPaths> {
    if cap == 0 {
        return Err(Error::InvalidParameter("path cap must be at least 1".into()));
    }
    let to_y = distances_from(g, y);
    let Some(eta) = to_y[x] else {
        return Err(Error::Disconnected { a: g.label(x).into(), b: g.label(y).into() });
    };

    let mut paths = Vec::new();
    let mut truncated = false;
    // Stack of (vertex, next neighbour slot to try).
    let mut path = vec![x];
    let mut cursor = vec![0usize];
    if eta == 0 {
        return Ok(ShortestPaths { paths: vec![path], truncated: false });
    }
    while let Some(&v) = path.last() {
        if v == y {
            if paths.len() == cap {
                truncated = true;
                break;
            }
            paths.push(path.clone());
            path.pop();
            cursor.pop();
            continue;
        }
        let remaining = to_y[v].unwrap_or(usize::MAX);
        let slot = cursor.last_mut().expect("cursor tracks path");
        let next = g.neighbors(v)[*slot..]
            .iter()
            .position(|&(w, _)| to_y[w].is_some_and(|d| d + 1 == remaining));
        match next {
            Some(offset) => {
                let w = g.neighbors(v)[*slot + offset].0;
                *slot += offset + 1;
                path.push(w);
                cursor.push(0);
            }
            None => {
                path.pop();
                cursor.pop();
            }
        }
    }
    Ok(ShortestPaths { paths, truncated })
}

/// Checks that `path` is a shortest path between its endpoints and returns
/// its length in edges.
pub fn validate_shortest_path(g: &WeightedGraph, path: &[usize]) -> Result<usize> {
    let (&first, &last) = match (path.first(), path.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::NotShortestPath("empty path".into())),
    };
    for pair in path.windows(2) {
        if g.weight(pair[0], pair[1]).is_none() {
            return Err(Error::NotShortestPath(format!(
                "{} and {} are not adjacent",
                g.label(pair[0]),
                g.label(pair[1])
            )));
        }
    }
    let eta = path.len() - 1;
    match distance(g, first, last) {
        Some(d) if d == eta => Ok(eta),
        Some(d) => Err(Error::NotShortestPath(format!("path has {eta} edges but distance is {d}"))),
        None => Err(Error::Disconnected { a: g.label(first).into(), b: g.label(last).into() }),
    }
}

/// `Σ_{z : dist(x,z) ≤ r} ϑ(z)`.
pub fn ball_volume(g: &WeightedGraph, x: usize, r: f64) -> f64 {
    ball_volume_with(g, &distances_from(g, x), r)
}

/// Ball volume from precomputed distances out of the centre.
pub fn ball_volume_with(g: &WeightedGraph, dist: &[Option<usize>], r: f64) -> f64 {
    dist.iter()
        .enumerate()
        .filter(|(_, d)| d.is_some_and(|d| d as f64 <= r))
        .map(|(z, _)| g.theta(z))
        .sum()
}
