//! Per-layer k-nearest-neighbour graphs and the radius-based edge filter used
//! to build kNN-VR complexes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layerstack::PointCloud;
use crate::unionfind::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
    pub length: f64,
}

/// Undirected graph with Euclidean edge lengths. Edges are kept sorted by
/// `(u, v)` with `u < v`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    n_vertices: usize,
    edges: Vec<Edge>,
}

impl NeighborGraph {
    /// Builds a graph from arbitrary vertex pairs, normalising orientation and
    /// dropping duplicates (first length wins).
    pub fn from_edges(n_vertices: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut out: Vec<Edge> = Vec::new();
        for e in edges {
            if e.u == e.v {
                return Err(Error::invalid(format!("self-loop at vertex {}", e.u)));
            }
            if e.u as usize >= n_vertices || e.v as usize >= n_vertices {
                return Err(Error::invalid(format!(
                    "edge ({}, {}) out of range for {n_vertices} vertices",
                    e.u, e.v
                )));
            }
            if e.length.is_nan() || e.length < 0.0 {
                return Err(Error::invalid("edge length must be a non-negative number"));
            }
            out.push(Edge {
                u: e.u.min(e.v),
                v: e.u.max(e.v),
                length: e.length,
            });
        }
        out.sort_by_key(|e| (e.u, e.v));
        out.dedup_by_key(|e| (e.u, e.v));
        Ok(NeighborGraph {
            n_vertices,
            edges: out,
        })
    }

    /// Unit-length graph from index pairs; handy for combinatorial tests.
    pub fn from_pairs(n_vertices: usize, pairs: &[(u32, u32)]) -> Result<Self> {
        Self::from_edges(
            n_vertices,
            pairs.iter().map(|&(u, v)| Edge { u, v, length: 1.0 }),
        )
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        let key = (a.min(b), a.max(b));
        self.edges
            .binary_search_by_key(&key, |e| (e.u, e.v))
            .is_ok()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_vertices];
        for e in &self.edges {
            deg[e.u as usize] += 1;
            deg[e.v as usize] += 1;
        }
        deg
    }

    /// Sorted adjacency lists.
    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.n_vertices];
        for e in &self.edges {
            adj[e.u as usize].push(e.v);
            adj[e.v as usize].push(e.u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    pub fn max_length(&self) -> Option<f64> {
        self.edges.iter().map(|e| e.length).reduce(f64::max)
    }
}

pub fn euclidean(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = f64::from(*x) - f64::from(*y);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// The `k` nearest neighbours of point `i`, ordered by (distance, index).
pub fn nearest_neighbors(cloud: &PointCloud, i: usize, k: usize) -> Vec<(f64, u32)> {
    let p = cloud.point(i);
    let mut cand: Vec<(f64, u32)> = (0..cloud.n_points())
        .filter(|&j| j != i)
        .map(|j| (euclidean(p, cloud.point(j)), j as u32))
        .collect();
    let cmp = |a: &(f64, u32), b: &(f64, u32)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < cand.len() {
        cand.select_nth_unstable_by(k - 1, cmp);
        cand.truncate(k);
    }
    cand.sort_by(cmp);
    cand
}

/// Exact kNN graph, union-symmetrised: `{i, j}` is an edge when either point
/// ranks the other among its `k` nearest.
pub fn knn_graph(cloud: &PointCloud, k: usize) -> Result<NeighborGraph> {
    let n = cloud.n_points();
    if k == 0 || k >= n {
        return Err(Error::invalid(format!("k = {k} must be in 1..{n}")));
    }
    let proposals: Vec<Edge> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            nearest_neighbors(cloud, i, k)
                .into_iter()
                .map(move |(length, j)| Edge {
                    u: i as u32,
                    v: j,
                    length,
                })
        })
        .collect();
    NeighborGraph::from_edges(n, proposals)
}

/// Which side of the radius survives the filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeFilter {
    /// Drop edges of length `<= R` and keep the longer-range connections.
    #[default]
    RemoveShort,
    /// Conventional Vietoris-Rips direction: keep edges of length `<= R`.
    KeepShort,
}

impl EdgeFilter {
    fn keeps(self, length: f64, radius: f64) -> bool {
        match self {
            EdgeFilter::RemoveShort => length > radius,
            EdgeFilter::KeepShort => length <= radius,
        }
    }
}

pub fn filter_edges(graph: &NeighborGraph, radius: f64, mode: EdgeFilter) -> NeighborGraph {
    NeighborGraph {
        n_vertices: graph.n_vertices,
        edges: graph
            .edges
            .iter()
            .copied()
            .filter(|e| mode.keeps(e.length, radius))
            .collect(),
    }
}

/// Keeps exactly the edges longer than `radius`.
pub fn filter_short_edges(graph: &NeighborGraph, radius: f64) -> NeighborGraph {
    filter_edges(graph, radius, EdgeFilter::RemoveShort)
}

pub fn connected_components(graph: &NeighborGraph) -> usize {
    let mut uf = UnionFind::new(graph.n_vertices);
    for e in &graph.edges {
        uf.union(e.u as usize, e.v as usize);
    }
    uf.components()
}

/// Target range for the number of connected components after filtering, and
/// the radii chosen for each layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VrCalibration {
    pub beta0_target: usize,
    pub beta0_tolerance: usize,
    #[serde(default)]
    pub per_layer_radius: Vec<f64>,
}

fn beta0_after(graph: &NeighborGraph, radius: f64, mode: EdgeFilter) -> usize {
    let mut uf = UnionFind::new(graph.n_vertices);
    for e in graph.edges.iter().filter(|e| mode.keeps(e.length, radius)) {
        uf.union(e.u as usize, e.v as usize);
    }
    uf.components()
}

/// Smallest realised edge length `R` such that β₀ of the filtered graph lies
/// in `[target - tolerance, target + tolerance]`.
pub fn calibrate_radius(graph: &NeighborGraph, target: usize, tolerance: usize) -> Result<f64> {
    calibrate_radius_with(graph, target, tolerance, EdgeFilter::RemoveShort)
}

pub fn calibrate_radius_with(
    graph: &NeighborGraph,
    target: usize,
    tolerance: usize,
    mode: EdgeFilter,
) -> Result<f64> {
    if target == 0 {
        return Err(Error::invalid("beta0 target must be at least 1"));
    }
    let lo = target.saturating_sub(tolerance);
    let hi = target + tolerance;
    let mut radii: Vec<f64> = graph.edges.iter().map(|e| e.length).collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();

    if radii.is_empty() {
        let b = graph.n_vertices;
        return if (lo..=hi).contains(&b) {
            Ok(0.0)
        } else {
            Err(infeasible(lo, hi, [b]))
        };
    }

    // β₀ is monotone in R (non-decreasing when removing short edges,
    // non-increasing when keeping them). Find the first index whose β₀ has
    // crossed into the side of the range bound we approach from.
    let beta = |i: usize| beta0_after(graph, radii[i], mode);
    let crossed = |b: usize| match mode {
        EdgeFilter::RemoveShort => b >= lo,
        EdgeFilter::KeepShort => b <= hi,
    };
    let (mut left, mut right) = (0usize, radii.len());
    while left < right {
        let mid = (left + right) / 2;
        if crossed(beta(mid)) {
            right = mid;
        } else {
            left = mid + 1;
        }
    }
    if left == radii.len() {
        return Err(infeasible(lo, hi, [beta(radii.len() - 1)]));
    }
    let b = beta(left);
    if (lo..=hi).contains(&b) {
        return Ok(radii[left]);
    }
    let mut seen = vec![b];
    if left > 0 {
        seen.push(beta(left - 1));
    }
    Err(infeasible(lo, hi, seen))
}

fn infeasible(lo: usize, hi: usize, achieved: impl IntoIterator<Item = usize>) -> Error {
    let (mut below, mut above) = (None::<usize>, None::<usize>);
    for b in achieved {
        if b < lo {
            below = Some(below.map_or(b, |x| x.max(b)));
        } else if b > hi {
            above = Some(above.map_or(b, |x| x.min(b)));
        }
    }
    Error::Infeasible {
        lo,
        hi,
        below,
        above,
    }
}

/// kNN graph per layer, computed in parallel.
pub fn knn_graphs(layers: &[PointCloud], k: usize) -> Result<Vec<NeighborGraph>> {
    layers.par_iter().map(|c| knn_graph(c, k)).collect()
}
