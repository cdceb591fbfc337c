//! Shortest-path kernels: Dijkstra on compressed adjacency and dense
//! Floyd–Warshall.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::Matrix;

/// Compressed sparse row adjacency. Neighbors of `v` are
/// `targets[offsets[v]..offsets[v + 1]]`; edge data arrays share that indexing.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Csr {
    pub offsets: Vec<usize>,
    pub targets: Vec<u32>,
}

impl Csr {
    /// Builds from per-vertex neighbor lists.
    pub fn from_adjacency(adj: &[Vec<u32>]) -> Self {
        let mut offsets = Vec::with_capacity(adj.len() + 1);
        let mut targets = Vec::with_capacity(adj.iter().map(Vec::len).sum());
        offsets.push(0);
        for nbrs in adj {
            targets.extend_from_slice(nbrs);
            offsets.push(targets.len());
        }
        Self { offsets, targets }
    }

    pub fn num_vertices(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn num_edges(&self) -> usize {
        self.targets.len()
    }

    #[inline]
    pub fn edges(&self, v: usize) -> std::ops::Range<usize> {
        self.offsets[v]..self.offsets[v + 1]
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
struct State {
    dist: f64,
    node: u32,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on distance; equal distances pop the lower index first.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single- or multi-source shortest-path tree.
#[derive(Clone, Debug)]
pub struct ShortestPaths {
    pub dist: Vec<f64>,
    /// Predecessor on a shortest path; `u32::MAX` for sources and unreached.
    pub pred: Vec<u32>,
}

pub const NO_PRED: u32 = u32::MAX;

impl ShortestPaths {
    pub fn reached(&self, v: usize) -> bool {
        self.dist[v].is_finite()
    }

    /// Vertex sequence from the source tree root to `v`, or `None` if
    /// unreached.
    pub fn path_to(&self, v: usize) -> Option<Vec<usize>> {
        if !self.reached(v) {
            return None;
        }
        let mut path = vec![v];
        let mut cur = v;
        while self.pred[cur] != NO_PRED {
            cur = self.pred[cur] as usize;
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }
}

/// Dijkstra from `sources` (all at distance 0). Stops early once `target`
/// is settled.
pub fn dijkstra(csr: &Csr, weights: &[f64], sources: &[usize], target: Option<usize>) -> ShortestPaths {
    let n = csr.num_vertices();
    debug_assert_eq!(weights.len(), csr.num_edges());
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![NO_PRED; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        if dist[s] > 0.0 {
            dist[s] = 0.0;
            heap.push(State {
                dist: 0.0,
                node: s as u32,
            });
        }
    }
    while let Some(State { dist: d, node }) = heap.pop() {
        let u = node as usize;
        if done[u] {
            continue;
        }
        done[u] = true;
        if Some(u) == target {
            break;
        }
        for e in csr.edges(u) {
            let v = csr.targets[e] as usize;
            if done[v] {
                continue;
            }
            let nd = d + weights[e];
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = node;
                heap.push(State { dist: nd, node: v as u32 });
            }
        }
    }
    ShortestPaths { dist, pred }
}

/// In-place all-pairs shortest paths. Entries may be `+∞` for missing
/// edges. Rows of each relaxation round run in parallel; the result does not
/// depend on scheduling.
pub fn floyd_warshall(m: &mut Matrix) {
    let n = m.len();
    if n == 0 {
        return;
    }
    let mut pivot = vec![0.0; n];
    for k in 0..n {
        pivot.copy_from_slice(m.row(k));
        let pivot = &pivot;
        m.as_mut_slice().par_chunks_mut(n).with_min_len(32).for_each(|row| {
            let dik = row[k];
            if dik.is_infinite() {
                return;
            }
            for (dij, &dkj) in row.iter_mut().zip(pivot) {
                let via = dik + dkj;
                if via < *dij {
                    *dij = via;
                }
            }
        });
    }
}
