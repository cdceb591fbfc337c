//! Grid discretization of a domain and quasihyperbolic shortest paths.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::shape::DomainSpec;
use crate::graph::{dijkstra, Csr};
use crate::metric::euclid;
use crate::{Error, Result};

/// Axis-aligned sampling window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Window {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len()
            || lo.iter().chain(&hi).any(|v| !v.is_finite())
            || lo.iter().zip(&hi).any(|(a, b)| a >= b)
        {
            return Err(Error::Input(format!(
                "window {lo:?}..{hi:?} must be bounded with lo < hi"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// Parses `x0,y0,x1,y1` (or the 3D analogue).
    pub fn parse(s: &str) -> Result<Self> {
        let v = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("window `{s}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if v.len() != 4 && v.len() != 6 {
            return Err(Error::Parse(format!(
                "window `{s}` needs 4 (2D) or 6 (3D) numbers"
            )));
        }
        let d = v.len() / 2;
        Self::new(v[..d].to_vec(), v[d..].to_vec())
    }

    pub fn dimension(&self) -> usize {
        self.lo.len()
    }
}

/// Neighbor offsets in grid steps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stencil {
    /// 8 neighbors in 2D, 26 in 3D.
    Moore,
    /// All primitive offsets with entries in −2..=2: 16 neighbors in 2D,
    /// 98 in 3D.
    #[default]
    Extended,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Stencil {
    pub fn offsets(self, dim: usize) -> Vec<[i64; 3]> {
        let r: i64 = match self {
            Stencil::Moore => 1,
            Stencil::Extended => 2,
        };
        let zr = if dim == 3 { r } else { 0 };
        let mut out = Vec::new();
        for dz in -zr..=zr {
            for dy in -r..=r {
                for dx in -r..=r {
                    if (dx, dy, dz) == (0, 0, 0) {
                        continue;
                    }
                    if gcd(gcd(dx, dy), dz) == 1 {
                        out.push([dx, dy, dz]);
                    }
                }
            }
        }
        out
    }
}

/// Grid nodes with clearance above h, joined by stencil edges whose segment
/// stays inside the domain.
#[derive(Clone, Debug)]
pub struct QhGraph {
    pub dim: usize,
    pub h: f64,
    pub window: Window,
    pub stencil: Stencil,
    counts: [usize; 3],
    /// Node coordinates, `dim` per node.
    coords: Vec<f64>,
    pub clearance: Vec<f64>,
    cell: Vec<[usize; 3]>,
    lookup: Vec<u32>,
    pub csr: Csr,
    pub w_eucl: Vec<f64>,
    pub w_qh: Vec<f64>,
}

const NONE: u32 = u32::MAX;

impl QhGraph {
    pub fn num_nodes(&self) -> usize {
        self.clearance.len()
    }

    pub fn point(&self, v: usize) -> &[f64] {
        &self.coords[v * self.dim..(v + 1) * self.dim]
    }

    fn linear(&self, c: [usize; 3]) -> usize {
        c[0] + self.counts[0] * (c[1] + self.counts[1] * c[2])
    }

    /// Node at grid cell `c`, if any.
    pub fn node_at(&self, c: [usize; 3]) -> Option<usize> {
        if (0..3).any(|k| c[k] >= self.counts[k]) {
            return None;
        }
        let v = self.lookup[self.linear(c)];
        (v != NONE).then_some(v as usize)
    }

    pub fn cell_of(&self, v: usize) -> [usize; 3] {
        self.cell[v]
    }

    /// Nearest node within distance h of `x`, with the snap distance; ties
    /// go to the lower node index.
    pub fn snap(&self, x: &[f64]) -> Result<(usize, f64)> {
        if x.len() != self.dim {
            return Err(Error::Input(format!(
                "point {x:?} does not have dimension {}",
                self.dim
            )));
        }
        let mut center = [0i64; 3];
        for k in 0..self.dim {
            center[k] = ((x[k] - self.window.lo[k]) / self.h).round() as i64;
        }
        let zr = if self.dim == 3 { 1 } else { 0 };
        let mut best: Option<(f64, usize)> = None;
        for dz in -zr..=zr {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let c = [center[0] + dx, center[1] + dy, center[2] + dz];
                    if c.iter().any(|&v| v < 0) {
                        continue;
                    }
                    let Some(v) = self.node_at(c.map(|v| v as usize)) else {
                        continue;
                    };
                    let d = euclid(x, self.point(v));
                    if best.is_none_or(|(bd, bv)| d < bd || (d == bd && v < bv)) {
                        best = Some((d, v));
                    }
                }
            }
        }
        match best {
            Some((d, v)) if d <= self.h * (1.0 + 1e-9) => Ok((v, d)),
            _ => Err(Error::Domain(format!(
                "no grid node within h = {} of {x:?}",
                self.h
            ))),
        }
    }

    /// Nodes missing at least one stencil neighbor; they carry the extreme
    /// points of the node set.
    pub fn frontier(&self) -> Vec<usize> {
        let full = self.stencil.offsets(self.dim).len();
        (0..self.num_nodes())
            .filter(|&v| self.csr.edges(v).len() < full)
            .collect()
    }
}

/// Samples `spec` on the grid window.lo + h·ℤ^d inside `window`.
pub fn discretize(spec: &DomainSpec, h: f64, window: &Window, stencil: Stencil) -> Result<QhGraph> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Parameter(format!("grid spacing h = {h} must be positive")));
    }
    let dim = spec.dimension;
    if window.dimension() != dim {
        return Err(Error::Input(format!(
            "window has dimension {}, domain has {dim}",
            window.dimension()
        )));
    }
    let mut counts = [1usize; 3];
    for (k, count) in counts.iter_mut().enumerate().take(dim) {
        let steps = ((window.hi[k] - window.lo[k]) / h + 1e-9).floor();
        if steps > 1e7 {
            return Err(Error::Resolution(format!("h = {h} gives too many grid points")));
        }
        *count = steps as usize + 1;
    }
    let total = counts[0] * counts[1] * counts[2];
    if total > 50_000_000 {
        return Err(Error::Resolution(format!(
            "h = {h} gives {total} grid points; coarsen the grid or shrink the window"
        )));
    }
    let point_of = |lin: usize| -> ([usize; 3], Vec<f64>) {
        let c = [lin % counts[0], (lin / counts[0]) % counts[1], lin / (counts[0] * counts[1])];
        let p = (0..dim).map(|k| window.lo[k] + c[k] as f64 * h).collect();
        (c, p)
    };
    let kept: Vec<(usize, f64)> = (0..total)
        .into_par_iter()
        .filter_map(|lin| {
            let (_, p) = point_of(lin);
            let c = spec.clearance(&p);
            (c > h).then_some((lin, c))
        })
        .collect();
    if kept.is_empty() {
        return Err(Error::Resolution(format!(
            "no grid point in the window has clearance above h = {h}; try a smaller h"
        )));
    }
    if kept.len() >= NONE as usize {
        return Err(Error::Resolution("too many nodes".into()));
    }
    let mut lookup = vec![NONE; total];
    let mut coords = Vec::with_capacity(kept.len() * dim);
    let mut clearance = Vec::with_capacity(kept.len());
    let mut cell = Vec::with_capacity(kept.len());
    for (v, &(lin, c)) in kept.iter().enumerate() {
        lookup[lin] = v as u32;
        let (g, p) = point_of(lin);
        coords.extend_from_slice(&p);
        clearance.push(c);
        cell.push(g);
    }
    let mut graph = QhGraph {
        dim,
        h,
        window: window.clone(),
        stencil,
        counts,
        coords,
        clearance,
        cell,
        lookup,
        csr: Csr::default(),
        w_eucl: Vec::new(),
        w_qh: Vec::new(),
    };
    let offsets = stencil.offsets(dim);
    let lens: Vec<f64> = offsets
        .iter()
        .map(|o| h * ((o[0] * o[0] + o[1] * o[1] + o[2] * o[2]) as f64).sqrt())
        .collect();
    let adj: Vec<Vec<(u32, f64, f64)>> = (0..graph.num_nodes())
        .into_par_iter()
        .map(|u| {
            let cu = graph.cell[u];
            let du = graph.clearance[u];
            let mut out = Vec::new();
            for (o, &len) in offsets.iter().zip(&lens) {
                let c = [cu[0] as i64 + o[0], cu[1] as i64 + o[1], cu[2] as i64 + o[2]];
                if c.iter().any(|&v| v < 0) {
                    continue;
                }
                let Some(v) = graph.node_at(c.map(|v| v as usize)) else {
                    continue;
                };
                let dv = graph.clearance[v];
                // Every point of the segment is within len/2 of an endpoint.
                if du.min(dv) > len / 2.0 {
                    out.push((v as u32, len, len * 2.0 / (du + dv)));
                }
            }
            out
        })
        .collect();
    let targets: Vec<Vec<u32>> = adj.iter().map(|a| a.iter().map(|e| e.0).collect()).collect();
    graph.csr = Csr::from_adjacency(&targets);
    graph.w_eucl = adj.iter().flatten().map(|e| e.1).collect();
    graph.w_qh = adj.iter().flatten().map(|e| e.2).collect();
    Ok(graph)
}

/// A shortest path between snapped endpoints.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphPath {
    pub value: f64,
    pub nodes: Vec<usize>,
    /// Distances from the query points to their snapped nodes.
    pub snap: [f64; 2],
}

impl GraphPath {
    pub fn points(&self, g: &QhGraph) -> Vec<Vec<f64>> {
        self.nodes.iter().map(|&v| g.point(v).to_vec()).collect()
    }

    /// Euclidean length of the node polyline.
    pub fn euclidean_length(&self, g: &QhGraph) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| euclid(g.point(w[0]), g.point(w[1])))
            .sum()
    }
}

fn path_between(g: &QhGraph, weights: &[f64], a: usize, b: usize, snap: [f64; 2]) -> Result<GraphPath> {
    let sp = dijkstra(&g.csr, weights, &[a], Some(b));
    let nodes = sp.path_to(b).ok_or_else(|| {
        Error::Connectivity(format!(
            "{:?} and {:?} lie in different components",
            g.point(a),
            g.point(b)
        ))
    })?;
    Ok(GraphPath {
        value: sp.dist[b],
        nodes,
        snap,
    })
}

/// Quasihyperbolic distance estimate k̂ and its geodesic.
pub fn qh_distance(g: &QhGraph, x: &[f64], y: &[f64]) -> Result<GraphPath> {
    let (a, sa) = g.snap(x)?;
    let (b, sb) = g.snap(y)?;
    path_between(g, &g.w_qh, a, b, [sa, sb])
}

pub fn qh_distance_nodes(g: &QhGraph, a: usize, b: usize) -> Result<GraphPath> {
    path_between(g, &g.w_qh, a, b, [0.0, 0.0])
}

/// Euclidean shortest path inside the graph.
pub fn euclidean_path(g: &QhGraph, x: &[f64], y: &[f64]) -> Result<GraphPath> {
    let (a, sa) = g.snap(x)?;
    let (b, sb) = g.snap(y)?;
    path_between(g, &g.w_eucl, a, b, [sa, sb])
}

pub fn euclidean_path_nodes(g: &QhGraph, a: usize, b: usize) -> Result<GraphPath> {
    path_between(g, &g.w_eucl, a, b, [0.0, 0.0])
}

/// j(x,y) = log(1 + |x−y| / min(d(x), d(y))).
pub fn j_metric(spec: &DomainSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    let (dx, dy) = (spec.clearance(x), spec.clearance(y));
    if dx <= 0.0 || dy <= 0.0 {
        return Err(Error::Domain(format!(
            "j is defined for interior points only ({x:?}, {y:?})"
        )));
    }
    Ok((euclid(x, y) / dx.min(dy)).ln_1p())
}
