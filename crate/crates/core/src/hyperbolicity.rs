//! Gromov products, four-point hyperbolicity, Busemann-normalized products
//! and rough starlikeness.

use rayon::prelude::*;
use serde::Serialize;

use crate::graph::{dijkstra, Csr};
use crate::metric::{FiniteMetricSpace, Matrix};
use crate::{Error, Result, TAU_REL};

/// (x|y)_w = ½(d(x,w) + d(y,w) − d(x,y)).
#[inline]
pub fn gromov_product(d: &Matrix, x: usize, y: usize, w: usize) -> f64 {
    0.5 * (d.get(x, w) + d.get(y, w) - d.get(x, y))
}

/// All Gromov products at a fixed base point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GromovProductMatrix {
    pub base: String,
    pub base_index: usize,
    pub labels: Vec<String>,
    pub products: Matrix,
}

impl GromovProductMatrix {
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.products.get(x, y)
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Label(label.to_string()))
    }
}

pub fn gromov_products(space: &FiniteMetricSpace, w: &str) -> Result<GromovProductMatrix> {
    let wi = space.index_of(w)?;
    Ok(gromov_products_at(space, wi))
}

pub fn gromov_products_at(space: &FiniteMetricSpace, w: usize) -> GromovProductMatrix {
    let d = space.dist();
    GromovProductMatrix {
        base: space.labels()[w].clone(),
        base_index: w,
        labels: space.labels().to_vec(),
        products: Matrix::from_fn(space.len(), |x, y| gromov_product(d, x, y, w)),
    }
}

/// min{(x|z)_w, (z|y)_w} − (x|y)_w.
#[inline]
pub fn four_point_excess(d: &Matrix, x: usize, y: usize, z: usize, w: usize) -> f64 {
    let xz = gromov_product(d, x, z, w);
    let zy = gromov_product(d, z, y, w);
    xz.min(zy) - gromov_product(d, x, y, w)
}

/// δ together with a quadruple attaining it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HyperbolicityCertificate {
    pub delta: f64,
    /// (x, y, z, w) with δ = min{(x|z)_w, (z|y)_w} − (x|y)_w.
    pub witness: [String; 4],
    pub witness_index: [usize; 4],
    /// Whether δ was maximized over every base point.
    pub sup_over_base: bool,
}

impl HyperbolicityCertificate {
    /// Recomputes the excess at the witness.
    pub fn reevaluate(&self, space: &FiniteMetricSpace) -> f64 {
        let [x, y, z, w] = self.witness_index;
        four_point_excess(space.dist(), x, y, z, w)
    }
}

type Candidate = (f64, [usize; 4]);

/// Larger value wins; equal values go to the lexicographically smaller
/// label quadruple.
fn pick(a: Candidate, b: Candidate, rank: &[usize]) -> Candidate {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Less => b,
        std::cmp::Ordering::Equal => {
            let ra = a.1.map(|i| rank[i]);
            let rb = b.1.map(|i| rank[i]);
            if ra <= rb {
                a
            } else {
                b
            }
        }
    }
}

fn label_rank(labels: &[String]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|&a, &b| labels[a].cmp(&labels[b]));
    let mut rank = vec![0; labels.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    rank
}

fn scan_base(space: &FiniteMetricSpace, w: usize, rank: &[usize]) -> Candidate {
    let n = space.len();
    let g = gromov_products_at(space, w).products;
    (0..n)
        .into_par_iter()
        .map(|x| {
            let mut best: Candidate = (f64::NEG_INFINITY, [x, x, x, w]);
            for y in 0..n {
                let xy = g.get(x, y);
                for z in 0..n {
                    let v = g.get(x, z).min(g.get(z, y)) - xy;
                    if v >= best.0 {
                        best = pick(best, (v, [x, y, z, w]), rank);
                    }
                }
            }
            best
        })
        .reduce(|| (f64::NEG_INFINITY, [w; 4]), |a, b| pick(a, b, rank))
}

/// Four-point δ at base `w`, or the supremum over all bases when `w` is
/// `None` (O(n⁴)).
pub fn delta_four_point(space: &FiniteMetricSpace, w: Option<&str>) -> Result<HyperbolicityCertificate> {
    let n = space.len();
    if n == 0 {
        return Err(Error::Input("empty space".into()));
    }
    let rank = label_rank(space.labels());
    let (delta, witness_index, sup) = match w {
        Some(label) => {
            let wi = space.index_of(label)?;
            let (v, q) = scan_base(space, wi, &rank);
            (v, q, false)
        }
        None => {
            let (v, q) = (0..n)
                .map(|wi| scan_base(space, wi, &rank))
                .reduce(|a, b| pick(a, b, &rank))
                .expect("nonempty");
            (v, q, true)
        }
    };
    let witness = witness_index.map(|i| space.labels()[i].clone());
    Ok(HyperbolicityCertificate {
        delta,
        witness,
        witness_index,
        sup_over_base: sup,
    })
}

/// Products renormalized at a boundary proxy ξ̃:
/// (x|y)_{w,ξ} = (x|y)_w − (ξ̃|x)_w − (ξ̃|y)_w. They approximate the
/// Busemann products only up to 10δ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BusemannChart {
    pub base: String,
    pub anchor: String,
    pub anchor_index: usize,
    pub labels: Vec<String>,
    pub products_b: Matrix,
}

pub fn busemann_products(products: &GromovProductMatrix, anchor: &str) -> Result<BusemannChart> {
    let xi = products.index_of(anchor)?;
    if xi == products.base_index {
        return Err(Error::Configuration(format!(
            "anchor `{anchor}` coincides with the base point"
        )));
    }
    let g = &products.products;
    let products_b = Matrix::from_fn(g.len(), |x, y| g.get(x, y) - g.get(xi, x) - g.get(xi, y));
    Ok(BusemannChart {
        base: products.base.clone(),
        anchor: anchor.to_string(),
        anchor_index: xi,
        labels: products.labels.clone(),
        products_b,
    })
}

/// Empirical rough-starlikeness constant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StarlikeReport {
    pub k: f64,
    /// Point farthest from the union of rays.
    pub witness: usize,
    /// Number of points lying on some ray.
    pub on_rays: usize,
}

fn farthest(dist: impl IndexedParallelIterator<Item = f64>) -> (usize, f64) {
    dist.enumerate().reduce(
            || (usize::MAX, f64::NEG_INFINITY),
            |a, b| match a.1.total_cmp(&b.1) {
                std::cmp::Ordering::Greater => a,
                std::cmp::Ordering::Less => b,
                std::cmp::Ordering::Equal => {
                    if a.0 <= b.0 {
                        a
                    } else {
                        b
                    }
                }
            },
        )
}

/// K for a finite metric space: rays from `w` to each target are the metric
/// intervals {v : d(w,v) + d(v,t) ≤ d(w,t)(1+τ)}.
pub fn rough_starlike_constant(space: &FiniteMetricSpace, w: &str, targets: &[&str]) -> Result<StarlikeReport> {
    let wi = space.index_of(w)?;
    let ts = targets
        .iter()
        .map(|t| space.index_of(t))
        .collect::<Result<Vec<_>>>()?;
    if ts.is_empty() {
        return Err(Error::Input("no ray targets".into()));
    }
    let n = space.len();
    let on_ray: Vec<bool> = (0..n)
        .map(|v| {
            ts.iter()
                .any(|&t| space.d(wi, v) + space.d(v, t) <= space.d(wi, t) * (1.0 + TAU_REL))
        })
        .collect();
    let ray_nodes: Vec<usize> = (0..n).filter(|&v| on_ray[v]).collect();
    let gap: Vec<f64> = (0..n)
        .map(|x| {
            ray_nodes
                .iter()
                .map(|&v| space.d(x, v))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let (witness, k) = farthest(gap.into_par_iter());
    Ok(StarlikeReport {
        k,
        witness,
        on_rays: ray_nodes.len(),
    })
}

/// K on a weighted graph: rays are the shortest paths from `w` to the
/// targets, and distances are graph distances.
pub fn rough_starlike_constant_graph(csr: &Csr, weights: &[f64], w: usize, targets: &[usize]) -> Result<StarlikeReport> {
    if targets.is_empty() {
        return Err(Error::Input("no ray targets".into()));
    }
    let n = csr.num_vertices();
    let from_w = dijkstra(csr, weights, &[w], None);
    if let Some(v) = (0..n).find(|&v| !from_w.reached(v)) {
        return Err(Error::Connectivity(format!("vertex {v} is unreachable from the base")));
    }
    let per_target: Vec<Vec<bool>> = targets
        .par_iter()
        .map(|&t| {
            let from_t = dijkstra(csr, weights, &[t], None);
            let total = from_w.dist[t];
            (0..n)
                .map(|v| from_w.dist[v] + from_t.dist[v] <= total * (1.0 + TAU_REL))
                .collect()
        })
        .collect();
    let ray_nodes: Vec<usize> = (0..n)
        .filter(|&v| per_target.iter().any(|mask| mask[v]))
        .collect();
    let to_rays = dijkstra(csr, weights, &ray_nodes, None);
    let (witness, k) = farthest(to_rays.dist.into_par_iter());
    Ok(StarlikeReport {
        k,
        witness,
        on_rays: ray_nodes.len(),
    })
}
