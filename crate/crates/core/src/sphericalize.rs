//! Sphericalization of a finite metric space about a base point, its chain
//! metrization, and the associated density, curve length and measure.

use serde::Serialize;

use crate::graph::floyd_warshall;
use crate::metric::{euclid, FiniteMetricSpace, Matrix, QuasiMetricSpace, INFINITY_TOKEN};
use crate::{Error, Result, TAU_ABS};

/// The quasimetric d_a on X ∪ {∞}:
/// d(x,y)/((1+d(x,a))(1+d(y,a))) between points, 1/(1+d(x,a)) to ∞.
/// The point at infinity is appended last.
pub fn sphericalize_quasimetric(space: &FiniteMetricSpace, a: &str) -> Result<QuasiMetricSpace> {
    let ai = space.index_of(a)?;
    if space.labels().iter().any(|l| l == INFINITY_TOKEN) {
        return Err(Error::Input(format!(
            "label `{INFINITY_TOKEN}` is reserved for the point at infinity"
        )));
    }
    let n = space.len();
    let scale: Vec<f64> = (0..n).map(|x| 1.0 + space.d(x, ai)).collect();
    let dist = Matrix::from_fn(n + 1, |i, j| match (i == n, j == n) {
        (true, true) => 0.0,
        (true, false) => 1.0 / scale[j],
        (false, true) => 1.0 / scale[i],
        (false, false) => space.d(i, j) / (scale[i] * scale[j]),
    });
    let mut labels = space.labels().to_vec();
    labels.push(INFINITY_TOKEN.to_string());
    QuasiMetricSpace::new(labels, dist)
}

/// Infimum of summed quasidistances over finite chains, i.e. all-pairs
/// shortest paths on the complete graph.
pub fn shortest_chains(quasi: &Matrix) -> Matrix {
    let mut m = quasi.clone();
    floyd_warshall(&mut m);
    m
}

/// Chain metrization of a quasimetric. A pair whose chain distance
/// collapses to at most [`TAU_ABS`] is reported as degenerate.
pub fn chain_metrize(quasi: &QuasiMetricSpace) -> Result<FiniteMetricSpace> {
    let m = shortest_chains(quasi.dist());
    let n = m.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = m.get(i, j);
            if v <= TAU_ABS {
                return Err(Error::DegenerateMetrization {
                    a: quasi.labels()[i].clone(),
                    b: quasi.labels()[j].clone(),
                    value: v,
                });
            }
        }
    }
    Ok(FiniteMetricSpace::from_parts_unchecked(
        quasi.labels().to_vec(),
        m,
    ))
}

/// A sphericalized space with both the raw quasimetric and its metrization.
#[derive(Clone, Debug)]
pub struct SphericalizedSpace {
    pub quasi: QuasiMetricSpace,
    pub metrized: FiniteMetricSpace,
    pub base_label: String,
    /// max over pairs of d_a / d̂_a; at most 4.
    pub comparison_ratio: f64,
}

pub fn sphericalize(space: &FiniteMetricSpace, a: &str) -> Result<SphericalizedSpace> {
    let quasi = sphericalize_quasimetric(space, a)?;
    let metrized = chain_metrize(&quasi)?;
    let n = quasi.len();
    let mut ratio: f64 = 1.0;
    for i in 0..n {
        for j in (i + 1)..n {
            ratio = ratio.max(quasi.dist().get(i, j) / metrized.d(i, j));
        }
    }
    Ok(SphericalizedSpace {
        quasi,
        metrized,
        base_label: a.to_string(),
        comparison_ratio: ratio,
    })
}

/// ρ_a(t) = 1/(1+t)² at distance t from the base point.
pub fn spherical_density(dist_to_a: f64) -> f64 {
    let s = 1.0 + dist_to_a;
    1.0 / (s * s)
}

/// Midpoint-rule approximation of ∫ ρ_a ds along a polyline, splitting each
/// edge into `segments_per_edge` pieces.
pub fn spherical_curve_length(polyline: &[Vec<f64>], a: &[f64], segments_per_edge: usize) -> Result<f64> {
    if polyline.len() < 2 {
        return Err(Error::Input("a polyline needs at least two vertices".into()));
    }
    if segments_per_edge == 0 {
        return Err(Error::Parameter("segments per edge must be positive".into()));
    }
    let dim = a.len();
    if polyline.iter().any(|p| p.len() != dim || p.iter().any(|v| !v.is_finite())) {
        return Err(Error::Input(format!(
            "polyline vertices must be finite points of dimension {dim}"
        )));
    }
    let m = segments_per_edge as f64;
    let mut total = 0.0;
    let mut mid = vec![0.0; dim];
    for edge in polyline.windows(2) {
        let (p, q) = (&edge[0], &edge[1]);
        let len = euclid(p, q);
        if len == 0.0 {
            continue;
        }
        let mut sum = 0.0;
        for k in 0..segments_per_edge {
            let s = (k as f64 + 0.5) / m;
            for (c, (x, y)) in mid.iter_mut().zip(p.iter().zip(q)) {
                *c = x + s * (y - x);
            }
            sum += spherical_density(euclid(&mid, a));
        }
        total += sum * len / m;
    }
    Ok(total)
}

/// Value of the discrete spherical measure and how many summands sat on a
/// ball-radius tie.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SphericalMeasure {
    pub value: f64,
    /// Points z of the subset for which some u has d(a,u) = 1 + d(a,z)
    /// exactly, so open and closed balls would disagree.
    pub ties: usize,
}

/// Σ_{z∈A} w(z)/M(z)², with M(z) the mass of the open ball about `a` of
/// radius 1 + d(a,z).
pub fn spherical_measure(space: &FiniteMetricSpace, a: &str, subset: &[&str]) -> Result<SphericalMeasure> {
    let weights = space
        .weights()
        .ok_or_else(|| Error::Configuration("spherical measure needs point weights".into()))?;
    let ai = space.index_of(a)?;
    let n = space.len();
    let mut value = 0.0;
    let mut ties = 0;
    for label in subset {
        if *label == INFINITY_TOKEN {
            return Err(Error::Input("the point at infinity carries no mass".into()));
        }
        let z = space.index_of(label)?;
        let radius = 1.0 + space.d(ai, z);
        let mut mass = 0.0;
        let mut tied = false;
        for (u, w) in weights.iter().enumerate().take(n) {
            let r = space.d(ai, u);
            if r < radius {
                mass += w;
            } else if r == radius {
                tied = true;
            }
        }
        if tied {
            ties += 1;
        }
        if mass > 0.0 {
            value += weights[z] / (mass * mass);
        } else if weights[z] > 0.0 {
            // Only possible when the base point itself has zero mass.
            return Err(Error::Configuration(format!(
                "ball about `{a}` of radius {radius} has zero mass"
            )));
        }
    }
    Ok(SphericalMeasure { value, ties })
}
