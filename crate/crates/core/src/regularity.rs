//! Covering numbers, doubling constants and Ahlfors-regularity fits.
//!
//! Balls are closed, B(x, R) = {y : d(x,y) ≤ R}, and cover centers are
//! restricted to points of the space.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::metric::FiniteMetricSpace;
use crate::{Error, Result};

/// Number of dyadic scales used by default.
pub const DEFAULT_SCALES: u32 = 12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cover {
    pub count: usize,
    pub centers: Vec<usize>,
}

/// Greedy cover of B(center, R) by r-balls centered at space points: each
/// step takes the point covering the most still-uncovered ball points,
/// lowest index on ties.
pub fn covering_number(space: &FiniteMetricSpace, center: usize, big_r: f64, r: f64) -> Result<Cover> {
    if !(r > 0.0 && big_r > r) {
        return Err(Error::Parameter(format!(
            "covering radii must satisfy R > r > 0, got R = {big_r}, r = {r}"
        )));
    }
    if center >= space.len() {
        return Err(Error::Input(format!("center index {center} out of range")));
    }
    let ball: Vec<usize> = (0..space.len())
        .filter(|&y| space.d(center, y) <= big_r)
        .collect();
    let mut uncovered = vec![true; ball.len()];
    let mut left = ball.len();
    let mut centers = Vec::new();
    while left > 0 {
        let mut best = (0, usize::MAX);
        for c in 0..space.len() {
            let gain = ball
                .iter()
                .zip(&uncovered)
                .filter(|(&y, &u)| u && space.d(c, y) <= r)
                .count();
            if gain > best.0 {
                best = (gain, c);
            }
        }
        let c = best.1;
        for (k, &y) in ball.iter().enumerate() {
            if uncovered[k] && space.d(c, y) <= r {
                uncovered[k] = false;
                left -= 1;
            }
        }
        centers.push(c);
    }
    Ok(Cover {
        count: centers.len(),
        centers,
    })
}

/// Doubling estimate with its witness ball.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoublingReport {
    pub doubling_c: usize,
    pub witness_center: String,
    pub witness_radius: f64,
    pub witness_cover: Vec<String>,
    /// The (center, R) grid that was evaluated.
    pub samples: Vec<(String, f64)>,
}

/// Dyadic radii diam/2^k, k = 0..scales, kept while above the smallest
/// positive distance.
pub fn dyadic_radii(space: &FiniteMetricSpace, scales: u32) -> Vec<f64> {
    let diam = space.diameter();
    let Some(min_pos) = space.min_positive_distance() else {
        return Vec::new();
    };
    (0..scales)
        .map(|k| diam / 2f64.powi(k as i32))
        .filter(|&r| r >= min_pos)
        .collect()
}

/// Maximum greedy cover count of B(x, R) by R/2-balls over a seeded sample
/// of `sample_size` centers and all dyadic radii.
pub fn doubling_constant(space: &FiniteMetricSpace, sample_size: usize, seed: u64) -> Result<DoublingReport> {
    if sample_size == 0 {
        return Err(Error::Parameter("sample size must be at least 1".into()));
    }
    let n = space.len();
    let centers: Vec<usize> = if sample_size >= n {
        (0..n).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx: Vec<usize> = (0..n).collect();
        for k in 0..sample_size {
            let j = rng.gen_range(k..n);
            idx.swap(k, j);
        }
        let mut chosen = idx[..sample_size].to_vec();
        chosen.sort_unstable();
        chosen
    };
    let radii = dyadic_radii(space, DEFAULT_SCALES);
    let grid: Vec<(usize, f64)> = centers
        .iter()
        .flat_map(|&c| radii.iter().map(move |&r| (c, r)))
        .collect();
    let labels = space.labels();
    if grid.is_empty() {
        // A single point: one ball covers everything.
        return Ok(DoublingReport {
            doubling_c: 1,
            witness_center: labels[0].clone(),
            witness_radius: 0.0,
            witness_cover: vec![labels[0].clone()],
            samples: Vec::new(),
        });
    }
    let covers: Vec<Cover> = grid
        .par_iter()
        .map(|&(c, r)| covering_number(space, c, r, r / 2.0))
        .collect::<Result<_>>()?;
    // First maximum in grid order.
    let (k, best) = covers
        .iter()
        .enumerate()
        .fold((0, &covers[0]), |acc, (k, c)| if c.count > acc.1.count { (k, c) } else { acc });
    Ok(DoublingReport {
        doubling_c: best.count,
        witness_center: labels[grid[k].0].clone(),
        witness_radius: grid[k].1,
        witness_cover: best.centers.iter().map(|&i| labels[i].clone()).collect(),
        samples: grid.iter().map(|&(c, r)| (labels[c].clone(), r)).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AhlforsFit {
    pub q: f64,
    /// Smallest C with C⁻¹R^Q ≤ μ(B(x,R)) ≤ C R^Q over the sample grid.
    pub c: f64,
    /// Intercept of the least-squares line through (log R, log μ).
    pub intercept: f64,
    /// Root-mean-square residual of that line.
    pub residual: f64,
    pub scales: usize,
    /// (center, R, μ(B(center, R))) grid.
    pub samples: Vec<(String, f64, f64)>,
}

/// Least-squares slope of log μ(B(x,R)) against log R over every center and
/// the dyadic radii diam/2^k, k = 1..=12, above the smallest positive
/// distance.
pub fn ahlfors_fit(space: &FiniteMetricSpace) -> Result<AhlforsFit> {
    let weights = space
        .weights()
        .ok_or_else(|| Error::Configuration("Ahlfors fit needs point weights".into()))?;
    let Some(min_pos) = space.min_positive_distance() else {
        return Err(Error::DegenerateFit("a single point has no scales".into()));
    };
    let diam = space.diameter();
    let radii: Vec<f64> = (1..=DEFAULT_SCALES)
        .map(|k| diam / 2f64.powi(k as i32))
        .filter(|&r| r > min_pos)
        .collect();
    if radii.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "only {} usable scale(s) between the smallest distance and the diameter",
            radii.len()
        )));
    }
    let n = space.len();
    let mut samples = Vec::with_capacity(n * radii.len());
    for x in 0..n {
        for &r in &radii {
            let mass: f64 = (0..n).filter(|&y| space.d(x, y) <= r).map(|y| weights[y]).sum();
            if mass > 0.0 {
                samples.push((x, r, mass));
            }
        }
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(_, r, m)| (r.ln(), m.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("all samples share one radius".into()));
    }
    let q = sxy / sxx;
    let intercept = my - q * mx;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - intercept - q * p.0).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    // The two-sided bound has no intercept, so C absorbs it.
    let log_c = pts
        .iter()
        .map(|p| (p.1 - q * p.0).abs())
        .fold(0.0, f64::max);
    let labels = space.labels();
    Ok(AhlforsFit {
        q,
        c: log_c.exp(),
        intercept,
        residual,
        scales: radii.len(),
        samples: samples
            .into_iter()
            .map(|(x, r, m)| (labels[x].clone(), r, m))
            .collect(),
    })
}
