//! Annulus/arc classification of a point against the nearest boundary point.

use serde::{Deserialize, Serialize};

use super::shape::DomainSpec;
use crate::metric::euclid;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AnnulusKind {
    /// The whole annulus B(a, t/λ) \ B̄(a, λt) lies in Ω.
    Annulus,
    /// Some part of the annulus leaves Ω.
    Arc,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnnulusClass {
    pub kind: AnnulusKind,
    /// Nearest boundary point.
    pub a: Vec<f64>,
    /// |x − a| = d(x).
    pub t: f64,
    pub lambda: f64,
    /// First sample outside Ω, for arcs.
    pub witness: Option<Vec<f64>>,
}

const RADII: usize = 32;
const ANGLES: usize = 128;
const SPHERE: usize = 512;

fn directions(dim: usize) -> Vec<Vec<f64>> {
    if dim == 2 {
        (0..ANGLES)
            .map(|k| {
                let th = std::f64::consts::TAU * k as f64 / ANGLES as f64;
                vec![th.cos(), th.sin()]
            })
            .collect()
    } else {
        // Fibonacci sphere.
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        (0..SPHERE)
            .map(|k| {
                let z = 1.0 - (2.0 * k as f64 + 1.0) / SPHERE as f64;
                let r = (1.0 - z * z).sqrt();
                let th = golden * k as f64;
                vec![r * th.cos(), r * th.sin(), z]
            })
            .collect()
    }
}

/// Classifies x ∈ Ω by sampling the open annulus around its nearest
/// boundary point on geometrically spaced radii.
pub fn annulus_classify(spec: &DomainSpec, x: &[f64], lambda: f64) -> Result<AnnulusClass> {
    if !(lambda > 0.0 && lambda <= 0.5) {
        return Err(Error::Parameter(format!("λ = {lambda} outside (0, 1/2]")));
    }
    if x.len() != spec.dimension {
        return Err(Error::Input(format!(
            "point {x:?} does not have dimension {}",
            spec.dimension
        )));
    }
    if !spec.contains(x) {
        return Err(Error::Domain(format!("{x:?} is not in the domain")));
    }
    let a = spec.nearest_boundary_point(x);
    let t = euclid(x, &a);
    let (inner, outer) = (lambda * t, t / lambda);
    let ratio = outer / inner;
    let dirs = directions(spec.dimension);
    let mut witness = None;
    'scan: for i in 0..RADII {
        let r = inner * ratio.powf((i as f64 + 0.5) / RADII as f64);
        for u in &dirs {
            let p: Vec<f64> = a.iter().zip(u).map(|(c, v)| c + r * v).collect();
            if !spec.contains(&p) {
                witness = Some(p);
                break 'scan;
            }
        }
    }
    Ok(AnnulusClass {
        kind: if witness.is_none() {
            AnnulusKind::Annulus
        } else {
            AnnulusKind::Arc
        },
        a,
        t,
        lambda,
        witness,
    })
}
