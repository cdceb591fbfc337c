//! Shape algebra with signed boundary distance.
//!
//! `signed_distance` is positive inside, negative outside, and equals the
//! distance to the boundary for every primitive. Intersections take the
//! minimum and unions the maximum of their parts; inside a union this is
//! only a lower bound on the true clearance.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::metric::{euclid, norm};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Shape {
    /// {x : n·x > offset}, with n rescaled to unit length.
    HalfPlane { normal: Vec<f64>, offset: f64 },
    /// {x : lo < x[axis] < hi}.
    Strip { axis: usize, lo: f64, hi: f64 },
    /// Open ball.
    Disk { center: Vec<f64>, r: f64 },
    /// Open axis-aligned box.
    #[serde(rename = "BOX")]
    Rect { lo: Vec<f64>, hi: Vec<f64> },
    Complement { of: Box<Shape> },
    Intersect { shapes: Vec<Shape> },
    Union { shapes: Vec<Shape> },
    /// `of` minus a point; the whole space when `of` is absent.
    Puncture {
        point: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        of: Option<Box<Shape>>,
    },
}

impl Shape {
    pub fn half_plane(normal: &[f64], offset: f64) -> Self {
        Shape::HalfPlane {
            normal: normal.to_vec(),
            offset,
        }
    }

    pub fn strip(axis: usize, lo: f64, hi: f64) -> Self {
        Shape::Strip { axis, lo, hi }
    }

    pub fn disk(center: &[f64], r: f64) -> Self {
        Shape::Disk {
            center: center.to_vec(),
            r,
        }
    }

    pub fn rect(lo: &[f64], hi: &[f64]) -> Self {
        Shape::Rect {
            lo: lo.to_vec(),
            hi: hi.to_vec(),
        }
    }

    pub fn puncture(point: &[f64]) -> Self {
        Shape::Puncture {
            point: point.to_vec(),
            of: None,
        }
    }

    fn check(&self, dim: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::Input(msg));
        let dims = |v: &[f64], what: &str| -> Result<()> {
            if v.len() != dim || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Input(format!(
                    "{what} must be a finite point of dimension {dim}"
                )));
            }
            Ok(())
        };
        match self {
            Shape::HalfPlane { normal, offset } => {
                dims(normal, "half-plane normal")?;
                if norm(normal) == 0.0 || !offset.is_finite() {
                    return bad("half-plane needs a nonzero normal and finite offset".into());
                }
            }
            Shape::Strip { axis, lo, hi } => {
                if *axis >= dim || lo >= hi || !lo.is_finite() || !hi.is_finite() {
                    return bad(format!("strip needs axis < {dim} and finite lo < hi"));
                }
            }
            Shape::Disk { center, r } => {
                dims(center, "disk center")?;
                if !(*r > 0.0 && r.is_finite()) {
                    return bad(format!("disk radius {r} must be positive"));
                }
            }
            Shape::Rect { lo, hi } => {
                dims(lo, "box corner")?;
                dims(hi, "box corner")?;
                if lo.iter().zip(hi).any(|(a, b)| a >= b) {
                    return bad("box needs lo < hi on every axis".into());
                }
            }
            Shape::Complement { of } => of.check(dim)?,
            Shape::Intersect { shapes } | Shape::Union { shapes } => {
                if shapes.is_empty() {
                    return bad("empty shape list".into());
                }
                for s in shapes {
                    s.check(dim)?;
                }
            }
            Shape::Puncture { point, of } => {
                dims(point, "puncture point")?;
                if let Some(of) = of {
                    of.check(dim)?;
                }
            }
        }
        Ok(())
    }

    /// Signed boundary distance (positive inside).
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        match self {
            Shape::HalfPlane { normal, offset } => {
                let n = norm(normal);
                normal.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() / n - offset / n
            }
            Shape::Strip { axis, lo, hi } => (x[*axis] - lo).min(hi - x[*axis]),
            Shape::Disk { center, r } => r - euclid(x, center),
            Shape::Rect { lo, hi } => {
                let inside = x
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(v, (a, b))| (v - a).min(b - v))
                    .fold(f64::INFINITY, f64::min);
                if inside > 0.0 {
                    inside
                } else {
                    let out = x
                        .iter()
                        .zip(lo.iter().zip(hi))
                        .map(|(v, (a, b))| {
                            let e = (a - v).max(v - b).max(0.0);
                            e * e
                        })
                        .sum::<f64>()
                        .sqrt();
                    if out > 0.0 {
                        -out
                    } else {
                        inside
                    }
                }
            }
            Shape::Complement { of } => -of.signed_distance(x),
            Shape::Intersect { shapes } => shapes
                .iter()
                .map(|s| s.signed_distance(x))
                .fold(f64::INFINITY, f64::min),
            Shape::Union { shapes } => shapes
                .iter()
                .map(|s| s.signed_distance(x))
                .fold(f64::NEG_INFINITY, f64::max),
            Shape::Puncture { point, of } => {
                let p = euclid(x, point);
                match of {
                    Some(of) => of.signed_distance(x).min(p),
                    None => p,
                }
            }
        }
    }

    /// A boundary point at distance |signed_distance(x)| from `x`: exact for
    /// primitives, taken from the deciding part for composites.
    pub fn nearest_boundary_point(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Shape::HalfPlane { normal, .. } => {
                let n = norm(normal);
                let s = self.signed_distance(x);
                x.iter().zip(normal).map(|(v, a)| v - s * a / n).collect()
            }
            Shape::Strip { axis, lo, hi } => {
                let mut p = x.to_vec();
                p[*axis] = if x[*axis] - lo <= hi - x[*axis] { *lo } else { *hi };
                p
            }
            Shape::Disk { center, r } => {
                let d = euclid(x, center);
                if d == 0.0 {
                    let mut p = center.clone();
                    p[0] += r;
                    return p;
                }
                center
                    .iter()
                    .zip(x)
                    .map(|(c, v)| c + r * (v - c) / d)
                    .collect()
            }
            Shape::Rect { lo, hi } => {
                if self.signed_distance(x) > 0.0 {
                    // Project onto the closest face.
                    let mut best = (f64::INFINITY, 0, 0.0);
                    for (k, (v, (a, b))) in x.iter().zip(lo.iter().zip(hi)).enumerate() {
                        if v - a < best.0 {
                            best = (v - a, k, *a);
                        }
                        if b - v < best.0 {
                            best = (b - v, k, *b);
                        }
                    }
                    let mut p = x.to_vec();
                    p[best.1] = best.2;
                    p
                } else {
                    x.iter()
                        .zip(lo.iter().zip(hi))
                        .map(|(v, (a, b))| v.clamp(*a, *b))
                        .collect()
                }
            }
            Shape::Complement { of } => of.nearest_boundary_point(x),
            Shape::Intersect { shapes } => {
                let k = argbest(shapes, x, |a, b| a < b);
                shapes[k].nearest_boundary_point(x)
            }
            Shape::Union { shapes } => {
                let k = argbest(shapes, x, |a, b| a > b);
                shapes[k].nearest_boundary_point(x)
            }
            Shape::Puncture { point, of } => match of {
                Some(of) if of.signed_distance(x) < euclid(x, point) => of.nearest_boundary_point(x),
                _ => point.clone(),
            },
        }
    }

    /// (Ω bounded, complement bounded), conservatively: `false` means
    /// "not known to be bounded".
    pub fn boundedness(&self) -> (bool, bool) {
        match self {
            Shape::HalfPlane { .. } | Shape::Strip { .. } => (false, false),
            Shape::Disk { .. } | Shape::Rect { .. } => (true, false),
            Shape::Complement { of } => {
                let (b, c) = of.boundedness();
                (c, b)
            }
            Shape::Intersect { shapes } => {
                let parts: Vec<_> = shapes.iter().map(Shape::boundedness).collect();
                (parts.iter().any(|p| p.0), parts.iter().all(|p| p.1))
            }
            Shape::Union { shapes } => {
                let parts: Vec<_> = shapes.iter().map(Shape::boundedness).collect();
                (parts.iter().all(|p| p.0), parts.iter().any(|p| p.1))
            }
            Shape::Puncture { of, .. } => match of {
                Some(of) => of.boundedness(),
                None => (false, true),
            },
        }
    }
}

fn argbest(shapes: &[Shape], x: &[f64], better: impl Fn(f64, f64) -> bool) -> usize {
    let mut k = 0;
    let mut v = shapes[0].signed_distance(x);
    for (i, s) in shapes.iter().enumerate().skip(1) {
        let w = s.signed_distance(x);
        if better(w, v) {
            k = i;
            v = w;
        }
    }
    k
}

/// A domain Ω ⊊ ℝ^dimension given by a shape tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub shape: Shape,
    pub dimension: usize,
}

impl DomainSpec {
    pub fn new(shape: Shape, dimension: usize) -> Result<Self> {
        if dimension != 2 && dimension != 3 {
            return Err(Error::Input(format!("dimension {dimension} is not 2 or 3")));
        }
        shape.check(dimension)?;
        Ok(Self { shape, dimension })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: Self =
            serde_json::from_str(s).map_err(|e| Error::Parse(format!("domain JSON: {e}")))?;
        Self::new(raw.shape, raw.dimension)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let raw: Self = toml::from_str(s).map_err(|e| Error::Parse(format!("domain TOML: {e}")))?;
        Self::new(raw.shape, raw.dimension)
    }

    /// Reads TOML for `.toml` files and JSON otherwise.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "toml") {
            Self::from_toml_str(&text)
        } else {
            Self::from_json_str(&text)
        }
    }

    /// Distance to ∂Ω for interior points, 0 outside.
    pub fn clearance(&self, x: &[f64]) -> f64 {
        self.shape.signed_distance(x).max(0.0)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.shape.signed_distance(x) > 0.0
    }

    pub fn is_bounded(&self) -> bool {
        self.shape.boundedness().0
    }

    pub fn nearest_boundary_point(&self, x: &[f64]) -> Vec<f64> {
        self.shape.nearest_boundary_point(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitive_distances() {
        let disk = DomainSpec::new(Shape::disk(&[0.0, 0.0], 1.0), 2).unwrap();
        assert_eq!(disk.clearance(&[0.0, 0.0]), 1.0);
        let strip = DomainSpec::new(Shape::strip(1, 0.0, 1.0), 2).unwrap();
        assert_eq!(strip.clearance(&[5.0, 0.25]), 0.25);
        assert_eq!(strip.clearance(&[5.0, 0.75]), 0.25);
        assert_eq!(strip.clearance(&[5.0, 1.5]), 0.0);
        let hp = DomainSpec::new(Shape::half_plane(&[0.0, 2.0], 0.0), 2).unwrap();
        assert_eq!(hp.clearance(&[3.0, 0.5]), 0.5);
        let bx = Shape::rect(&[0.0, 0.0], &[2.0, 1.0]);
        assert_eq!(bx.signed_distance(&[0.5, 0.5]), 0.5);
        assert_eq!(bx.signed_distance(&[3.0, 2.0]), -(2f64).sqrt());
    }

    #[test]
    fn composites() {
        let punctured = Shape::puncture(&[0.0, 0.0]);
        assert_eq!(punctured.signed_distance(&[3.0, 4.0]), 5.0);
        assert_eq!(punctured.boundedness(), (false, true));
        let ring = Shape::Intersect {
            shapes: vec![
                Shape::disk(&[0.0, 0.0], 2.0),
                Shape::Complement {
                    of: Box::new(Shape::disk(&[0.0, 0.0], 1.0)),
                },
            ],
        };
        assert_eq!(ring.signed_distance(&[1.25, 0.0]), 0.25);
        assert_eq!(ring.nearest_boundary_point(&[1.25, 0.0]), vec![1.0, 0.0]);
        assert_eq!(ring.boundedness(), (true, false));
        let two = Shape::Union {
            shapes: vec![Shape::disk(&[0.0, 0.0], 1.0), Shape::disk(&[5.0, 0.0], 1.0)],
        };
        assert!(two.signed_distance(&[5.5, 0.0]) > 0.0);
        assert!(two.signed_distance(&[2.5, 0.0]) < 0.0);
    }

    #[test]
    fn nearest_boundary_points_realize_the_distance() {
        let shapes = [
            Shape::half_plane(&[1.0, 1.0], 0.5),
            Shape::strip(0, -1.0, 2.0),
            Shape::disk(&[1.0, 1.0], 2.0),
            Shape::rect(&[-1.0, -1.0], &[1.0, 3.0]),
        ];
        for s in &shapes {
            for x in [[0.3, 0.9], [0.9, 0.1], [0.0, 0.5]] {
                let d = s.signed_distance(&x);
                let p = s.nearest_boundary_point(&x);
                assert!((euclid(&x, &p) - d.abs()).abs() < 1e-12, "{s:?} {x:?}");
                assert!(s.signed_distance(&p).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spec_files() {
        let toml = r#"
            dimension = 2
            [shape]
            type = "STRIP"
            axis = 1
            lo = 0.0
            hi = 1.0
        "#;
        let s = DomainSpec::from_toml_str(toml).unwrap();
        assert_eq!(s.shape, Shape::strip(1, 0.0, 1.0));
        let json = r#"{"dimension": 2, "shape": {"type": "PUNCTURE", "point": [0, 0]}}"#;
        assert_eq!(DomainSpec::from_json_str(json).unwrap().shape, Shape::puncture(&[0.0, 0.0]));
        let json = r#"{"dimension": 2, "shape": {"type": "BOX", "lo": [0, 0], "hi": [1, 1]}}"#;
        assert!(DomainSpec::from_json_str(json).unwrap().is_bounded());
        let bad = r#"{"dimension": 2, "shape": {"type": "DISK", "center": [0, 0], "r": -1}}"#;
        assert!(matches!(DomainSpec::from_json_str(bad), Err(Error::Input(_))));
        assert!(matches!(DomainSpec::from_json_str("{"), Err(Error::Parse(_))));
    }
}
