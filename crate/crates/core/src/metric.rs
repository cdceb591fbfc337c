//! Finite metric and quasimetric spaces.
//!
//! A [`FiniteMetricSpace`] is a labeled point set with a symmetric distance
//! matrix that is zero exactly on the diagonal and satisfies the triangle
//! inequality up to [`TAU_REL`]. Construction always validates; the
//! worst-violating triple is reported when it does not.

use std::io::Read;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, TAU_REL};

/// Reserved label for the point at infinity of a one-point compactification.
pub const INFINITY_TOKEN: &str = "@inf";

/// Dense square matrix of reals, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<f64>>", try_from = "Vec<Vec<f64>>")]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Builds a matrix from rows, rejecting ragged or non-square input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Input(format!(
                    "matrix is not square: row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Principal submatrix on `idx`, in the given order.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |a, b| self.get(idx[a], idx[b]))
    }

    /// Largest off-diagonal entry (0 for n ≤ 1).
    pub fn max_off_diagonal(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    m = m.max(self.get(i, j));
                }
            }
        }
        m
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Self {
        m.to_rows()
    }
}

impl TryFrom<Vec<Vec<f64>>> for Matrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Matrix::from_rows(&rows)
    }
}

/// Outcome of the triangle scan over all ordered triples.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleScan {
    /// max d(x,z) / (d(x,y) + d(y,z)); a metric has this ≤ 1.
    pub triangle_ratio: f64,
    pub triangle_witness: [usize; 3],
    /// least K with d(x,z) ≤ K·max(d(x,y), d(y,z)).
    pub quasi_constant: f64,
    pub quasi_witness: [usize; 3],
}

fn better(a: (f64, [usize; 3]), b: (f64, [usize; 3])) -> (f64, [usize; 3]) {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Less => b,
        std::cmp::Ordering::Equal => {
            if a.1 <= b.1 {
                a
            } else {
                b
            }
        }
    }
}

/// Scans every ordered triple (x, y, z) with the middle point y as the detour.
pub fn scan_triangles(m: &Matrix) -> TriangleScan {
    let n = m.len();
    let init = ((1.0, [0, 0, 0]), (1.0, [0, 0, 0]));
    let (tri, quasi) = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut tri = (f64::NEG_INFINITY, [x, x, x]);
            let mut quasi = (f64::NEG_INFINITY, [x, x, x]);
            for z in 0..n {
                if z == x {
                    continue;
                }
                let dxz = m.get(x, z);
                for y in 0..n {
                    if y == x || y == z {
                        continue;
                    }
                    let a = m.get(x, y);
                    let b = m.get(y, z);
                    let sum = a + b;
                    let r = if sum > 0.0 { dxz / sum } else { f64::INFINITY };
                    tri = better(tri, (r, [x, y, z]));
                    let mx = a.max(b);
                    let k = if mx > 0.0 { dxz / mx } else { f64::INFINITY };
                    quasi = better(quasi, (k, [x, y, z]));
                }
            }
            (tri, quasi)
        })
        .reduce(
            || ((f64::NEG_INFINITY, [0; 3]), (f64::NEG_INFINITY, [0; 3])),
            |a, b| (better(a.0, b.0), better(a.1, b.1)),
        );
    // With fewer than three points the constants are the trivial ones.
    let tri = if tri.0.is_finite() || tri.0 == f64::INFINITY {
        tri
    } else {
        init.0
    };
    let quasi = if quasi.0.is_finite() || quasi.0 == f64::INFINITY {
        quasi
    } else {
        init.1
    };
    TriangleScan {
        triangle_ratio: tri.0,
        triangle_witness: tri.1,
        // K ≥ 1 always: take y = x in the definition.
        quasi_constant: quasi.0.max(1.0),
        quasi_witness: quasi.1,
    }
}

/// Why a matrix failed to be accepted as a metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    /// Pair with the largest relative asymmetry beyond tolerance, if any.
    pub asymmetric_pair: Option<(String, String)>,
    pub max_asymmetry: f64,
    /// Triple (x, y, z) maximizing d(x,z) / (d(x,y) + d(y,z)).
    pub worst_triple: Option<[String; 3]>,
    pub triangle_ratio: f64,
    pub quasi_constant: f64,
}

impl std::fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if let Some((a, b)) = &self.asymmetric_pair {
            write!(
                f,
                "asymmetric entries at ({a}, {b}), relative gap {:e}; ",
                self.max_asymmetry
            )?;
        }
        if let Some([x, y, z]) = &self.worst_triple {
            write!(f, "worst triple ({x}, {y}, {z}) ")?;
        }
        write!(
            f,
            "triangle ratio {} quasi-constant K = {}",
            self.triangle_ratio, self.quasi_constant
        )
    }
}

/// Result of [`validate_metric`].
#[derive(Clone, Debug)]
pub enum MetricCheck {
    Valid(FiniteMetricSpace),
    Violation(ViolationReport),
}

fn check_labels(labels: &[String], n: usize) -> Result<()> {
    if labels.len() != n {
        return Err(Error::Input(format!(
            "{} labels for a {n}×{n} matrix",
            labels.len()
        )));
    }
    let mut sorted: Vec<&String> = labels.iter().collect();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Input(format!("duplicate label `{}`", w[0])));
    }
    Ok(())
}

/// Checks the raw matrix entries: finite, nonnegative, zero diagonal,
/// positive off-diagonal. Returns the largest relative asymmetry.
fn check_entries(m: &Matrix, labels: &[String]) -> Result<(f64, Option<(usize, usize)>)> {
    let n = m.len();
    let mut worst = (0.0f64, None);
    for i in 0..n {
        for j in 0..n {
            let v = m.get(i, j);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Input(format!(
                    "entry ({i}, {j}) = {v} is not a finite nonnegative real"
                )));
            }
            if i == j && v != 0.0 {
                return Err(Error::Input(format!(
                    "nonzero diagonal entry {v} at `{}`",
                    labels[i]
                )));
            }
            if i < j {
                let w = m.get(j, i);
                if v == 0.0 || w == 0.0 {
                    return Err(Error::Input(format!(
                        "points `{}` and `{}` coincide (zero distance)",
                        labels[i], labels[j]
                    )));
                }
                let gap = (v - w).abs() / v.max(w);
                if gap > worst.0 {
                    worst = (gap, Some((i, j)));
                }
            }
        }
    }
    Ok(worst)
}

fn mirror_upper(m: &mut Matrix) {
    let n = m.len();
    for i in 0..n {
        for j in 0..i {
            let v = m.get(j, i);
            m.set(i, j, v);
        }
    }
}

/// Validates a square matrix as a finite metric space.
///
/// Malformed input (non-square, negative, non-finite, bad labels, coincident
/// points) is an error; asymmetry or triangle failures beyond [`TAU_REL`]
/// come back as a [`MetricCheck::Violation`].
pub fn validate_metric(rows: &[Vec<f64>], labels: &[String]) -> Result<MetricCheck> {
    let m = Matrix::from_rows(rows)?;
    validate_matrix(m, labels.to_vec())
}

fn validate_matrix(mut m: Matrix, labels: Vec<String>) -> Result<MetricCheck> {
    let n = m.len();
    if n == 0 {
        return Err(Error::Input("empty space".into()));
    }
    check_labels(&labels, n)?;
    let (asym, asym_pair) = check_entries(&m, &labels)?;
    if asym > TAU_REL {
        let scan = scan_triangles(&m);
        let (i, j) = asym_pair.expect("asymmetry has a witness");
        return Ok(MetricCheck::Violation(ViolationReport {
            asymmetric_pair: Some((labels[i].clone(), labels[j].clone())),
            max_asymmetry: asym,
            worst_triple: None,
            triangle_ratio: scan.triangle_ratio,
            quasi_constant: scan.quasi_constant,
        }));
    }
    mirror_upper(&mut m);
    let scan = scan_triangles(&m);
    if scan.triangle_ratio > 1.0 + TAU_REL {
        let [x, y, z] = scan.triangle_witness;
        return Ok(MetricCheck::Violation(ViolationReport {
            asymmetric_pair: None,
            max_asymmetry: asym,
            worst_triple: Some([labels[x].clone(), labels[y].clone(), labels[z].clone()]),
            triangle_ratio: scan.triangle_ratio,
            quasi_constant: scan.quasi_constant,
        }));
    }
    Ok(MetricCheck::Valid(FiniteMetricSpace {
        labels,
        dist: m,
        coords: None,
        weights: None,
    }))
}

/// Labeled finite metric space, optionally with a Euclidean embedding and
/// point masses.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    dist: Matrix,
    coords: Option<Vec<Vec<f64>>>,
    weights: Option<Vec<f64>>,
}

/// On-disk layout of a space: `{ "labels", "dist", "coords"?, "weights"? }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceFile {
    pub labels: Vec<String>,
    pub dist: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl FiniteMetricSpace {
    /// Validating constructor; a violation becomes [`Error::NotAMetric`].
    pub fn new(labels: Vec<String>, dist: Matrix) -> Result<Self> {
        match validate_matrix(dist, labels)? {
            MetricCheck::Valid(s) => Ok(s),
            MetricCheck::Violation(r) => Err(Error::NotAMetric(Box::new(r))),
        }
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn from_parts_unchecked(labels: Vec<String>, dist: Matrix) -> Self {
        debug_assert_eq!(labels.len(), dist.len());
        Self {
            labels,
            dist,
            coords: None,
            weights: None,
        }
    }

    /// Euclidean distances between the rows of `coords`, labeled `p0, p1, …`.
    pub fn euclidean(coords: &[Vec<f64>]) -> Result<Self> {
        check_cloud(coords)?;
        let n = coords.len();
        let dist = Matrix::from_fn(n, |i, j| euclid(&coords[i], &coords[j]));
        let labels = default_labels(n);
        Self::new(labels, dist)?.with_coords(coords.to_vec())
    }

    pub fn with_coords(mut self, coords: Vec<Vec<f64>>) -> Result<Self> {
        if coords.len() != self.len() {
            return Err(Error::Input(format!(
                "{} coordinate rows for {} points",
                coords.len(),
                self.len()
            )));
        }
        check_cloud(&coords)?;
        self.coords = Some(coords);
        Ok(self)
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::Input(format!(
                "{} weights for {} points",
                weights.len(),
                self.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::Input(format!("weight {w} is not a finite nonnegative real")));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dist(&self) -> &Matrix {
        &self.dist
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist.get(i, j)
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Label(label.to_string()))
    }

    pub fn diameter(&self) -> f64 {
        self.dist.max_off_diagonal()
    }

    /// Smallest off-diagonal distance (`None` for a singleton).
    pub fn min_positive_distance(&self) -> Option<f64> {
        let n = self.len();
        let mut m = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                m = m.min(self.d(i, j));
            }
        }
        m.is_finite().then_some(m)
    }

    /// Restriction to `idx`, carrying coordinates and weights along.
    pub fn subspace(&self, idx: &[usize]) -> Self {
        Self {
            labels: idx.iter().map(|&i| self.labels[i].clone()).collect(),
            dist: self.dist.submatrix(idx),
            coords: self
                .coords
                .as_ref()
                .map(|c| idx.iter().map(|&i| c[i].clone()).collect()),
            weights: self
                .weights
                .as_ref()
                .map(|w| idx.iter().map(|&i| w[i]).collect()),
        }
    }

    /// Same space with every distance multiplied by `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Parameter(format!("scale {s} must be positive")));
        }
        Ok(Self {
            labels: self.labels.clone(),
            dist: self.dist.map(|v| v * s),
            coords: self
                .coords
                .as_ref()
                .map(|c| c.iter().map(|r| r.iter().map(|v| v * s).collect()).collect()),
            weights: self.weights.clone(),
        })
    }

    pub fn to_file(&self) -> SpaceFile {
        SpaceFile {
            labels: self.labels.clone(),
            dist: self.dist.to_rows(),
            coords: self.coords.clone(),
            weights: self.weights.clone(),
        }
    }

    pub fn from_file(file: SpaceFile) -> Result<Self> {
        let dist = Matrix::from_rows(&file.dist)?;
        let mut space = Self::new(file.labels, dist)?;
        if let Some(c) = file.coords {
            space = space.with_coords(c)?;
        }
        if let Some(w) = file.weights {
            space = space.with_weights(w)?;
        }
        Ok(space)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: SpaceFile =
            serde_json::from_str(s).map_err(|e| Error::Parse(format!("space JSON: {e}")))?;
        Self::from_file(file)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("space serializes")
    }

    /// Reads the CSV layout: a header row of labels followed by the square
    /// matrix rows.
    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let labels: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Parse(format!("CSV header: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse(format!("CSV row: {e}")))?;
            let row = rec
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("CSV entry `{f}`: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::new(labels, Matrix::from_rows(&rows)?)
    }
}

/// Labels `p0, p1, …, p{n-1}`.
pub fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}

fn check_cloud(coords: &[Vec<f64>]) -> Result<()> {
    let Some(first) = coords.first() else {
        return Ok(());
    };
    let m = first.len();
    for (i, row) in coords.iter().enumerate() {
        if row.len() != m {
            return Err(Error::Input(format!(
                "coordinate row {i} has dimension {}, expected {m}",
                row.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input(format!("coordinate row {i} is not finite")));
        }
    }
    Ok(())
}

#[inline]
pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Quasimetric on labeled points: symmetric, zero exactly on the diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct QuasiMetricSpace {
    labels: Vec<String>,
    dist: Matrix,
    quasi_constant: f64,
}

impl QuasiMetricSpace {
    /// Validates symmetry and positivity and computes the quasi-constant.
    pub fn new(labels: Vec<String>, mut dist: Matrix) -> Result<Self> {
        let n = dist.len();
        if n == 0 {
            return Err(Error::Input("empty space".into()));
        }
        check_labels(&labels, n)?;
        let (asym, pair) = check_entries(&dist, &labels)?;
        if asym > TAU_REL {
            let (i, j) = pair.expect("asymmetry has a witness");
            return Err(Error::Input(format!(
                "quasimetric is not symmetric at ({}, {})",
                labels[i], labels[j]
            )));
        }
        mirror_upper(&mut dist);
        let quasi_constant = scan_triangles(&dist).quasi_constant;
        Ok(Self {
            labels,
            dist,
            quasi_constant,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dist(&self) -> &Matrix {
        &self.dist
    }

    pub fn quasi_constant(&self) -> f64 {
        self.quasi_constant
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Label(label.to_string()))
    }
}

/// Space together with a distinguished base point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointedSpace {
    space: FiniteMetricSpace,
    base: usize,
}

impl PointedSpace {
    pub fn new(space: FiniteMetricSpace, base: usize) -> Result<Self> {
        if base >= space.len() {
            return Err(Error::Input(format!(
                "base index {base} out of range for {} points",
                space.len()
            )));
        }
        Ok(Self { space, base })
    }

    pub fn space(&self) -> &FiniteMetricSpace {
        &self.space
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn base_label(&self) -> &str {
        &self.space.labels()[self.base]
    }
}

/// Argument of [`cross_ratio`]: a point of the space or the point at infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrossPoint {
    Point(usize),
    Infinity,
}

impl CrossPoint {
    /// Resolves a label; [`INFINITY_TOKEN`] means ∞ unless the space has a
    /// point carrying that label.
    pub fn resolve(space: &FiniteMetricSpace, label: &str) -> Result<Self> {
        match space.index_of(label) {
            Ok(i) => Ok(Self::Point(i)),
            Err(_) if label == INFINITY_TOKEN => Ok(Self::Infinity),
            Err(e) => Err(e),
        }
    }
}

/// r(x,y,z,w) = d(x,z)·d(y,w) / (d(x,y)·d(z,w)); factors touching ∞ drop
/// out in pairs, e.g. r(x,y,z,∞) = d(x,z)/d(x,y).
pub fn cross_ratio(space: &FiniteMetricSpace, q: [CrossPoint; 4]) -> Result<f64> {
    cross_ratio_matrix(space.dist(), q)
}

pub(crate) fn cross_ratio_matrix(d: &Matrix, q: [CrossPoint; 4]) -> Result<f64> {
    let infinities = q.iter().filter(|p| **p == CrossPoint::Infinity).count();
    if infinities > 1 {
        return Err(Error::UndefinedCrossRatio(
            "more than one point at infinity".into(),
        ));
    }
    for a in 0..4 {
        for b in (a + 1)..4 {
            if q[a] == q[b] {
                return Err(Error::UndefinedCrossRatio(format!(
                    "repeated point at positions {a} and {b}"
                )));
            }
        }
    }
    let dd = |a: CrossPoint, b: CrossPoint| -> Option<f64> {
        match (a, b) {
            (CrossPoint::Point(i), CrossPoint::Point(j)) => Some(d.get(i, j)),
            _ => None,
        }
    };
    let [x, y, z, w] = q;
    // Each point appears once in the numerator and once in the denominator,
    // so the two factors containing ∞ cancel.
    let num = [dd(x, z), dd(y, w)];
    let den = [dd(x, y), dd(z, w)];
    let prod = |f: [Option<f64>; 2]| f.iter().flatten().product::<f64>();
    let (num, den) = (prod(num), prod(den));
    if den == 0.0 {
        return Err(Error::UndefinedCrossRatio("zero denominator".into()));
    }
    Ok(num / den)
}

/// Cross-ratio by labels; see [`CrossPoint::resolve`].
pub fn cross_ratio_labels(space: &FiniteMetricSpace, q: [&str; 4]) -> Result<f64> {
    let pts = [
        CrossPoint::resolve(space, q[0])?,
        CrossPoint::resolve(space, q[1])?,
        CrossPoint::resolve(space, q[2])?,
        CrossPoint::resolve(space, q[3])?,
    ];
    cross_ratio(space, pts)
}

/// Reflection in the unit sphere, x ↦ x/|x|².
pub fn invert_cloud(coords: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    check_cloud(coords)?;
    coords
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            if r2 == 0.0 {
                return Err(Error::Domain(format!("point {i} is the origin")));
            }
            Ok(x.iter().map(|v| v / r2).collect())
        })
        .collect()
}

/// Chordal distance 2|x−y| / sqrt((1+|x|²)(1+|y|²)).
pub fn chordal_distance(x: &[f64], y: &[f64]) -> f64 {
    let nx: f64 = x.iter().map(|v| v * v).sum();
    let ny: f64 = y.iter().map(|v| v * v).sum();
    2.0 * euclid(x, y) / ((1.0 + nx) * (1.0 + ny)).sqrt()
}

/// The chordal metric on a point cloud, labeled `p0, p1, …`.
pub fn chordal_space(coords: &[Vec<f64>]) -> Result<FiniteMetricSpace> {
    check_cloud(coords)?;
    let n = coords.len();
    let dist = Matrix::from_fn(n, |i, j| {
        if i == j {
            0.0
        } else {
            chordal_distance(&coords[i], &coords[j])
        }
    });
    FiniteMetricSpace::new(default_labels(n), dist)?.with_coords(coords.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn labels(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn line(points: &[f64]) -> FiniteMetricSpace {
        let coords: Vec<Vec<f64>> = points.iter().map(|&p| vec![p]).collect();
        FiniteMetricSpace::euclidean(&coords).unwrap()
    }

    #[test]
    fn degenerate_triangle_is_a_metric() {
        let rows = vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ];
        let check = validate_metric(&rows, &labels(&["a", "b", "c"])).unwrap();
        assert!(matches!(check, MetricCheck::Valid(_)));
    }

    #[test]
    fn long_side_is_reported_with_its_quasi_constant() {
        let rows = vec![
            vec![0.0, 1.0, 3.0],
            vec![1.0, 0.0, 1.0],
            vec![3.0, 1.0, 0.0],
        ];
        match validate_metric(&rows, &labels(&["a", "b", "c"])).unwrap() {
            MetricCheck::Violation(r) => {
                assert_eq!(
                    r.worst_triple,
                    Some(["a".to_string(), "b".to_string(), "c".to_string()])
                );
                assert_eq!(r.quasi_constant, 3.0);
                assert_eq!(r.triangle_ratio, 1.5);
            }
            other => panic!("expected a violation, got {other:?}"),
        }
    }

    #[test]
    fn singleton_is_a_metric() {
        let check = validate_metric(&[vec![0.0]], &labels(&["a"])).unwrap();
        assert!(matches!(check, MetricCheck::Valid(_)));
    }

    #[test]
    fn malformed_matrices_are_input_errors() {
        let l = labels(&["a", "b"]);
        assert!(matches!(
            validate_metric(&[vec![0.0, 1.0], vec![1.0]], &l),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            validate_metric(&[vec![0.0, -1.0], vec![-1.0, 0.0]], &l),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            validate_metric(&[vec![0.0, 0.0], vec![0.0, 0.0]], &l),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            validate_metric(&[vec![0.0, 1.0], vec![1.0, 0.0]], &labels(&["a", "a"])),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn asymmetry_is_a_violation_not_an_error() {
        let rows = vec![vec![0.0, 1.0], vec![1.5, 0.0]];
        match validate_metric(&rows, &labels(&["a", "b"])).unwrap() {
            MetricCheck::Violation(r) => {
                assert_eq!(r.asymmetric_pair, Some(("a".into(), "b".into())));
            }
            other => panic!("expected a violation, got {other:?}"),
        }
        // Tiny rounding asymmetry is absorbed.
        let rows = vec![vec![0.0, 1.0], vec![1.0 + 1e-13, 0.0]];
        assert!(matches!(
            validate_metric(&rows, &labels(&["a", "b"])).unwrap(),
            MetricCheck::Valid(_)
        ));
    }

    #[test]
    fn cross_ratio_of_collinear_points() {
        let s = line(&[0.0, 1.0, 2.0, 3.0]);
        let r = cross_ratio_labels(&s, ["p0", "p1", "p2", "p3"]).unwrap();
        assert_eq!(r, 4.0);
    }

    #[test]
    fn cross_ratio_with_a_point_at_infinity() {
        let s = line(&[0.0, 1.0, 2.0]);
        let r = cross_ratio_labels(&s, ["p0", "p1", "p2", INFINITY_TOKEN]).unwrap();
        assert_eq!(r, 2.0);
        // ∞ in the first slot: r(∞,y,z,w) = d(y,w)/d(z,w).
        let s = line(&[0.0, 1.0, 3.0]);
        let r = cross_ratio_labels(&s, [INFINITY_TOKEN, "p0", "p1", "p2"]).unwrap();
        assert_eq!(r, 3.0 / 2.0);
    }

    #[test]
    fn cross_ratio_rejects_repeats() {
        let s = line(&[0.0, 1.0, 2.0, 3.0]);
        assert!(matches!(
            cross_ratio_labels(&s, ["p0", "p0", "p2", "p3"]),
            Err(Error::UndefinedCrossRatio(_))
        ));
        assert!(matches!(
            cross_ratio_labels(&s, ["p0", INFINITY_TOKEN, "p2", INFINITY_TOKEN]),
            Err(Error::UndefinedCrossRatio(_))
        ));
        assert!(matches!(
            cross_ratio_labels(&s, ["p0", "nope", "p2", "p3"]),
            Err(Error::Label(_))
        ));
    }

    #[test]
    fn cross_ratio_permutation_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let coords: Vec<Vec<f64>> = (0..6)
                .map(|_| vec![rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)])
                .collect();
            let s = FiniteMetricSpace::euclidean(&coords).unwrap();
            let mut idx: Vec<usize> = (0..6).collect();
            for k in 0..4 {
                let j = rng.gen_range(k..6);
                idx.swap(k, j);
            }
            let p = |k: usize| CrossPoint::Point(idx[k]);
            let r = cross_ratio(&s, [p(0), p(1), p(2), p(3)]).unwrap();
            // Swapping the middle pair inverts the ratio.
            let inv = cross_ratio(&s, [p(0), p(2), p(1), p(3)]).unwrap();
            assert!((r * inv - 1.0).abs() < 1e-12);
            // Pair swaps preserve it with identical arithmetic.
            assert_eq!(r, cross_ratio(&s, [p(2), p(3), p(0), p(1)]).unwrap());
            assert_eq!(r, cross_ratio(&s, [p(1), p(0), p(3), p(2)]).unwrap());
        }
    }

    #[test]
    fn inversion_fixtures() {
        let out = invert_cloud(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(out, vec![vec![0.5, 0.0], vec![0.0, 1.0]]);
        assert!(matches!(
            invert_cloud(&[vec![0.0, 0.0]]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn inversion_is_an_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cloud: Vec<Vec<f64>> = (0..50)
            .map(|_| vec![rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)])
            .collect();
        let back = invert_cloud(&invert_cloud(&cloud).unwrap()).unwrap();
        for (a, b) in cloud.iter().zip(&back) {
            assert!(euclid(a, b) <= 1e-12 * norm(a).max(1.0));
        }
    }

    #[test]
    fn chordal_fixtures() {
        let s = chordal_space(&[vec![0.0], vec![1.0]]).unwrap();
        assert!((s.d(0, 1) - 2f64.sqrt()).abs() < 1e-15);
        let far = chordal_distance(&[0.0, 0.0], &[1e9, 0.0]);
        assert!((far - 2.0).abs() < 1e-8);
    }

    #[test]
    fn chordal_space_is_a_metric_on_random_clouds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cloud: Vec<Vec<f64>> = (0..200)
            .map(|_| vec![rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0)])
            .collect();
        let s = chordal_space(&cloud).unwrap();
        assert!(scan_triangles(s.dist()).triangle_ratio <= 1.0 + TAU_REL);
    }

    #[test]
    fn csv_and_json_formats() {
        let csv = "a,b,c\n0,1,2\n1,0,1\n2,1,0\n";
        let s = FiniteMetricSpace::from_csv_reader(csv.as_bytes()).unwrap();
        assert_eq!(s.labels(), &["a", "b", "c"]);
        let back = FiniteMetricSpace::from_json_str(&s.to_json_string()).unwrap();
        assert_eq!(back, s);
        assert!(matches!(
            FiniteMetricSpace::from_json_str("{\"labels\": [\"a\"]"),
            Err(Error::Parse(_))
        ));
    }

    proptest::proptest! {
        #[test]
        fn accepted_spaces_have_triangle_ratio_at_most_one(
            pts in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..12)
        ) {
            let coords: Vec<Vec<f64>> = pts.iter().map(|&(x, y)| vec![x, y]).collect();
            if let Ok(s) = FiniteMetricSpace::euclidean(&coords) {
                proptest::prop_assert!(scan_triangles(s.dist()).triangle_ratio <= 1.0 + TAU_REL);
            }
        }

        #[test]
        fn chordal_space_accepts_arbitrary_distinct_clouds(
            pts in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 2..10)
        ) {
            let coords: Vec<Vec<f64>> = pts.iter().map(|&(x, y)| vec![x, y]).collect();
            match chordal_space(&coords) {
                Ok(_) => {}
                // Only coincident points may be rejected.
                Err(Error::Input(msg)) => proptest::prop_assert!(msg.contains("coincide")),
                Err(e) => proptest::prop_assert!(false, "unexpected error {e}"),
            }
        }
    }
}
