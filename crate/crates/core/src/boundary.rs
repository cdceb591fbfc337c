//! Visual metrics on finite boundary charts and cross-ratio distortion.
//!
//! A [`BoundaryChart`] stands in for a piece of the Gromov boundary: a set of
//! proxy points with their Gromov products at a base point and the
//! hyperbolicity constant δ of the ambient space. Products between a proxy
//! and itself are `+∞`; an off-diagonal `+∞` marks coincident proxies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hyperbolicity::gromov_product;
use crate::metric::{FiniteMetricSpace, Matrix};
use crate::sphericalize::shortest_chains;
use crate::{Error, Result, TAU_REL};

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryChart {
    points: Vec<String>,
    gp: Matrix,
    delta: f64,
    base: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChartFile {
    pub points: Vec<String>,
    /// Gromov products; `null` stands for `+∞`.
    pub gp: Vec<Vec<Option<f64>>>,
    pub delta: f64,
    pub base: String,
}

impl BoundaryChart {
    pub fn new(points: Vec<String>, gp: Matrix, delta: f64, base: String) -> Result<Self> {
        let n = points.len();
        if gp.len() != n {
            return Err(Error::Input(format!(
                "{n} proxies but a {}×{} product matrix",
                gp.len(),
                gp.len()
            )));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::Input(format!("delta = {delta} must be finite and ≥ 0")));
        }
        let mut sorted: Vec<&String> = points.iter().collect();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Input(format!("duplicate proxy `{}`", w[0])));
        }
        let mut gp = gp;
        for i in 0..n {
            gp.set(i, i, f64::INFINITY);
            for j in (i + 1)..n {
                let (a, b) = (gp.get(i, j), gp.get(j, i));
                if a.is_nan() || b.is_nan() || a == f64::NEG_INFINITY || b == f64::NEG_INFINITY {
                    return Err(Error::Input(format!("product ({i}, {j}) is not a number")));
                }
                if a != b && (a - b).abs() > TAU_REL * a.abs().max(b.abs()) {
                    return Err(Error::Input(format!(
                        "products are not symmetric at (`{}`, `{}`)",
                        points[i], points[j]
                    )));
                }
                gp.set(j, i, a);
            }
        }
        Ok(Self {
            points,
            gp,
            delta,
            base,
        })
    }

    /// Chart of `proxies` with their Gromov products in `space` at `base`.
    pub fn from_space(space: &FiniteMetricSpace, base: &str, proxies: &[&str], delta: f64) -> Result<Self> {
        let w = space.index_of(base)?;
        let idx = proxies
            .iter()
            .map(|p| space.index_of(p))
            .collect::<Result<Vec<_>>>()?;
        let d = space.dist();
        let gp = Matrix::from_fn(idx.len(), |a, b| {
            if a == b {
                f64::INFINITY
            } else {
                gromov_product(d, idx[a], idx[b], w)
            }
        });
        Self::new(
            proxies.iter().map(|p| p.to_string()).collect(),
            gp,
            delta,
            base.to_string(),
        )
    }

    /// Leaves of the rooted binary tree of the given depth, labeled by their
    /// root paths as bit strings; products are common-prefix lengths and
    /// δ = 0.
    pub fn binary_tree(depth: u32) -> Result<Self> {
        if depth == 0 || depth > 16 {
            return Err(Error::Parameter(format!("tree depth {depth} outside 1..=16")));
        }
        let n = 1usize << depth;
        let points: Vec<String> = (0..n)
            .map(|i| format!("{:0width$b}", i, width = depth as usize))
            .collect();
        let gp = Matrix::from_fn(n, |i, j| {
            if i == j {
                f64::INFINITY
            } else {
                // Bits are compared from the root down.
                let diff = (i ^ j) as u32;
                (depth - (u32::BITS - diff.leading_zeros())) as f64
            }
        });
        Self::new(points, gp, 0.0, "root".into())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn gp(&self) -> &Matrix {
        &self.gp
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.points
            .iter()
            .position(|p| p == label)
            .ok_or_else(|| Error::Label(label.to_string()))
    }

    pub fn to_file(&self) -> ChartFile {
        let n = self.len();
        ChartFile {
            points: self.points.clone(),
            gp: (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| Some(self.gp.get(i, j)).filter(|v| v.is_finite()))
                        .collect()
                })
                .collect(),
            delta: self.delta,
            base: self.base.clone(),
        }
    }

    pub fn from_file(file: ChartFile) -> Result<Self> {
        let rows: Vec<Vec<f64>> = file
            .gp
            .iter()
            .map(|r| r.iter().map(|v| v.unwrap_or(f64::INFINITY)).collect())
            .collect();
        Self::new(file.points, Matrix::from_rows(&rows)?, file.delta, file.base)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: ChartFile =
            serde_json::from_str(s).map_err(|e| Error::Parse(format!("chart JSON: {e}")))?;
        Self::from_file(file)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VisualKind {
    Bourdon,
    Hamenstadt,
}

/// A visual metric: the pre-metric ρ and its chain metrization.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VisualMetric {
    pub kind: VisualKind,
    pub epsilon: f64,
    pub labels: Vec<String>,
    pub pre_metric: Matrix,
    pub metric: Matrix,
    /// The puncture of a Hamenstädt metric.
    pub excluded: Option<String>,
    /// min over pairs with ρ > 0 of metric/ρ; at least ½.
    pub lower_ratio: f64,
}

impl VisualMetric {
    /// The metric as a validated finite metric space; fails when proxies
    /// coincide.
    pub fn to_space(&self) -> Result<FiniteMetricSpace> {
        FiniteMetricSpace::new(self.labels.clone(), self.metric.clone())
    }
}

/// Admissible ε for the Bourdon metric: (0, min(1, 1/(5δ))) when δ > 0 and
/// (0, 1] for trees.
pub fn bourdon_range(delta: f64) -> (f64, bool) {
    if delta > 0.0 {
        ((1.0f64).min(1.0 / (5.0 * delta)), false)
    } else {
        (1.0, true)
    }
}

/// Largest ε′ with e^{22ε′δ} ≤ 2 (`+∞` for δ = 0).
pub fn hamenstadt_limit(delta: f64) -> f64 {
    if delta > 0.0 {
        std::f64::consts::LN_2 / (22.0 * delta)
    } else {
        f64::INFINITY
    }
}

fn check_bourdon(eps: f64, delta: f64) -> Result<()> {
    let (hi, closed) = bourdon_range(delta);
    let ok = eps > 0.0 && if closed { eps <= hi } else { eps < hi };
    if !ok {
        let close = if closed { ']' } else { ')' };
        return Err(Error::Parameter(format!(
            "Bourdon ε = {eps} outside the admissible interval (0, {hi}{close} for δ = {delta}"
        )));
    }
    Ok(())
}

fn check_hamenstadt(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) || (22.0 * eps * delta).exp() > 2.0 {
        return Err(Error::Parameter(format!(
            "Hamenstädt ε′ = {eps} outside the admissible interval (0, {}] for δ = {delta}",
            hamenstadt_limit(delta)
        )));
    }
    Ok(())
}

/// Metrizes ρ by chains and asserts ρ/2 ≤ metric ≤ ρ.
fn visualize(
    kind: VisualKind,
    epsilon: f64,
    labels: Vec<String>,
    rho: Matrix,
    excluded: Option<String>,
) -> Result<VisualMetric> {
    let metric = shortest_chains(&rho);
    let n = rho.len();
    let mut lower = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            let r = rho.get(i, j);
            if r > 0.0 {
                lower = lower.min(metric.get(i, j) / r);
            }
        }
    }
    if lower < 0.5 * (1.0 - TAU_REL) {
        return Err(Error::BoundViolation(format!(
            "{kind:?} metric drops to {lower} of its pre-metric, below one half"
        )));
    }
    Ok(VisualMetric {
        kind,
        epsilon,
        labels,
        pre_metric: rho,
        metric,
        excluded,
        lower_ratio: if lower.is_finite() { lower } else { 1.0 },
    })
}

/// Bourdon metric d_{w,ε}: chains over ρ = e^{−ε(ξ|ζ)_w}.
pub fn bourdon_metric(chart: &BoundaryChart, epsilon: f64) -> Result<VisualMetric> {
    check_bourdon(epsilon, chart.delta)?;
    let n = chart.len();
    let rho = Matrix::from_fn(n, |i, j| {
        if i == j {
            0.0
        } else {
            (-epsilon * chart.gp.get(i, j)).exp()
        }
    });
    visualize(VisualKind::Bourdon, epsilon, chart.points.clone(), rho, None)
}

/// Busemann-normalized products on the chart with `anchor` removed; returns
/// the kept chart indices and the products among them.
pub fn punctured_products(chart: &BoundaryChart, anchor: usize) -> Result<(Vec<usize>, Matrix)> {
    let keep: Vec<usize> = (0..chart.len()).filter(|&i| i != anchor).collect();
    if let Some(&i) = keep.iter().find(|&&i| chart.gp.get(anchor, i).is_infinite()) {
        return Err(Error::Configuration(format!(
            "proxy `{}` coincides with the anchor",
            chart.points[i]
        )));
    }
    let g = &chart.gp;
    let f = Matrix::from_fn(keep.len(), |a, b| {
        let (x, y) = (keep[a], keep[b]);
        g.get(x, y) - g.get(anchor, x) - g.get(anchor, y)
    });
    Ok((keep, f))
}

/// Hamenstädt metric σ_{b,ε′} on the chart punctured at `anchor`.
pub fn hamenstadt_metric(chart: &BoundaryChart, anchor: &str, epsilon: f64) -> Result<VisualMetric> {
    check_hamenstadt(epsilon, chart.delta)?;
    let xi = chart.index_of(anchor)?;
    let (keep, f) = punctured_products(chart, xi)?;
    let m = keep.len();
    let rho = Matrix::from_fn(m, |a, b| {
        if a == b {
            0.0
        } else {
            (-epsilon * f.get(a, b)).exp()
        }
    });
    let labels = keep.iter().map(|&i| chart.points[i].clone()).collect();
    visualize(
        VisualKind::Hamenstadt,
        epsilon,
        labels,
        rho,
        Some(anchor.to_string()),
    )
}

/// Labels and distances, borrowed from a space or a visual metric.
#[derive(Clone, Copy, Debug)]
pub struct MetricView<'a> {
    pub labels: &'a [String],
    pub dist: &'a Matrix,
}

impl<'a> From<&'a FiniteMetricSpace> for MetricView<'a> {
    fn from(s: &'a FiniteMetricSpace) -> Self {
        Self {
            labels: s.labels(),
            dist: s.dist(),
        }
    }
}

impl<'a> From<&'a VisualMetric> for MetricView<'a> {
    fn from(v: &'a VisualMetric) -> Self {
        Self {
            labels: &v.labels,
            dist: &v.metric,
        }
    }
}

/// Pairs (source index, target index) of points sharing a label.
pub fn correspondence_by_label(src: MetricView<'_>, dst: MetricView<'_>) -> Vec<(usize, usize)> {
    src.labels
        .iter()
        .enumerate()
        .filter_map(|(i, l)| dst.labels.iter().position(|m| m == l).map(|j| (i, j)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    /// Exhaustive up to `exhaustive_limit` points, sampled above.
    Auto,
    Exhaustive,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub mode: ScanMode,
    pub exhaustive_limit: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            mode: ScanMode::Auto,
            exhaustive_limit: 40,
            samples: 1_000_000,
            seed: 0,
        }
    }
}

impl ScanOptions {
    fn exhaustive(&self, n: usize) -> bool {
        match self.mode {
            ScanMode::Exhaustive => true,
            ScanMode::Sampled => false,
            ScanMode::Auto => n <= self.exhaustive_limit,
        }
    }
}

const SAMPLE_CHUNK: usize = 1 << 14;

/// Visits index tuples of `k` distinct entries in `0..n`: all of them, or a
/// seeded uniform sample. The fold is per-worker; results are merged with
/// `merge`, which must be associative and order-insensitive.
fn scan_tuples<const K: usize, T: Send>(
    n: usize,
    opts: &ScanOptions,
    init: impl Fn() -> T + Sync + Send,
    visit: impl Fn(&mut T, [usize; K]) + Sync + Send,
    merge: impl Fn(T, T) -> T + Sync + Send,
) -> (T, bool) {
    if n < K {
        return (init(), true);
    }
    if opts.exhaustive(n) {
        let acc = (0..n)
            .into_par_iter()
            .fold(&init, |mut acc, first| {
                let mut idx = [0usize; K];
                idx[0] = first;
                visit_rest(n, 1, &mut idx, &mut acc, &visit);
                acc
            })
            .reduce(&init, &merge);
        (acc, true)
    } else {
        let chunks = opts.samples.div_ceil(SAMPLE_CHUNK);
        let acc = (0..chunks)
            .into_par_iter()
            .fold(&init, |mut acc, c| {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                rng.set_stream(c as u64);
                let count = SAMPLE_CHUNK.min(opts.samples - c * SAMPLE_CHUNK);
                for _ in 0..count {
                    let mut idx = [0usize; K];
                    for k in 0..K {
                        loop {
                            let v = rng.gen_range(0..n);
                            if !idx[..k].contains(&v) {
                                idx[k] = v;
                                break;
                            }
                        }
                    }
                    visit(&mut acc, idx);
                }
                acc
            })
            .reduce(&init, &merge);
        (acc, false)
    }
}

fn visit_rest<const K: usize, T>(
    n: usize,
    depth: usize,
    idx: &mut [usize; K],
    acc: &mut T,
    visit: &impl Fn(&mut T, [usize; K]),
) {
    if depth == K {
        visit(acc, *idx);
        return;
    }
    for v in 0..n {
        if idx[..depth].contains(&v) {
            continue;
        }
        idx[depth] = v;
        visit_rest(n, depth + 1, idx, acc, visit);
    }
}

/// Least nondecreasing step function above a set of (t, t′) observations,
/// stored as its breakpoints.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub breakpoints: Vec<(f64, f64)>,
}

impl Envelope {
    pub fn from_pairs(mut pairs: Vec<(f64, f64)>) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut breakpoints: Vec<(f64, f64)> = Vec::new();
        let mut best = f64::NEG_INFINITY;
        for (t, s) in pairs {
            if s > best {
                best = s;
                match breakpoints.last_mut() {
                    Some(last) if last.0 == t => last.1 = s,
                    _ => breakpoints.push((t, s)),
                }
            }
        }
        Self { breakpoints }
    }

    /// Envelope value at `t`: the largest observed t′ with abscissa ≤ t.
    pub fn eval(&self, t: f64) -> Option<f64> {
        let k = self.breakpoints.partition_point(|b| b.0 <= t);
        (k > 0).then(|| self.breakpoints[k - 1].1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistortionProfile {
    pub exhaustive: bool,
    pub quadruples: usize,
    pub degenerate_quadruples: usize,
    /// Cross-ratio envelope θ̂.
    pub theta_envelope: Envelope,
    pub triples: usize,
    pub degenerate_triples: usize,
    /// Distance-ratio envelope η̂.
    pub eta_envelope: Envelope,
    /// Every observed (t, t′) cross-ratio pair, in scan order per worker
    /// merged by sorting.
    #[serde(skip)]
    pub theta_pairs: Vec<(f64, f64)>,
}

#[derive(Default)]
struct PairAcc {
    pairs: Vec<(f64, f64)>,
    seen: usize,
    degenerate: usize,
}

fn merge_pairs(mut a: PairAcc, mut b: PairAcc) -> PairAcc {
    a.pairs.append(&mut b.pairs);
    a.seen += b.seen;
    a.degenerate += b.degenerate;
    a
}

#[inline]
fn cross(d: &Matrix, x: usize, y: usize, z: usize, w: usize) -> Option<f64> {
    let den = d.get(x, y) * d.get(z, w);
    let num = d.get(x, z) * d.get(y, w);
    (den > 0.0 && num > 0.0).then(|| num / den)
}

/// Cross-ratio and distance-ratio distortion of the map given by
/// `correspondence` (pairs of source and target indices).
pub fn quasimobius_distortion(
    src: MetricView<'_>,
    dst: MetricView<'_>,
    correspondence: &[(usize, usize)],
    opts: &ScanOptions,
) -> Result<DistortionProfile> {
    let m = correspondence.len();
    if m < 4 {
        return Err(Error::Input(format!(
            "distortion needs at least 4 corresponding points, got {m}"
        )));
    }
    for &(i, j) in correspondence {
        if i >= src.dist.len() || j >= dst.dist.len() {
            return Err(Error::Input(format!("correspondence ({i}, {j}) out of range")));
        }
    }
    let mut seen_src: Vec<usize> = correspondence.iter().map(|p| p.0).collect();
    let mut seen_dst: Vec<usize> = correspondence.iter().map(|p| p.1).collect();
    seen_src.sort_unstable();
    seen_dst.sort_unstable();
    seen_src.dedup();
    seen_dst.dedup();
    if seen_src.len() != m || seen_dst.len() != m {
        return Err(Error::Input("correspondence is not a bijection".into()));
    }
    let (s, t) = (src.dist, dst.dist);
    let (quad, exhaustive) = scan_tuples::<4, PairAcc>(
        m,
        opts,
        PairAcc::default,
        |acc, [a, b, c, e]| {
            acc.seen += 1;
            let (p, q) = (correspondence, [a, b, c, e]);
            let r1 = cross(s, p[q[0]].0, p[q[1]].0, p[q[2]].0, p[q[3]].0);
            let r2 = cross(t, p[q[0]].1, p[q[1]].1, p[q[2]].1, p[q[3]].1);
            match (r1, r2) {
                (Some(x), Some(y)) => acc.pairs.push((x, y)),
                _ => acc.degenerate += 1,
            }
        },
        merge_pairs,
    );
    let (tri, _) = scan_tuples::<3, PairAcc>(
        m,
        opts,
        PairAcc::default,
        |acc, [a, b, c]| {
            acc.seen += 1;
            let p = correspondence;
            let (x, y, z) = (p[a], p[b], p[c]);
            let (n1, d1) = (s.get(x.0, y.0), s.get(x.0, z.0));
            let (n2, d2) = (t.get(x.1, y.1), t.get(x.1, z.1));
            if n1 > 0.0 && d1 > 0.0 && n2 > 0.0 && d2 > 0.0 {
                acc.pairs.push((n1 / d1, n2 / d2));
            } else {
                acc.degenerate += 1;
            }
        },
        merge_pairs,
    );
    let mut theta_pairs = quad.pairs;
    theta_pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    Ok(DistortionProfile {
        exhaustive,
        quadruples: quad.seen,
        degenerate_quadruples: quad.degenerate,
        theta_envelope: Envelope::from_pairs(theta_pairs.clone()),
        triples: tri.seen,
        degenerate_triples: tri.degenerate,
        eta_envelope: Envelope::from_pairs(tri.pairs),
        theta_pairs,
    })
}

/// Outcome of the Bourdon/Hamenstädt comparability check
/// σ-cross-ratio ≤ 4·e^{40ε′δ}·4^{ε′/ε}·t^{ε′/ε}.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparabilityReport {
    pub passed: bool,
    pub exhaustive: bool,
    pub epsilon: f64,
    pub epsilon_prime: f64,
    pub delta: f64,
    pub exponent: f64,
    /// 4·e^{40ε′δ}·4^{ε′/ε}
    pub constant: f64,
    /// 4·e^{−40ε′δ}·4^{ε′/ε}
    pub literal_constant: f64,
    pub quadruples: usize,
    pub degenerate_quadruples: usize,
    pub violations: usize,
    /// Quadruples that would fail with the smaller constant.
    pub literal_failures: usize,
    /// max of σ-cross-ratio / bound.
    pub max_slack_ratio: f64,
    pub witness: Option<[String; 4]>,
}

#[derive(Clone, Copy)]
struct SlackAcc {
    seen: usize,
    degenerate: usize,
    violations: usize,
    literal: usize,
    worst: f64,
    witness: [usize; 4],
}

impl SlackAcc {
    fn new() -> Self {
        Self {
            seen: 0,
            degenerate: 0,
            violations: 0,
            literal: 0,
            worst: f64::NEG_INFINITY,
            witness: [usize::MAX; 4],
        }
    }

    fn merge(mut self, o: Self) -> Self {
        self.seen += o.seen;
        self.degenerate += o.degenerate;
        self.violations += o.violations;
        self.literal += o.literal;
        if o.worst > self.worst || (o.worst == self.worst && o.witness < self.witness) {
            self.worst = o.worst;
            self.witness = o.witness;
        }
        self
    }
}

/// Checks the comparability of the Bourdon metric with parameter `epsilon`
/// and the Hamenstädt metric at `anchor` with `epsilon_prime` on every (or a
/// sampled set of) quadruple of distinct proxies other than the anchor.
pub fn comparability_certificate(
    chart: &BoundaryChart,
    anchor: &str,
    epsilon: f64,
    epsilon_prime: f64,
    opts: &ScanOptions,
) -> Result<ComparabilityReport> {
    let bourdon = bourdon_metric(chart, epsilon)?;
    let ham = hamenstadt_metric(chart, anchor, epsilon_prime)?;
    let xi = chart.index_of(anchor)?;
    let keep: Vec<usize> = (0..chart.len()).filter(|&i| i != xi).collect();
    let m = keep.len();
    let delta = chart.delta;
    let exponent = epsilon_prime / epsilon;
    let ln4 = 4f64.ln();
    let log_const = ln4 + 40.0 * epsilon_prime * delta + exponent * ln4;
    let log_literal = ln4 - 40.0 * epsilon_prime * delta + exponent * ln4;
    // Work with logarithms; ln 0 = −∞ marks coincident proxies.
    let ld = Matrix::from_fn(m, |a, b| bourdon.metric.get(keep[a], keep[b]).ln());
    let ls = ham.metric.map(f64::ln);
    let tol = TAU_REL.ln_1p();
    let (acc, exhaustive) = scan_tuples::<4, SlackAcc>(
        m,
        opts,
        SlackAcc::new,
        |acc, [x, y, z, w]| {
            acc.seen += 1;
            let dxy = ld.get(x, y);
            let dzw = ld.get(z, w);
            let dxz = ld.get(x, z);
            let dyw = ld.get(y, w);
            if !(dxy.is_finite() && dzw.is_finite() && dxz.is_finite() && dyw.is_finite()) {
                acc.degenerate += 1;
                return;
            }
            let lt = dxz + dyw - dxy - dzw;
            let ls_r = ls.get(x, z) + ls.get(y, w) - ls.get(x, y) - ls.get(z, w);
            let slack = ls_r - (log_const + exponent * lt);
            if slack > tol {
                acc.violations += 1;
            }
            if ls_r - (log_literal + exponent * lt) > tol {
                acc.literal += 1;
            }
            let q = [x, y, z, w];
            if slack > acc.worst || (slack == acc.worst && q < acc.witness) {
                acc.worst = slack;
                acc.witness = q;
            }
        },
        SlackAcc::merge,
    );
    let witness = (acc.witness[0] != usize::MAX)
        .then(|| acc.witness.map(|i| ham.labels[i].clone()));
    Ok(ComparabilityReport {
        passed: acc.violations == 0,
        exhaustive,
        epsilon,
        epsilon_prime,
        delta,
        exponent,
        constant: log_const.exp(),
        literal_constant: log_literal.exp(),
        quadruples: acc.seen,
        degenerate_quadruples: acc.degenerate,
        violations: acc.violations,
        literal_failures: acc.literal,
        max_slack_ratio: if acc.worst.is_finite() { acc.worst.exp() } else { 0.0 },
        witness,
    })
}
