//! Estimators for φ-uniformity, uniformity, Gehring–Hayman and ball
//! separation on a discretized domain, and the sphericalized comparison.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{
    euclidean_path_nodes, qh_distance_nodes, GraphPath, QhGraph,
};
use super::shape::DomainSpec;
use crate::boundary::Envelope;
use crate::graph::dijkstra;
use crate::metric::euclid;
use crate::{Error, Result};

/// A query pair of points.
pub type Pair = (Vec<f64>, Vec<f64>);

/// Where a constant was attained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Point on the curve that decided the value, when there is one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<f64>>,
}

/// An estimated constant with its witness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: String,
    pub constant: f64,
    /// The true constant is at least this value; it may be larger.
    pub lower_bound: bool,
    pub witness: Option<Witness>,
    pub h: f64,
    pub pairs: usize,
    pub skipped: usize,
}

struct Snapped {
    a: usize,
    b: usize,
    snap: [f64; 2],
}

fn snap_pair(g: &QhGraph, p: &Pair) -> Result<Snapped> {
    let (a, sa) = g.snap(&p.0)?;
    let (b, sb) = g.snap(&p.1)?;
    Ok(Snapped { a, b, snap: [sa, sb] })
}

fn best<T>(items: Vec<(f64, T)>) -> Option<(f64, T)> {
    // First maximum in input order.
    let mut out: Option<(f64, T)> = None;
    for (v, t) in items {
        if out.as_ref().is_none_or(|o| v > o.0) {
            out = Some((v, t));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhiRecord {
    /// Snapped endpoints.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub snap: [f64; 2],
    pub r_d: f64,
    pub k_hat: f64,
    pub phi: f64,
    pub violation: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthCheck {
    /// Node of largest clearance.
    pub w: Vec<f64>,
    pub d_w: f64,
    /// Diameter of the node set.
    pub diam: f64,
    pub checked: usize,
    pub violations: usize,
    /// max k̂(w,x)/φ(diam/d(x)).
    pub worst_ratio: f64,
    pub witness: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhiProfile {
    pub h: f64,
    pub tolerance: f64,
    pub records: Vec<PhiRecord>,
    pub envelope: Envelope,
    pub violations: usize,
    /// max k̂/φ(r_D) over pairs with r_D > 0.
    pub worst_ratio: f64,
    pub worst_pair: Option<usize>,
    pub growth: Option<GrowthCheck>,
}

impl PhiProfile {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.growth.as_ref().is_none_or(|g| g.violations == 0)
    }
}

/// Scatter of (r_D, k̂) over `pairs` against k̂ ≤ φ(r_D), allowing a
/// relative `tolerance` for the grid. With `growth`, also checks
/// k̂(w,x) ≤ φ(diam/d(x)) from the deepest node w to every node x.
pub fn phi_uniform_profile(
    spec: &DomainSpec,
    g: &QhGraph,
    pairs: &[Pair],
    phi: &(dyn Fn(f64) -> f64 + Sync),
    tolerance: f64,
    growth: bool,
) -> Result<PhiProfile> {
    if growth && !spec.is_bounded() {
        return Err(Error::Configuration(
            "the growth check needs a bounded domain".into(),
        ));
    }
    let records: Vec<PhiRecord> = pairs
        .par_iter()
        .map(|p| {
            let s = snap_pair(g, p)?;
            let (x, y) = (g.point(s.a).to_vec(), g.point(s.b).to_vec());
            let (r_d, k_hat) = if s.a == s.b {
                (0.0, 0.0)
            } else {
                let k = qh_distance_nodes(g, s.a, s.b)?.value;
                let m = g.clearance[s.a].min(g.clearance[s.b]);
                (euclid(&x, &y) / m, k)
            };
            let bound = phi(r_d);
            Ok(PhiRecord {
                x,
                y,
                snap: s.snap,
                r_d,
                k_hat,
                phi: bound,
                violation: k_hat > (1.0 + tolerance) * bound,
            })
        })
        .collect::<Result<_>>()?;
    let envelope = Envelope::from_pairs(records.iter().map(|r| (r.r_d, r.k_hat)).collect());
    let worst = best(
        records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.r_d > 0.0)
            .map(|(i, r)| (r.k_hat / r.phi, i))
            .collect(),
    );
    let growth = if growth { Some(growth_check(g, phi, tolerance)?) } else { None };
    Ok(PhiProfile {
        h: g.h,
        tolerance,
        violations: records.iter().filter(|r| r.violation).count(),
        records,
        envelope,
        worst_ratio: worst.map_or(0.0, |w| w.0),
        worst_pair: worst.map(|w| w.1),
        growth,
    })
}

fn growth_check(g: &QhGraph, phi: &(dyn Fn(f64) -> f64 + Sync), tolerance: f64) -> Result<GrowthCheck> {
    // Deepest node; equal clearances go to the lexicographically least point.
    let mut w = 0;
    for v in 1..g.num_nodes() {
        let (cv, cw) = (g.clearance[v], g.clearance[w]);
        if cv > cw || (cv == cw && g.point(v).partial_cmp(g.point(w)) == Some(std::cmp::Ordering::Less)) {
            w = v;
        }
    }
    let frontier = g.frontier();
    let diam = frontier
        .par_iter()
        .map(|&u| {
            frontier
                .iter()
                .map(|&v| euclid(g.point(u), g.point(v)))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let sp = dijkstra(&g.csr, &g.w_qh, &[w], None);
    let mut checked = 0;
    let mut violations = 0;
    let mut worst = (0.0, w);
    for x in 0..g.num_nodes() {
        if x == w || !sp.reached(x) {
            continue;
        }
        checked += 1;
        let ratio = sp.dist[x] / phi(diam / g.clearance[x]);
        if ratio > 1.0 + tolerance {
            violations += 1;
        }
        if ratio > worst.0 {
            worst = (ratio, x);
        }
    }
    Ok(GrowthCheck {
        w: g.point(w).to_vec(),
        d_w: g.clearance[w],
        diam,
        checked,
        violations,
        worst_ratio: worst.0,
        witness: g.point(worst.1).to_vec(),
    })
}

fn node_distance_to_path(g: &QhGraph, z: usize, path: &GraphPath) -> f64 {
    path.nodes
        .iter()
        .map(|&v| euclid(g.point(z), g.point(v)))
        .fold(f64::INFINITY, f64::min)
}

/// Default number of random detours in the ball-separation family.
pub const DEFAULT_COMPETITORS: usize = 16;

fn detours(g: &QhGraph, s: &Snapped, count: usize, seed: u64, index: usize) -> Result<Vec<GraphPath>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let (x, y) = (g.point(s.a), g.point(s.b));
    let len = euclid(x, y);
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count && attempts < 8 * count {
        attempts += 1;
        // Waypoint near the middle of the chord, pushed off it at random.
        let f: f64 = rng.gen_range(0.25..0.75);
        let p: Vec<f64> = x
            .iter()
            .zip(y)
            .map(|(a, b)| a + f * (b - a) + rng.gen_range(-0.25..0.25) * len)
            .collect();
        let Ok((mid, _)) = g.snap(&p) else {
            continue;
        };
        if mid == s.a || mid == s.b {
            continue;
        }
        let (Ok(first), Ok(second)) = (euclidean_path_nodes(g, s.a, mid), euclidean_path_nodes(g, mid, s.b)) else {
            continue;
        };
        let mut nodes = first.nodes;
        nodes.extend_from_slice(&second.nodes[1..]);
        out.push(GraphPath {
            value: first.value + second.value,
            nodes,
            snap: [0.0, 0.0],
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeodesicRecord {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub snap: [f64; 2],
    pub k_hat: f64,
    pub qh_length: f64,
    pub euclidean_length: f64,
    pub gehring_hayman: f64,
    pub ball_separation: f64,
    pub competitors: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeodesicConditions {
    pub gehring_hayman: ConditionReport,
    pub ball_separation: ConditionReport,
    pub records: Vec<GeodesicRecord>,
}

/// Gehring–Hayman ratio ℓ(γ)/ℓ(β) between the quasihyperbolic geodesic γ
/// and the Euclidean shortest path β, and the ball-separation ratio
/// max over z ∈ γ of dist(z, β)/d(z) over β in a seeded competitor family.
pub fn geodesic_conditions(g: &QhGraph, pairs: &[Pair], competitors: usize, seed: u64) -> Result<GeodesicConditions> {
    let rows: Vec<Option<(GeodesicRecord, usize)>> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let s = snap_pair(g, p)?;
            if s.a == s.b {
                return Ok(None);
            }
            let gamma = qh_distance_nodes(g, s.a, s.b)?;
            let beta = euclidean_path_nodes(g, s.a, s.b)?;
            let mut family = vec![beta.clone()];
            family.extend(detours(g, &s, competitors, seed, i)?);
            let mut sep = (0.0, s.a);
            for &z in &gamma.nodes {
                let worst = family
                    .iter()
                    .map(|b| node_distance_to_path(g, z, b))
                    .fold(0.0, f64::max)
                    / g.clearance[z];
                if worst > sep.0 {
                    sep = (worst, z);
                }
            }
            let lq = gamma.euclidean_length(g);
            Ok(Some((
                GeodesicRecord {
                    x: g.point(s.a).to_vec(),
                    y: g.point(s.b).to_vec(),
                    snap: s.snap,
                    k_hat: gamma.value,
                    qh_length: lq,
                    euclidean_length: beta.value,
                    gehring_hayman: lq / beta.value,
                    ball_separation: sep.0,
                    competitors: family.len(),
                },
                sep.1,
            )))
        })
        .collect::<Result<_>>()?;
    let skipped = rows.iter().filter(|r| r.is_none()).count();
    let (records, sep_nodes): (Vec<_>, Vec<_>) = rows.into_iter().flatten().unzip();
    let gh = best(records.iter().map(|r| (r.gehring_hayman, r)).collect());
    let bs = best(
        records
            .iter()
            .zip(&sep_nodes)
            .map(|(r, &z)| (r.ball_separation, (r, z)))
            .collect(),
    );
    let report = |name: &str, lower: bool, v: Option<(f64, Witness)>| ConditionReport {
        condition: name.into(),
        constant: v.as_ref().map_or(0.0, |v| v.0),
        lower_bound: lower,
        witness: v.map(|v| v.1),
        h: g.h,
        pairs: records.len(),
        skipped,
    };
    Ok(GeodesicConditions {
        gehring_hayman: report(
            "gehring_hayman",
            true,
            gh.map(|(v, r)| {
                (v, Witness { x: r.x.clone(), y: r.y.clone(), z: None })
            }),
        ),
        ball_separation: report(
            "ball_separation",
            true,
            bs.map(|(v, (r, z))| {
                (v, Witness { x: r.x.clone(), y: r.y.clone(), z: Some(g.point(z).to_vec()) })
            }),
        ),
        records,
    })
}

/// Smallest c for which `path` satisfies ℓ ≤ c|x−y| and the cigar
/// condition min(ℓ[x,z], ℓ[z,y]) ≤ c·d(z), with the deciding node.
fn curve_uniformity(g: &QhGraph, path: &GraphPath) -> (f64, usize) {
    let n = path.nodes.len();
    let mut prefix = vec![0.0; n];
    for i in 1..n {
        prefix[i] = prefix[i - 1] + euclid(g.point(path.nodes[i - 1]), g.point(path.nodes[i]));
    }
    let total = prefix[n - 1];
    let chord = euclid(g.point(path.nodes[0]), g.point(path.nodes[n - 1]));
    let mut out = (total / chord, path.nodes[0]);
    for (i, &z) in path.nodes.iter().enumerate() {
        let c = prefix[i].min(total - prefix[i]) / g.clearance[z];
        if c > out.0 {
            out = (c, z);
        }
    }
    out
}

/// Uniformity constant over the pairs: per pair the better of the Euclidean
/// shortest path and the quasihyperbolic geodesic, then the worst pair.
pub fn uniformity_constant(g: &QhGraph, pairs: &[Pair]) -> Result<ConditionReport> {
    let rows: Vec<Option<(f64, Witness)>> = pairs
        .par_iter()
        .map(|p| {
            let s = snap_pair(g, p)?;
            if s.a == s.b {
                return Ok(None);
            }
            let mut c = curve_uniformity(g, &euclidean_path_nodes(g, s.a, s.b)?);
            let alt = curve_uniformity(g, &qh_distance_nodes(g, s.a, s.b)?);
            if alt.0 < c.0 {
                c = alt;
            }
            Ok(Some((
                c.0,
                Witness {
                    x: g.point(s.a).to_vec(),
                    y: g.point(s.b).to_vec(),
                    z: Some(g.point(c.1).to_vec()),
                },
            )))
        })
        .collect::<Result<_>>()?;
    let skipped = rows.iter().filter(|r| r.is_none()).count();
    let rows: Vec<_> = rows.into_iter().flatten().collect();
    let pairs = rows.len();
    let top = best(rows);
    Ok(ConditionReport {
        condition: "uniformity".into(),
        constant: top.as_ref().map_or(0.0, |t| t.0),
        lower_bound: false,
        witness: top.map(|t| t.1),
        h: g.h,
        pairs,
        skipped,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SphericalRecord {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub k_hat: f64,
    pub k_hat_a: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SphericalComparison {
    pub h: f64,
    pub base: Vec<f64>,
    pub c: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Admissible ratios lie in [1/bound, bound] with bound = 80c.
    pub bound: f64,
    pub passed: bool,
    pub skipped: usize,
    pub records: Vec<SphericalRecord>,
}

/// Sphericalized boundary clearance of `z` at base `a`: the least of the
/// sphericalized distances to the nearest boundary point, to a, to ∞, and
/// the bound 2d(z)/(1+|z−a|)².
fn spherical_clearance(spec: &DomainSpec, z: &[f64], dz: f64, a: &[f64]) -> f64 {
    let s = 1.0 + euclid(z, a);
    let foot = spec.nearest_boundary_point(z);
    let to_foot = euclid(z, &foot) / (s * (1.0 + euclid(&foot, a)));
    let to_base = euclid(z, a) / s;
    [to_foot, to_base, 1.0 / s, 2.0 * dz / (s * s)]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Ratios k̂_a/k̂ of the sphericalized and plain quasihyperbolic distance
/// estimates on an unbounded domain, against the window [1/(80c), 80c].
pub fn spherical_compare(
    spec: &DomainSpec,
    g: &QhGraph,
    a: &[f64],
    pairs: &[Pair],
    c: f64,
) -> Result<SphericalComparison> {
    if spec.is_bounded() {
        return Err(Error::Configuration(
            "the sphericalized comparison needs an unbounded domain".into(),
        ));
    }
    if !(c >= 1.0 && c.is_finite()) {
        return Err(Error::Parameter(format!("quasiconvexity constant {c} must be ≥ 1")));
    }
    if a.len() != spec.dimension || spec.shape.signed_distance(a).abs() > 1e-9 {
        return Err(Error::Domain(format!("{a:?} is not a boundary point")));
    }
    // Euclidean length element divided by ρ_a = (1+|z−a|)⁻² gives the
    // clearance the sphericalized density sees.
    let scaled: Vec<f64> = (0..g.num_nodes())
        .into_par_iter()
        .map(|v| {
            let z = g.point(v);
            let s = 1.0 + euclid(z, a);
            spherical_clearance(spec, z, g.clearance[v], a) * s * s
        })
        .collect();
    let mut w_sph = vec![0.0; g.csr.num_edges()];
    for u in 0..g.num_nodes() {
        for e in g.csr.edges(u) {
            let v = g.csr.targets[e] as usize;
            w_sph[e] = g.w_eucl[e] * 2.0 / (scaled[u] + scaled[v]);
        }
    }
    let rows: Vec<Option<SphericalRecord>> = pairs
        .par_iter()
        .map(|p| {
            let s = snap_pair(g, p)?;
            if s.a == s.b {
                return Ok(None);
            }
            let k = qh_distance_nodes(g, s.a, s.b)?.value;
            let sp = dijkstra(&g.csr, &w_sph, &[s.a], Some(s.b));
            let ka = sp.dist[s.b];
            Ok(Some(SphericalRecord {
                x: g.point(s.a).to_vec(),
                y: g.point(s.b).to_vec(),
                k_hat: k,
                k_hat_a: ka,
                ratio: ka / k,
            }))
        })
        .collect::<Result<_>>()?;
    let skipped = rows.iter().filter(|r| r.is_none()).count();
    let records: Vec<_> = rows.into_iter().flatten().collect();
    let min_ratio = records.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let max_ratio = records.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    let bound = 80.0 * c;
    Ok(SphericalComparison {
        h: g.h,
        base: a.to_vec(),
        c,
        min_ratio,
        max_ratio,
        bound,
        passed: records.iter().all(|r| r.ratio >= 1.0 / bound && r.ratio <= bound),
        skipped,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::super::grid::{discretize, Stencil, Window};
    use super::super::shape::Shape;
    use super::*;

    fn strip() -> DomainSpec {
        DomainSpec::new(Shape::strip(1, 0.0, 1.0), 2).unwrap()
    }

    fn disk() -> DomainSpec {
        DomainSpec::new(Shape::disk(&[0.0, 0.0], 1.0), 2).unwrap()
    }

    fn square(r: f64) -> Window {
        Window::new(vec![-r, -r], vec![r, r]).unwrap()
    }

    #[test]
    fn coincident_pairs_sit_at_the_origin() {
        let spec = disk();
        let g = discretize(&spec, 0.05, &square(1.0), Stencil::Extended).unwrap();
        let p = phi_uniform_profile(&spec, &g, &[(vec![0.1, 0.1], vec![0.1, 0.1])], &|t| t, 0.05, false).unwrap();
        assert_eq!((p.records[0].r_d, p.records[0].k_hat), (0.0, 0.0));
        assert!(p.passed());
    }

    #[test]
    fn disk_is_phi_uniform_with_growth() {
        let spec = disk();
        let g = discretize(&spec, 0.02, &square(1.0), Stencil::Extended).unwrap();
        let pairs = vec![
            (vec![-0.6, 0.0], vec![0.6, 0.0]),
            (vec![0.0, 0.8], vec![0.0, -0.8]),
            (vec![0.5, 0.5], vec![-0.3, 0.2]),
            (vec![0.1, 0.0], vec![0.2, 0.0]),
        ];
        let p = phi_uniform_profile(&spec, &g, &pairs, &|t| t, 0.05, true).unwrap();
        assert!(p.passed(), "{:?}", p.records);
        let growth = p.growth.unwrap();
        assert_eq!(growth.w, vec![0.0, 0.0]);
        assert!(growth.diam > 1.8 && growth.diam <= 2.0);
    }

    #[test]
    fn growth_needs_a_bounded_domain() {
        let spec = strip();
        let w = Window::new(vec![-1.0, 0.0], vec![1.0, 1.0]).unwrap();
        let g = discretize(&spec, 0.1, &w, Stencil::Extended).unwrap();
        assert!(matches!(
            phi_uniform_profile(&spec, &g, &[], &|t| t, 0.05, true),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn vertical_half_plane_geodesics_agree() {
        let spec = DomainSpec::new(Shape::half_plane(&[0.0, 1.0], 0.0), 2).unwrap();
        let w = Window::new(vec![-2.0, 0.0], vec![2.0, 4.0]).unwrap();
        let g = discretize(&spec, 0.05, &w, Stencil::Extended).unwrap();
        let r = geodesic_conditions(&g, &[(vec![0.0, 0.5], vec![0.0, 3.0]), (vec![1.0, 1.0], vec![1.0, 1.0])], 4, 7).unwrap();
        assert!((r.gehring_hayman.constant - 1.0).abs() < 1e-9);
        assert_eq!(r.gehring_hayman.skipped, 1);
        assert!(r.ball_separation.lower_bound);
        let again = geodesic_conditions(&g, &[(vec![0.0, 0.5], vec![0.0, 3.0])], 4, 7).unwrap();
        assert_eq!(again.ball_separation.constant, r.ball_separation.constant);
    }

    #[test]
    fn strip_uniformity_grows_with_separation() {
        let spec = strip();
        let w = Window::new(vec![-5.0, 0.0], vec![5.0, 1.0]).unwrap();
        let g = discretize(&spec, 0.05, &w, Stencil::Extended).unwrap();
        let mut last = 0.0;
        for l in [1.0, 2.0, 4.0] {
            let c = uniformity_constant(&g, &[(vec![-l, 0.5], vec![l, 0.5])]).unwrap().constant;
            assert!(c >= l && c > last, "L = {l}: c = {c}");
            last = c;
        }
        let adj = uniformity_constant(&g, &[(vec![0.0, 0.5], vec![0.05, 0.5])]).unwrap();
        assert!((adj.constant - 1.0).abs() < 1e-9);
    }

    #[test]
    fn half_plane_spherical_ratios() {
        let spec = DomainSpec::new(Shape::half_plane(&[0.0, 1.0], 0.0), 2).unwrap();
        let w = Window::new(vec![-4.0, 0.0], vec![4.0, 4.0]).unwrap();
        let g = discretize(&spec, 0.05, &w, Stencil::Extended).unwrap();
        let pairs = vec![
            (vec![-1.0, 1.0], vec![1.0, 1.0]),
            (vec![0.0, 0.5], vec![0.0, 3.0]),
            (vec![2.0, 0.3], vec![-2.5, 2.0]),
        ];
        let r = spherical_compare(&spec, &g, &[0.0, 0.0], &pairs, 1.0).unwrap();
        assert!(r.passed && r.min_ratio > 0.0, "{r:?}");
        assert!(matches!(
            spherical_compare(&spec, &g, &[0.0, 1.0], &pairs, 1.0),
            Err(Error::Domain(_))
        ));
        let d = disk();
        let gd = discretize(&d, 0.1, &square(1.0), Stencil::Extended).unwrap();
        assert!(matches!(
            spherical_compare(&d, &gd, &[1.0, 0.0], &[], 1.0),
            Err(Error::Configuration(_))
        ));
    }
}
