//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::process::Command;
use std::time::Instant;

use hypermet::boundary::{
    bourdon_metric, bourdon_range, hamenstadt_limit, hamenstadt_metric, comparability_certificate, BoundaryChart, ScanMode,
    ScanOptions, VisualMetric,
};
use hypermet::domains::{
    discretize, integral_condition, phi_uniform_profile, qh_distance, spherical_compare, uniformity_constant,
    DomainSpec, IntegralOptions, IntegralVariant, Pair, PsiTransfer, QhGraph, Shape, Stencil, Verdict, Window,
};
use hypermet::hyperbolicity::delta_four_point;
use hypermet::metric::default_labels;
use hypermet::regularity::doubling_constant;
use hypermet::sphericalize::{chain_metrize, sphericalize};
use hypermet::{FiniteMetricSpace, Matrix, QuasiMetricSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_cloud(rng: &mut ChaCha8Rng) -> FiniteMetricSpace {
    let n = rng.gen_range(2..=40);
    let scale = 10f64.powf(rng.gen_range(-1.0..2.0));
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| vec![rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)])
        .collect();
    FiniteMetricSpace::euclidean(&pts).expect("distinct random points")
}

/// Symmetric quasimetric with entries in {1/8, 2/8, …, 4}; sums stay exact.
fn dyadic_quasimetric(rng: &mut ChaCha8Rng) -> QuasiMetricSpace {
    let n = rng.gen_range(2..=8);
    let mut m = Matrix::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.gen_range(1..=32) as f64 / 8.0;
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    QuasiMetricSpace::new(default_labels(n), m).unwrap()
}

/// Shortest chain between every pair by enumerating simple chains.
fn brute_force_chains(q: &Matrix) -> Matrix {
    let n = q.len();
    let mut best = Matrix::from_fn(n, |i, j| if i == j { 0.0 } else { f64::INFINITY });
    fn walk(q: &Matrix, start: usize, at: usize, seen: u32, cost: f64, best: &mut Matrix) {
        if cost < best.get(start, at) {
            best.set(start, at, cost);
        }
        for next in 0..q.len() {
            if seen & (1 << next) == 0 {
                walk(q, start, next, seen | (1 << next), cost + q.get(at, next), best);
            }
        }
    }
    for s in 0..n {
        walk(q, s, s, 1 << s, 0.0, &mut best);
    }
    best
}

/// Integer-weighted graph metric on a random connected graph.
fn graph_metric(rng: &mut ChaCha8Rng, n: usize, extra_edges: usize) -> FiniteMetricSpace {
    let mut m = Matrix::from_fn(n, |i, j| if i == j { 0.0 } else { f64::INFINITY });
    let link = |m: &mut Matrix, a: usize, b: usize, w: f64| {
        if w < m.get(a, b) {
            m.set(a, b, w);
            m.set(b, a, w);
        }
    };
    for v in 1..n {
        let p = rng.gen_range(0..v);
        let w = rng.gen_range(1..=3) as f64;
        link(&mut m, p, v, w);
    }
    for _ in 0..extra_edges {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            let w = rng.gen_range(1..=3) as f64;
            link(&mut m, a, b, w);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let v = m.get(i, k) + m.get(k, j);
                if v < m.get(i, j) {
                    m.set(i, j, v);
                }
            }
        }
    }
    FiniteMetricSpace::new(default_labels(n), m).unwrap()
}

fn four_point_oracle(d: &Matrix) -> f64 {
    let n = d.len();
    let mut best: f64 = 0.0;
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                for w in 0..n {
                    let a = d.get(x, y) + d.get(z, w);
                    let b = d.get(x, z) + d.get(y, w);
                    let c = d.get(x, w) + d.get(y, z);
                    best = best.max(0.5 * (a - b.max(c)));
                }
            }
        }
    }
    best
}

/// Criteria 1 and 3 share the suite of 200 seeded planar clouds.
fn criterion_1_and_3() -> (Outcome, Outcome) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut violations = 0;
    let mut entries = 0;
    let mut bad_diam = 0;
    let mut bad_k = 0;
    let mut worst_diam: f64 = 0.0;
    let mut worst_k: f64 = 0.0;
    for _ in 0..200 {
        let space = random_cloud(&mut rng);
        let base = space.labels()[rng.gen_range(0..space.len())].clone();
        let s = match sphericalize(&space, &base) {
            Ok(s) => s,
            Err(e) => return (Err(e.to_string()), Err("not run".into())),
        };
        let (q, m) = (s.quasi.dist(), s.metrized.dist());
        for i in 0..q.len() {
            for j in 0..q.len() {
                entries += 1;
                let (da, dh) = (q.get(i, j), m.get(i, j));
                if dh > da + 1e-12 || dh < 0.25 * da - 1e-12 {
                    violations += 1;
                }
            }
        }
        let (diam, k) = (s.metrized.diameter(), s.quasi.quasi_constant());
        worst_diam = worst_diam.max(diam);
        worst_k = worst_k.max(k);
        bad_diam += usize::from(diam > 1.0 + 1e-12);
        bad_k += usize::from(k > 2.0 + 1e-12);
    }
    let secs = start.elapsed().as_secs_f64();
    (
        check(
            violations == 0 && secs < 10.0,
            format!("{violations} violations over {entries} entries of 200 clouds in {secs:.2} s"),
        ),
        check(
            bad_diam == 0 && bad_k == 0,
            format!("max diameter {worst_diam:.6}, max quasi-constant {worst_k:.6} over 200 clouds"),
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut mismatches = 0;
    for _ in 0..100 {
        let q = dyadic_quasimetric(&mut rng);
        let chained = chain_metrize(&q).map_err(|e| e.to_string())?;
        if *chained.dist() != brute_force_chains(q.dist()) {
            mismatches += 1;
        }
    }
    check(mismatches == 0, format!("{mismatches} of 100 quasimetrics differ from chain enumeration"))
}

fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> FiniteMetricSpace {
    graph_metric(rng, n, 0)
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut mismatches = Vec::new();
    for k in 0..50 {
        let n = rng.gen_range(4..=10);
        let extra = rng.gen_range(1..=n);
        let space = graph_metric(&mut rng, n, extra);
        let got = delta_four_point(&space, None).map_err(|e| e.to_string())?.delta;
        let want = four_point_oracle(space.dist());
        if got != want {
            mismatches.push(format!("case {k}: {got} vs {want}"));
        }
    }
    let mut tree_fail = 0;
    for _ in 0..20 {
        let n = rng.gen_range(2..=12);
        let tree = random_tree(&mut rng, n);
        let sup = delta_four_point(&tree, None).unwrap().delta;
        let fixed = delta_four_point(&tree, Some("p0")).unwrap().delta;
        tree_fail += usize::from(sup != 0.0 || fixed != 0.0);
    }
    check(
        mismatches.is_empty() && tree_fail == 0,
        format!(
            "{} of 50 spaces differ from the oracle, {tree_fail} of 20 trees with nonzero δ{}",
            mismatches.len(),
            mismatches.first().map(|m| format!(" ({m})")).unwrap_or_default()
        ),
    )
}

fn bound_violations(v: &VisualMetric) -> usize {
    let n = v.metric.len();
    let mut bad = 0;
    for i in 0..n {
        for j in 0..n {
            let (m, r) = (v.metric.get(i, j), v.pre_metric.get(i, j));
            if m > r * (1.0 + 1e-12) || m < 0.5 * r * (1.0 - 1e-12) {
                bad += 1;
            }
        }
    }
    bad
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = 0;
    let mut positive_delta = 0;
    for _ in 0..100 {
        let n = rng.gen_range(6..=16);
        let extra = rng.gen_range(0..=2 * n);
        let space = graph_metric(&mut rng, n, extra);
        let delta = delta_four_point(&space, None).unwrap().delta;
        positive_delta += usize::from(delta > 0.0);
        let proxies: Vec<&str> = space.labels()[1..].iter().map(String::as_str).collect();
        let chart = BoundaryChart::from_space(&space, "p0", &proxies, delta).map_err(|e| e.to_string())?;
        let (hi, _) = bourdon_range(delta);
        let eps_h = (0.9 * hamenstadt_limit(delta)).min(1.0);
        let b = bourdon_metric(&chart, 0.9 * hi).map_err(|e| e.to_string())?;
        let h = hamenstadt_metric(&chart, proxies[0], eps_h).map_err(|e| e.to_string())?;
        bad += bound_violations(&b) + bound_violations(&h);
    }
    let mut tree_unequal = 0;
    for depth in 2..=6 {
        let chart = BoundaryChart::binary_tree(depth).unwrap();
        for eps in [0.25, 0.5, 1.0] {
            let b = bourdon_metric(&chart, eps).unwrap();
            let h = hamenstadt_metric(&chart, &chart.points()[0], eps).unwrap();
            tree_unequal += usize::from(b.metric != b.pre_metric) + usize::from(h.metric != h.pre_metric);
        }
    }
    check(
        bad == 0 && tree_unequal == 0,
        format!(
            "{bad} bound violations on 100 charts ({positive_delta} with δ > 0), {tree_unequal} tree metrics differ from ρ"
        ),
    )
}

const PARAMS: [(f64, f64); 3] = [(0.5, 0.5), (0.5, 0.25), (1.0, 0.5)];

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let opts = ScanOptions {
        mode: ScanMode::Exhaustive,
        ..ScanOptions::default()
    };
    let mut total = 0;
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for depth in 3..=6 {
        let chart = BoundaryChart::binary_tree(depth).unwrap();
        let anchor = chart.points()[0].clone();
        for (e, e2) in PARAMS {
            let r = comparability_certificate(&chart, &anchor, e, e2, &opts).map_err(|e| e.to_string())?;
            total += r.quadruples;
            violations += r.violations + usize::from(!r.exhaustive);
            worst = worst.max(r.max_slack_ratio);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        violations == 0 && secs < 60.0,
        format!("{violations} violations in {total} quadruples, worst ratio to bound {worst:.4}, {secs:.1} s"),
    )
}

fn half_plane() -> DomainSpec {
    DomainSpec::new(Shape::half_plane(&[0.0, 1.0], 0.0), 2).unwrap()
}

fn criterion_7() -> Outcome {
    let exact = 4f64.ln();
    let w = Window::new(vec![-1.5, 0.0], vec![1.5, 2.5]).unwrap();
    let mut errs = Vec::new();
    for h in [0.01, 0.005] {
        let g = discretize(&half_plane(), h, &w, Stencil::Extended).map_err(|e| e.to_string())?;
        let k = qh_distance(&g, &[0.0, 0.5], &[0.0, 2.0]).map_err(|e| e.to_string())?.value;
        errs.push((k, (k - exact).abs() / exact));
    }
    check(
        errs[0].1 <= 0.03 && errs[1].1 < errs[0].1,
        format!(
            "k̂ = {:.6} (error {:.3}%) at h = 0.01, {:.6} ({:.3}%) at h = 0.005",
            errs[0].0,
            100.0 * errs[0].1,
            errs[1].0,
            100.0 * errs[1].1
        ),
    )
}

fn node_pairs(g: &QhGraph, count: usize, seed: u64) -> Vec<Pair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let (a, b) = (rng.gen_range(0..g.num_nodes()), rng.gen_range(0..g.num_nodes()));
            (g.point(a).to_vec(), g.point(b).to_vec())
        })
        .collect()
}

fn criterion_8() -> Outcome {
    let phi = |t: f64| t;
    let strip = DomainSpec::new(Shape::strip(1, 0.0, 1.0), 2).unwrap();
    let sw = Window::new(vec![-4.0, 0.0], vec![4.0, 1.0]).unwrap();
    let sg = discretize(&strip, 0.02, &sw, Stencil::Extended).map_err(|e| e.to_string())?;
    let sp = phi_uniform_profile(&strip, &sg, &node_pairs(&sg, 200, 81), &phi, 0.05, false).map_err(|e| e.to_string())?;
    let disk = DomainSpec::new(Shape::disk(&[0.0, 0.0], 1.0), 2).unwrap();
    let dw = Window::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
    let dg = discretize(&disk, 0.02, &dw, Stencil::Extended).map_err(|e| e.to_string())?;
    let dp = phi_uniform_profile(&disk, &dg, &node_pairs(&dg, 200, 82), &phi, 0.05, true).map_err(|e| e.to_string())?;
    let lw = Window::new(vec![-17.0, 0.0], vec![17.0, 1.0]).unwrap();
    let lg = discretize(&strip, 0.05, &lw, Stencil::Extended).map_err(|e| e.to_string())?;
    let c = uniformity_constant(&lg, &[(vec![-16.0, 0.5], vec![16.0, 0.5])])
        .map_err(|e| e.to_string())?
        .constant;
    check(
        sp.passed() && dp.passed() && c > 10.0,
        format!(
            "strip {} violations (worst k̂/φ {:.3}), disk {} violations (worst {:.3}, growth {}), strip uniformity {c:.2} at L = 16",
            sp.violations,
            sp.worst_ratio,
            dp.violations,
            dp.worst_ratio,
            dp.growth.as_ref().map_or(0, |g| g.violations)
        ),
    )
}

fn criterion_9() -> Outcome {
    let spec = half_plane();
    let w = Window::new(vec![-4.0, 0.0], vec![4.0, 4.0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    // Points on the coarse grid with clearance at least 0.25.
    let mut point = || vec![rng.gen_range(-14..=14) as f64 / 4.0, rng.gen_range(1..=14) as f64 / 4.0];
    let pairs: Vec<Pair> = (0..60).map(|_| (point(), point())).collect();
    let mut runs = Vec::new();
    for h in [0.05, 0.025] {
        let g = discretize(&spec, h, &w, Stencil::Extended).map_err(|e| e.to_string())?;
        runs.push(spherical_compare(&spec, &g, &[0.0, 0.0], &pairs, 1.0).map_err(|e| e.to_string())?);
    }
    let drift = |a: f64, b: f64| (a - b).abs() / b;
    let max_drift = drift(runs[0].max_ratio, runs[1].max_ratio);
    let min_drift = drift(runs[0].min_ratio, runs[1].min_ratio);
    check(
        runs.iter().all(|r| r.passed) && max_drift <= 0.1 && min_drift <= 0.1,
        format!(
            "ratios [{:.4}, {:.4}] at h = 0.05 and [{:.4}, {:.4}] at h = 0.025, drift {:.2}% / {:.2}%",
            runs[0].min_ratio,
            runs[0].max_ratio,
            runs[1].min_ratio,
            runs[1].max_ratio,
            100.0 * min_drift,
            100.0 * max_drift
        ),
    )
}

fn criterion_10() -> Outcome {
    use IntegralVariant::*;
    #[allow(clippy::type_complexity)]
    let table: Vec<(&str, Box<dyn Fn(f64) -> f64>, IntegralVariant, Verdict)> = vec![
        ("t", Box::new(|t| t), Plain, Verdict::Diverges),
        ("t^2", Box::new(|t| t * t), Plain, Verdict::Diverges),
        ("e^t-1", Box::new(|t: f64| t.exp_m1()), Sqrt, Verdict::Diverges),
        ("t^3", Box::new(|t: f64| t.powi(3)), Sqrt, Verdict::Diverges),
        ("sqrt t", Box::new(|t: f64| t.sqrt()), Plain, Verdict::Converges),
        ("t^(1/4)", Box::new(|t: f64| t.powf(0.25)), Sqrt, Verdict::Converges),
    ];
    let mut wrong = Vec::new();
    for (name, phi, variant, expected) in table {
        let got = integral_condition(phi, variant, &IntegralOptions::default())
            .map_err(|e| e.to_string())?
            .verdict;
        if got != expected {
            wrong.push(format!("{name} {variant:?}: {got:?}"));
        }
    }
    let psi = PsiTransfer::new(|t| t, 1.0, 1.0, 0.5).unwrap();
    let spots = [(psi.eval(1.0), 81840.0), (psi.eval(0.5 / 6.0), 0.25), (psi.eval(0.0), 0.0)];
    let spot_ok = spots.iter().all(|(a, b)| a == b);
    check(
        wrong.is_empty() && spot_ok,
        format!(
            "{} of 6 fixtures misclassified{}, ψ(1) = {}",
            wrong.len(),
            if wrong.is_empty() { String::new() } else { format!(" ({})", wrong.join(", ")) },
            spots[0].0
        ),
    )
}

fn criterion_11() -> Outcome {
    let mut worst: f64 = 1.0;
    let mut all_finite = true;
    for depth in 3..=6 {
        let chart = BoundaryChart::binary_tree(depth).unwrap();
        let anchor = chart.points()[0].clone();
        for (e, e2) in PARAMS {
            let b = bourdon_metric(&chart, e).and_then(|m| m.to_space()).map_err(|e| e.to_string())?;
            let h = hamenstadt_metric(&chart, &anchor, e2)
                .and_then(|m| m.to_space())
                .map_err(|e| e.to_string())?;
            let cb = doubling_constant(&b, 64, 11).map_err(|e| e.to_string())?.doubling_c as f64;
            let ch = doubling_constant(&h, 64, 11).map_err(|e| e.to_string())?.doubling_c as f64;
            all_finite &= cb >= 1.0 && ch >= 1.0;
            worst = worst.max(cb / ch).max(ch / cb);
        }
    }
    check(all_finite && worst <= 4.0, format!("largest Bourdon/Hamenstädt doubling ratio {worst:.3}"))
}

fn criterion_12() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = dir.path().join("disk.json");
    std::fs::write(&spec, r#"{"dimension": 2, "shape": {"type": "DISK", "center": [0, 0], "r": 1}}"#).unwrap();
    let pairs = dir.path().join("pairs.csv");
    std::fs::write(&pairs, "x1,y1,x2,y2\n-0.5,0,0.5,0\n0.2,0.7,-0.6,-0.1\n0,0.9,0,-0.9\n").unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["boundary", "--tree-depth", "5", "--bourdon-eps", "0.5", "--hamenstadt-eps", "0.25", "--certify-comparability", "--doubling"],
        vec![
            "domain", "--spec", spec.to_str().unwrap(), "--h", "0.05", "--window", "-1,-1,1,1", "--check", "geodesic",
            "--pairs", pairs.to_str().unwrap(),
        ],
        vec![
            "domain", "--spec", spec.to_str().unwrap(), "--h", "0.05", "--window", "-1,-1,1,1", "--check",
            "phi-uniform", "--growth", "--pairs", pairs.to_str().unwrap(),
        ],
    ];
    let strip = |s: &str| {
        s.lines()
            .filter(|l| !l.trim_start().starts_with("\"generated_at\""))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let mut differing = 0;
    for args in &runs {
        let mut outs = Vec::new();
        for threads in ["1", "4"] {
            let out = Command::new(env!("CARGO_BIN_EXE_hypermet"))
                .args(["--seed", "12", "--threads", threads])
                .args(args)
                .output()
                .map_err(|e| e.to_string())?;
            if out.status.code() != Some(0) {
                return Err(format!("{} exited with {:?}", args[0], out.status.code()));
            }
            outs.push(strip(&String::from_utf8_lossy(&out.stdout)));
        }
        differing += usize::from(outs[0] != outs[1]);
    }
    check(differing == 0, format!("{differing} of {} commands differ across runs", runs.len()))
}

fn main() {
    let (c1, c3) = criterion_1_and_3();
    let results: Vec<(&str, Outcome)> = vec![
        ("chain-metrization bound", c1),
        ("chain oracle", criterion_2()),
        ("sphericalized diameter and quasi-constant", c3),
        ("four-point delta oracle", criterion_4()),
        ("visual-metric bounds", criterion_5()),
        ("Bourdon/Hamenstadt comparability certificate", criterion_6()),
        ("half-plane quasihyperbolic oracle", criterion_7()),
        ("phi-uniformity and non-uniform strip", criterion_8()),
        ("sphericalized bilipschitz comparison", criterion_9()),
        ("integral conditions and psi transfer", criterion_10()),
        ("doubling of visual metrics", criterion_11()),
        ("deterministic reports", criterion_12()),
    ];
    let mut failed = 0;
    for (k, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
