use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use hypermet::boundary::{
    bourdon_metric, hamenstadt_metric, comparability_certificate, BoundaryChart, ScanMode, ScanOptions,
};
use hypermet::domains::{
    discretize, geodesic_conditions, integral_condition, j_metric, phi_uniform_profile, spherical_compare,
    uniformity_constant, DomainSpec, IntegralOptions, IntegralVariant, Pair, QhGraph, Stencil, Verdict, Window,
};
use hypermet::expr::Expr;
use hypermet::hyperbolicity::delta_four_point;
use hypermet::regularity::{ahlfors_fit, doubling_constant};
use hypermet::sphericalize::sphericalize;
use hypermet::{FiniteMetricSpace, TAU_REL};
use serde_json::{json, Value};

use crate::args::{BoundaryArgs, Check, DeltaArgs, DomainArgs, RegularityArgs, SphericalizeArgs, StencilArg, VariantArg};
use crate::report::{sha256_hex, Scatter};

/// What a command produced before it is wrapped into a report.
pub struct Outcome {
    pub passed: bool,
    pub result: Value,
    pub scatter: Option<Scatter>,
}

/// Records input digests so the config hash tracks file contents.
#[derive(Default)]
pub struct Inputs(pub BTreeMap<String, String>);

impl Inputs {
    pub fn read(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.0.insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(bytes)
    }
}

fn load_space(inputs: &mut Inputs, path: &Path) -> Result<FiniteMetricSpace> {
    let bytes = inputs.read(path)?;
    let space = if path.extension().is_some_and(|e| e == "csv") {
        FiniteMetricSpace::from_csv_reader(bytes.as_slice())
    } else {
        let text = std::str::from_utf8(&bytes).context("input is not UTF-8")?;
        FiniteMetricSpace::from_json_str(text)
    };
    space.with_context(|| format!("loading {}", path.display()))
}

pub fn sphericalize_cmd(args: &SphericalizeArgs, inputs: &mut Inputs) -> Result<Outcome> {
    let space = load_space(inputs, &args.input)?;
    let s = sphericalize(&space, &args.base)?;
    let diameter = s.metrized.diameter();
    let quasi_constant = s.quasi.quasi_constant();
    // The quasi constant is reported only: it can exceed 2 on non-Euclidean inputs.
    let passed = s.comparison_ratio <= 4.0 * (1.0 + TAU_REL) && diameter <= 1.0 + TAU_REL;
    Ok(Outcome {
        passed,
        result: json!({
            "base": s.base_label,
            "comparison_ratio": s.comparison_ratio,
            "quasi_constant": quasi_constant,
            "diameter": diameter,
            "labels": s.metrized.labels(),
            "quasimetric": s.quasi.dist(),
            "metric": s.metrized.dist(),
        }),
        scatter: None,
    })
}

pub fn delta_cmd(args: &DeltaArgs, inputs: &mut Inputs) -> Result<Outcome> {
    let space = load_space(inputs, &args.input)?;
    let base = match (&args.base, args.sup_base) {
        (_, true) => None,
        (Some(b), false) => Some(b.as_str()),
        (None, false) => Some(
            space
                .labels()
                .first()
                .ok_or_else(|| anyhow!("empty space"))?
                .as_str(),
        ),
    };
    let cert = delta_four_point(&space, base)?;
    Ok(Outcome {
        passed: true,
        result: json!({
            "base": base,
            "points": space.len(),
            "certificate": cert,
        }),
        scatter: None,
    })
}

pub fn boundary_cmd(args: &BoundaryArgs, inputs: &mut Inputs, seed: u64) -> Result<Outcome> {
    let chart = match (&args.chart, args.tree_depth) {
        (Some(path), _) => {
            let bytes = inputs.read(path)?;
            BoundaryChart::from_json_str(std::str::from_utf8(&bytes).context("chart is not UTF-8")?)
                .with_context(|| format!("loading {}", path.display()))?
        }
        (None, Some(depth)) => BoundaryChart::binary_tree(depth)?,
        (None, None) => bail!("give --chart or --tree-depth"),
    };
    let anchor = match &args.anchor {
        Some(a) => a.clone(),
        None => chart
            .points()
            .first()
            .cloned()
            .ok_or_else(|| anyhow!("empty chart"))?,
    };
    let bourdon = args.bourdon_eps.map(|e| bourdon_metric(&chart, e)).transpose()?;
    let hamenstadt = args
        .hamenstadt_eps
        .map(|e| hamenstadt_metric(&chart, &anchor, e))
        .transpose()?;
    let mut passed = true;
    let comparability = if args.certify_comparability {
        let (Some(e), Some(e2)) = (args.bourdon_eps, args.hamenstadt_eps) else {
            bail!("--certify-comparability needs --bourdon-eps and --hamenstadt-eps");
        };
        let opts = ScanOptions {
            mode: if args.exhaustive { ScanMode::Exhaustive } else { ScanMode::Auto },
            samples: args.samples,
            seed,
            ..ScanOptions::default()
        };
        let r = comparability_certificate(&chart, &anchor, e, e2, &opts)?;
        passed &= r.passed;
        Some(r)
    } else {
        None
    };
    let doubling = if args.doubling {
        let estimate = |m: &Option<hypermet::boundary::VisualMetric>| -> Result<Option<Value>> {
            m.as_ref()
                .map(|m| Ok(serde_json::to_value(doubling_constant(&m.to_space()?, 64, seed)?)?))
                .transpose()
        };
        Some(json!({ "bourdon": estimate(&bourdon)?, "hamenstadt": estimate(&hamenstadt)? }))
    } else {
        None
    };
    Ok(Outcome {
        passed,
        result: json!({
            "chart": { "points": chart.len(), "delta": chart.delta(), "base": chart.base() },
            "anchor": anchor,
            "bourdon": bourdon,
            "hamenstadt": hamenstadt,
            "comparability": comparability,
            "doubling": doubling,
        }),
        scatter: None,
    })
}

/// Reads `x1,y1,x2,y2` rows (three coordinates each in 3D); a non-numeric
/// first row is taken as a header.
pub fn read_pairs(bytes: &[u8], dim: usize) -> Result<Vec<Pair>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut pairs = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let v = match parsed {
            Ok(v) => v,
            Err(_) if k == 0 => continue,
            Err(e) => bail!("pair row {}: {e}", k + 1),
        };
        if v.len() != 2 * dim {
            bail!("pair row {} has {} numbers, expected {}", k + 1, v.len(), 2 * dim);
        }
        pairs.push((v[..dim].to_vec(), v[dim..].to_vec()));
    }
    Ok(pairs)
}

fn parse_point(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("point `{s}`")))
        .collect()
}

struct Grid {
    spec: DomainSpec,
    graph: QhGraph,
    pairs: Vec<Pair>,
}

fn build_grid(args: &DomainArgs, inputs: &mut Inputs) -> Result<Grid> {
    let path = args.spec.as_ref().ok_or_else(|| anyhow!("--spec is required for this check"))?;
    let h = args.h.ok_or_else(|| anyhow!("--h is required for this check"))?;
    let window = args
        .window
        .as_ref()
        .ok_or_else(|| anyhow!("--window is required for this check"))?;
    let bytes = inputs.read(path)?;
    let text = std::str::from_utf8(&bytes).context("domain spec is not UTF-8")?;
    let spec = if path.extension().is_some_and(|e| e == "toml") {
        DomainSpec::from_toml_str(text)
    } else {
        DomainSpec::from_json_str(text)
    }
    .with_context(|| format!("loading {}", path.display()))?;
    let window = Window::parse(window)?;
    let stencil = match args.stencil {
        StencilArg::Moore => Stencil::Moore,
        StencilArg::Extended => Stencil::Extended,
    };
    let graph = discretize(&spec, h, &window, stencil)?;
    let pairs = match &args.pairs {
        Some(p) => read_pairs(&inputs.read(p)?, spec.dimension)?,
        None => Vec::new(),
    };
    Ok(Grid { spec, graph, pairs })
}

fn grid_summary(g: &QhGraph) -> Value {
    json!({
        "h": g.h,
        "window": g.window,
        "stencil": g.stencil,
        "nodes": g.num_nodes(),
        "edges": g.csr.num_edges(),
    })
}

fn within(bound: Option<f64>, constant: f64) -> bool {
    bound.is_none_or(|b| constant <= b)
}

pub fn domain_cmd(args: &DomainArgs, inputs: &mut Inputs, seed: u64, tolerance: f64) -> Result<Outcome> {
    let phi = Expr::parse(&args.phi)?;
    if args.check == Check::Integral {
        let variant = match args.variant {
            VariantArg::Plain => IntegralVariant::Plain,
            VariantArg::Sqrt => IntegralVariant::Sqrt,
        };
        let r = integral_condition(|t| phi.eval(t), variant, &IntegralOptions::default())?;
        return Ok(Outcome {
            passed: r.verdict == Verdict::Converges,
            result: json!({ "phi": phi.source(), "integral": r }),
            scatter: None,
        });
    }
    let Grid { spec, graph: g, pairs } = build_grid(args, inputs)?;
    let grid = grid_summary(&g);
    let out = match args.check {
        Check::PhiUniform => {
            let p = phi_uniform_profile(&spec, &g, &pairs, &|t| phi.eval(t), tolerance, args.growth)?;
            let scatter = Scatter {
                columns: vec!["r_D".into(), "k_hat".into()],
                rows: p.records.iter().map(|r| vec![r.r_d, r.k_hat]).collect(),
            };
            Outcome {
                passed: p.passed(),
                result: json!({ "grid": grid, "phi": phi.source(), "profile": p }),
                scatter: Some(scatter),
            }
        }
        Check::Geodesic => {
            let r = geodesic_conditions(&g, &pairs, args.competitors, seed)?;
            let scatter = Scatter {
                columns: vec!["gehring_hayman".into(), "ball_separation".into()],
                rows: r.records.iter().map(|r| vec![r.gehring_hayman, r.ball_separation]).collect(),
            };
            Outcome {
                passed: within(args.bound, r.gehring_hayman.constant) && within(args.bound, r.ball_separation.constant),
                result: json!({ "grid": grid, "conditions": r }),
                scatter: Some(scatter),
            }
        }
        Check::Uniformity => {
            let r = uniformity_constant(&g, &pairs)?;
            Outcome {
                passed: within(args.bound, r.constant),
                result: json!({ "grid": grid, "uniformity": r }),
                scatter: None,
            }
        }
        Check::Spherical => {
            let base = parse_point(
                args.base
                    .as_deref()
                    .ok_or_else(|| anyhow!("--base is required for the spherical check"))?,
            )?;
            let r = spherical_compare(&spec, &g, &base, &pairs, args.c)?;
            let scatter = Scatter {
                columns: vec!["k_hat".into(), "k_hat_a".into()],
                rows: r.records.iter().map(|r| vec![r.k_hat, r.k_hat_a]).collect(),
            };
            Outcome {
                passed: r.passed,
                result: json!({ "grid": grid, "comparison": r }),
                scatter: Some(scatter),
            }
        }
        Check::Qh => {
            let mut records = Vec::new();
            let mut rows = Vec::new();
            for (x, y) in &pairs {
                let p = hypermet::domains::qh_distance(&g, x, y)?;
                let j = j_metric(&spec, x, y)?;
                rows.push(vec![j, p.value]);
                records.push(json!({
                    "x": x,
                    "y": y,
                    "snap": p.snap,
                    "k_hat": p.value,
                    "j": j,
                    "path": p.points(&g),
                }));
            }
            Outcome {
                passed: true,
                result: json!({ "grid": grid, "pairs": records }),
                scatter: Some(Scatter {
                    columns: vec!["j".into(), "k_hat".into()],
                    rows,
                }),
            }
        }
        Check::Integral => unreachable!("handled above"),
    };
    Ok(out)
}

pub fn regularity_cmd(args: &RegularityArgs, inputs: &mut Inputs, seed: u64) -> Result<Outcome> {
    let space = load_space(inputs, &args.input)?;
    let doubling = doubling_constant(&space, args.samples, seed)?;
    let ahlfors = if args.weights { Some(ahlfors_fit(&space)?) } else { None };
    Ok(Outcome {
        passed: true,
        result: json!({
            "points": space.len(),
            "diameter": space.diameter(),
            "doubling": doubling,
            "ahlfors": ahlfors,
        }),
        scatter: None,
    })
}

pub fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

pub fn open_output(path: Option<&Path>) -> Result<Box<dyn std::io::Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout()),
    })
}
