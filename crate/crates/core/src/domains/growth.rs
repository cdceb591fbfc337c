//! The ψ transfer of a φ-uniformity function and the integral test on φ⁻¹.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// ψ(t) = 3c₀t for t ≤ λ/(3c₀), and 80·c·c₀·φ(256(1+t)² − 1) beyond.
pub struct PsiTransfer<F> {
    phi: F,
    pub c: f64,
    pub c0: f64,
    pub lambda: f64,
}

impl<F: Fn(f64) -> f64> PsiTransfer<F> {
    pub fn new(phi: F, c: f64, c0: f64, lambda: f64) -> Result<Self> {
        if !(c >= 1.0 && c.is_finite()) || !(c0 >= 1.0 && c0.is_finite()) {
            return Err(Error::Parameter(format!("c = {c} and c0 = {c0} must be ≥ 1")));
        }
        if !(lambda > 0.0 && lambda <= 0.5) {
            return Err(Error::Parameter(format!("λ = {lambda} outside (0, 1/2]")));
        }
        Ok(Self { phi, c, c0, lambda })
    }

    /// λ/(3c₀); the linear piece applies up to and including it.
    pub fn breakpoint(&self) -> f64 {
        self.lambda / (3.0 * self.c0)
    }

    fn outer(&self, t: f64) -> f64 {
        let s = 1.0 + t;
        80.0 * self.c * self.c0 * (self.phi)(256.0 * s * s - 1.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= self.breakpoint() {
            3.0 * self.c0 * t
        } else {
            self.outer(t)
        }
    }

    /// ψ(b⁺) − ψ(b) at the breakpoint b.
    pub fn jump(&self) -> f64 {
        let b = self.breakpoint();
        self.outer(b) - 3.0 * self.c0 * b
    }

    /// Continuous nondecreasing majorant of ψ: linear through the origin up
    /// to the breakpoint, steep enough to reach the outer piece there.
    pub fn majorant(&self, t: f64) -> f64 {
        let b = self.breakpoint();
        let top = self.outer(b).max(3.0 * self.c0 * b);
        if t <= b {
            top / b * t
        } else {
            self.outer(t).max(top)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IntegralVariant {
    /// ∫₁^∞ dt / φ⁻¹(t)
    Plain,
    /// ∫₁^∞ dt / √φ⁻¹(t)
    Sqrt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Converges,
    Diverges,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralOptions {
    /// Partial sums beyond this with non-decaying increments mean divergence.
    pub cap: f64,
    /// Required per-doubling decay factor for convergence.
    pub decay: f64,
    /// Number of consecutive increments that must decay (or not).
    pub window: usize,
    /// Increments whose ratio to the previous one is at least this count as
    /// non-decaying.
    pub flat_ratio: f64,
    /// Last doubling exponent: the integral runs up to 2^max_exponent.
    pub max_exponent: u32,
}

impl Default for IntegralOptions {
    fn default() -> Self {
        Self {
            cap: 10.0,
            decay: 1.5,
            window: 5,
            flat_ratio: 0.99,
            max_exponent: 40,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegralReport {
    pub verdict: Verdict,
    pub variant: IntegralVariant,
    /// ∫₁^T with T = `upper`.
    pub partial_sum: f64,
    pub upper: f64,
    /// Integral over [2^k, 2^{k+1}] for each doubling processed.
    pub increments: Vec<f64>,
    /// Geometric extrapolation of the remaining tail (convergent case).
    pub tail_estimate: Option<f64>,
}

/// φ⁻¹(t) by bracket doubling and bisection; φ must be nondecreasing.
pub fn inverse(phi: &impl Fn(f64) -> f64, t: f64) -> Result<f64> {
    let mut lo = 0.0;
    let mut hi = 1.0;
    while phi(hi) < t {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Input(format!("φ never reaches {t}")));
        }
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi(mid) < t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn check_monotone(phi: &impl Fn(f64) -> f64) -> Result<()> {
    let mut prev_t = 0.0;
    let mut prev = phi(0.0);
    if prev.is_nan() {
        return Err(Error::Input("φ(0) is not a number".into()));
    }
    for k in -20..=60 {
        let t = 2f64.powi(k);
        let v = phi(t);
        if v.is_nan() || v < prev {
            return Err(Error::Input(format!(
                "φ is not monotone: φ({prev_t}) = {prev} but φ({t}) = {v}"
            )));
        }
        prev_t = t;
        prev = v;
    }
    if prev <= phi(0.0) {
        return Err(Error::Input("φ is constant".into()));
    }
    Ok(())
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (fm, (b - a) / 6.0 * (f(a) + 4.0 * fm + f(b)))
}

#[allow(clippy::too_many_arguments)]
fn adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
        + adaptive(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
}

/// ∫_a^b f by adaptive Simpson.
pub fn integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
    let (fm, whole) = simpson(f, a, b);
    adaptive(f, a, b, f(a), fm, f(b), whole, eps, 40)
}

/// Classifies convergence of ∫₁^∞ dt/φ⁻¹(t) (or its square-root variant)
/// from doubling increments up to 2^max_exponent.
pub fn integral_condition(
    phi: impl Fn(f64) -> f64,
    variant: IntegralVariant,
    opts: &IntegralOptions,
) -> Result<IntegralReport> {
    check_monotone(&phi)?;
    if opts.window == 0 || opts.decay.is_nan() || opts.decay <= 1.0 {
        return Err(Error::Parameter("need window ≥ 1 and decay > 1".into()));
    }
    let integrand = |t: f64| -> f64 {
        let s = inverse(&phi, t).unwrap_or(f64::INFINITY);
        match variant {
            IntegralVariant::Plain => 1.0 / s,
            IntegralVariant::Sqrt => 1.0 / s.sqrt(),
        }
    };
    // Substitute t = e^u so each doubling is a unit-length-ish interval.
    let in_log = |u: f64| {
        let t = u.exp();
        integrand(t) * t
    };
    // Fail early on a φ that never reaches the range.
    inverse(&phi, 2f64.powi(opts.max_exponent as i32))?;
    let ln2 = std::f64::consts::LN_2;
    let mut increments: Vec<f64> = Vec::new();
    let mut sum = 0.0;
    let mut verdict = Verdict::Inconclusive;
    let mut upper = 1.0;
    for k in 0..opts.max_exponent {
        let inc = integrate(&in_log, k as f64 * ln2, (k + 1) as f64 * ln2, 1e-12);
        increments.push(inc);
        sum += inc;
        upper = 2f64.powi(k as i32 + 1);
        let w = opts.window;
        if increments.len() > w {
            let recent = &increments[increments.len() - w - 1..];
            let ratios: Vec<f64> = recent.windows(2).map(|p| p[1] / p[0]).collect();
            if ratios.iter().all(|&r| r <= 1.0 / opts.decay) {
                verdict = Verdict::Converges;
                break;
            }
            if sum > opts.cap && ratios.iter().all(|&r| r >= opts.flat_ratio) {
                verdict = Verdict::Diverges;
                break;
            }
        }
    }
    let tail_estimate = (verdict == Verdict::Converges).then(|| {
        let n = increments.len();
        let r = increments[n - 1] / increments[n - 2];
        increments[n - 1] * r / (1.0 - r)
    });
    Ok(IntegralReport {
        verdict,
        variant,
        partial_sum: sum,
        upper,
        increments,
        tail_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_spot_values() {
        let psi = PsiTransfer::new(|t| t, 1.0, 1.0, 0.5).unwrap();
        assert_eq!(psi.eval(0.0), 0.0);
        assert_eq!(psi.eval(1.0), 81840.0);
        assert_eq!(psi.eval(0.5 / 6.0), 0.25);
        assert!(psi.jump() > 0.0);
        assert!(matches!(
            PsiTransfer::new(|t| t, 1.0, 1.0, 0.6),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            PsiTransfer::new(|t| t, 0.5, 1.0, 0.5),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn psi_pieces_are_monotone_and_majorized() {
        let psi = PsiTransfer::new(|t: f64| t.powi(2), 2.0, 1.5, 0.25).unwrap();
        let b = psi.breakpoint();
        let mut prev = -1.0;
        let mut prev_major = -1.0;
        for k in 0..=2000 {
            let t = k as f64 * 0.001;
            let v = psi.eval(t);
            if t <= b || t - 0.001 > b {
                assert!(v >= prev);
            }
            prev = v;
            let m = psi.majorant(t);
            assert!(m >= v && m >= prev_major);
            prev_major = m;
        }
        // Continuity of the majorant at the breakpoint.
        let left = psi.majorant(b);
        let right = psi.majorant(b * (1.0 + 1e-12));
        assert!((right - left).abs() <= 1e-6 * left);
    }

    #[test]
    fn inverse_by_bisection() {
        let x = inverse(&|t: f64| t * t, 2.0).unwrap();
        assert!((x - 2f64.sqrt()).abs() < 1e-15);
        let x = inverse(&|t: f64| t.exp() - 1.0, 1e6).unwrap();
        assert!((x - (1e6f64 + 1.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn fixture_table() {
        use IntegralVariant::*;
        let opts = IntegralOptions::default();
        #[allow(clippy::type_complexity)]
        let table: Vec<(Box<dyn Fn(f64) -> f64>, IntegralVariant, Verdict)> = vec![
            (Box::new(|t| t), Plain, Verdict::Diverges),
            (Box::new(|t| t * t), Plain, Verdict::Diverges),
            (Box::new(|t: f64| t.exp_m1()), Sqrt, Verdict::Diverges),
            (Box::new(|t: f64| t.powi(3)), Sqrt, Verdict::Diverges),
            (Box::new(|t: f64| t.sqrt()), Plain, Verdict::Converges),
            (Box::new(|t: f64| t.powf(0.25)), Sqrt, Verdict::Converges),
        ];
        for (k, (phi, variant, expected)) in table.into_iter().enumerate() {
            let r = integral_condition(phi, variant, &opts).unwrap();
            assert_eq!(r.verdict, expected, "fixture {k}: {r:?}");
        }
    }

    #[test]
    fn convergent_tail_matches_closed_form() {
        // φ⁻¹(t) = t², ∫₁^∞ t⁻² dt = 1.
        let r = integral_condition(|t: f64| t.sqrt(), IntegralVariant::Plain, &Default::default()).unwrap();
        let total = r.partial_sum + r.tail_estimate.unwrap();
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn non_monotone_phi_is_rejected() {
        let r = integral_condition(|t: f64| t.sin(), IntegralVariant::Plain, &Default::default());
        assert!(matches!(r, Err(Error::Input(_))));
    }
}
