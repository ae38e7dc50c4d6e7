use serde::{Deserialize, Serialize};

use super::validation::{Check, ValidationReport};
use crate::error::{Error, Result};

/// One term `a * s^p` of a power sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub a: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonlinearityKind {
    /// `f(s) = sum a_i s^{p_i}`.
    PowerSum { terms: Vec<PowerTerm> },
    /// `f(s) = eta(s) s^p + (1 - eta(s)) c s ln s` with a smooth cutoff
    /// `eta` that equals 1 below `cutoff.0` and 0 above `cutoff.1`.
    LogHybrid {
        p: f64,
        c: f64,
        #[serde(default = "default_cutoff")]
        cutoff: (f64, f64),
    },
}

fn default_cutoff() -> (f64, f64) {
    (2.0, 3.0)
}

/// The nonlinearity `f`, extended by zero to `s <= 0`, together with the
/// small-amplitude exponent `eta0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNonlinearity", into = "RawNonlinearity")]
pub struct Nonlinearity {
    kind: NonlinearityKind,
    eta0: f64,
}

#[derive(Serialize, Deserialize)]
struct RawNonlinearity {
    #[serde(flatten)]
    kind: NonlinearityKind,
    eta0: f64,
}

impl TryFrom<RawNonlinearity> for Nonlinearity {
    type Error = Error;
    fn try_from(r: RawNonlinearity) -> Result<Self> {
        Nonlinearity::new(r.kind, r.eta0)
    }
}

impl From<Nonlinearity> for RawNonlinearity {
    fn from(n: Nonlinearity) -> Self {
        RawNonlinearity {
            kind: n.kind,
            eta0: n.eta0,
        }
    }
}

// 8-point Gauss-Legendre on [-1, 1].
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];
const GL_PANELS: usize = 16;

/// `exp(-1/t)` for `t > 0`, else 0.
fn flat(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

fn flat_prime(t: f64) -> f64 {
    if t > 0.0 {
        flat(t) / (t * t)
    } else {
        0.0
    }
}

/// Smooth step: 0 for `t <= 0`, 1 for `t >= 1`, C-infinity and monotone.
fn smooth_step(t: f64) -> f64 {
    let (a, b) = (flat(t), flat(1.0 - t));
    a / (a + b)
}

fn smooth_step_prime(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let (a, b) = (flat(t), flat(1.0 - t));
    let (da, db) = (flat_prime(t), -flat_prime(1.0 - t));
    (da * b - a * db) / ((a + b) * (a + b))
}

impl Nonlinearity {
    pub fn new(kind: NonlinearityKind, eta0: f64) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidNonlinearity(m));
        let min_excess = match &kind {
            NonlinearityKind::PowerSum { terms } => {
                if terms.is_empty() {
                    return bad("power sum needs at least one term".into());
                }
                for t in terms {
                    if !(t.a.is_finite() && t.a > 0.0) {
                        return bad(format!("coefficient must be positive, got {}", t.a));
                    }
                    if !(t.p.is_finite() && t.p > 1.0) {
                        return bad(format!("exponent must exceed 1, got {}", t.p));
                    }
                }
                terms.iter().map(|t| t.p - 1.0).fold(f64::INFINITY, f64::min)
            }
            NonlinearityKind::LogHybrid { p, c, cutoff } => {
                let (lo, hi) = *cutoff;
                if !(p.is_finite() && *p > 1.0) {
                    return bad(format!("exponent must exceed 1, got {p}"));
                }
                if !(lo > 1.0 && hi > lo && hi.is_finite()) {
                    return bad(format!("cutoff needs 1 < lo < hi, got ({lo}, {hi})"));
                }
                if !(c.is_finite() && *c > 0.0) {
                    return bad(format!("log coefficient must be positive, got {c}"));
                }
                // c ln s >= s^(p-1) on the cutoff interval keeps f(s)/s increasing.
                for k in 0..=200 {
                    let s = lo + (hi - lo) * k as f64 / 200.0;
                    if c * s.ln() < s.powf(p - 1.0) * (1.0 - 1e-12) {
                        return bad(format!("c = {c} violates c ln s >= s^(p-1) at s = {s}"));
                    }
                }
                p - 1.0
            }
        };
        if !(eta0.is_finite() && eta0 > 0.0 && eta0 < min_excess) {
            return bad(format!("eta0 must lie in (0, {min_excess}), got {eta0}"));
        }
        Ok(Self { kind, eta0 })
    }

    /// `f(s) = s^p`.
    pub fn power(p: f64, eta0: f64) -> Result<Self> {
        Self::new(
            NonlinearityKind::PowerSum {
                terms: vec![PowerTerm { a: 1.0, p }],
            },
            eta0,
        )
    }

    /// The smallest admissible log coefficient for the hybrid on a cutoff
    /// interval.
    pub fn min_log_coefficient(p: f64, cutoff: (f64, f64)) -> f64 {
        (0..=200)
            .map(|k| {
                let s = cutoff.0 + (cutoff.1 - cutoff.0) * k as f64 / 200.0;
                s.powf(p - 1.0) / s.ln()
            })
            .fold(0.0, f64::max)
    }

    pub fn log_hybrid(p: f64, c: f64, eta0: f64) -> Result<Self> {
        Self::new(
            NonlinearityKind::LogHybrid {
                p,
                c,
                cutoff: default_cutoff(),
            },
            eta0,
        )
    }

    pub fn kind(&self) -> &NonlinearityKind {
        &self.kind
    }

    pub fn eta0(&self) -> f64 {
        self.eta0
    }

    fn cutoff_weight(lo: f64, hi: f64, s: f64) -> (f64, f64) {
        let t = (s - lo) / (hi - lo);
        (1.0 - smooth_step(t), -smooth_step_prime(t) / (hi - lo))
    }

    pub fn f(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            NonlinearityKind::PowerSum { terms } => terms.iter().map(|t| t.a * s.powf(t.p)).sum(),
            NonlinearityKind::LogHybrid { p, c, cutoff } => {
                let (lo, hi) = *cutoff;
                if s <= lo {
                    s.powf(*p)
                } else if s >= hi {
                    c * s * s.ln()
                } else {
                    let (w, _) = Self::cutoff_weight(lo, hi, s);
                    w * s.powf(*p) + (1.0 - w) * c * s * s.ln()
                }
            }
        }
    }

    pub fn df(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            NonlinearityKind::PowerSum { terms } => terms.iter().map(|t| t.a * t.p * s.powf(t.p - 1.0)).sum(),
            NonlinearityKind::LogHybrid { p, c, cutoff } => {
                let (lo, hi) = *cutoff;
                let pow_part = p * s.powf(p - 1.0);
                let log_part = c * (s.ln() + 1.0);
                if s <= lo {
                    pow_part
                } else if s >= hi {
                    log_part
                } else {
                    let (w, dw) = Self::cutoff_weight(lo, hi, s);
                    dw * (s.powf(*p) - c * s * s.ln()) + w * pow_part + (1.0 - w) * log_part
                }
            }
        }
    }

    /// Primitive `F(s) = int_0^s f`.
    pub fn primitive(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            NonlinearityKind::PowerSum { terms } => {
                terms.iter().map(|t| t.a * s.powf(t.p + 1.0) / (t.p + 1.0)).sum()
            }
            NonlinearityKind::LogHybrid { p, c, cutoff } => {
                let (lo, hi) = *cutoff;
                let head = |s: f64| s.powf(p + 1.0) / (p + 1.0);
                let log_prim = |s: f64| c * (0.5 * s * s * s.ln() - 0.25 * s * s);
                if s <= lo {
                    head(s)
                } else if s < hi {
                    head(lo) + self.quadrature(lo, s)
                } else {
                    head(lo) + self.quadrature(lo, hi) + log_prim(s) - log_prim(hi)
                }
            }
        }
    }

    fn quadrature(&self, a: f64, b: f64) -> f64 {
        let width = (b - a) / GL_PANELS as f64;
        let mut sum = 0.0;
        for k in 0..GL_PANELS {
            let mid = a + (k as f64 + 0.5) * width;
            for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
                sum += w * self.f(mid + 0.5 * width * x);
            }
        }
        0.5 * width * sum
    }

    /// `f(theta s) / f(s)`, the quantity whose large-`s` limit defines the
    /// blow-up profile.
    pub fn scaling_ratio(&self, theta: f64, s: f64) -> f64 {
        self.f(theta * s) / self.f(s)
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Sampled checks of the sign, small-amplitude, superlinearity and
/// monotone-ratio conditions.
pub fn validate_nonlinearity(f: &Nonlinearity, samples: usize) -> Result<ValidationReport> {
    if samples < 10 {
        return Err(Error::InvalidNonlinearity(format!(
            "need at least 10 samples, got {samples}"
        )));
    }
    let eval = |s: f64| -> Result<f64> {
        let v = f.f(s);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidNonlinearity(format!("f({s}) = {v} is not finite")))
        }
    };
    let mut report = ValidationReport::default();

    // sign: zero on s <= 0, nonnegative above
    let mut sign_ok = true;
    for s in log_grid(1e-6, 1e6, samples) {
        sign_ok &= eval(-s)? == 0.0 && eval(s)? >= 0.0;
    }
    sign_ok &= eval(0.0)? == 0.0;
    report.push(Check::new(
        "f1_sign",
        sign_ok,
        "f = 0 on s <= 0 and f >= 0 on s > 0",
    ));

    // small-amplitude decay of s^{-1-eta0} f(s)
    let small = log_grid(1e-10, 1e-1, samples);
    let r: Vec<f64> = small
        .iter()
        .map(|&s| eval(s).map(|v| v * s.powf(-1.0 - f.eta0)))
        .collect::<Result<_>>()?;
    let decreasing = r.windows(2).all(|w| w[0] < w[1]);
    let decay_ok = decreasing && r[0] < r[samples - 1];
    report.push(Check::new(
        "f2_small_decay",
        decay_ok,
        format!("s^(-1-eta0) f(s) = {:.3e} at s = 1e-10", r[0]),
    ));

    // superlinear growth of f(s)/s
    let large = log_grid(1.0, 1e12, samples);
    let q: Vec<f64> = large
        .iter()
        .map(|&s| eval(s).map(|v| v / s))
        .collect::<Result<_>>()?;
    let growing = q.windows(2).all(|w| w[1] > w[0]);
    let ratio_hi = f.scaling_ratio(0.5, large[samples - 1]);
    let ratio_prev = f.scaling_ratio(0.5, large[samples - 2]);
    report.push(Check::new(
        "f3_superlinear",
        growing && q[samples - 1] > q[0] && ratio_hi.is_finite() && ratio_prev.is_finite(),
        format!(
            "f(s)/s from {:.3e} to {:.3e}; f(s/2)/f(s) -> {ratio_hi:.6}",
            q[0],
            q[samples - 1]
        ),
    ));

    // strict monotonicity of f(s)/s
    let mid = log_grid(1e-6, 1e6, samples.max(200));
    let ratios: Vec<f64> = mid
        .iter()
        .map(|&s| eval(s).map(|v| v / s))
        .collect::<Result<_>>()?;
    let strict = ratios.windows(2).all(|w| w[1] > w[0]);
    report.push(Check::new(
        "f4_ratio_increasing",
        strict,
        "f(s)/s strictly increasing on a log grid over [1e-6, 1e6]",
    ));
    Ok(report)
}
