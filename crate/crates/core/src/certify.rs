//! Numerical certificates: weighted norms, single-maximum structure, decay
//! fits, energy functionals, and the nonexistence chain for monotone
//! potentials.

use serde::Serialize;

use crate::bvp::Branch;
use crate::error::{Error, Result};
use crate::model::{reflect, Extremal, Potential, Profile, PucciParams};
use crate::scalar::Landscape;

/// Largest admissible weight for the exponential norm, with a 10% margin:
/// `eta1 < c2` and `Lambda eta1^2 (1 + eta0/2)^2 < V0 / 2`.
pub fn eta1_select(params: &PucciParams, v0: f64, c2: f64, eta0: f64) -> Result<f64> {
    if !(c2 > 0.0 && v0 > 0.0 && eta0 > 0.0) {
        return Err(Error::InvalidParams(format!(
            "need c2, V0, eta0 > 0 (got {c2}, {v0}, {eta0})"
        )));
    }
    let spectral = (v0 / (2.0 * params.Lambda())).sqrt() / (1.0 + eta0 / 2.0);
    Ok(0.9 * c2.min(spectral))
}

/// `sup_x exp(eta1 |x|) |u(x)|`.
pub fn xnorm(u: &Profile, eta1: f64) -> f64 {
    let g = u.grid();
    u.values()
        .iter()
        .enumerate()
        .fold(0.0, |m, (i, v)| m.max((eta1 * g.x(i).abs()).exp() * v.abs()))
}

/// True iff the discrete derivative goes from positive to negative exactly
/// once, allowing a flat top of at most two steps. Differences below
/// `1e-12 max u` count as flat. Returns the index of the maximum.
pub fn single_max_check(u: &Profile) -> Result<(bool, usize)> {
    let vals = u.values();
    let top = u.sup_norm();
    if top == 0.0 {
        return Err(Error::DegenerateInput("profile is identically zero".into()));
    }
    let tol = 1e-12 * top;
    let signs: Vec<i8> = vals
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            if d > tol {
                1
            } else if d < -tol {
                -1
            } else {
                0
            }
        })
        .collect();
    let mut changes = 0;
    let mut last: Option<(i8, usize)> = None;
    let mut plateau_ok = true;
    for (k, &s) in signs.iter().enumerate() {
        if s == 0 {
            continue;
        }
        if let Some((prev, at)) = last {
            if prev != s {
                changes += 1;
                if prev == -1 || k - at - 1 > 2 {
                    plateau_ok = false;
                }
            }
        }
        last = Some((s, k));
    }
    Ok((changes == 1 && plateau_ok, u.argmax()))
}

/// Least-squares line through `(x, ln u)` over the part of `x >= 0` between
/// the given fractions of `L`; returns `(c1, c2)` with `u ~ c1 exp(-c2 x)`.
pub fn decay_fit(u: &Profile, window: (f64, f64)) -> Result<(f64, f64)> {
    let grid = u.grid();
    let l = grid.half_length();
    let (a, b) = (window.0 * l, window.1 * l);
    if !(0.0 <= window.0 && window.0 < window.1 && window.1 <= 1.0) {
        return Err(Error::Fit(format!("bad window {window:?}")));
    }
    let (mut n, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in grid.center()..grid.len() {
        let x = grid.x(i);
        if x < a || x > b {
            continue;
        }
        let v = u.values()[i];
        if !(v > 0.0) {
            return Err(Error::Fit(format!("nonpositive value {v} at x = {x}")));
        }
        let y = v.ln();
        n += 1.0;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    if n < 2.0 {
        return Err(Error::Fit("fewer than two nodes in the window".into()));
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    Ok((intercept.exp(), -slope))
}

/// Which energy functional to evaluate along a profile. In all but `Mu` the
/// kinetic coefficient is the convex one (`Lambda` for `M+`, `lambda` for
/// `M-`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnergyKind {
    /// `u'^2 / 2 + G_inf(u) / mu`.
    Mu { mu: f64 },
    /// `c u'^2 / 2 + F(u) - V(x) u^2 / 2`.
    V,
    /// `c u'^2 / 2 + F(u) - V_inf u^2 / 2`.
    VInf,
    /// `c u'^2 / 2 + F(u) - V(z) u^2 / 2` with `V` frozen at `z`.
    H { z: f64 },
}

/// Pointwise energy on the profile's grid. `u'` is the profile's exact
/// derivative when it carries one, centred differences otherwise.
pub fn energy_series(
    u: &Profile,
    kind: EnergyKind,
    params: &PucciParams,
    v: &Potential,
    landscape: &Landscape,
) -> Profile {
    let g = *u.grid();
    let du = u.first_derivative();
    let f = landscape.nonlinearity();
    let c = params.convex_coeff();
    let v_inf = landscape.v_inf();
    let vz = match kind {
        EnergyKind::H { z } => v.eval(z),
        _ => 0.0,
    };
    let values = u
        .values()
        .iter()
        .zip(&du)
        .enumerate()
        .map(|(i, (&s, &d))| match kind {
            EnergyKind::Mu { mu } => 0.5 * d * d + landscape.big_g(s) / mu,
            EnergyKind::V => 0.5 * c * d * d + f.primitive(s) - 0.5 * v.eval(g.x(i)) * s * s,
            EnergyKind::VInf => 0.5 * c * d * d + f.primitive(s) - 0.5 * v_inf * s * s,
            EnergyKind::H { .. } => 0.5 * c * d * d + f.primitive(s) - 0.5 * vz * s * s,
        })
        .collect();
    Profile::from_values(g, values)
}

/// `h(x) = V(x) - f(u)/u`, taken as `V(x)` where `u <= 0`.
fn h_value(v: &Potential, landscape: &Landscape, x: f64, s: f64) -> f64 {
    if s > 0.0 {
        v.eval(x) - landscape.nonlinearity().f(s) / s
    } else {
        v.eval(x)
    }
}

fn bisect(mut a: f64, mut b: f64, fun: impl Fn(f64) -> f64) -> f64 {
    let fa = fun(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (fun(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// `(y, z)`: `z` is the first zero of `h` to the right of the maximum, `y`
/// the point left of the maximum with `u(y) = u(z)`. Both are bisected on
/// the linear interpolant of `u`.
pub fn inflection_points(u: &Profile, v: &Potential, landscape: &Landscape) -> Result<(f64, f64)> {
    let g = *u.grid();
    let vals = u.values();
    let top = u.argmax();
    if vals[top] <= 0.0 {
        return Err(Error::NotFound("profile has no positive maximum".into()));
    }
    let h_at = |x: f64| h_value(v, landscape, x, u.interpolate(x));
    let mut z = None;
    for i in top..g.len() - 1 {
        let (a, b) = (g.x(i), g.x(i + 1));
        let (ha, hb) = (
            h_value(v, landscape, a, vals[i]),
            h_value(v, landscape, b, vals[i + 1]),
        );
        if ha == 0.0 {
            z = Some(a);
            break;
        }
        if ha < 0.0 && hb > 0.0 {
            z = Some(bisect(a, b, h_at));
            break;
        }
    }
    let z = z.ok_or_else(|| Error::NotFound("h has no sign change right of the maximum".into()))?;
    let level = u.interpolate(z);
    let mut y = None;
    for i in (1..=top).rev() {
        let (a, b) = (g.x(i - 1), g.x(i));
        if vals[i - 1] <= level && vals[i] >= level {
            y = Some(if vals[i - 1] == level {
                a
            } else {
                bisect(a, b, |x| u.interpolate(x) - level)
            });
            break;
        }
    }
    let y =
        y.ok_or_else(|| Error::NotFound(format!("level u(z) = {level} not reached left of the maximum")))?;
    Ok((y, z))
}

/// Relation a chain link asserts about its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// `value >= -tol`.
    NonNegative,
    /// `value <= tol`.
    NonPositive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainLink {
    pub label: String,
    pub value: f64,
    pub tol: f64,
    #[serde(skip)]
    pub relation: Relation,
}

impl ChainLink {
    pub fn holds(&self) -> bool {
        match self.relation {
            Relation::NonNegative => self.value >= -self.tol,
            Relation::NonPositive => self.value <= self.tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    StrictViolation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub chain: Vec<ChainLink>,
    pub verdict: Verdict,
    pub broken_link: Option<String>,
}

impl Certificate {
    fn from_chain(chain: Vec<ChainLink>) -> Self {
        let broken = chain.iter().find(|l| !l.holds()).map(|l| l.label.clone());
        Certificate {
            verdict: if broken.is_some() {
                Verdict::StrictViolation
            } else {
                Verdict::Consistent
            },
            broken_link: broken,
            chain,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn is_monotone(samples: &[f64], increasing: bool) -> bool {
    let scale = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    samples.windows(2).all(|w| {
        let d = if increasing { w[1] - w[0] } else { w[0] - w[1] };
        d >= -1e-14 * scale
    })
}

/// Linear interpolation of node data at `x`.
fn sample_at(g: &crate::model::Grid, data: &[f64], x: f64) -> f64 {
    let s = x / g.step() + g.half_nodes() as f64;
    let i = (s.floor().max(0.0) as usize).min(g.len() - 2);
    let w = s - i as f64;
    (1.0 - w) * data[i] + w * data[i + 1]
}

/// Per-link tolerance `10 (h^2 + exp(-c2 L))` times the energy scale.
fn chain_tolerance(u: &Profile, c2: f64, scale: f64) -> f64 {
    let g = u.grid();
    10.0 * (g.step() * g.step() + (-c2 * g.half_length()).exp()) * scale
}

/// Evaluate `0 <= H(z) <= H(y) = int_{-inf}^{y} H' <= 0` on a candidate
/// solution for a monotone potential. A true solution on the whole line
/// cannot exist, so any candidate must break a link; the equality case is a
/// constant potential with an exact ground state.
///
/// Nonincreasing potentials are handled by reflecting both inputs, so the
/// verdict is exactly reflection invariant.
pub fn nonexistence_certificate(
    u: &Profile,
    v: &Potential,
    params: &PucciParams,
    landscape: &Landscape,
) -> Result<Certificate> {
    let g = *u.grid();
    let samples = v.sample(&g);
    if is_monotone(&samples, true) {
        certificate_increasing(u, v, params, landscape)
    } else if is_monotone(&samples, false) {
        certificate_increasing(&u.reflect(), &reflect(v), params, landscape)
    } else {
        Err(Error::NotApplicable(
            "potential is not monotone on the grid".into(),
        ))
    }
}

fn certificate_increasing(
    u: &Profile,
    v: &Potential,
    params: &PucciParams,
    landscape: &Landscape,
) -> Result<Certificate> {
    let g = *u.grid();
    let vals = u.values();
    let n = g.len();
    if vals[1..n - 1].iter().any(|&s| !(s > 0.0)) {
        return Err(Error::NotApplicable(
            "candidate is not positive in the interior".into(),
        ));
    }
    let (single, _) = single_max_check(u)?;
    if !single {
        return Err(Error::NotApplicable("candidate has more than one maximum".into()));
    }
    let (y, z) = inflection_points(u, v, landscape)?;
    let f = landscape.nonlinearity();
    let vz = v.eval(z);
    let hser = energy_series(u, EnergyKind::H { z }, params, v, landscape);
    let hv = hser.values();
    let h_z = sample_at(&g, hv, z);
    let h_y = sample_at(&g, hv, y);

    // H' from the piecewise formulas, with the sign of u'' per node
    let du = u.first_derivative();
    let d2 = u.second_derivative();
    let ratio = match params.branch() {
        Extremal::Plus => params.Lambda() / params.lambda(),
        Extremal::Minus => params.lambda() / params.Lambda(),
    };
    let dh: Vec<f64> = (0..n)
        .map(|i| {
            let (x, s) = (g.x(i), vals[i]);
            if d2[i] >= 0.0 {
                du[i] * (v.eval(x) - vz) * s
            } else {
                du[i] * (ratio * h_value(v, landscape, x, s) * s + f.f(s) - vz * s)
            }
        })
        .collect();
    // trapezoid from -L to y, last cell cut at y
    let mut integral = 0.0;
    let mut i = 0;
    while i + 1 < n && g.x(i + 1) <= y {
        integral += 0.5 * g.step() * (dh[i] + dh[i + 1]);
        i += 1;
    }
    if i + 1 < n && g.x(i) < y {
        // H' may jump at y (u'' changes sign there), so extend from the left
        let part = y - g.x(i);
        let slope = if i > 0 {
            (dh[i] - dh[i - 1]) / g.step()
        } else {
            0.0
        };
        integral += 0.5 * part * (2.0 * dh[i] + slope * part);
    }

    let scale = hv
        .iter()
        .fold(0.0f64, |m, e| m.max(e.abs()))
        .max(f.primitive(vals[u.argmax()]));
    let c2 = (samples_min(v, &g) / params.convex_coeff()).sqrt();
    let tol = chain_tolerance(u, c2, scale);
    let tol_disc = 10.0 * g.step() * g.step() * scale;
    let chain = vec![
        ChainLink {
            label: "0 <= H(z)".into(),
            value: h_z,
            tol,
            relation: Relation::NonNegative,
        },
        ChainLink {
            label: "H(z) <= H(y)".into(),
            value: h_y - h_z,
            tol,
            relation: Relation::NonNegative,
        },
        // H(y) minus the truncated integral is the neglected tail
        // int_{-inf}^{-L} H', which is <= 0 for a solution on the whole line
        // (the same sign argument as on (-inf, y)). Only its size needs the
        // truncation budget; the other side is held to discretisation error.
        ChainLink {
            label: "H(y) - integral of H' over (-L, y) >= -tail".into(),
            value: h_y - integral,
            tol,
            relation: Relation::NonNegative,
        },
        ChainLink {
            label: "H(y) - integral of H' over (-L, y) <= 0".into(),
            value: h_y - integral,
            tol: tol_disc,
            relation: Relation::NonPositive,
        },
        ChainLink {
            label: "integral of H' over (-L, y) <= 0".into(),
            value: integral,
            tol,
            relation: Relation::NonPositive,
        },
    ];
    Ok(Certificate::from_chain(chain))
}

fn samples_min(v: &Potential, g: &crate::model::Grid) -> f64 {
    v.sample(g).into_iter().fold(f64::INFINITY, f64::min)
}

/// Per-entry margins of the energy inequalities used for the well potential.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop29Entry {
    pub t: f64,
    pub y: f64,
    pub z: f64,
    pub energy_z: f64,
    pub energy_y: f64,
    /// `-E(z)`, expected `>= 0`.
    pub upper_bound_margin: f64,
    /// `E(y) - E(z)`, expected `>= 0`.
    pub ordering_margin: f64,
    /// Largest increase of `E` between consecutive nodes left of `y`,
    /// expected `<= 0`.
    pub monotonicity_excess: f64,
    pub tol: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop29Report {
    pub entries: Vec<Prop29Entry>,
    pub worst_upper_bound_margin: f64,
    pub worst_ordering_margin: f64,
    pub worst_monotonicity_excess: f64,
    pub any_flagged: bool,
}

/// Energy diagnostics with `E = c u'^2/2 + F(u) - V_inf u^2/2` at every
/// converged branch entry.
pub fn prop29_diagnostics(
    branch: &Branch,
    v: &Potential,
    params: &PucciParams,
    landscape: &Landscape,
) -> Result<Prop29Report> {
    let mut entries = Vec::new();
    for e in branch.entries.iter().filter(|e| e.converged) {
        if e.profile.sup_norm() == 0.0 {
            continue;
        }
        entries.push(energy_margins(&e.profile, e.t, v, params, landscape)?);
    }
    let worst = |f: fn(&Prop29Entry) -> f64, min: bool| {
        entries
            .iter()
            .map(f)
            .fold(if min { f64::INFINITY } else { f64::NEG_INFINITY }, |a, b| {
                if min {
                    a.min(b)
                } else {
                    a.max(b)
                }
            })
    };
    Ok(Prop29Report {
        worst_upper_bound_margin: worst(|e| e.upper_bound_margin, true),
        worst_ordering_margin: worst(|e| e.ordering_margin, true),
        worst_monotonicity_excess: worst(|e| e.monotonicity_excess, false),
        any_flagged: entries.iter().any(|e| e.flagged),
        entries,
    })
}

/// Margins for one profile; `t` is carried through for reporting.
pub fn energy_margins(
    u: &Profile,
    t: f64,
    v: &Potential,
    params: &PucciParams,
    landscape: &Landscape,
) -> Result<Prop29Entry> {
    let g = *u.grid();
    let (y, z) = inflection_points(u, v, landscape)?;
    let e = energy_series(u, EnergyKind::VInf, params, v, landscape);
    let ev = e.values();
    let (energy_z, energy_y) = (sample_at(&g, ev, z), sample_at(&g, ev, y));
    let mut excess = f64::NEG_INFINITY;
    for i in 0..g.len() - 1 {
        if g.x(i + 1) > y {
            break;
        }
        excess = excess.max(ev[i + 1] - ev[i]);
    }
    let scale = ev
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()))
        .max(landscape.nonlinearity().primitive(u.sup_norm()));
    let c2 = landscape.tail_rate(params.convex_coeff());
    let tol = chain_tolerance(u, c2, scale);
    let upper = -energy_z;
    let ordering = energy_y - energy_z;
    Ok(Prop29Entry {
        t,
        y,
        z,
        energy_z,
        energy_y,
        upper_bound_margin: upper,
        ordering_margin: ordering,
        monotonicity_excess: excess,
        tol,
        flagged: upper < -tol || ordering < -tol || excess > tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Grid, Nonlinearity, Provenance};

    #[test]
    fn eta1_examples() {
        let p2 = PucciParams::new(1.0, 2.0, Extremal::Plus).unwrap();
        let p1 = PucciParams::new(1.0, 1.0, Extremal::Plus).unwrap();
        assert!((eta1_select(&p2, 1.0, 0.707, 0.5).unwrap() - 0.36).abs() < 1e-12);
        let want = 0.9 * (0.5f64).sqrt() / 1.25;
        assert!((eta1_select(&p1, 1.0, 1.0, 0.5).unwrap() - want).abs() < 1e-12);
        assert!((want - 0.50912).abs() < 1e-5);
        assert!((eta1_select(&p1, 1e6, 0.3, 0.5).unwrap() - 0.27).abs() < 1e-12);
    }

    #[test]
    fn xnorm_of_exponential() {
        let g = Grid::from_half_length(10.0, 1e-2).unwrap();
        assert_eq!(xnorm(&Profile::zeros(g), 0.5), 0.0);
        let u = Profile::from_fn(g, Provenance::Constructed, |x| (-x.abs()).exp());
        assert!((xnorm(&u, 0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_bumps_fail_single_max() {
        let g = Grid::from_half_length(10.0, 1e-2).unwrap();
        let u = Profile::from_fn(g, Provenance::Constructed, |x| {
            (-(x - 3.0) * (x - 3.0)).exp() + (-(x + 3.0) * (x + 3.0)).exp()
        });
        assert!(!single_max_check(&u).unwrap().0);
        let one = Profile::from_fn(g, Provenance::Constructed, |x| (-x * x).exp());
        assert_eq!(single_max_check(&one).unwrap(), (true, g.center()));
        assert!(single_max_check(&Profile::zeros(g)).is_err());
    }

    #[test]
    fn fit_exact_exponential() {
        let g = Grid::from_half_length(20.0, 1e-2).unwrap();
        let u = Profile::from_fn(g, Provenance::Constructed, |x| 3.0 * (-x.abs()).exp());
        let (c1, c2) = decay_fit(&u, (0.7, 0.95)).unwrap();
        assert!((c2 - 1.0).abs() < 1e-6 && (c1 - 3.0).abs() < 1e-5);
        assert!(decay_fit(&Profile::zeros(g), (0.7, 0.95)).is_err());
    }

    #[test]
    fn sech2_inflection() {
        let l = Landscape::new(Nonlinearity::power(2.0, 0.5).unwrap(), 1.0).unwrap();
        let g = Grid::from_half_length(20.0, 1e-3).unwrap();
        let u = Profile::from_fn(g, Provenance::Constructed, |x| 1.5 / (x / 2.0).cosh().powi(2));
        let (y, z) = inflection_points(&u, &Potential::constant(1.0), &l).unwrap();
        let want = 2.0 * 1.5f64.sqrt().acosh();
        assert!((z - want).abs() < 1e-6, "{z} vs {want}");
        assert!((y + want).abs() < 1e-6);
    }
}
