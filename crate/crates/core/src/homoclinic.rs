//! Phase-plane construction of the constant-potential ground states.
//!
//! On each side of the inflection level `u = s_inf` the equation
//! `-M±(u'') + V_inf u = f(u)` is semilinear, `-mu u'' = g_inf(u)` with
//! `mu` one of the two ellipticity constants, and conserves
//! `E[u, mu] = u'^2 / 2 + G_inf(u) / mu`. The ground state is a concave core
//! orbit from the top down to `s_inf`, glued in C2 fashion to the zero-energy
//! homoclinic tail of the other coefficient.

use serde::Serialize;

use crate::certify::decay_fit;
use crate::error::{Error, Result};
use crate::model::{Extremal, Grid, Profile, Provenance, PucciParams};
use crate::scalar::{matching_levels, Landscape, MatchingLevels};

/// One classical RK4 step for the autonomous system `u' = v`, `v' = acc(u)`.
#[inline]
fn rk4(acc: &impl Fn(f64) -> f64, u: f64, v: f64, dx: f64) -> (f64, f64) {
    let k1u = v;
    let k1v = acc(u);
    let k2u = v + 0.5 * dx * k1v;
    let k2v = acc(u + 0.5 * dx * k1u);
    let k3u = v + 0.5 * dx * k2v;
    let k3v = acc(u + 0.5 * dx * k2u);
    let k4u = v + dx * k3v;
    let k4v = acc(u + dx * k3u);
    (
        u + dx / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
        v + dx / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    )
}

/// Locate where `event(u, v)` changes sign inside a step of size `dx` from
/// `(u, v)`, by bisection on the sub-step length.
fn refine_event(
    acc: &impl Fn(f64) -> f64,
    event: impl Fn(f64, f64) -> f64,
    u: f64,
    v: f64,
    dx: f64,
) -> (f64, f64, f64) {
    let e0 = event(u, v);
    let (mut lo, mut hi) = (0.0, dx.abs());
    let sign = dx.signum();
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        let (um, vm) = rk4(acc, u, v, sign * mid);
        if (event(um, vm) > 0.0) == (e0 > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    let (ue, ve) = rk4(acc, u, v, sign * s);
    (sign * s, ue, ve)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    HitsSInf,
    HitsZero,
    DerivativeZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub kind: EventKind,
    pub x: f64,
    pub u: f64,
    pub up: f64,
}

/// Solution of `-mu u'' = g_inf(u)`, `(u, u')(0) = (alpha, 0)`, sampled at
/// `x_k = k h`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub mu: f64,
    pub alpha: f64,
    pub h: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub up: Vec<f64>,
    pub events: Vec<Event>,
}

impl Trajectory {
    /// `E[u, mu](x) = u'^2 / 2 + G_inf(u) / mu` along the samples.
    pub fn energy(&self, landscape: &Landscape) -> Vec<f64> {
        self.u
            .iter()
            .zip(&self.up)
            .map(|(&u, &v)| 0.5 * v * v + landscape.big_g(u) / self.mu)
            .collect()
    }

    /// `max |E(x) - E(0)|`.
    pub fn energy_drift(&self, landscape: &Landscape) -> f64 {
        let e = self.energy(landscape);
        e.iter().fold(0.0, |m, v| m.max((v - e[0]).abs()))
    }

    /// Drift restricted to `x <= x_max`. Orbits that cross zero are cut at
    /// different places for different steps; comparing drifts across a step
    /// ladder needs a common window.
    pub fn energy_drift_within(&self, landscape: &Landscape, x_max: f64) -> f64 {
        let e = self.energy(landscape);
        e.iter()
            .zip(&self.x)
            .take_while(|(_, &x)| x <= x_max + 1e-9 * self.h)
            .fold(0.0, |m, (v, _)| m.max((v - e[0]).abs()))
    }

    pub fn first(&self, kind: EventKind) -> Option<&Event> {
        self.events.iter().find(|e| e.kind == kind)
    }
}

/// Fixed-step RK4 for `-mu u'' = g_inf(u)` from `(alpha, 0)`, with events
/// refined to 1e-12. Stops at `x_max` or when `u` hits zero.
pub fn integrate_ivp(landscape: &Landscape, mu: f64, alpha: f64, x_max: f64, h: f64) -> Result<Trajectory> {
    if !(mu > 0.0 && alpha > 0.0 && h > 0.0 && x_max > 0.0) {
        return Err(Error::InvalidParams(format!(
            "need mu, alpha, h, x_max > 0 (got {mu}, {alpha}, {h}, {x_max})"
        )));
    }
    let s_inf = landscape.s_inf();
    let acc = |u: f64| -landscape.g(u) / mu;
    let steps = (x_max / h).round() as usize;
    let mut t = Trajectory {
        mu,
        alpha,
        h,
        x: Vec::with_capacity(steps + 1),
        u: Vec::with_capacity(steps + 1),
        up: Vec::with_capacity(steps + 1),
        events: Vec::new(),
    };
    let (mut u, mut v) = (alpha, 0.0);
    t.x.push(0.0);
    t.u.push(u);
    t.up.push(v);
    for k in 0..steps {
        let x0 = k as f64 * h;
        let (un, vn) = rk4(&acc, u, v, h);
        if !(un.is_finite() && vn.is_finite()) {
            return Err(Error::IntegrationBlowUp { x: x0 + h });
        }
        let crossed = |a: f64, b: f64| (a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0);
        let mut stop = false;
        let mut found: Vec<Event> = Vec::new();
        if crossed(u - s_inf, un - s_inf) {
            let (dx, ue, ve) = refine_event(&acc, |a, _| a - s_inf, u, v, h);
            found.push(Event {
                kind: EventKind::HitsSInf,
                x: x0 + dx,
                u: ue,
                up: ve,
            });
        }
        // the initial state has v = 0 by construction; only count later turns
        if k > 0 && crossed(v, vn) {
            let (dx, ue, ve) = refine_event(&acc, |_, b| b, u, v, h);
            found.push(Event {
                kind: EventKind::DerivativeZero,
                x: x0 + dx,
                u: ue,
                up: ve,
            });
        }
        if crossed(u, un) {
            let (dx, ue, ve) = refine_event(&acc, |a, _| a, u, v, h);
            found.push(Event {
                kind: EventKind::HitsZero,
                x: x0 + dx,
                u: ue,
                up: ve,
            });
            stop = true;
        }
        found.sort_by(|a, b| a.x.total_cmp(&b.x));
        t.events.extend(found);
        u = un;
        v = vn;
        t.x.push(x0 + h);
        t.u.push(u);
        t.up.push(v);
        if stop {
            break;
        }
    }
    Ok(t)
}

/// Fate of the orbit started at rest from amplitude `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeClass {
    /// Reaches zero in finite time (`alpha > alpha0`).
    Crossing,
    /// The homoclinic orbit (`alpha = alpha0`).
    Homoclinic,
    /// Positive periodic orbit (`alpha < alpha0`).
    Periodic,
}

pub const CLASSIFY_TOL: f64 = 1e-9;

/// Classify by comparison with `alpha0`, cross-checked against the sign of
/// `G_inf(alpha)`.
pub fn classify_alpha(landscape: &Landscape, mu: f64, alpha: f64) -> Result<AmplitudeClass> {
    if !(mu > 0.0 && alpha > 0.0) {
        return Err(Error::InvalidParams(format!(
            "need mu, alpha > 0, got {mu}, {alpha}"
        )));
    }
    let (s_inf, alpha0) = (landscape.s_inf(), landscape.alpha0());
    if (alpha - s_inf).abs() <= CLASSIFY_TOL * s_inf {
        return Err(Error::Equilibrium { alpha, s_inf });
    }
    let class = if (alpha - alpha0).abs() <= CLASSIFY_TOL * alpha0 {
        AmplitudeClass::Homoclinic
    } else if alpha > alpha0 {
        AmplitudeClass::Crossing
    } else {
        AmplitudeClass::Periodic
    };
    let g = landscape.big_g(alpha);
    let consistent = match class {
        AmplitudeClass::Crossing => g > 0.0,
        AmplitudeClass::Periodic => g < 0.0,
        AmplitudeClass::Homoclinic => true,
    };
    if !consistent {
        return Err(Error::Landscape(format!(
            "G_inf({alpha}) = {g} disagrees with the alpha0 comparison"
        )));
    }
    Ok(class)
}

/// Smoothness data at the glue point. Slopes come from the two separate
/// integrations; curvatures are extrapolated from the nodes on either side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlueReport {
    pub du_core: f64,
    pub du_tail: f64,
    pub ddu_core: f64,
    pub ddu_tail: f64,
}

impl GlueReport {
    pub fn first_mismatch(&self) -> f64 {
        (self.du_core - self.du_tail).abs()
    }

    pub fn second_mismatch(&self) -> f64 {
        (self.ddu_core - self.ddu_tail).abs()
    }
}

/// A constant-potential ground state `omega±` on a symmetric grid.
#[derive(Debug, Clone)]
pub struct OmegaProfile {
    pub branch: Extremal,
    pub params: PucciParams,
    pub profile: Profile,
    /// Glue point: `u(y1) = s_inf`, `u''(y1) = 0`.
    pub y1: f64,
    /// Inflection point; equals `y1` by construction.
    pub z: f64,
    pub max_value: f64,
    /// `omega(x) ~ c1 exp(-c2 |x|)` fitted on `[0.7 L, 0.95 L]`.
    pub decay: (f64, f64),
    pub levels: MatchingLevels,
    pub core_mu: f64,
    pub tail_mu: f64,
    pub glue: GlueReport,
}

/// JSON sidecar for an exported ground state.
#[derive(Debug, Clone, Serialize)]
pub struct OmegaSummary {
    pub branch: Extremal,
    pub lambda: f64,
    #[serde(rename = "Lambda")]
    pub big_lambda: f64,
    pub half_length: f64,
    pub step: f64,
    pub y1: f64,
    pub z: f64,
    pub max: f64,
    pub c1: f64,
    pub c2: f64,
    pub s1: f64,
    pub s2: f64,
    pub s1_minus: f64,
    pub glue_first_mismatch: f64,
    pub glue_second_mismatch: f64,
}

impl OmegaProfile {
    pub fn summary(&self) -> OmegaSummary {
        OmegaSummary {
            branch: self.branch,
            lambda: self.params.lambda(),
            big_lambda: self.params.Lambda(),
            half_length: self.profile.grid().half_length(),
            step: self.profile.grid().step(),
            y1: self.y1,
            z: self.z,
            max: self.max_value,
            c1: self.decay.0,
            c2: self.decay.1,
            s1: self.levels.s1,
            s2: self.levels.s2,
            s1_minus: self.levels.s1_minus,
            glue_first_mismatch: self.glue.first_mismatch(),
            glue_second_mismatch: self.glue.second_mismatch(),
        }
    }

    /// Core coefficient for `|x| < y1`, tail coefficient beyond.
    pub fn mu_at(&self, x: f64) -> f64 {
        if x.abs() < self.y1 {
            self.core_mu
        } else {
            self.tail_mu
        }
    }
}

/// Zero-energy tail of `-mu u'' = g_inf(u)` on the nodes `k h`,
/// `k >= k_start`, positioned so that it passes through `s_inf` at `y1`.
/// Integrated backwards from a far-field seed on the zero-energy curve,
/// which is the stable direction for this orbit.
fn tail_on_nodes(
    landscape: &Landscape,
    mu: f64,
    y1: f64,
    h: f64,
    k_start: usize,
    k_end: usize,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let s_inf = landscape.s_inf();
    let rate = landscape.tail_rate(mu);
    let acc = |u: f64| -landscape.g(u) / mu;
    let l = k_end as f64 * h;
    let delta = (s_inf * (-rate * (l - y1 + 2.0)).exp())
        .min(1e-12 * landscape.alpha0())
        .max(1e-250);
    let seed = |d: f64| (d, -(-2.0 * landscape.big_g(d) / mu).max(0.0).sqrt());

    // pass 1: distance from the seed back to the s_inf crossing
    let (mut u, mut v) = seed(delta);
    let mut dist = 0.0;
    loop {
        let (un, vn) = rk4(&acc, u, v, -h);
        if !(un.is_finite() && vn.is_finite()) || dist > 1e7 * h {
            return Err(Error::IntegrationBlowUp { x: -dist });
        }
        if un >= s_inf {
            let (dx, _, _) = refine_event(&acc, |a, _| a - s_inf, u, v, -h);
            dist += -dx;
            break;
        }
        u = un;
        v = vn;
        dist += h;
    }

    // pass 2: same orbit, seeded at y1 + dist and stepped onto the nodes
    let x_seed = y1 + dist;
    let n = k_end + 1 - k_start;
    let mut us = vec![0.0; n];
    let mut vs = vec![0.0; n];
    let (u0, v0) = seed(delta);
    let k_seed = (x_seed / h).floor() as usize;
    for k in (k_seed + 1).max(k_start)..=k_end {
        let decay = (-rate * (k as f64 * h - x_seed)).exp();
        us[k - k_start] = u0 * decay;
        vs[k - k_start] = v0 * decay;
    }
    if k_seed >= k_start {
        let frac = x_seed - k_seed as f64 * h;
        let (mut u, mut v) = rk4(&acc, u0, v0, -frac);
        let mut k = k_seed;
        loop {
            if k <= k_end {
                us[k - k_start] = u;
                vs[k - k_start] = v;
            }
            if k == k_start {
                break;
            }
            let (un, vn) = rk4(&acc, u, v, -h);
            u = un;
            v = vn;
            k -= 1;
        }
    }
    // slope at the glue point itself, from the node just right of it
    let (_, vg) = rk4(&acc, us[0], vs[0], y1 - k_start as f64 * h);
    Ok((us, vs, vg))
}

/// Quadratic through three points, evaluated at `x`.
fn extrapolate(xs: &[f64; 3], ys: &[f64; 3], x: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..3 {
        let mut w = 1.0;
        for j in 0..3 {
            if j != i {
                w *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        total += w * ys[i];
    }
    total
}

/// Build `omega+` or `omega-` on `[-L, L]` with step `h`.
pub fn build_omega(
    params: &PucciParams,
    landscape: &Landscape,
    half_length: f64,
    h: f64,
) -> Result<OmegaProfile> {
    let grid = Grid::from_half_length(half_length, h)?;
    let levels = matching_levels(params, landscape)?;
    let s_inf = landscape.s_inf();
    let core_mu = params.concave_coeff();
    let tail_mu = params.convex_coeff();
    let amplitude = match params.branch() {
        Extremal::Plus => levels.s2,
        Extremal::Minus => levels.s1_minus,
    };
    let n = grid.half_nodes();
    let h = grid.step();

    // core: from the top down to s_inf
    let core_acc = |u: f64| -landscape.g(u) / core_mu;
    let mut core_u = vec![amplitude];
    let mut core_v = vec![0.0];
    let (mut u, mut v) = (amplitude, 0.0);
    let (y1, du_core);
    let mut k = 0usize;
    loop {
        let (un, vn) = rk4(&core_acc, u, v, h);
        if !(un.is_finite() && vn.is_finite()) {
            return Err(Error::IntegrationBlowUp {
                x: (k + 1) as f64 * h,
            });
        }
        if un <= s_inf {
            let (dx, _, ve) = refine_event(&core_acc, |a, _| a - s_inf, u, v, h);
            y1 = k as f64 * h + dx;
            du_core = ve;
            break;
        }
        k += 1;
        if k >= n {
            return Err(Error::DomainTooSmall(format!(
                "core does not reach s_inf within L = {}",
                grid.half_length()
            )));
        }
        u = un;
        v = vn;
        core_u.push(u);
        core_v.push(v);
    }
    let k_start = core_u.len();
    if k_start < 3 {
        return Err(Error::InvalidGrid(format!(
            "step {h} too coarse to resolve the core"
        )));
    }
    let (tail_u, tail_v, du_tail) = tail_on_nodes(landscape, tail_mu, y1, h, k_start, n)?;
    let tail_acc = |u: f64| -landscape.g(u) / tail_mu;
    let ddu_tail = extrapolate(
        &[
            k_start as f64 * h,
            (k_start + 1) as f64 * h,
            (k_start + 2) as f64 * h,
        ],
        &[0, 1, 2].map(|j| tail_acc(tail_u[j])),
        y1,
    );
    let ddu_core = extrapolate(
        &[
            (k_start - 3) as f64 * h,
            (k_start - 2) as f64 * h,
            (k_start - 1) as f64 * h,
        ],
        &[0, 1, 2].map(|j| core_acc(core_u[k_start - 3 + j])),
        y1,
    );

    let mut half_u = core_u;
    half_u.extend(tail_u);
    let mut half_v = core_v;
    half_v.extend(tail_v);
    let tail_end = *half_u.last().unwrap();
    if tail_end > 1e-10 * landscape.alpha0() {
        return Err(Error::DomainTooSmall(format!(
            "omega(L) = {tail_end:.3e} exceeds 1e-10 alpha0; increase L"
        )));
    }
    let half_a: Vec<f64> = half_u
        .iter()
        .enumerate()
        .map(|(k, &u)| {
            let mu = if (k as f64 * h) < y1 { core_mu } else { tail_mu };
            -landscape.g(u) / mu
        })
        .collect();

    let len = grid.len();
    let mut values = vec![0.0; len];
    let mut d1 = vec![0.0; len];
    let mut d2 = vec![0.0; len];
    for k in 0..=n {
        values[n + k] = half_u[k];
        values[n - k] = half_u[k];
        d1[n + k] = half_v[k];
        d1[n - k] = -half_v[k];
        d2[n + k] = half_a[k];
        d2[n - k] = half_a[k];
    }
    d1[n] = 0.0;
    let profile = Profile::new(grid, values, Provenance::Constructed)?.with_derivatives(d1, d2)?;
    let decay = decay_fit(&profile, (0.7, 0.95))?;
    Ok(OmegaProfile {
        branch: params.branch(),
        params: *params,
        profile,
        y1,
        z: y1,
        max_value: amplitude,
        decay,
        levels,
        core_mu,
        tail_mu,
        glue: GlueReport {
            du_core,
            du_tail,
            ddu_core,
            ddu_tail,
        },
    })
}

/// Result of re-integrating the ground state from data at one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeResult {
    pub node_x: f64,
    pub sup_error: f64,
    /// Window actually re-integrated.
    pub window: (f64, f64),
    /// Data at the node is too small to carry information.
    pub low_signal: bool,
}

/// Re-integrate `u'' = (M±)^{-1}(-g_inf(u))` in both directions from
/// `(u(z), u'(z))` read off the profile and return the sup distance to the
/// stored profile over a window of `10 / c_tail` on each side (further out,
/// the unstable mode of the saddle at 0 amplifies round-off beyond the
/// signal).
pub fn uniqueness_probe(omega: &OmegaProfile, landscape: &Landscape, z: f64) -> Result<ProbeResult> {
    let grid = *omega.profile.grid();
    let i = grid.nearest(z);
    if i == 0 || i == grid.len() - 1 {
        return Err(Error::InvalidParams(format!("probe point {z} is not interior")));
    }
    let params = omega.params;
    let acc = |u: f64| params.inverse(-landscape.g(u));
    let vals = omega.profile.values();
    let d1 = omega.profile.first_derivative();
    let h = grid.step();
    let s_inf = landscape.s_inf();
    let reach = (10.0 / landscape.tail_rate(omega.tail_mu) / h).ceil() as usize;
    let mut worst = 0.0f64;
    let lo = i.saturating_sub(reach);
    let hi = (i + reach).min(grid.len() - 1);
    for dir in [1isize, -1] {
        let (mut u, mut v) = (vals[i], d1[i]);
        let mut j = i as isize;
        loop {
            let next = j + dir;
            if next < lo as isize || next > hi as isize {
                break;
            }
            let dx = dir as f64 * h;
            let (mut un, mut vn) = rk4(&acc, u, v, dx);
            if (u - s_inf) * (un - s_inf) < 0.0 {
                // the right-hand side switches coefficient at s_inf: land on
                // the switch and restart so the step stays fourth order
                let (part, us, vs) = refine_event(&acc, |a, _| a - s_inf, u, v, dx);
                let r = rk4(&acc, us, vs, dx - part);
                un = r.0;
                vn = r.1;
            }
            if !(un.is_finite() && vn.is_finite()) {
                return Err(Error::IntegrationBlowUp {
                    x: grid.x(next as usize),
                });
            }
            u = un;
            v = vn;
            j = next;
            worst = worst.max((u - vals[j as usize]).abs());
        }
    }
    Ok(ProbeResult {
        node_x: grid.x(i),
        sup_error: worst,
        window: (grid.x(lo), grid.x(hi)),
        low_signal: vals[i] < 1e-6 * omega.max_value,
    })
}
