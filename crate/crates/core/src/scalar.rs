//! Closed-form scalar quantities: the Pucci map and its inverse, the
//! limiting landscape `g_inf(s) = f(s) - V_inf s` with primitive `G_inf`, and
//! its distinguished roots.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Nonlinearity, PucciParams};

const MAX_DOUBLINGS: usize = 60;

pub fn pucci_eval(params: &PucciParams, m: f64) -> f64 {
    params.eval(m)
}

pub fn pucci_inverse(params: &PucciParams, m: f64) -> f64 {
    params.inverse(m)
}

/// Bisect `g` on `[lo, hi]` (opposite signs) down to adjacent floats.
fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut glo = g(lo);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if (gm > 0.0) == (glo > 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Root of an increasing function on `(0, inf)`, bracketed by doubling or
/// halving from `s = 1`.
fn increasing_root(g: impl Fn(f64) -> f64, what: &str) -> Result<f64> {
    let fail = || Error::Landscape(format!("no sign change found for {what}"));
    let g1 = g(1.0);
    if g1 == 0.0 {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (1.0, 1.0);
    if g1 < 0.0 {
        for _ in 0..MAX_DOUBLINGS {
            hi *= 2.0;
            if g(hi) > 0.0 {
                return Ok(bisect(&g, hi / 2.0, hi));
            }
        }
    } else {
        for _ in 0..MAX_DOUBLINGS {
            lo /= 2.0;
            if g(lo) < 0.0 {
                return Ok(bisect(&g, lo, lo * 2.0));
            }
        }
    }
    Err(fail())
}

/// The unique `s > 0` with `f(s)/s = V_inf`.
pub fn find_s_inf(f: &Nonlinearity, v_inf: f64) -> Result<f64> {
    if !(v_inf.is_finite() && v_inf > 0.0) {
        return Err(Error::Landscape(format!("V_inf must be positive, got {v_inf}")));
    }
    increasing_root(|s| f.f(s) / s - v_inf, "f(s)/s = V_inf")
}

/// Lower bound for the maximum of any positive solution: the root of
/// `f(s)/s = V0`.
pub fn small_solution_floor(f: &Nonlinearity, v0: f64) -> Result<f64> {
    if !(v0.is_finite() && v0 > 0.0) {
        return Err(Error::Landscape(format!("V0 must be positive, got {v0}")));
    }
    increasing_root(|s| f.f(s) / s - v0, "f(s)/s = V0")
}

/// `c = -min_{s >= 0} g_inf(s)` and the forcing threshold `t~ = 2c`.
pub fn forcing_threshold(f: &Nonlinearity, v_inf: f64) -> Result<(f64, f64)> {
    if v_inf <= 0.0 {
        return Ok((0.0, 0.0));
    }
    let s_inf = find_s_inf(f, v_inf)?;
    let g = |s: f64| f.f(s) - v_inf * s;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, s_inf);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..200 {
        if b - a <= 1e-15 * s_inf {
            break;
        }
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
    }
    let min = g(0.5 * (a + b)).min(g(0.0)).min(g(s_inf)).min(0.0);
    Ok((-min, -2.0 * min))
}

/// The limiting landscape `g_inf`, `G_inf` for a nonlinearity and a limit
/// value `V_inf`, with its roots `s_inf` (zero of `g_inf`) and `alpha0`
/// (positive zero of `G_inf`).
#[derive(Debug, Clone)]
pub struct Landscape {
    f: Nonlinearity,
    v_inf: f64,
    s_inf: f64,
    alpha0: f64,
    g_min: f64,
}

/// Serializable root summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LandscapeSummary {
    pub v_inf: f64,
    pub s_inf: f64,
    pub alpha0: f64,
    pub g_min: f64,
}

impl Landscape {
    pub fn new(f: Nonlinearity, v_inf: f64) -> Result<Self> {
        let s_inf = find_s_inf(&f, v_inf)?;
        let mut l = Self {
            f,
            v_inf,
            s_inf,
            alpha0: f64::NAN,
            g_min: f64::NAN,
        };
        l.g_min = l.big_g(s_inf);
        l.alpha0 = find_alpha0(&l)?;
        Ok(l)
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.f
    }

    pub fn v_inf(&self) -> f64 {
        self.v_inf
    }

    pub fn s_inf(&self) -> f64 {
        self.s_inf
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    /// `min_{s >= 0} G_inf = G_inf(s_inf)`.
    pub fn g_min(&self) -> f64 {
        self.g_min
    }

    #[inline]
    pub fn g(&self, s: f64) -> f64 {
        self.f.f(s) - self.v_inf * s
    }

    #[inline]
    pub fn dg(&self, s: f64) -> f64 {
        self.f.df(s) - self.v_inf
    }

    /// `G_inf(s) = F(s) - V_inf s^2 / 2`.
    #[inline]
    pub fn big_g(&self, s: f64) -> f64 {
        self.f.primitive(s) - 0.5 * self.v_inf * s * s
    }

    /// Decay rate of the linearised tail `-mu u'' = -V_inf u`.
    pub fn tail_rate(&self, mu: f64) -> f64 {
        (self.v_inf / mu).sqrt()
    }

    pub fn summary(&self) -> LandscapeSummary {
        LandscapeSummary {
            v_inf: self.v_inf,
            s_inf: self.s_inf,
            alpha0: self.alpha0,
            g_min: self.g_min,
        }
    }
}

/// Positive zero of `G_inf`, which lies above `s_inf`.
pub fn find_alpha0(landscape: &Landscape) -> Result<f64> {
    let s_inf = landscape.s_inf;
    let gs = |s: f64| landscape.big_g(s);
    if gs(s_inf) >= 0.0 {
        return Err(Error::Landscape("G_inf(s_inf) must be negative".into()));
    }
    let mut hi = s_inf;
    for _ in 0..MAX_DOUBLINGS {
        hi *= 2.0;
        if gs(hi) > 0.0 {
            return Ok(bisect(gs, s_inf, hi));
        }
    }
    Err(Error::Landscape("no sign change of G_inf above s_inf".into()))
}

/// Gluing amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchingLevels {
    /// Lower root of `G_inf = (1 - lambda/Lambda) G_inf(s_inf)`.
    pub s1: f64,
    /// Upper root of the same equation: the core amplitude of the plus
    /// ground state.
    pub s2: f64,
    /// Root above `alpha0` of `G_inf = (1 - Lambda/lambda) G_inf(s_inf)`:
    /// the core amplitude of the minus ground state.
    pub s1_minus: f64,
}

/// Core amplitudes at which a semilinear core with one coefficient meets the
/// zero-energy tail of the other at `u = s_inf`.
pub fn matching_levels(params: &PucciParams, landscape: &Landscape) -> Result<MatchingLevels> {
    let s_inf = landscape.s_inf;
    let alpha0 = landscape.alpha0;
    if params.is_degenerate() {
        // both levels collapse to zero: the roots tend to 0 and alpha0
        return Ok(MatchingLevels {
            s1: 0.0,
            s2: alpha0,
            s1_minus: alpha0,
        });
    }
    let ratio = params.lambda() / params.Lambda();
    let gmin = landscape.g_min;
    let level_plus = (1.0 - ratio) * gmin;
    let level_minus = (1.0 - 1.0 / ratio) * gmin;
    let shifted = |level: f64| move |s: f64| landscape.big_g(s) - level;
    let s1 = bisect(shifted(level_plus), 0.0, s_inf);
    let s2 = bisect(shifted(level_plus), s_inf, alpha0);
    let mut hi = alpha0;
    let mut s1_minus = None;
    for _ in 0..MAX_DOUBLINGS {
        hi *= 2.0;
        if landscape.big_g(hi) > level_minus {
            s1_minus = Some(bisect(shifted(level_minus), alpha0, hi));
            break;
        }
    }
    let s1_minus = s1_minus.ok_or_else(|| Error::Landscape("no sign change for the minus level".into()))?;
    Ok(MatchingLevels { s1, s2, s1_minus })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Extremal;
    use approx::assert_relative_eq;

    fn sq() -> Nonlinearity {
        Nonlinearity::power(2.0, 0.5).unwrap()
    }

    fn cube() -> Nonlinearity {
        Nonlinearity::power(3.0, 0.5).unwrap()
    }

    fn p(l: f64, big: f64, b: Extremal) -> PucciParams {
        PucciParams::new(l, big, b).unwrap()
    }

    #[test]
    fn pucci_examples() {
        assert_eq!(pucci_eval(&p(1.0, 2.0, Extremal::Plus), 3.0), 6.0);
        assert_eq!(pucci_eval(&p(1.0, 2.0, Extremal::Plus), -3.0), -3.0);
        assert_eq!(pucci_eval(&p(1.0, 1.0, Extremal::Minus), -7.0), -7.0);
        assert_eq!(pucci_inverse(&p(1.0, 2.0, Extremal::Plus), 6.0), 3.0);
        assert_eq!(pucci_inverse(&p(1.0, 2.0, Extremal::Plus), -2.0), -2.0);
        assert_eq!(pucci_inverse(&p(1.0, 2.0, Extremal::Minus), 6.0), 6.0);
    }

    #[test]
    fn s_inf_closed_forms() {
        assert_relative_eq!(find_s_inf(&sq(), 1.0).unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(find_s_inf(&cube(), 1.0).unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(find_s_inf(&sq(), 4.0).unwrap(), 4.0, max_relative = 1e-12);
    }

    #[test]
    fn alpha0_closed_forms() {
        let a = |f, v| Landscape::new(f, v).unwrap().alpha0();
        assert_relative_eq!(a(sq(), 1.0), 1.5, max_relative = 1e-12);
        assert_relative_eq!(a(cube(), 1.0), 2f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(a(sq(), 4.0), 6.0, max_relative = 1e-12);
    }

    #[test]
    fn matching_levels_factorised_cubic() {
        let l = Landscape::new(sq(), 1.0).unwrap();
        let m = matching_levels(&p(1.0, 2.0, Extremal::Plus), &l).unwrap();
        assert_relative_eq!(m.s1, 0.5, max_relative = 1e-12);
        assert_relative_eq!(m.s2, (1.0 + 3f64.sqrt()) / 2.0, max_relative = 1e-12);
        // 2 s^3 - 3 s^2 - 1 = 0
        let c = |s: f64| 2.0 * s.powi(3) - 3.0 * s * s - 1.0;
        assert!(c(m.s1_minus).abs() < 1e-12);
        assert!((m.s1_minus - 1.6777).abs() < 1e-4);
        let d = matching_levels(&p(1.0, 1.0, Extremal::Plus), &l).unwrap();
        assert_eq!((d.s1, d.s2, d.s1_minus), (0.0, 1.5, 1.5));
        // continuity of the upper roots as lambda -> Lambda
        let near = matching_levels(&p(0.999_999, 1.0, Extremal::Plus), &l).unwrap();
        assert!((near.s2 - 1.5).abs() < 1e-5 && (near.s1_minus - 1.5).abs() < 1e-5);
    }

    #[test]
    fn small_solution_floor_closed_forms() {
        assert_relative_eq!(
            small_solution_floor(&sq(), 1.0).unwrap(),
            1.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            small_solution_floor(&sq(), 0.25).unwrap(),
            0.25,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            small_solution_floor(&cube(), 1.0).unwrap(),
            1.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn forcing_threshold_values() {
        let (c, t) = forcing_threshold(&sq(), 1.0).unwrap();
        assert_relative_eq!(c, 0.25, max_relative = 1e-12);
        assert_relative_eq!(t, 0.5, max_relative = 1e-12);
        let (c, t) = forcing_threshold(&cube(), 1.0).unwrap();
        let exact = 2.0 / (3.0 * 3f64.sqrt());
        assert_relative_eq!(c, exact, max_relative = 1e-12);
        assert_relative_eq!(t, 2.0 * exact, max_relative = 1e-12);
        assert_eq!(forcing_threshold(&sq(), 0.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn landscape_sign_structure() {
        let l = Landscape::new(cube(), 2.0).unwrap();
        assert!(l.g(0.5 * l.s_inf()) < 0.0 && l.g(1.5 * l.s_inf()) > 0.0);
        assert!(l.alpha0() > l.s_inf());
        assert!(l.big_g(0.5 * l.alpha0()) < 0.0);
    }
}
