//! Closed-form oracles for the ground-state construction and the linear
//! solver. Every expected value here is computed independently of the
//! library (explicit formulas or a hand-rolled root finder).

use pucci_core::bvp::{solve_frozen, DiscreteOperator};
use pucci_core::certify::{decay_fit, eta1_select, inflection_points};
use pucci_core::homoclinic::{build_omega, integrate_ivp, uniqueness_probe, EventKind};
use pucci_core::scalar::{find_alpha0, forcing_threshold, matching_levels};
use pucci_core::*;

fn power(p: f64) -> Nonlinearity {
    Nonlinearity::power(p, 0.5).unwrap()
}

fn landscape(p: f64) -> Landscape {
    Landscape::new(power(p), 1.0).unwrap()
}

/// Newton on a polynomial given by coefficients (highest first).
fn poly_root(coeffs: &[f64], mut x: f64) -> f64 {
    for _ in 0..100 {
        let (mut v, mut d) = (0.0, 0.0);
        for &c in coeffs {
            d = d * x + v;
            v = v * x + c;
        }
        x -= v / d;
    }
    x
}

fn sup_on(profile: &Profile, half_width: f64, exact: impl Fn(f64) -> f64) -> f64 {
    let g = profile.grid();
    (0..g.len())
        .filter(|&i| g.x(i).abs() <= half_width)
        .map(|i| (profile.values()[i] - exact(g.x(i))).abs())
        .fold(0.0, f64::max)
}

#[test]
fn pure_power_landscape_closed_forms() {
    for p in [2.0, 3.0, 4.5] {
        for v in [0.5, 1.0, 3.0] {
            let l = Landscape::new(power(p), v).unwrap();
            let s_inf = v.powf(1.0 / (p - 1.0));
            let alpha0 = ((p + 1.0) * v / 2.0).powf(1.0 / (p - 1.0));
            assert!((l.s_inf() - s_inf).abs() <= 1e-10 * s_inf);
            assert!((find_alpha0(&l).unwrap() - alpha0).abs() <= 1e-10 * alpha0);
        }
    }
}

#[test]
fn forcing_threshold_vertices() {
    let (c, t) = forcing_threshold(&power(2.0), 1.0).unwrap();
    assert!((c - 0.25).abs() < 1e-9 && (t - 0.5).abs() < 1e-9);
    let c3 = 2.0 / (3.0 * 3f64.sqrt());
    let (c, t) = forcing_threshold(&power(3.0), 1.0).unwrap();
    assert!((c - c3).abs() < 1e-9 && (t - 2.0 * c3).abs() < 1e-9);
    assert_eq!(forcing_threshold(&power(2.0), 0.0).unwrap(), (0.0, 0.0));
}

#[test]
fn matching_cubics() {
    // G(s) = s^3/3 - s^2/2, G(1) = -1/6
    let l = landscape(2.0);
    let plus = PucciParams::new(1.0, 2.0, Extremal::Plus).unwrap();
    let m = matching_levels(&plus, &l).unwrap();
    // G = -1/12  <=>  4s^3 - 6s^2 + 1 = 0 = (2s - 1)(2s^2 - 2s - 1)
    assert!((m.s2 - (1.0 + 3f64.sqrt()) / 2.0).abs() < 1e-12);
    assert!((m.s1 - 0.5).abs() < 1e-12);
    // G = +1/6  <=>  2s^3 - 3s^2 - 1 = 0
    let want = poly_root(&[2.0, -3.0, 0.0, -1.0], 2.0);
    assert!((m.s1_minus - want).abs() < 1e-12);
    assert!((want - 1.6777).abs() < 1e-4);
}

#[test]
fn soliton_and_sech_oracles() {
    let p = PucciParams::new(1.0, 1.0, Extremal::Plus).unwrap();
    let w = build_omega(&p, &landscape(2.0), 30.0, 1e-3).unwrap();
    let err = sup_on(&w.profile, 20.0, |x| 1.5 / (x / 2.0).cosh().powi(2));
    assert!(err <= 1e-6, "sech^2: {err}");
    let w = build_omega(&p, &landscape(3.0), 30.0, 1e-3).unwrap();
    let err = sup_on(&w.profile, 20.0, |x| 2f64.sqrt() / x.cosh());
    assert!(err <= 1e-6, "sech: {err}");
}

#[test]
fn soliton_trajectory_and_events() {
    let l = landscape(2.0);
    let t = integrate_ivp(&l, 1.0, 1.5, 10.0, 1e-3).unwrap();
    let hit = t.first(EventKind::HitsSInf).unwrap();
    let want = 2.0 * 1.5f64.sqrt().acosh();
    assert!((hit.x - want).abs() < 1e-9, "{} vs {want}", hit.x);
    assert!(t.first(EventKind::HitsZero).is_none());
    assert!(t.energy_drift(&l) < 1e-12);
}

#[test]
fn ground_state_ordering_and_decay() {
    let l = landscape(2.0);
    for big in [1.0, 2.0, 4.0] {
        let plus = PucciParams::new(1.0, big, Extremal::Plus).unwrap();
        let minus = plus.with_branch(Extremal::Minus);
        let wp = build_omega(&plus, &l, 60.0, 1e-2).unwrap();
        let wm = build_omega(&minus, &l, 60.0, 1e-2).unwrap();
        let a0 = l.alpha0();
        assert!(wm.max_value >= a0 - 1e-12 && a0 >= wp.max_value - 1e-12);
        if big > 1.0 {
            assert!(wm.max_value > a0 && a0 > wp.max_value);
        }
        let rate_plus = (1.0 / big).sqrt();
        assert!((wp.decay.1 - rate_plus).abs() <= 0.02 * rate_plus);
        assert!((wm.decay.1 - 1.0).abs() <= 0.02);
    }
}

#[test]
fn glue_slope_from_brute_force_energy() {
    // the core leaves s2 with zero slope; at s_inf its energy must match the
    // zero-energy tail of the other coefficient
    let l = landscape(2.0);
    for (lo, hi) in [(1.0, 2.0), (0.5, 3.0)] {
        for b in [Extremal::Plus, Extremal::Minus] {
            let p = PucciParams::new(lo, hi, b).unwrap();
            let w = build_omega(&p, &l, 60.0, 1e-3).unwrap();
            let tail_slope2 = -2.0 * l.big_g(l.s_inf()) / w.tail_mu;
            let core_slope2 = 2.0 * (l.big_g(w.max_value) - l.big_g(l.s_inf())) / w.core_mu;
            assert!(
                (core_slope2 - tail_slope2).abs() < 1e-12,
                "{core_slope2} vs {tail_slope2}"
            );
            assert!((w.glue.du_core.powi(2) - tail_slope2).abs() < 1e-9);
            assert!(w.glue.second_mismatch() < 1e-6);
        }
    }
}

#[test]
fn frozen_linear_bvp() {
    // the three-point scheme is second order: 1.5e-8 at h = 1e-3
    let grid = Grid::from_half_length(5.0, 5e-4).unwrap();
    let p = PucciParams::new(1.0, 1.0, Extremal::Plus).unwrap();
    let op = DiscreteOperator::new(grid, p, &Potential::constant(1.0), power(2.0)).unwrap();
    let rhs = Profile::from_fn(grid, Provenance::Constructed, |_| 1.0);
    let u = solve_frozen(&op, &rhs).unwrap();
    let err = sup_on(&u, 5.0, |x| 1.0 - x.cosh() / 5f64.cosh());
    assert!(err < 1e-8, "{err}");
}

#[test]
fn inflection_of_ground_states() {
    let l = landscape(2.0);
    let p = PucciParams::new(1.0, 2.0, Extremal::Plus).unwrap();
    let w = build_omega(&p, &l, 60.0, 1e-3).unwrap();
    let (y, z) = inflection_points(&w.profile, &Potential::constant(1.0), &l).unwrap();
    assert!((z - w.y1).abs() < 1e-6 && (y + w.y1).abs() < 1e-6);
}

#[test]
fn exponential_weight_examples() {
    let p = PucciParams::new(1.0, 2.0, Extremal::Plus).unwrap();
    let eta = eta1_select(&p, 1.0, 0.707, 0.5).unwrap();
    assert!((eta - 0.36).abs() < 1e-12);
    let w = build_omega(&p, &landscape(2.0), 60.0, 1e-2).unwrap();
    let (_, c2) = decay_fit(&w.profile, (0.7, 0.95)).unwrap();
    assert!(c2 > eta);
    let x = pucci_core::certify::xnorm(&w.profile, eta);
    assert!(x.is_finite() && x >= w.max_value);
}

#[test]
fn probes_on_soliton() {
    let l = landscape(2.0);
    let p = PucciParams::new(1.0, 1.0, Extremal::Plus).unwrap();
    let w = build_omega(&p, &l, 30.0, 1e-3).unwrap();
    for z in [0.0, w.y1, -w.y1, 25.0] {
        let r = uniqueness_probe(&w, &l, z).unwrap();
        assert!(r.sup_error <= 1e-7, "{z}: {r:?}");
        assert_eq!(r.low_signal, z == 25.0);
    }
}
