use pucci_core::bvp::{continuation, solve_full, Branch, DiscreteOperator, NewtonOptions};
use pucci_core::certify::*;
use pucci_core::homoclinic::build_omega;
use pucci_core::*;

fn setup(b: Extremal) -> (PucciParams, Landscape, Profile) {
    let l = Landscape::new(Nonlinearity::power(2.0, 0.5).unwrap(), 1.0).unwrap();
    let p = PucciParams::new(1.0, 2.0, b).unwrap();
    let w = build_omega(&p, &l, 60.0, 1e-2).unwrap();
    (p, l, w.profile)
}

#[test]
fn equality_baseline_on_exact_ground_states() {
    for b in [Extremal::Plus, Extremal::Minus] {
        let (p, l, w) = setup(b);
        let w = w.regrid(Grid::from_half_length(30.0, 1e-2).unwrap()).unwrap();
        let c = nonexistence_certificate(&w, &Potential::constant(1.0), &p, &l).unwrap();
        assert_eq!(c.verdict, Verdict::Consistent, "{c:?}");
        for link in &c.chain {
            assert!(link.value.abs() <= 2e-6, "{link:?}");
        }
    }
}

#[test]
fn impostors_on_monotone_potential_are_rejected() {
    let v = Potential::sigmoid(1.0, 1.5, 1.0);
    for b in [Extremal::Plus, Extremal::Minus] {
        let (p, l, w) = setup(b);
        let g = Grid::from_half_length(8.0, 1e-2).unwrap();
        let op = DiscreteOperator::new(g, p, &v, l.nonlinearity().clone()).unwrap();
        let bump = Bump::new(0.25).unwrap();
        let init = Profile::from_fn(g, Provenance::Constructed, |x| w.interpolate(x + 4.0));
        let s = solve_full(&op, 0.0, &bump, &init, &NewtonOptions::default()).unwrap();
        assert!(s.converged, "{}", s.message);
        let c = nonexistence_certificate(&s.profile, &v, &p, &l).unwrap();
        assert_eq!(c.verdict, Verdict::StrictViolation);
        assert!(c.broken_link.as_deref().unwrap().contains("<= 0"));
        let json = c.to_json().unwrap();
        assert!(json.contains("\"verdict\": \"strict_violation\""));
        let r = nonexistence_certificate(&s.profile.reflect(), &reflect(&v), &p, &l).unwrap();
        assert_eq!(r, c);
    }
}

#[test]
fn certificate_refuses_bad_input() {
    let (p, l, w) = setup(Extremal::Plus);
    let g = Grid::from_half_length(10.0, 1e-2).unwrap();
    let w = w.regrid(g).unwrap();
    let well = Potential::well(1.0, 0.3, 3.0);
    assert!(matches!(
        nonexistence_certificate(&w, &well, &p, &l),
        Err(Error::NotApplicable(_))
    ));
    let two = Profile::from_fn(g, Provenance::Constructed, |x| {
        (-(x - 3.0) * (x - 3.0)).exp() + (-(x + 3.0) * (x + 3.0)).exp()
    });
    assert!(matches!(
        nonexistence_certificate(&two, &Potential::sigmoid(1.0, 1.5, 1.0), &p, &l),
        Err(Error::NotApplicable(_))
    ));
}

fn well_branch(b: Extremal) -> (PucciParams, Landscape, Potential, Branch) {
    let (p, l, w) = setup(b);
    let g = Grid::from_half_length(30.0, 1e-2).unwrap();
    let v = Potential::well(1.0, 0.3, 3.0);
    let op = DiscreteOperator::new(g, p, &v, l.nonlinearity().clone()).unwrap();
    let ts: Vec<f64> = (0..=8).rev().map(|k| k as f64 * 0.25).collect();
    let br = continuation(
        &op,
        &ts,
        &Bump::new(0.25).unwrap(),
        &w.regrid(g).unwrap(),
        0.3,
        &NewtonOptions::default(),
    )
    .unwrap();
    (p, l, v, br)
}

#[test]
fn well_branch_diagnostics_and_controls() {
    for b in [Extremal::Plus, Extremal::Minus] {
        let (p, l, v, br) = well_branch(b);
        let last = br.last().unwrap();
        assert!(last.converged && last.t == 0.0);
        let rep = prop29_diagnostics(&br, &v, &p, &l).unwrap();
        assert!(!rep.entries.is_empty());
        assert!(!rep.any_flagged, "{rep:?}");
        let u = &last.profile;
        let (single, at) = single_max_check(u).unwrap();
        assert!(single && u.grid().x(at).abs() < 0.1);

        // maximum moved to +5 by remapping x with fixed endpoints
        let g = *u.grid();
        let lh = g.half_length();
        let remap = |x: f64| {
            if x <= 5.0 {
                -lh + (x + lh) * lh / (lh + 5.0)
            } else {
                (x - 5.0) * lh / (lh - 5.0)
            }
        };
        let moved = Profile::from_fn(g, Provenance::Constructed, |x| u.interpolate(remap(x)));
        let e = energy_margins(&moved, 0.0, &v, &p, &l).unwrap();
        assert!(e.flagged && e.ordering_margin < -e.tol);

        let squeezed = Profile::from_fn(g, Provenance::Constructed, |x| {
            u.interpolate(if x < 0.0 { 2.0 * x } else { x })
        });
        let e = energy_margins(&squeezed, 0.0, &v, &p, &l).unwrap();
        assert!(e.monotonicity_excess > e.tol);
    }
}

#[test]
fn constant_potential_energies_vanish_on_tails() {
    let (p, l, w) = setup(Extremal::Plus);
    let c = Potential::constant(1.0);
    let e = energy_series(&w, EnergyKind::VInf, &p, &c, &l);
    let g = *w.grid();
    let y1 = build_omega(&p, &l, 60.0, 1e-2).unwrap().y1;
    for i in 0..g.len() {
        if g.x(i).abs() > y1 + 0.05 {
            assert!(e.values()[i].abs() < 1e-9, "{} {}", g.x(i), e.values()[i]);
        }
    }
    let m = energy_series(&w, EnergyKind::Mu { mu: 2.0 }, &p, &c, &l);
    let tail_max = (0..g.len())
        .filter(|&i| g.x(i) > y1 + 0.05)
        .map(|i| m.values()[i].abs())
        .fold(0.0, f64::max);
    assert!(tail_max < 1e-9);
}
