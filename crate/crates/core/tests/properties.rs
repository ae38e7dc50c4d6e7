use proptest::prelude::*;

use pucci_core::bvp::{comparison_test, solve_frozen, DiscreteOperator};
use pucci_core::certify::nonexistence_certificate;
use pucci_core::homoclinic::build_omega;
use pucci_core::scalar::{matching_levels, pucci_eval};
use pucci_core::*;

fn params() -> impl Strategy<Value = (f64, f64)> {
    (0.25f64..4.0, 1.0f64..5.0).prop_map(|(lo, r)| (lo, lo * r))
}

/// Multiples of 1/64 so that sums and products below are exact.
fn dyadic(max: i32) -> impl Strategy<Value = f64> {
    (-max * 64..=max * 64).prop_map(|k| k as f64 / 64.0)
}

fn potential() -> impl Strategy<Value = Potential> {
    prop_oneof![
        (0.2f64..3.0).prop_map(Potential::constant),
        (0.5f64..3.0, 0.0f64..0.45, 0.5f64..4.0).prop_map(|(v, d, r)| Potential::well(v, d * v, r)),
        (0.3f64..2.0, 0.0f64..2.0, 0.3f64..3.0).prop_map(|(lo, gap, s)| Potential::sigmoid(lo, lo + gap, s)),
    ]
}

fn branch() -> impl Strategy<Value = Extremal> {
    prop_oneof![Just(Extremal::Plus), Just(Extremal::Minus)]
}

fn operator(lo: f64, hi: f64, b: Extremal, v: &Potential, l: f64) -> DiscreteOperator {
    let grid = Grid::from_half_length(l, 0.05).unwrap();
    let p = PucciParams::new(lo, hi, b).unwrap();
    DiscreteOperator::new(grid, p, v, Nonlinearity::power(2.0, 0.5).unwrap()).unwrap()
}

fn rhs(grid: Grid, amps: &[f64], centers: &[f64]) -> Profile {
    Profile::from_fn(grid, Provenance::Constructed, |x| {
        amps.iter()
            .zip(centers)
            .map(|(a, c)| a * (-(x - c) * (x - c)).exp())
            .sum::<f64>()
    })
}

/// Thomas algorithm, for the lambda = Lambda reduction check.
fn thomas(sub: f64, diag: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sub / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub * c[i - 1];
        c[i] = sub / m;
        d[i] = (rhs[i] - sub * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pucci_homogeneous_monotone_ordered((lo, hi) in params(), m in -50.0f64..50.0, k in 0.0f64..10.0, dm in 0.0f64..5.0) {
        let plus = PucciParams::new(lo, hi, Extremal::Plus).unwrap();
        let minus = plus.with_branch(Extremal::Minus);
        for p in [plus, minus] {
            let a = pucci_eval(&p, k * m);
            let b = k * pucci_eval(&p, m);
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            prop_assert!(pucci_eval(&p, m + dm) >= pucci_eval(&p, m));
            prop_assert!((p.inverse(p.eval(m)) - m).abs() <= 1e-12 * (1.0 + m.abs()));
        }
        prop_assert!(pucci_eval(&minus, m) <= pucci_eval(&plus, m));
        prop_assert_eq!(pucci_eval(&plus, m), -pucci_eval(&minus, -m));
    }

    #[test]
    fn difference_inequality_exact(lo in 1i32..16, r in 1i32..8, m1 in dyadic(100), m2 in dyadic(100)) {
        let (lo, hi) = (lo as f64 / 4.0, (lo * r) as f64 / 4.0);
        let plus = PucciParams::new(lo, hi, Extremal::Plus).unwrap();
        let minus = plus.with_branch(Extremal::Minus);
        for p in [plus, minus] {
            prop_assert!(p.eval(m1) - p.eval(m2) >= minus.eval(m1 - m2));
        }
    }

    #[test]
    fn equal_constants_collapse(lam in 0.1f64..5.0, m in -10.0f64..10.0) {
        let plus = PucciParams::new(lam, lam, Extremal::Plus).unwrap();
        let minus = plus.with_branch(Extremal::Minus);
        prop_assert_eq!(plus.eval(m), lam * m);
        prop_assert_eq!(minus.eval(m), lam * m);
    }

    #[test]
    fn matching_identity((lo, hi) in params(), p in 1.5f64..4.0, v in 0.3f64..3.0) {
        let l = Landscape::new(Nonlinearity::power(p, 0.25).unwrap(), v).unwrap();
        let pp = PucciParams::new(lo, hi, Extremal::Plus).unwrap();
        let m = matching_levels(&pp, &l).unwrap();
        let gs = l.big_g(l.s_inf());
        let scale = gs.abs().max(1e-300);
        prop_assert!((l.big_g(m.s2) - (1.0 - lo / hi) * gs).abs() <= 1e-10 * scale);
        prop_assert!((l.big_g(m.s1_minus) - (1.0 - hi / lo) * gs).abs() <= 1e-10 * scale * (hi / lo));
        prop_assert!(m.s2 <= l.alpha0() && l.alpha0() <= m.s1_minus);
    }

    #[test]
    fn maximum_principle_and_sup_bound(
        (lo, hi) in params(), b in branch(), v in potential(),
        amps in prop::collection::vec(0.0f64..3.0, 3), centers in prop::collection::vec(-3.0f64..3.0, 3),
        l in 2.0f64..6.0,
    ) {
        let op = operator(lo, hi, b, &v, l);
        let r = rhs(*op.grid(), &amps, &centers);
        let u = solve_frozen(&op, &r).unwrap();
        prop_assert!(u.values().iter().all(|&x| x >= 0.0));
        prop_assert!(u.sup_norm() * op.v0() <= r.sup_norm() + 1e-9);
    }

    #[test]
    fn comparison_principle(
        (lo, hi) in params(), b in branch(), v in potential(),
        amps in prop::collection::vec(0.0f64..3.0, 3), centers in prop::collection::vec(-3.0f64..3.0, 3),
        extra in prop::collection::vec(0.0f64..1.0, 2), signed in any::<bool>(),
    ) {
        let op = operator(lo, hi, b, &v, 4.0);
        let g = *op.grid();
        let mut r1 = rhs(g, &amps, &centers);
        if signed {
            r1 = r1.map(|x| x - 0.5);
        }
        let bump = rhs(g, &extra, &[-1.0, 1.5]);
        let r2 = Profile::new(g, r1.values().iter().zip(bump.values()).map(|(a, d)| a + d).collect(), Provenance::Constructed).unwrap();
        prop_assert!(comparison_test(&op, &r1, &r2).unwrap());
        prop_assert!(comparison_test(&op, &r1, &r1).unwrap());
    }

    #[test]
    fn linear_reduction_matches_direct_solve(lam in 0.2f64..4.0, b in branch(), v in potential(), amps in prop::collection::vec(-2.0f64..3.0, 3)) {
        let op = operator(lam, lam, b, &v, 4.0);
        let g = *op.grid();
        let r = rhs(g, &amps, &[-1.0, 0.0, 2.0]);
        let u = solve_frozen(&op, &r).unwrap();
        let n = g.len();
        let ih2 = 1.0 / (g.step() * g.step());
        let diag: Vec<f64> = (1..n - 1).map(|i| 2.0 * lam * ih2 + op.potential()[i]).collect();
        let x = thomas(-lam * ih2, &diag, &r.values()[1..n - 1]);
        let worst = x.iter().zip(&u.values()[1..n - 1]).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        prop_assert!(worst <= 1e-12 * (1.0 + u.sup_norm()), "{}", worst);
    }

    #[test]
    fn reflection_is_an_involution(v in potential(), shift in -40isize..40) {
        let grid = Grid::from_half_length(5.0, 0.05).unwrap();
        prop_assert_eq!(v.sample(&grid), reflect(&reflect(&v)).sample(&grid));
        let mirrored: Vec<f64> = v.sample(&grid).into_iter().rev().collect();
        prop_assert_eq!(reflect(&v).sample(&grid), mirrored);
        let u = Profile::from_fn(grid, Provenance::Constructed, |x| (-(x - 0.3) * (x - 0.3)).exp()).shift_nodes(shift);
        let back = u.reflect().reflect();
        prop_assert_eq!(back.values(), u.values());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn certificate_verdict_reflection_invariant(b in branch(), shift in -60isize..60, gap in 0.0f64..0.8) {
        let l = Landscape::new(Nonlinearity::power(2.0, 0.5).unwrap(), 1.0).unwrap();
        let p = PucciParams::new(1.0, 2.0, b).unwrap();
        let w = build_omega(&p, &l, 60.0, 1e-2).unwrap();
        let u = w.profile.regrid(Grid::from_half_length(20.0, 1e-2).unwrap()).unwrap().shift_nodes(shift);
        let v = Potential::sigmoid(1.0, 1.0 + gap, 1.0);
        let a = nonexistence_certificate(&u, &v, &p, &l);
        let r = nonexistence_certificate(&u.reflect(), &reflect(&v), &p, &l);
        match (a, r) {
            (Ok(a), Ok(r)) => prop_assert_eq!(a, r),
            (Err(a), Err(r)) => prop_assert_eq!(a.to_string(), r.to_string()),
            (a, r) => prop_assert!(false, "{:?} vs {:?}", a, r),
        }
    }
}
