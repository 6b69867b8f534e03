//! Invariants over randomly drawn parameters, checked against the
//! collocation oracle in `common`.

mod common;

use proptest::prelude::*;

use common::{c1_explicit, RadialOracle};
use plaque::closed_form::{clearance_t, ModelParams, RadialSteadyState};
use plaque::special_fn::{bessel_i, bessel_k, BesselOrder};
use plaque::spectral::{bifurcation_point, dispersion, growth_rate, mode_linearization};

fn params() -> impl Strategy<Value = ModelParams> {
    (0.5f64..3.0, 0.5f64..10.0, 0.0f64..50.0, 0.5f64..5.0, 1.0f64..1.95)
        .prop_map(|(d, h, l, g, rho)| ModelParams::new(d, h, l, g, 2.0, rho).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn clearance_matches_collocation(p in params()) {
        let t = clearance_t(&p).unwrap();
        let o = RadialOracle::new(p).t;
        prop_assert!((t - o).abs() <= 1e-10 * o.abs().max(1e-3));
        prop_assert_eq!(t > 0.0, p.ldl > 0.0);
    }

    #[test]
    fn radial_state_matches_collocation(p in params()) {
        let exact = RadialSteadyState::new(p).unwrap();
        let o = RadialOracle::new(p);
        for (i, &r) in o.cheb.r.iter().enumerate() {
            let v = exact.eval(r).unwrap();
            prop_assert!((v.m - o.m[i]).abs() < 1e-10);
            prop_assert!((v.p - o.p[i]).abs() < 1e-9 * (1.0 + o.p[i].abs()));
            prop_assert!(v.m > 0.0);
        }
    }

    #[test]
    fn dispersion_at_zero_matches_collocation(p in params(), n in 0u32..=6) {
        let h = dispersion(0.0, n, &p).unwrap();
        let o = RadialOracle::new(p).dispersion(0.0, n);
        prop_assert!((h - o).abs() < 1e-8 * (1.0 + o.abs()), "h = {h}, collocation {o}");
    }

    #[test]
    fn dispersion_at_positive_rate_matches_collocation(p in params(), n in 0u32..=6, a in 0.0f64..50.0) {
        let h = dispersion(a, n, &p).unwrap();
        let o = RadialOracle::new(p).dispersion(a, n);
        prop_assert!((h - o).abs() < 1e-8 * (1.0 + o.abs()), "h = {h}, collocation {o}");
    }

    #[test]
    fn first_coefficient_has_closed_form(p in params(), n in 0u32..=8) {
        let (c1, _) = plaque::spectral::bifurcation_coefficients(&p, n).unwrap();
        let e = c1_explicit(&p, n);
        prop_assert!((c1 - e).abs() <= 1e-12 * e.abs().max(1.0));
    }

    #[test]
    fn sign_of_dispersion_flips_at_bifurcation(n in 2u32..=5, s in 0.05f64..0.95) {
        let p = ModelParams::reference();
        let l_n = bifurcation_point(&p, n).unwrap().l_n;
        prop_assert!(dispersion(0.0, n, &p.with_ldl(s * l_n)).unwrap() > 0.0);
        prop_assert!(dispersion(0.0, n, &p.with_ldl(l_n / s)).unwrap() < 0.0);
    }

    #[test]
    fn growth_rate_is_a_root(l in 0.1f64..40.0, n in 2u32..=6) {
        let p = ModelParams::reference().with_ldl(l);
        if let Some(a) = growth_rate(n, &p).unwrap().a {
            prop_assert!(dispersion(a, n, &p).unwrap().abs() < 1e-10);
            let o = RadialOracle::new(p).growth_rate(n, 2.0 * a + 10.0).unwrap();
            prop_assert!((o - a).abs() < 1e-8 * a.max(1.0));
        }
    }

    #[test]
    fn mode_profile_is_nonnegative(p in params(), n in 0u32..=8) {
        let mode = mode_linearization(&p, n).unwrap();
        for k in 0..=200 {
            let r = p.rho + (p.outer_radius - p.rho) * k as f64 / 200.0;
            prop_assert!(mode.q(r).unwrap() >= -1e-12);
        }
    }

    #[test]
    fn bessel_wronskian(n in 0u32..40, x in 1e-3f64..80.0) {
        let (o, o1) = (BesselOrder::new(n).unwrap(), BesselOrder::new(n + 1).unwrap());
        let w = bessel_i(o, x).unwrap() * bessel_k(o1, x).unwrap() + bessel_i(o1, x).unwrap() * bessel_k(o, x).unwrap();
        prop_assert!((x * w - 1.0).abs() < 1e-10);
    }
}
