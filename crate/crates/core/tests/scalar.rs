use proptest::prelude::*;
use qeilab_core::oracle;
use qeilab_core::scalar::{
    build_twopoint, coincidence_difference, independence_identity_check, kappa_bar, massless_static_closed_form, wick_dqi_bound, wick_dqi_bound_path,
    EvalPath, SamplingFunction, StateKind, Worldline, MASSLESS_STATIC_CONSTANT,
};
use std::f64::consts::PI;

fn static_bound(g: &SamplingFunction, kind: StateKind) -> f64 {
    let wl = Worldline::static_origin();
    wick_dqi_bound(g, &wl, &build_twopoint(kind, &wl).unwrap()).unwrap().value
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn constant_is_one_over_eight_pi_squared() {
    assert_eq!(MASSLESS_STATIC_CONSTANT, 1.0 / (8.0 * PI * PI));
}

#[test]
fn closed_form_matches_simpson_oracle() {
    for g in [SamplingFunction::bump(1.0), SamplingFunction::cos2(0.7), SamplingFunction::bump(2.5)] {
        let (a, b) = g.support();
        let oracle = MASSLESS_STATIC_CONSTANT * oracle::simpson(a, b, 200_000, |t| g.deriv(t).powi(2));
        assert!(rel(massless_static_closed_form(&g), oracle) < 1e-9, "{g:?}");
    }
}

#[test]
fn stationary_vacuum_matches_closed_form() {
    for g in [SamplingFunction::bump(1.0), SamplingFunction::cos2(1.0), SamplingFunction::bump(0.4)] {
        let q = static_bound(&g, StateKind::vacuum(0.0));
        assert!(rel(q, massless_static_closed_form(&g)) < 1e-9, "{g:?}: {q}");
    }
}

#[test]
fn general_path_agrees_with_stationary_for_massive_vacuum() {
    let g = SamplingFunction::bump(1.0);
    let wl = Worldline::static_origin();
    let omega = build_twopoint(StateKind::vacuum(1.0), &wl).unwrap();
    let s = wick_dqi_bound_path(&g, &wl, &omega, EvalPath::Stationary).unwrap();
    let q = wick_dqi_bound_path(&g, &wl, &omega, EvalPath::General).unwrap();
    assert!((s.value - q.value).abs() <= s.total_error + q.total_error);
}

#[test]
fn thermal_coincidence_matches_bose_oracle() {
    for (t, m) in [(1.0, 0.0), (0.5, 0.0), (2.0, 0.0), (1.0, 1.0), (2.0, 0.5)] {
        let d = coincidence_difference(&StateKind::thermal(t, m), &StateKind::vacuum(m), 0.02).unwrap();
        let o = oracle::bose_wick_square(t, m);
        assert!(rel(d.value, o) < 1e-7, "T={t} m={m}: {} vs {o}", d.value);
    }
    let d = coincidence_difference(&StateKind::thermal(1.0, 0.0), &StateKind::vacuum(0.0), 0.02).unwrap();
    assert!(rel(d.value, 1.0 / 12.0) < 1e-7, "{}", d.value);
}

#[test]
fn torus_coincidence_matches_lattice_and_mode_sum() {
    for (m, l) in [(1.0, 1.0), (2.0, 0.8), (0.5, 3.0)] {
        let k = kappa_bar(m, l).unwrap().value;
        let d = coincidence_difference(&StateKind::torus(l, m), &StateKind::vacuum(m), 0.02).unwrap();
        assert!(rel(d.value, k) < 1e-6, "m={m} L={l}: {} vs {k}", d.value);
        assert!(rel(oracle::kappa_mode_sum(m, l), k) < 1e-6);
    }
}

#[test]
fn independence_identity_for_thermal_pair() {
    let g = SamplingFunction::cos2(1.0);
    let wl = Worldline::static_origin();
    let a = build_twopoint(StateKind::thermal(1.5, 0.0), &wl).unwrap();
    let b = build_twopoint(StateKind::vacuum(0.0), &wl).unwrap();
    let d = independence_identity_check(&g, &wl, &a, &b).unwrap();
    assert!(d.pass && d.relative < 1e-6, "{d:?}");
}

#[test]
fn massless_torus_is_rejected() {
    assert!(kappa_bar(0.0, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn dilation_scales_as_inverse_square(lambda in 0.3f64..3.0) {
        let g = SamplingFunction::bump(1.0);
        let q1 = static_bound(&g, StateKind::vacuum(0.0));
        let ql = static_bound(&g.dilate(lambda), StateKind::vacuum(0.0));
        prop_assert!(rel(ql * lambda * lambda, q1) < 1e-7);
    }

    #[test]
    fn bound_grows_with_reference_temperature(t in 0.2f64..3.0, dt in 0.1f64..1.0) {
        let g = SamplingFunction::bump(1.0);
        let lo = static_bound(&g, StateKind::thermal(t, 0.0));
        let hi = static_bound(&g, StateKind::thermal(t + dt, 0.0));
        prop_assert!(lo > 0.0 && hi > lo);
    }

    #[test]
    fn mass_lowers_the_vacuum_bound(m in 0.1f64..4.0) {
        let g = SamplingFunction::cos2(1.0);
        prop_assert!(static_bound(&g, StateKind::vacuum(m)) < static_bound(&g, StateKind::vacuum(0.0)));
    }

    #[test]
    fn kappa_collapses_to_one_variable(m in 0.2f64..4.0, l in 0.3f64..6.0) {
        let direct = kappa_bar(m, l).unwrap().value;
        let scaled = m * m * kappa_bar(1.0, m * l).unwrap().value;
        prop_assert!(rel(direct, scaled) < 1e-9);
    }

    #[test]
    fn fourier_transform_matches_simpson(u in -40.0f64..40.0) {
        let g = SamplingFunction::bump(1.0);
        let (a, b) = g.support();
        let re = oracle::simpson(a, b, 20_000, |t| g.value(t) * (u * t).cos());
        let im = oracle::simpson(a, b, 20_000, |t| g.value(t) * (u * t).sin());
        let f = g.fourier(u);
        prop_assert!((f.re - re).abs() < 1e-10 && (f.im - im).abs() < 1e-10);
    }
}
