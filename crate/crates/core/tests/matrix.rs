use num_complex::Complex64;
use proptest::prelude::*;
use qeilab_core::category::opposite;
use qeilab_core::field::{convex_hull, hausdorff, nu_field, numerical_range_sweep, separating_state_check, sigma_field};
use qeilab_core::qi::{aqi_to_dqi, dqi_to_aqi_inf, fock_dimension, fock_toy, sharp_aqi};
use qeilab_core::worlds::{demo_scenario, demo_scenario_json, lpe_check, ScenarioJson};
use qeilab_core::{linalg, oracle, AbstractField, CMat, FieldAssignment, FiniteCategory, ToyScenario, ToyWorld};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

fn single_world(a: &CMat) -> (ToyScenario, FieldAssignment) {
    let s = ToyScenario::from_generators(vec![ToyWorld::new("M", a.nrows(), &["f"])], vec![]).unwrap();
    let mut phi = FieldAssignment::new(BTreeMap::new());
    phi.set("M", "f", a.clone());
    (s, phi)
}

#[test]
fn generated_category_satisfies_the_laws() {
    let c = FiniteCategory::from_generators(&["a", "b", "c"], &[("f", "a", "b"), ("g", "a", "c")]).unwrap();
    assert!(c.validate().pass);
    assert_eq!(c.hom("a", "c").len(), 1);
    assert!(c.hom("b", "c").is_empty());
    let op = opposite(&c);
    assert!(op.validate().pass);
    assert_eq!(op.hom("b", "a").len(), 1);
}

#[test]
fn demo_scenario_roundtrips_through_json() {
    let j = demo_scenario_json();
    let text = serde_json::to_string(&j).unwrap();
    let back: ScenarioJson = serde_json::from_str(&text).unwrap();
    let (s, field) = ToyScenario::from_json(&back).unwrap();
    assert_eq!(s.test_sets(), demo_scenario().test_sets());
    let field = field.expect("demo carries a field");
    assert!(s.check_field(&field).unwrap().pass);
}

#[test]
fn demo_embeddings_are_locally_physically_equivalent() {
    let s = demo_scenario();
    let morphisms: Vec<_> = s.proper_morphisms().cloned().collect();
    assert!(!morphisms.is_empty());
    for psi in &morphisms {
        assert!(lpe_check(&s, psi).unwrap().pass, "{}", psi.id);
    }
}

#[test]
fn jordan_block_range_is_the_half_disk() {
    let mut j = linalg::zeros(2);
    j[(0, 1)] = Complex64::new(1.0, 0.0);
    let sweep = numerical_range_sweep(&j, 360);
    let sampled = oracle::sampled_numerical_range(&j, 100_000, 5);
    assert!(hausdorff(&sweep, &sampled) < 5e-3);
    assert!(sweep.vertices.iter().all(|z| (z.norm() - 0.5).abs() < 1e-3));
}

#[test]
fn hull_of_square_corners() {
    let pts: Vec<Complex64> = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.5, 0.5)].iter().map(|&(a, b)| Complex64::new(a, b)).collect();
    assert_eq!(convex_hull(&pts).len(), 4);
}

#[test]
fn closed_hull_of_spectrum_is_range_for_hermitian_demo_fields() {
    let s = demo_scenario();
    for seed in 0..5 {
        let phi = AbstractField::full(&s, s.random_natural_field(seed, true)).unwrap();
        let nu = nu_field(&s, &phi).unwrap();
        assert!(hausdorff(&nu, &sigma_field(&s, &phi).hull()) < 1e-8);
    }
}

#[test]
fn scalar_operator_attains_at_every_faithful_state() {
    let a = linalg::identity(3) * Complex64::new(0.7, 0.0);
    let rho = linalg::random_density(3, &mut ChaCha8Rng::seed_from_u64(2));
    let (attained, _) = separating_state_check(&a, &rho, 1e-9).unwrap();
    assert!(attained);
}

#[test]
fn fock_inequality_and_dimension() {
    assert_eq!(fock_dimension(3), 20);
    let lam = [1.0, 2.0, 3.0, 4.0];
    let rep = fock_toy(&lam, 4, None, 1.0).unwrap();
    assert!(rep.inequality_holds);
    assert_eq!(rep.basis_size, 70);
    for m in 1..=4 {
        assert!((rep.ratio_curve[m - 1] - oracle::fock_ratio_brute(&lam, m)).abs() < 1e-12);
    }
    assert!(fock_toy(&lam, 4, Some(2.0), 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sharp_bound_is_minus_lowest_eigenvalue(seed in 0u64..100_000, n in 2usize..7) {
        let a = linalg::random_hermitian(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let (s, phi) = single_world(&a);
        let qa = sharp_aqi(&s, &phi, &s.test_sets()).unwrap();
        let q = qa.scalar("M", "f").unwrap();
        prop_assert!((q + oracle::char_poly_lambda_min(&a)).abs() < 1e-10);
        prop_assert!(-q <= oracle::sampled_min_expectation(&a, 200, seed) + 1e-12);
        let inf = dqi_to_aqi_inf(&s, &aqi_to_dqi(&qa, &phi), &phi).unwrap();
        prop_assert!((inf.entries[0].value - q).abs() < 1e-8);
    }

    #[test]
    fn range_contains_every_expectation(seed in 0u64..100_000, n in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = linalg::ginibre(n, &mut rng);
        let range = numerical_range_sweep(&a, 720);
        for _ in 0..20 {
            let rho = linalg::random_density(n, &mut rng);
            prop_assert!(range.contains(linalg::expectation(&rho, &a), 1e-3 * (1.0 + linalg::op_norm(&a))));
        }
    }
}
