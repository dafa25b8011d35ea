use proptest::prelude::*;
use qeilab_core::geometry::{
    embed_in_torus, kappa_upper_curve, length_grid, signed_proper_time, timelike_diameter, DoubleCone, Padding, Poincare, SupportRegion,
};
use qeilab_core::oracle;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cloud(seed: u64, n: usize) -> Vec<[f64; 4]> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| std::array::from_fn(|k| if k == 0 { rng.random_range(-0.4..0.4) } else { rng.random_range(-1.0..1.0) })).collect()
}

#[test]
fn sphere_diameter_matches_grid_oracle() {
    let ball = SupportRegion::with_padding(SupportRegion::sphere([0.0; 4], 1.5, 40).unwrap().points, Padding::Absolute { margin: 0.0 }).unwrap();
    let r = timelike_diameter(&ball);
    let grid = oracle::grid_diameter(&ball.points, 0.0, 6);
    assert!((r.ell - 3.0).abs() / 3.0 < 5e-3, "{}", r.ell);
    assert!((r.ell - grid).abs() / grid < 1e-3);
    assert!(r.ell <= grid * (1.0 + 1e-9));
}

#[test]
fn padded_sphere_diameter() {
    let r = timelike_diameter(&SupportRegion::sphere([2.0, 1.0, 0.0, -1.0], 1.0, 60).unwrap());
    assert!((r.ell - 2.0 * (1.0f64 + 0.02 * 0.02).sqrt()).abs() < 1e-6, "{}", r.ell);
}

#[test]
fn timelike_segment_has_its_proper_time() {
    let pts = vec![[0.0, 0.0, 0.0, 0.0], [2.0, 1.0, 0.0, 0.0]];
    let r = timelike_diameter(&SupportRegion::with_padding(pts, Padding::Absolute { margin: 0.0 }).unwrap());
    assert!((r.ell - 3f64.sqrt()).abs() < 1e-7, "{}", r.ell);
}

#[test]
fn single_point_is_degenerate() {
    let r = timelike_diameter(&SupportRegion::with_padding(vec![[1.0, 2.0, 3.0, 4.0]], Padding::Absolute { margin: 0.0 }).unwrap());
    assert!(r.degenerate && r.cone.is_none() && r.ell.abs() < 1e-12);
}

#[test]
fn cone_contains_points_and_embeds_in_its_torus() {
    let region = SupportRegion::with_padding(cloud(3, 10), Padding::Absolute { margin: 0.05 }).unwrap();
    let r = timelike_diameter(&region);
    let cone = r.cone.expect("extended region");
    assert!(r.margin >= 0.05 - 1e-7);
    assert!((signed_proper_time(&std::array::from_fn(|k| cone.upper[k] - cone.lower[k])) - r.ell).abs() < 1e-9);
    let t = embed_in_torus(Some(&cone));
    assert!((t.length - r.ell).abs() < 1e-12);
    assert!(region.points.iter().all(|p| t.in_fundamental_domain(p)));
}

#[test]
fn invalid_cone_is_rejected() {
    assert!(DoubleCone::new([1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]).is_err());
    assert!(DoubleCone::new([0.0, 0.0, 0.0, 0.0], [1.0, 2.0, 0.0, 0.0]).is_err());
}

#[test]
fn lattice_sum_matches_mode_sum_oracle() {
    for (m, l) in [(1.0, 1.0), (1.0, 2.5), (3.0, 0.5)] {
        let k = qeilab_core::scalar::kappa_bar(m, l).unwrap().value;
        let o = oracle::kappa_mode_sum(m, l);
        assert!((k - o).abs() / o < 1e-6, "m={m} L={l}: {k} vs {o}");
    }
}

#[test]
fn kappa_decays_at_the_mass() {
    for m in [1.0, 2.0] {
        let curve = kappa_upper_curve(m, &length_grid(4.0 / m, 16.0 / m, 13).unwrap()).unwrap();
        let fit = curve.fit.unwrap();
        assert!((fit.rate - m).abs() / m < 0.05, "m={m}: {}", fit.rate);
        assert!(curve.decreasing);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn diameter_is_poincare_invariant(seed in 0u64..1000, map_seed in 0u64..1000) {
        let region = SupportRegion::with_padding(cloud(seed, 8), Padding::Absolute { margin: 0.01 }).unwrap();
        let base = timelike_diameter(&region).ell;
        let map = Poincare::random(&mut ChaCha8Rng::seed_from_u64(map_seed), 1.2, 4.0);
        let moved = timelike_diameter(&region.transformed(&map)).ell;
        prop_assert!((moved - base).abs() / base < 1e-8, "{base} vs {moved}");
    }

    #[test]
    fn diameter_is_monotone_under_inclusion(seed in 0u64..1000) {
        let pts = cloud(seed, 10);
        let small = SupportRegion::with_padding(pts[..6].to_vec(), Padding::Absolute { margin: 0.0 }).unwrap();
        let large = SupportRegion::with_padding(pts, Padding::Absolute { margin: 0.0 }).unwrap();
        prop_assert!(timelike_diameter(&small).ell <= timelike_diameter(&large).ell * (1.0 + 1e-9));
    }

    #[test]
    fn poincare_maps_are_isometries(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = Poincare::random(&mut rng, 2.0, 5.0);
        prop_assert!(p.isometry_defect() < 1e-10);
        let e = [0.3, -0.2, 0.7, 0.1];
        let back = p.inverse().apply(&p.apply(&e));
        prop_assert!(e.iter().zip(&back).all(|(a, b)| (a - b).abs() < 1e-10));
    }
}
