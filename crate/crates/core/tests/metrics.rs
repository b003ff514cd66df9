use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng as _;
use rand_distr::StandardNormal;
use termtraj::metrics::{
    extract_variables, js_divergence, loss_of_separation, shared_histograms, silhouette_score, silhouette_sweep,
    CountingUnit, Histogram, SeparationConfig,
};
use termtraj::mixture::EmOptions;
use termtraj::rng::seeded;
use termtraj::units::{ft_to_m, nm_to_m};
use termtraj::EnuPoint;

mod oracles;
use oracles::silhouette_brute_force;

fn blobs(k: usize, per: usize, n: usize, sep: f64, seed: u64) -> DMatrix<f64> {
    let mut rng = seeded(seed);
    DMatrix::from_fn(k * per, n, |i, j| {
        let c = (i % k) as f64;
        let center = if j == 0 { sep * c } else if j == 1 { sep * (c * c) * 0.3 } else { 0.0 };
        center + rng.sample::<f64, _>(StandardNormal)
    })
}

fn scene_strategy() -> impl Strategy<Value = Vec<Vec<EnuPoint>>> {
    let track = prop::collection::vec((-8000.0..8000.0f64, -8000.0..8000.0f64, 0.0..600.0f64), 2..12).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (x, y, z))| EnuPoint::new(i as f64 * 5.0, x, y, z))
            .collect::<Vec<_>>()
    });
    prop::collection::vec(track, 2..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn silhouette_equals_brute_force(seed in 0u64..10_000, m in 3usize..120, k in 2usize..5) {
        let mut rng = seeded(seed);
        let data = DMatrix::from_fn(m, 3, |_, _| rng.random_range(-5.0..5.0));
        let mut labels: Vec<usize> = (0..m).map(|_| rng.random_range(0..k)).collect();
        labels[0] = 0;
        labels[1] = 1;
        prop_assert_eq!(silhouette_score(&data, &labels).unwrap(), silhouette_brute_force(&data, &labels));
    }

    #[test]
    fn separation_count_is_monotone_in_both_minima(
        scene in scene_strategy(),
        h in 0.1..4.0f64,
        v in 100.0..1500.0f64,
        dh in 0.0..2.0f64,
        dv in 0.0..800.0f64,
    ) {
        let base = SeparationConfig { horizontal_min_nm: h, vertical_min_ft: v, unit: CountingUnit::Sample };
        let count = |c: &SeparationConfig| loss_of_separation(std::slice::from_ref(&scene), c).unwrap().count;
        let c0 = count(&base);
        let wider_h = SeparationConfig { horizontal_min_nm: h + dh, ..base };
        let wider_v = SeparationConfig { vertical_min_ft: v + dv, ..base };
        let wider_both = SeparationConfig { horizontal_min_nm: h + dh, vertical_min_ft: v + dv, ..base };
        prop_assert!(count(&wider_h) >= c0);
        prop_assert!(count(&wider_v) >= c0);
        prop_assert!(count(&wider_both) >= c0);
    }

    #[test]
    fn js_is_symmetric_and_bounded(
        p in prop::collection::vec(-50.0..50.0f64, 5..200),
        q in prop::collection::vec(-50.0..50.0f64, 5..200),
    ) {
        let (hp, hq) = shared_histograms(&p, &q).unwrap();
        let a = js_divergence(&hp, &hq).unwrap();
        let b = js_divergence(&hq, &hp).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert_eq!(js_divergence(&hp, &hp).unwrap(), 0.0);
    }

    #[test]
    fn variable_extraction_is_pure(scene in scene_strategy()) {
        let scenes = vec![scene];
        prop_assert_eq!(extract_variables(&scenes), extract_variables(&scenes));
    }
}

#[test]
fn silhouette_brute_force_at_500_points() {
    let data = blobs(4, 125, 3, 4.0, 3);
    let labels: Vec<usize> = (0..500).map(|i| i % 4).collect();
    assert_eq!(silhouette_score(&data, &labels).unwrap(), silhouette_brute_force(&data, &labels));
}

#[test]
fn sweep_recovers_generating_k() {
    for (k, seed) in [(2, 1), (6, 2)] {
        let data = blobs(k, 80, 3, 9.0, seed);
        let sweep = silhouette_sweep(&data, &[2, 3, 4, 5, 6, 7, 8], &EmOptions::default(), &mut seeded(seed)).unwrap();
        assert_eq!(sweep.best, k, "{sweep:?}");
    }
}

#[test]
fn disjoint_supports_have_divergence_one() {
    let p = Histogram::new(vec![0.0, 1.0, 2.0], &[0.5, 0.5]).unwrap();
    let q = Histogram::new(vec![0.0, 1.0, 2.0], &[1.5]).unwrap();
    assert!((js_divergence(&p, &q).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn separation_rule_fixtures() {
    let pair = |h_nm: f64, v_ft: f64| {
        let a: Vec<EnuPoint> = (0..3).map(|i| EnuPoint::new(i as f64, 0.0, 0.0, 900.0)).collect();
        let b = a.iter().map(|p| EnuPoint::new(p.t, nm_to_m(h_nm), 0.0, p.z + ft_to_m(v_ft))).collect();
        vec![a, b]
    };
    let sep = SeparationConfig::default();
    for (h, v, expected) in [(2.9, 1500.0, 0), (2.9, 500.0, 1), (3.5, 500.0, 0)] {
        let r = loss_of_separation(&[pair(h, v)], &sep).unwrap();
        assert_eq!(r.count, expected, "{h} NM / {v} ft");
        assert_eq!(r.per_scene_violation, vec![expected > 0]);
    }
}
