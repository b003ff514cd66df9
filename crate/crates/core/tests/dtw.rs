use proptest::prelude::*;
use termtraj::preprocess::dtw_distance;

mod oracles;
use oracles::dtw_brute_force;

fn seq(dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-100.0..100.0f64, dim), 1..=6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_exhaustive_paths(a in seq(2), b in seq(2)) {
        prop_assert_eq!(dtw_distance(&a, &b).unwrap(), dtw_brute_force(&a, &b));
    }

    #[test]
    fn symmetric_nonnegative_and_zero_on_self(a in seq(3), b in seq(3)) {
        let ab = dtw_distance(&a, &b).unwrap();
        prop_assert_eq!(ab, dtw_distance(&b, &a).unwrap());
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(dtw_distance(&a, &a).unwrap(), 0.0);
    }
}

#[test]
fn repeated_samples_cost_nothing() {
    let a = vec![vec![0.0], vec![1.0], vec![2.0]];
    let b = vec![vec![0.0], vec![0.0], vec![1.0], vec![2.0], vec![2.0]];
    assert_eq!(dtw_distance(&a, &b).unwrap(), 0.0);
}
