use proptest::prelude::*;
use termtraj::preprocess::{adjusted_transit_time, build_deviation_vector, reconstruct_trajectory};
use termtraj::procedures::ProceduralTrajectory;
use termtraj::EnuPoint;

fn trajectory() -> impl Strategy<Value = Vec<EnuPoint>> {
    prop::collection::vec((0.5..30.0f64, -30_000.0..30_000.0f64, -30_000.0..30_000.0f64, 0.0..3000.0f64), 2..40).prop_map(|v| {
        let mut t = 0.0;
        v.into_iter()
            .enumerate()
            .map(|(i, (dt, x, y, z))| {
                if i > 0 {
                    t += dt;
                }
                EnuPoint::new(t, x, y, z)
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    // A procedural of the same length (here: a rigid translate with the
    // same timing) makes d' = tau_2, so reconstruction must give the
    // trajectory back.
    #[test]
    fn exact_inverse_when_distances_match(traj in trajectory(), off in (-5000.0..5000.0f64, -5000.0..5000.0f64, -500.0..500.0f64)) {
        let proc = ProceduralTrajectory::from_points(
            "P",
            traj.iter().map(|p| EnuPoint::new(p.t, p.x + off.0, p.y + off.1, p.z + off.2)).collect(),
        );
        let tau = build_deviation_vector(&traj, &proc).unwrap();
        prop_assume!(tau.total_distance > 1.0);
        prop_assert!((proc.total_distance - tau.total_distance).abs() <= 1e-9 * tau.total_distance);
        let back = reconstruct_trajectory(&tau, &proc).unwrap();
        prop_assert_eq!(back.len(), traj.len());
        for (a, b) in back.iter().zip(&traj) {
            prop_assert!((a.t - b.t).abs() < 1e-9 * b.t.max(1.0));
            prop_assert!((a.x - b.x).abs() < 1e-9 && (a.y - b.y).abs() < 1e-9 && (a.z - b.z).abs() < 1e-9);
        }
    }

    #[test]
    fn transit_time_is_rescaled_by_procedural_distance(traj in trajectory(), proc_pts in trajectory(), scale in 0.2..5.0f64) {
        let n = traj.len().min(proc_pts.len());
        let (traj, proc_pts) = (&traj[..n], &proc_pts[..n]);
        let proc = ProceduralTrajectory::from_points("P", proc_pts.to_vec());
        let tau = build_deviation_vector(traj, &proc).unwrap();
        prop_assume!(tau.total_distance > 1.0 && proc.total_distance > 1.0);
        let back = reconstruct_trajectory(&tau, &proc).unwrap();
        let expected = tau.transit_time / tau.total_distance * proc.total_distance;
        prop_assert!((back[n - 1].t - expected).abs() <= 1e-9 * expected.max(1.0));
        prop_assert_eq!(adjusted_transit_time(&tau, proc.total_distance), expected);

        let scaled = ProceduralTrajectory::from_points(
            "P",
            proc_pts.iter().map(|p| EnuPoint::new(p.t, p.x * scale, p.y * scale, p.z * scale)).collect(),
        );
        let back2 = reconstruct_trajectory(&tau, &scaled).unwrap();
        prop_assert!((back2[n - 1].t - scale * back[n - 1].t).abs() <= 1e-9 * back2[n - 1].t.max(1.0));
        prop_assert!(back2.windows(2).all(|w| w[1].t >= w[0].t));
    }
}
