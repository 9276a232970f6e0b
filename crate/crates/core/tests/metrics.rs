mod common;

use common::*;
use rand::Rng;
use vogp::metrics::{
    cone_hypervolume, cover_distance, default_reference, epsilon_f1, evaluate_front, hv_discrepancy, pac_success,
    true_pareto_front,
};
use vogp::ConeOrder;

/// Direction of `v` lies in the planar sector of half-width `θ/2` around 45°.
fn in_sector(theta: f64, v: &[f64]) -> bool {
    let angle = v[1].atan2(v[0]).to_degrees();
    (angle - 45.0).abs() <= theta / 2.0 + 1e-9
}

#[test]
fn pareto_front_matches_brute_force_sector_test() {
    let mut r = rng(1);
    for theta in [60.0, 90.0, 120.0] {
        let cone = ConeOrder::cone_2d(theta).unwrap();
        for _ in 0..20 {
            let ys: Vec<Vec<f64>> = (0..50).map(|_| vec![r.random(), r.random()]).collect();
            let brute: Vec<usize> = (0..ys.len())
                .filter(|&i| {
                    !ys.iter().any(|yj| {
                        let d = [yj[0] - ys[i][0], yj[1] - ys[i][1]];
                        (d[0] != 0.0 || d[1] != 0.0) && in_sector(theta, &d)
                    })
                })
                .collect();
            assert_eq!(true_pareto_front(&ys, &cone).unwrap(), brute);
        }
    }
}

#[test]
fn duplicates_stay_on_the_front() {
    let cone = ConeOrder::builtin("right", 2).unwrap();
    let ys = vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]];
    assert_eq!(true_pareto_front(&ys, &cone).unwrap(), vec![0, 1, 2]);
}

#[test]
fn epsilon_f1_worked_examples() {
    let cone = ConeOrder::builtin("right", 2).unwrap();
    let ys = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5], vec![0.95, -0.02], vec![0.0, 0.0]];
    // Front is {0, 1, 2}; design 3 has gap 0.05 and design 4 has gap 0.5.
    assert_eq!(true_pareto_front(&ys, &cone).unwrap(), vec![0, 1, 2]);
    assert_eq!(epsilon_f1(&ys, &cone, &[0, 1, 2], 0.0).unwrap(), 1.0);
    // Missing design 2: tp = 2, fn = 1, fp = 0.
    assert!((epsilon_f1(&ys, &cone, &[0, 1], 0.1).unwrap() - 0.8).abs() < 1e-12);
    // Design 3 stands in for design 0 at ε = 0.1 but not at ε = 0.01.
    assert_eq!(epsilon_f1(&ys, &cone, &[3, 1, 2], 0.1).unwrap(), 1.0);
    let strict = evaluate_front(&ys, &cone, &[3, 1, 2], 0.01).unwrap();
    assert_eq!((strict.true_positives, strict.false_negatives, strict.false_positives), (2, 1, 1));
    assert!((strict.eps_f1 - 4.0 / 6.0).abs() < 1e-12);
    // A bad design costs precision.
    assert!((epsilon_f1(&ys, &cone, &[0, 1, 2, 4], 0.1).unwrap() - 6.0 / 7.0).abs() < 1e-12);
    // Covering design 0 from design 3 takes ‖(0.05, 0.02)‖ ≈ 0.054.
    assert!(pac_success(&ys, &cone, &[3, 1, 2], 0.06).unwrap());
    assert!(!pac_success(&ys, &cone, &[3, 1, 2], 0.05).unwrap());
    assert!(!pac_success(&ys, &cone, &[0, 1, 2, 4], 0.1).unwrap());
    assert_eq!(epsilon_f1(&ys, &cone, &[], 0.1).unwrap(), 0.0);
}

#[test]
fn cover_distance_matches_direction_scan() {
    let mut r = rng(2);
    for trial in 0..60 {
        let cone = if trial % 2 == 0 {
            ConeOrder::cone_2d(r.random_range(40.0..160.0)).unwrap()
        } else {
            ConeOrder::builtin(["acute", "right", "obtuse"][trial % 3], 3).unwrap()
        };
        let m = cone.dim();
        let dirs = cone_directions(&cone, if m == 2 { 100_000 } else { 20_000 }, &mut r);
        let ys = gaussian(&mut r, m);
        let y = gaussian(&mut r, m);
        let qp = cover_distance(&cone, &ys, &y).unwrap();
        let scan = cover_distance_oracle(&cone, &ys, &y, &dirs);
        // The scan can only overestimate.
        assert!(qp <= scan + 1e-9, "qp {qp} scan {scan}");
        let tol = if m == 2 { 1e-4 } else { 5e-3 };
        assert!(scan - qp <= tol * (1.0 + qp), "qp {qp} scan {scan} on {:?}", cone.w());
    }
}

#[test]
fn hypervolume_matches_monte_carlo() {
    let mut r = rng(3);
    for trial in 0..20 {
        let cone = random_cone(&mut r);
        let m = cone.dim();
        let n = r.random_range(1..=8);
        let front: Vec<Vec<f64>> = (0..n).map(|_| gaussian(&mut r, m)).collect();
        let reference = default_reference(&front, &cone).unwrap();
        let exact = cone_hypervolume(&front, &cone, &reference).unwrap();
        let (est, se) = hv_monte_carlo(&front, &cone, &reference, 100_000, 100 + trial);
        assert!((exact - est).abs() <= 4.0 * se + 1e-12, "exact {exact} mc {est} se {se}");
    }
}

#[test]
fn hypervolume_discrepancy_and_monotonicity() {
    let cone = ConeOrder::builtin("right", 2).unwrap();
    let truth = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.6, 0.6]];
    let reference = vec![-0.5, -0.5];
    let full = cone_hypervolume(&truth, &cone, &reference).unwrap();
    // Inclusion-exclusion over the three boxes.
    assert!((full - (0.75 + 0.75 + 1.21 - 0.25 - 0.55 - 0.55 + 0.25)).abs() < 1e-12, "{full}");
    assert_eq!(hv_discrepancy(&truth, &truth, &cone, &reference).unwrap(), 0.0);
    let partial = hv_discrepancy(&truth[..2], &truth, &cone, &reference).unwrap();
    assert!(partial > 0.0);
    let two = cone_hypervolume(&truth[..2], &cone, &reference).unwrap();
    assert!((partial - (full - two)).abs() < 1e-12);
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn front_members_are_not_dominated(seed in 0u64..10_000, n in 1usize..40) {
            let mut r = rng(seed);
            let cone = random_cone(&mut r);
            let ys: Vec<Vec<f64>> = (0..n).map(|_| gaussian(&mut r, cone.dim())).collect();
            let front = true_pareto_front(&ys, &cone).unwrap();
            prop_assert!(!front.is_empty());
            for &i in &front {
                for y in &ys {
                    if y != &ys[i] {
                        prop_assert!(!cone.dominates(&ys[i], y, false).unwrap());
                    }
                }
            }
            // Returning the front itself is a perfect answer.
            prop_assert_eq!(epsilon_f1(&ys, &cone, &front, 0.0).unwrap(), 1.0);
        }

        #[test]
        fn hypervolume_grows_with_the_front(seed in 0u64..10_000) {
            let mut r = rng(seed);
            let cone = random_cone(&mut r);
            let pts: Vec<Vec<f64>> = (0..6).map(|_| gaussian(&mut r, cone.dim())).collect();
            let reference = default_reference(&pts, &cone).unwrap();
            let mut last = 0.0;
            for k in 1..=pts.len() {
                let hv = cone_hypervolume(&pts[..k], &cone, &reference).unwrap();
                prop_assert!(hv >= last - 1e-12);
                last = hv;
            }
        }
    }
}
