mod support;

use migtopo_core::seed::stream;
use migtopo_core::stats::{
    best_worst, build_preorder_basic, build_preorder_extended, kendall_tau_b, preorder_height, student_t_cdf,
    validate_relation, welch_test, Preorder, StatsError, TestOptions,
};
use rand::Rng;
use support::{brute_force_kendall, random_preorder, shuffled, synthetic_traces, t_two_sided_quadrature, welch_t_dof};

fn relation_of(r: Result<Preorder, StatsError>) -> Preorder {
    match r {
        Ok(p) => p,
        Err(StatsError::RelationInvalid { preorder, .. }) => *preorder,
        Err(e) => panic!("unexpected error: {e}"),
    }
}

#[test]
fn t_tail_matches_quadrature_on_grid() {
    let mut worst: f64 = 0.0;
    for ti in 0..=40 {
        let t = -10.0 + 0.5 * ti as f64;
        for &dof in &[1.0, 1.5, 2.0, 3.0, 4.458, 7.0, 10.0, 17.3, 30.0, 55.0, 100.0] {
            let ours = 2.0 * student_t_cdf(-f64::abs(t), dof);
            let oracle = t_two_sided_quadrature(t, dof);
            worst = worst.max((ours - oracle).abs());
            assert!((ours - oracle).abs() < 1e-6, "t={t} dof={dof}: {ours} vs {oracle}");
        }
    }
    assert!(worst < 1e-6);
}

#[test]
fn welch_matches_longhand_and_quadrature() {
    let mut rng = stream(99);
    for _ in 0..200 {
        let na = rng.gen_range(2..12);
        let nb = rng.gen_range(2..12);
        let shift: f64 = rng.gen_range(-3.0..3.0);
        let a: Vec<f64> = (0..na).map(|_| rng.gen::<f64>() * 2.0).collect();
        let b: Vec<f64> = (0..nb).map(|_| rng.gen::<f64>() * 3.0 + shift).collect();
        let r = welch_test(&a, &b).unwrap();
        let (t, dof) = welch_t_dof(&a, &b);
        assert!((r.t_statistic - t).abs() <= 1e-12 * t.abs().max(1.0));
        assert!((r.dof - dof).abs() <= 1e-10 * dof);
        if t.abs() <= 10.0 {
            let oracle = t_two_sided_quadrature(t, dof);
            assert!((r.p_two_sided - oracle).abs() < 1e-6, "t={t} dof={dof}");
        }
    }
}

#[test]
fn welch_reference_example() {
    // Fixture from an external statistics package.
    let a = [0.1, 0.2, 0.15, 0.12];
    let b = [0.9, 1.1, 1.0, 0.95];
    let r = welch_test(&a, &b).unwrap();
    assert!((r.t_statistic - -17.635_449_367_968_004).abs() < 1e-9);
    assert!((r.dof - 4.458_415_427_202_215).abs() < 1e-9);
    assert!((r.p_two_sided - 2.702_654_991_445_587_6e-5).abs() < 1e-10);
    assert!(r.p_two_sided < 1e-3);
}

#[test]
fn kendall_matches_brute_force() {
    let mut rng = stream(2024);
    let mut compared = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(2..=8);
        let x = random_preorder(&mut rng, n);
        // Half the time compare against a relabelled copy of a fresh order,
        // otherwise against a shuffle of `x` itself.
        let y = if rng.gen_bool(0.5) {
            let fresh = random_preorder(&mut rng, n);
            shuffled(&mut rng, &fresh)
        } else {
            shuffled(&mut rng, &x)
        };
        let oracle = brute_force_kendall(&x, &y);
        match kendall_tau_b(&x, &y) {
            Ok(k) => {
                assert_eq!(
                    (k.concordant, k.discordant, k.n0, k.n1, k.n2),
                    (oracle.c, oracle.d, oracle.n0, oracle.n1, oracle.n2)
                );
                assert!((k.tau_b - oracle.tau_b).abs() < 1e-12);
                assert!((-1.0..=1.0).contains(&k.tau_b));
                compared += 1;
            }
            Err(StatsError::AllTied) => assert!(oracle.tau_b.is_nan()),
            Err(e) => panic!("{e}"),
        }
    }
    assert!(compared > 500);
}

#[test]
fn kendall_identity_and_reversal() {
    let mut rng = stream(5);
    for _ in 0..50 {
        let x = random_preorder(&mut rng, 6);
        if x.strict_pairs() == 0 {
            continue;
        }
        assert!((kendall_tau_b(&x, &x).unwrap().tau_b - 1.0).abs() < 1e-15);
        assert!((kendall_tau_b(&x, &x.reversed()).unwrap().tau_b + 1.0).abs() < 1e-15);
    }
}

#[test]
fn extended_contains_basic() {
    let mut rng = stream(77);
    for case in 0..200 {
        let k = rng.gen_range(3..=7);
        let reps = rng.gen_range(5..=30);
        let periods = rng.gen_range(2..=20);
        let traces = synthetic_traces(&mut rng, k, reps, periods);
        let alpha = [0.01, 0.05, 0.1][case % 3];
        let window = rng.gen_range(0.05..=1.0);
        let opts = TestOptions::new(alpha);
        let finals: Vec<(String, Vec<f64>)> = traces
            .iter()
            .map(|(l, rows)| (l.clone(), rows.iter().map(|r| r[periods - 1]).collect()))
            .collect();
        let basic = relation_of(build_preorder_basic(&finals, &opts));
        let extended = relation_of(build_preorder_extended(&traces, &opts, window));
        assert!(basic.is_subrelation_of(&extended), "case {case}");
    }
}

#[test]
fn extended_decides_ties_from_earlier_periods() {
    // Identical final values, but "fast" is clearly lower mid-run.
    let fast: Vec<Vec<f64>> = (0..10).map(|r| vec![10.0 + r as f64 * 0.01, 1.0 + r as f64 * 0.01, 0.0 + r as f64 * 0.01]).collect();
    let slow: Vec<Vec<f64>> = (0..10).map(|r| vec![10.0 + r as f64 * 0.01, 5.0 + r as f64 * 0.01, 0.0 + r as f64 * 0.01]).collect();
    let traces = vec![("fast".to_string(), fast), ("slow".to_string(), slow)];
    let opts = TestOptions::new(0.05);
    let full = build_preorder_extended(&traces, &opts, 1.0).unwrap();
    assert!(full.is_better(0, 1));
    // A window covering only the last period sees no difference.
    let last = build_preorder_extended(&traces, &opts, 0.2).unwrap();
    assert_eq!(last.strict_pairs(), 0);
}

#[test]
fn separated_groups_give_expected_height() {
    let mut rng = stream(11);
    let means = [0.0, 0.0, 5.0, 5.0, 10.0, 10.0];
    let samples: Vec<(String, Vec<f64>)> = means
        .iter()
        .enumerate()
        .map(|(i, &m)| (format!("s{i}"), (0..30).map(|_| m + rng.gen::<f64>() - 0.5).collect()))
        .collect();
    let p = build_preorder_basic(&samples, &TestOptions::new(0.01)).unwrap();
    assert!(validate_relation(&p).is_valid());
    assert_eq!(preorder_height(&p).unwrap(), 3);
    let (best, worst) = best_worst(&p, 1);
    assert_eq!(best, vec!["s0", "s1"]);
    assert_eq!(worst, vec!["s4", "s5"]);
}

#[test]
fn overlapping_samples_give_shallow_order() {
    let mut rng = stream(12);
    let samples: Vec<(String, Vec<f64>)> = (0..6)
        .map(|i| (format!("s{i}"), (0..20).map(|_| i as f64 * 0.03 + rng.gen::<f64>()).collect()))
        .collect();
    let p = relation_of(build_preorder_basic(&samples, &TestOptions::new(0.05)));
    let h = preorder_height(&p).unwrap();
    assert!((1..=3).contains(&h), "height {h}");
}

#[test]
fn alpha_zero_gives_empty_relation() {
    let samples = vec![("a".to_string(), vec![0.0, 0.1, 0.2]), ("b".to_string(), vec![9.0, 9.1, 9.2])];
    let p = build_preorder_basic(&samples, &TestOptions::new(0.0)).unwrap();
    assert_eq!(p.strict_pairs(), 0);
    assert_eq!(preorder_height(&p).unwrap(), 1);
}
