use approx::assert_relative_eq;
use mimo_noma::admission::{
    cumulative_power_closed_form, exhaustive_admit, greedy_admit, optimality_condition_holds,
    AdmissionError, AdmissionInstance, AdmissionPolicy, GreedySkip, PolicyRegistry, OPS_PER_USER,
};
use proptest::prelude::*;

fn inst(gains: &[f64], thresholds: &[f64]) -> AdmissionInstance {
    AdmissionInstance::new(gains.to_vec(), thresholds.to_vec()).unwrap()
}

#[test]
fn hand_recursion_examples() {
    let r = greedy_admit(&inst(&[4.0, 2.0], &[1.0, 1.0])).unwrap();
    assert_eq!(r.admitted_count, 2);
    assert_relative_eq!(r.power_coefficients[0], 0.25, epsilon = 1e-15);
    assert_relative_eq!(r.power_coefficients[1], 0.75, epsilon = 1e-15);
    assert!(r.residual_power.abs() < 1e-15);

    let r = greedy_admit(&inst(&[4.0, 2.0, 2.0], &[1.0, 1.0, 1.0])).unwrap();
    assert_eq!(r.admitted_count, 2);
    assert_eq!(r.power_coefficients[2], 0.0);

    let r = greedy_admit(&inst(&[0.5, 0.4], &[1.0, 1.0])).unwrap();
    assert_eq!(r.admitted_count, 0);
    assert_eq!(r.sum_rate_bps_hz, 0.0);

    let i = inst(&[4.0, 2.0], &[1.0, 1.0]);
    assert_relative_eq!(cumulative_power_closed_form(&i, 1).unwrap(), 0.25, epsilon = 1e-15);
    assert_relative_eq!(cumulative_power_closed_form(&i, 2).unwrap(), 1.0, epsilon = 1e-15);
}

#[test]
fn single_feasible_user() {
    let r = exhaustive_admit(&inst(&[8.0], &[2.0]), 12).unwrap();
    assert_eq!(r.admitted, vec![0]);
    assert_relative_eq!(r.power_coefficients[0], 0.25, epsilon = 1e-15);
}

#[test]
fn condition_examples() {
    assert!(optimality_condition_holds(&inst(&[9.0, 5.0, 1.0], &[3.0; 3]), 2));
    // decreasing thresholds with growing threshold-to-gain ratios: the
    // rejected third user asks for less than the admitted ones
    let i = inst(&[100.0, 10.0, 1.0], &[3.0, 2.0, 1.0]);
    assert!(!optimality_condition_holds(&i, 2));
}

#[test]
fn stopping_rule_misses_a_larger_set_that_skipping_finds() {
    // the third user asks for too much; the fourth would still fit
    let i = inst(&[100.0; 4], &[1.0, 1.0, 100.0, 1.0]);
    let greedy = greedy_admit(&i).unwrap();
    assert_eq!(greedy.admitted, vec![0, 1]);
    assert!(optimality_condition_holds(&i, greedy.admitted_count));
    let best = exhaustive_admit(&i, 12).unwrap();
    assert_eq!(best.admitted, vec![0, 1, 3]);
    assert_eq!(GreedySkip.admit(&i).unwrap().admitted, vec![0, 1, 3]);
}

#[test]
fn exhaustive_cap_is_enforced() {
    let i = inst(&[1.0; 5], &[1.0; 5]);
    assert_eq!(
        exhaustive_admit(&i, 4),
        Err(AdmissionError::CapExceeded { users: 5, cap: 4 })
    );
    let reg = PolicyRegistry::with_defaults(4);
    assert!(reg.get("exhaustive").unwrap().admit(&i).is_err());
    assert!(reg.get("greedy").unwrap().admit(&i).is_ok());
}

fn instance(equal: bool) -> impl Strategy<Value = AdmissionInstance> {
    (1usize..=8)
        .prop_flat_map(move |n| {
            (
                prop::collection::vec(0.0f64..4.0, n),
                prop::collection::vec(prop::sample::select(vec![5.0, 10.0, 15.0]), n),
            )
        })
        .prop_map(move |(e, t)| {
            let mut g: Vec<f64> = e.iter().map(|x| 10f64.powf(*x)).collect();
            g.sort_by(|a, b| b.total_cmp(a));
            let t = if equal { vec![t[0]; t.len()] } else { t };
            AdmissionInstance::from_db(g, &t).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn greedy_meets_thresholds_exactly_within_budget(i in instance(false)) {
        let r = greedy_admit(&i).unwrap();
        let used: f64 = r.power_coefficients.iter().sum();
        prop_assert!((used + r.residual_power - 1.0).abs() <= 1e-12);
        prop_assert!(used <= 1.0 + 1e-12);
        prop_assert_eq!(&r.admitted, &(0..r.admitted_count).collect::<Vec<_>>());
        for &k in &r.admitted {
            let t = i.thresholds()[k];
            prop_assert!((r.achieved_sinrs[k] - t).abs() <= 1e-12 * t);
        }
        prop_assert!(r.operations <= OPS_PER_USER * i.users() as u64);
    }

    #[test]
    fn closed_form_tracks_running_sum(i in instance(false)) {
        let r = greedy_admit(&i).unwrap();
        let mut running = 0.0;
        for l in 1..=r.admitted_count {
            running += r.power_coefficients[l - 1];
            prop_assert!((cumulative_power_closed_form(&i, l).unwrap() - running).abs() <= 1e-12);
        }
    }

    #[test]
    fn oracle_never_admits_fewer(i in instance(false)) {
        let g = greedy_admit(&i).unwrap();
        let e = exhaustive_admit(&i, 12).unwrap();
        prop_assert!(e.admitted_count >= g.admitted_count);
        prop_assert!(GreedySkip.admit(&i).unwrap().admitted_count >= g.admitted_count);
    }

    #[test]
    fn equal_thresholds_make_greedy_optimal(i in instance(true)) {
        let g = greedy_admit(&i).unwrap();
        let e = exhaustive_admit(&i, 12).unwrap();
        prop_assert_eq!(g.admitted_count, e.admitted_count);
        prop_assert_eq!(g.sum_rate_bps_hz, e.sum_rate_bps_hz);
    }

    #[test]
    fn more_power_never_admits_fewer(i in instance(false), boost in 0.0f64..3.0) {
        let low = greedy_admit(&i).unwrap().admitted_count;
        let high = greedy_admit(&i.scaled(10f64.powf(boost))).unwrap().admitted_count;
        prop_assert!(high >= low);
    }
}
