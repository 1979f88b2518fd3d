use approx::assert_relative_eq;
use mimo_noma::rates::{
    cluster_size_rate_delta, dominated_split, jain_index, noma_sum_rate, noma_user_rate,
    oma_optimal_dof, oma_sum_rate, oma_sum_upper_bound, sic_feasibility_check, two_user_gap,
    two_user_gap_maximizer, DofSplit, MultipleAccess, Noma, Oma, PowerSplit, SchemeRegistry,
};
use proptest::prelude::*;

// values below come from a separate evaluation that writes each SINR as
// own power over interference-plus-noise, not through the prefix sums
const GAINS: [f64; 3] = [321.0, 40.0, 5.0];
const SPLIT: [f64; 3] = [0.1, 0.3, 0.6];

#[test]
fn three_user_rates_match_reference() {
    let split = PowerSplit::new(SPLIT.to_vec()).unwrap();
    let want = [5.048759311919856, 1.765534746362977, 1.0];
    for (l, w) in want.iter().enumerate() {
        assert_relative_eq!(noma_user_rate(&GAINS, &split, l).unwrap(), *w, epsilon = 1e-12);
    }
    assert_relative_eq!(noma_sum_rate(&GAINS, &split).unwrap(), 7.814294058282833, epsilon = 1e-12);
    let dof = oma_optimal_dof(&GAINS, &split).unwrap();
    assert_relative_eq!(oma_sum_rate(&GAINS, &split, &dof).unwrap(), 5.587964988882678, epsilon = 1e-12);
    assert_relative_eq!(oma_sum_upper_bound(&GAINS, &split).unwrap(), 5.587964988882679, epsilon = 1e-12);
    assert_relative_eq!(
        oma_sum_rate(&GAINS, &split, &DofSplit::uniform(3)).unwrap(),
        5.045249786803353,
        epsilon = 1e-12
    );
    let rates = Noma.user_rates(&GAINS, &split).unwrap();
    assert_relative_eq!(jain_index(&rates).unwrap(), 0.6874840336412111, epsilon = 1e-12);
}

#[test]
fn two_user_gap_matches_reference() {
    assert_relative_eq!(two_user_gap(&[321.0, 12.0], 0.2).unwrap(), 1.736738666121556, epsilon = 1e-12);
}

#[test]
fn quoted_gap_maximizer() {
    let w = two_user_gap_maximizer(321.0).unwrap();
    assert_relative_eq!(w, 0.052786163379832905, epsilon = 1e-15);
    assert!((w - 0.053).abs() < 1e-3);
}

#[test]
fn full_power_to_strongest_user_equalizes_schemes() {
    let split = PowerSplit::two_user(1.0).unwrap();
    let g = [50.0, 3.0];
    let oma = Oma::optimal();
    assert_relative_eq!(
        Noma.sum_rate(&g, &split).unwrap(),
        oma.sum_rate(&g, &split).unwrap(),
        epsilon = 1e-12
    );
}

#[test]
fn registry_resolves_default_schemes() {
    let reg = SchemeRegistry::with_defaults();
    for name in ["noma", "oma", "oma-uniform"] {
        assert_eq!(reg.get(name).unwrap().name(), name);
    }
    assert!(reg.get("tdma").is_err());
}

fn sorted_gains(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..5.0, n).prop_map(|e| {
        let mut g: Vec<f64> = e.iter().map(|x| 10f64.powf(*x)).collect();
        g.sort_by(|a, b| b.total_cmp(a));
        g
    })
}

/// Normalized exponential weights: uniform on the simplex.
fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-9f64..1.0, n).prop_map(|u| {
        let e: Vec<f64> = u.iter().map(|x| -x.ln()).collect();
        let s: f64 = e.iter().sum();
        e.iter().map(|x| (x / s).min(1.0)).collect()
    })
}

fn instance() -> impl Strategy<Value = (Vec<f64>, PowerSplit)> {
    sorted_gains(2..=6).prop_flat_map(|g| {
        let n = g.len();
        (Just(g), simplex(n).prop_map(|w| PowerSplit::new(w).unwrap()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn noma_never_below_oma((g, s) in instance()) {
        let dof = oma_optimal_dof(&g, &s).unwrap();
        let noma = noma_sum_rate(&g, &s).unwrap();
        let oma = oma_sum_rate(&g, &s, &dof).unwrap();
        prop_assert!(noma - oma >= -1e-9, "noma {} oma {}", noma, oma);
    }

    #[test]
    fn noma_never_below_oma_bound((g, s) in instance()) {
        prop_assert!(noma_sum_rate(&g, &s).unwrap() >= oma_sum_upper_bound(&g, &s).unwrap() - 1e-9);
    }

    #[test]
    fn no_dof_split_beats_the_bound(
        (g, s, fractions) in instance().prop_flat_map(|(g, s)| {
            let n = g.len();
            (Just(g), Just(s), prop::collection::vec(simplex(n), 64))
        })
    ) {
        let bound = oma_sum_upper_bound(&g, &s).unwrap();
        let best = oma_sum_rate(&g, &s, &oma_optimal_dof(&g, &s).unwrap()).unwrap();
        prop_assert!((best - bound).abs() <= 1e-9);
        for f in fractions {
            let r = oma_sum_rate(&g, &s, &DofSplit::new(f).unwrap()).unwrap();
            prop_assert!(r <= bound + 1e-9);
        }
    }

    #[test]
    fn sic_is_always_feasible_on_sorted_gains((g, s) in instance()) {
        let report = sic_feasibility_check(&g, &s).unwrap();
        prop_assert!(report.feasible, "worst margin {}", report.worst_margin());
    }

    #[test]
    fn gap_is_nonnegative_and_peaks_at_closed_form(g in sorted_gains(2..=2)) {
        let n = 2000;
        let mut best = (0.0, f64::NEG_INFINITY);
        for i in 0..=n {
            let w = i as f64 / n as f64;
            let gap = two_user_gap(&g, w).unwrap();
            prop_assert!(gap >= -1e-12);
            if gap > best.1 {
                best = (w, gap);
            }
        }
        let w = two_user_gap_maximizer(g[0]).unwrap();
        prop_assert!((best.0 - w).abs() <= 1.0 / n as f64, "grid {} formula {}", best.0, w);
    }

    #[test]
    fn adding_a_user_never_helps(
        (g, s, last) in (1usize..=5)
            .prop_flat_map(|l| (sorted_gains(l + 1..=l + 1), simplex(l), 0.0f64..=1.0))
            .prop_map(|(g, w, last)| (g, PowerSplit::new(w).unwrap(), last))
    ) {
        let larger = dominated_split(&s, last).unwrap();
        let d = cluster_size_rate_delta(&g, &s, &larger).unwrap();
        prop_assert!(d.direct <= 1e-12);
        prop_assert!(d.lambda1 <= 1.0 + 1e-12);
        prop_assert!(d.lambda2 <= 1.0 + 1e-12);
        prop_assert!(d.lambda3 <= 1.0 + 1e-12);
        prop_assert!((d.direct - d.factored).abs() <= 1e-9);
    }

    #[test]
    fn jain_index_is_bounded(r in prop::collection::vec(0.0f64..10.0, 1..8)) {
        prop_assume!(r.iter().any(|&x| x > 0.0));
        let j = jain_index(&r).unwrap();
        prop_assert!(j >= 1.0 / r.len() as f64 - 1e-12 && j <= 1.0 + 1e-12);
    }
}
