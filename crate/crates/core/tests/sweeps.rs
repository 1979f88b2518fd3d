use mimo_noma::experiments::{run_sweep, SecondAxis, SweepPoint};
use mimo_noma::{SweepKind, SweepSpec, SystemConfig};

fn spec(kind: SweepKind, trials: usize) -> SweepSpec {
    SweepSpec::new(kind, trials, SystemConfig::default())
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let s = spec(SweepKind::OracleCompareMixed, 60);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| run_sweep(&s)).unwrap();
    let b = four.install(|| run_sweep(&s)).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn noma_dominates_pointwise_on_shared_draws() {
    let r = run_sweep(&spec(SweepKind::SplitSweep2User, 50)).unwrap();
    assert_eq!(r.rows.len(), 101);
    for row in &r.rows {
        let noma = row.get("noma", "sum_rate").unwrap().mean;
        let oma = row.get("oma", "sum_rate").unwrap().mean;
        assert!(noma >= oma - 1e-9, "{:?}", row.point);
    }
    let last = r.rows.last().unwrap();
    assert!(last.get("gap", "sum_rate_gap").unwrap().mean.abs() < 1e-12);
    assert!(r.metadata.contains_key("max_gap_omega1"));
}

#[test]
fn three_user_surface_has_every_point() {
    let grid = SweepPoint::surface(&[0.05, 0.5], &[0.0, 0.95]);
    let r = run_sweep(&spec(SweepKind::SplitSweep3User, 10).with_grid(grid)).unwrap();
    assert_eq!(r.rows.len(), 4);
    assert!(r.to_csv().starts_with("sweep_point,sweep_point2,"));
}

#[test]
fn split_outside_unit_interval_is_rejected() {
    let s = spec(SweepKind::SplitSweep2User, 5).with_grid(SweepPoint::line(&[1.5]));
    assert!(run_sweep(&s).is_err());
}

#[test]
fn ergodic_two_users_beat_three() {
    let r = run_sweep(&spec(SweepKind::ErgodicPowerSweep, 200)).unwrap();
    for row in &r.rows {
        let two = row.get("noma-2user", "sum_rate").unwrap();
        let three = row.get("noma-3user", "sum_rate").unwrap();
        let oma = row.get("oma-2user", "sum_rate").unwrap();
        assert!(two.mean >= three.mean);
        assert!(two.mean >= oma.mean);
        assert!(two.stderr >= 0.0);
    }
}

#[test]
fn admission_trends_hold_on_the_grid() {
    let r = run_sweep(&spec(SweepKind::AdmissionVsSinr, 100)).unwrap();
    let count = |x: f64, y: f64| {
        r.rows
            .iter()
            .find(|row| row.point == SweepPoint::pair(x, y))
            .and_then(|row| row.get("greedy", "admitted_users"))
            .unwrap()
            .mean
    };
    for y in [30.0, 40.0, 50.0] {
        for x in [0.0, 2.5, 5.0, 7.5, 10.0, 12.5, 15.0, 17.5] {
            assert!(count(x, y) >= count(x + 2.5, y));
        }
    }
    assert!(count(5.0, 30.0) <= count(5.0, 40.0));

    let mut s = spec(SweepKind::AdmissionVsRequesting, 100);
    s.params.requesting_axis = SecondAxis::TargetSinrDb;
    s.grid = SweepPoint::surface(&[2.0, 4.0, 6.0, 8.0], &[5.0]);
    let r = run_sweep(&s).unwrap();
    let means: Vec<f64> = r
        .series("greedy", "admitted_users")
        .iter()
        .map(|m| m.unwrap().mean)
        .collect();
    assert!(means.windows(2).all(|w| w[0] <= w[1]), "{means:?}");
}

#[test]
fn equal_thresholds_never_mismatch() {
    let s = spec(SweepKind::OracleCompareEqual, 100)
        .with_grid(SweepPoint::surface(&[30.0, 50.0], &[5.0, 15.0]));
    let r = run_sweep(&s).unwrap();
    for m in r.series("comparison", "mismatch") {
        assert_eq!(m.unwrap().mean, 0.0);
    }
}
