use std::collections::BTreeMap;

use rand::seq::IndexedRandom;

use super::{
    reduce, run_trials, Entry, Experiment, ExperimentError, Registries, SecondAxis, Series,
    SweepKind, SweepPoint, SweepResult, SweepSpec,
};
use crate::admission::{optimality_condition_holds, AdmissionInstance};
use crate::channel::draw_cluster;
use crate::seed::{rng_for, stream, trial_seed};
use crate::stats::Summary;

fn bad(p: &SweepPoint, reason: &'static str) -> ExperimentError {
    ExperimentError::GridPoint {
        x: p.x,
        y: p.y,
        reason,
    }
}

/// Admitted users and sum rate of the configured policy.
///
/// [`SweepKind::AdmissionVsSinr`]: `x` is the common target SINR (dB), `y`
/// the transmit power (dBm, defaults to the configured one).
/// [`SweepKind::AdmissionVsRequesting`]: `x` is the number of requesting
/// users and `y` sets the power or the target SINR according to
/// `requesting_axis`. Pools are nested: the first `n` users of a trial are
/// the same for every `n`.
///
/// Every trial draws one deployment and reuses it across the grid.
pub struct AdmissionSweep;

impl Experiment for AdmissionSweep {
    fn kinds(&self) -> &[SweepKind] {
        &[SweepKind::AdmissionVsSinr, SweepKind::AdmissionVsRequesting]
    }

    fn run(&self, spec: &SweepSpec, reg: &Registries) -> Result<SweepResult, ExperimentError> {
        let policy = reg.policies.get(&spec.params.policy)?;
        let base = &spec.config;
        let by_requesting = spec.kind == SweepKind::AdmissionVsRequesting;

        // (pool size, power dBm, target dB) per grid point
        let mut settings = Vec::with_capacity(spec.grid.len());
        for p in &spec.grid {
            let y_finite = p.y.is_none_or(f64::is_finite);
            if !p.x.is_finite() || !y_finite {
                return Err(bad(p, "grid coordinates must be finite"));
            }
            settings.push(if by_requesting {
                if p.x < 1.0 || p.x.fract() != 0.0 {
                    return Err(bad(p, "requesting users must be a positive integer"));
                }
                let n = p.x as usize;
                match (spec.params.requesting_axis, p.y) {
                    (SecondAxis::TxPowerDbm, y) => {
                        (n, y.unwrap_or(base.tx_power_dbm), spec.params.target_sinr_db)
                    }
                    (SecondAxis::TargetSinrDb, y) => {
                        (n, base.tx_power_dbm, y.unwrap_or(spec.params.target_sinr_db))
                    }
                }
            } else {
                (base.users_per_cluster, p.y.unwrap_or(base.tx_power_dbm), p.x)
            });
        }
        let pool = settings.iter().map(|s| s.0).max().unwrap_or(1);
        let cfg = base.with_users(pool);

        let series = [
            Series::new(policy.name(), "admitted_users"),
            Series::new(policy.name(), "sum_rate"),
        ];
        let samples = run_trials(spec.trials, |t| {
            let r = draw_cluster(&cfg, 0, trial_seed(cfg.rng_seed, t))?;
            let mut out = Vec::with_capacity(settings.len() * 2);
            for &(n, power, target) in &settings {
                let rho = cfg.with_tx_power(power).rho();
                let mut gains: Vec<f64> = r.draw_gains[..n].iter().map(|g| g * rho).collect();
                gains.sort_by(|a, b| b.total_cmp(a));
                let inst = AdmissionInstance::with_common_threshold_db(gains, target)?;
                let res = policy.admit(&inst)?;
                out.push(res.admitted_count as f64);
                out.push(res.sum_rate_bps_hz);
            }
            Ok(out)
        })?;
        Ok(SweepResult {
            kind: spec.kind,
            rows: reduce(&spec.grid, &series, &samples),
            metadata: BTreeMap::new(),
        })
    }
}

/// The configured policy against the oracle policy on the same instances.
///
/// `x` is the transmit power (dBm). With equal thresholds `y` is the common
/// target SINR (dB, defaults to `target_sinr_db`); with mixed thresholds each
/// user draws its target from `mixed_sinr_db` once per trial.
///
/// Series: `admitted_users` and `sum_rate` per policy, and under
/// `comparison`: `count_gap` and `sum_rate_gap` (oracle minus policy),
/// `sum_rate_rel_diff` (ratio of the mean gap to the oracle mean),
/// `mismatch` (count or sum rate differ), `condition_holds` (the optimality
/// condition is met for the policy's count) and `condition_mismatch`
/// (condition met yet counts differ).
pub struct OracleCompare;

impl Experiment for OracleCompare {
    fn kinds(&self) -> &[SweepKind] {
        &[SweepKind::OracleCompareEqual, SweepKind::OracleCompareMixed]
    }

    fn run(&self, spec: &SweepSpec, reg: &Registries) -> Result<SweepResult, ExperimentError> {
        let policy = reg.policies.get(&spec.params.policy)?;
        let oracle = reg.policies.get(&spec.params.oracle)?;
        let mixed = spec.kind == SweepKind::OracleCompareMixed;
        if mixed && spec.params.mixed_sinr_db.is_empty() {
            return Err(ExperimentError::Param("mixed_sinr_db is empty".into()));
        }
        let mut settings = Vec::with_capacity(spec.grid.len());
        for p in &spec.grid {
            if !p.x.is_finite() || !p.y.is_none_or(f64::is_finite) {
                return Err(bad(p, "grid coordinates must be finite"));
            }
            if mixed && p.y.is_some() {
                return Err(bad(p, "mixed thresholds take only a power coordinate"));
            }
            let rho = spec.config.with_tx_power(p.x).rho();
            settings.push((rho, p.y.unwrap_or(spec.params.target_sinr_db)));
        }
        let cfg = &spec.config;

        let names = [policy.name(), oracle.name()];
        let mut series = Vec::new();
        for n in names {
            series.push(Series::new(n, "admitted_users"));
            series.push(Series::new(n, "sum_rate"));
        }
        for m in ["count_gap", "sum_rate_gap", "mismatch", "condition_holds", "condition_mismatch"] {
            series.push(Series::new("comparison", m));
        }

        let samples = run_trials(spec.trials, |t| {
            let seed = trial_seed(cfg.rng_seed, t);
            let r = draw_cluster(cfg, 0, seed)?;
            let drawn_db: Vec<f64> = if mixed {
                let mut rng = rng_for(seed, stream::THRESHOLDS);
                (0..r.users())
                    .map(|_| *spec.params.mixed_sinr_db.choose(&mut rng).expect("nonempty"))
                    .collect()
            } else {
                Vec::new()
            };
            let mut out = Vec::with_capacity(settings.len() * series.len());
            for &(rho, target_db) in &settings {
                let gains: Vec<f64> = r.effective_gains.iter().map(|g| g * rho).collect();
                let inst = if mixed {
                    let aligned: Vec<f64> = r.order.iter().map(|&i| drawn_db[i]).collect();
                    AdmissionInstance::from_db(gains, &aligned)?
                } else {
                    AdmissionInstance::with_common_threshold_db(gains, target_db)?
                };
                let a = policy.admit(&inst)?;
                let b = oracle.admit(&inst)?;
                let holds = optimality_condition_holds(&inst, a.admitted_count);
                let count_differs = a.admitted_count != b.admitted_count;
                out.extend([
                    a.admitted_count as f64,
                    a.sum_rate_bps_hz,
                    b.admitted_count as f64,
                    b.sum_rate_bps_hz,
                    b.admitted_count as f64 - a.admitted_count as f64,
                    b.sum_rate_bps_hz - a.sum_rate_bps_hz,
                    indicator(count_differs || a.sum_rate_bps_hz != b.sum_rate_bps_hz),
                    indicator(holds),
                    indicator(holds && count_differs),
                ]);
            }
            Ok(out)
        })?;
        let mut rows = reduce(&spec.grid, &series, &samples);
        for row in &mut rows {
            let gap = row.get("comparison", "sum_rate_gap").copied();
            let reference = row.get(oracle.name(), "sum_rate").copied();
            if let (Some(gap), Some(reference)) = (gap, reference) {
                let (mean, stderr) = if reference.mean > 0.0 {
                    (gap.mean / reference.mean, gap.stderr / reference.mean)
                } else {
                    (0.0, 0.0)
                };
                row.entries.push(Entry {
                    scheme: "comparison".into(),
                    metric: "sum_rate_rel_diff".into(),
                    stats: Summary {
                        mean,
                        stderr,
                        trials: gap.trials,
                    },
                });
            }
        }
        let mut metadata = BTreeMap::new();
        if mixed {
            metadata.insert(
                "threshold_draw".into(),
                "uniform over mixed_sinr_db per user, aligned to gain order".into(),
            );
        }
        Ok(SweepResult {
            kind: spec.kind,
            rows,
            metadata,
        })
    }
}

fn indicator(b: bool) -> f64 {
    f64::from(u8::from(b))
}
