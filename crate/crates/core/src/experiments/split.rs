use std::collections::BTreeMap;
use std::sync::Arc;

use super::{
    reduce, run_trials, Experiment, ExperimentError, Registries, Series, SweepKind,
    SweepPoint, SweepResult, SweepSpec,
};
use crate::channel::draw_cluster;
use crate::rates::{jain_index, MultipleAccess, PowerSplit};
use crate::seed::trial_seed;

/// Users in the cluster for a split or fairness kind.
fn cluster_users(kind: SweepKind) -> usize {
    match kind {
        SweepKind::SplitSweep2User | SweepKind::Fairness2User => 2,
        _ => 3,
    }
}

/// Power split at a grid point. Three-user points without a second
/// coordinate share the remainder equally.
fn split_at(users: usize, point: &SweepPoint) -> Result<PowerSplit, ExperimentError> {
    let bad = |reason| ExperimentError::GridPoint {
        x: point.x,
        y: point.y,
        reason,
    };
    let in_unit = |v: f64| (0.0..=1.0).contains(&v);
    if !in_unit(point.x) || !point.y.is_none_or(in_unit) {
        return Err(bad("power fractions must lie in [0, 1]"));
    }
    if users == 2 {
        if point.y.is_some() {
            return Err(bad("two-user splits take a single coordinate"));
        }
        return Ok(PowerSplit::two_user(point.x)?);
    }
    Ok(PowerSplit::three_user(point.x, point.y.unwrap_or(0.5))?)
}

fn schemes(spec: &SweepSpec, reg: &Registries) -> Result<Vec<Arc<dyn MultipleAccess>>, ExperimentError> {
    spec.params
        .schemes
        .iter()
        .map(|s| reg.schemes.get(s).map_err(ExperimentError::from))
        .collect()
}

/// Sum rate vs. power split over shared channel draws.
///
/// Emits `sum_rate` for every configured scheme and `gap` / `sum_rate_gap`
/// for NOMA minus the optimal-DoF OMA.
pub struct SplitSweep;

impl Experiment for SplitSweep {
    fn kinds(&self) -> &[SweepKind] {
        &[SweepKind::SplitSweep2User, SweepKind::SplitSweep3User]
    }

    fn run(&self, spec: &SweepSpec, reg: &Registries) -> Result<SweepResult, ExperimentError> {
        let users = cluster_users(spec.kind);
        let splits: Vec<PowerSplit> = spec
            .grid
            .iter()
            .map(|p| split_at(users, p))
            .collect::<Result<_, _>>()?;
        let schemes = schemes(spec, reg)?;
        let noma = reg.schemes.get("noma")?;
        let oma = reg.schemes.get("oma")?;
        let cfg = spec.config.with_users(users);

        let mut series: Vec<Series> = schemes
            .iter()
            .map(|s| Series::new(s.name(), "sum_rate"))
            .collect();
        series.push(Series::new("gap", "sum_rate_gap"));

        let samples = run_trials(spec.trials, |t| {
            let r = draw_cluster(&cfg, 0, trial_seed(cfg.rng_seed, t))?;
            let gains = r.scaled_gains();
            let mut out = Vec::with_capacity(splits.len() * series.len());
            for split in &splits {
                for s in &schemes {
                    out.push(s.sum_rate(&gains, split)?);
                }
                out.push(noma.sum_rate(&gains, split)? - oma.sum_rate(&gains, split)?);
            }
            Ok(out)
        })?;
        let rows = reduce(&spec.grid, &series, &samples);

        let mut metadata = BTreeMap::new();
        let best = rows
            .iter()
            .filter_map(|r| r.get("gap", "sum_rate_gap").map(|s| (r.point, s.mean)))
            .fold(None::<(SweepPoint, f64)>, |acc, (p, m)| match acc {
                Some((_, best)) if best >= m => acc,
                _ => Some((p, m)),
            });
        if let Some((p, m)) = best {
            metadata.insert("max_gap_omega1".into(), p.x.to_string());
            if let Some(y) = p.y {
                metadata.insert("max_gap_omega2_rel".into(), y.to_string());
            }
            metadata.insert("max_gap_bps_hz".into(), m.to_string());
        }
        Ok(SweepResult {
            kind: spec.kind,
            rows,
            metadata,
        })
    }
}

/// Jain's index vs. power split over shared channel draws.
///
/// Besides the per-scheme `jain_index`, emits `dominance` /
/// `noma_ge_oma`: the fraction of draws on which NOMA is at least as fair as
/// the optimal-DoF OMA.
pub struct FairnessSweep;

impl Experiment for FairnessSweep {
    fn kinds(&self) -> &[SweepKind] {
        &[SweepKind::Fairness2User, SweepKind::Fairness3User]
    }

    fn run(&self, spec: &SweepSpec, reg: &Registries) -> Result<SweepResult, ExperimentError> {
        let users = cluster_users(spec.kind);
        let splits: Vec<PowerSplit> = spec
            .grid
            .iter()
            .map(|p| split_at(users, p))
            .collect::<Result<_, _>>()?;
        let schemes = schemes(spec, reg)?;
        let noma = reg.schemes.get("noma")?;
        let oma = reg.schemes.get("oma")?;
        let cfg = spec.config.with_users(users);

        let mut series: Vec<Series> = schemes
            .iter()
            .map(|s| Series::new(s.name(), "jain_index"))
            .collect();
        series.push(Series::new("dominance", "noma_ge_oma"));

        let jain = |s: &Arc<dyn MultipleAccess>, gains: &[f64], split: &PowerSplit| {
            // all-zero rates leave the index undefined; drop the sample
            Ok::<f64, ExperimentError>(jain_index(&s.user_rates(gains, split)?).unwrap_or(f64::NAN))
        };

        let samples = run_trials(spec.trials, |t| {
            let r = draw_cluster(&cfg, 0, trial_seed(cfg.rng_seed, t))?;
            let gains = r.scaled_gains();
            let mut out = Vec::with_capacity(splits.len() * series.len());
            for split in &splits {
                for s in &schemes {
                    out.push(jain(s, &gains, split)?);
                }
                let (a, b) = (jain(&noma, &gains, split)?, jain(&oma, &gains, split)?);
                out.push(if a.is_nan() || b.is_nan() {
                    f64::NAN
                } else {
                    f64::from(u8::from(a >= b - 1e-12))
                });
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
