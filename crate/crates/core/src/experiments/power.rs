use std::collections::BTreeMap;

use super::{reduce, run_trials, Experiment, ExperimentError, Registries, Series, SweepKind, SweepResult, SweepSpec};
use crate::channel::draw_cluster;
use crate::rates::{dominated_split, PowerSplit};
use crate::seed::trial_seed;

/// Sum rate vs. transmit power for two- and three-user clusters.
///
/// Each trial draws three users. The two-user cluster keeps the two
/// strongest with the split `(omega1, 1 - omega1)`; the three-user cluster
/// adds the weakest with `theta_last` and scales the two-user split by
/// `1 - theta_last`. Series are named `<scheme>-2user` and `<scheme>-3user`.
///
/// [`SweepKind::PowerSweep`] draws fresh channels at every grid point, like a
/// single-realization plot; [`SweepKind::ErgodicPowerSweep`] reuses the
/// draws of a trial across the grid.
pub struct PowerSweep;

impl Experiment for PowerSweep {
    fn kinds(&self) -> &[SweepKind] {
        &[SweepKind::PowerSweep, SweepKind::ErgodicPowerSweep]
    }

    fn run(&self, spec: &SweepSpec, reg: &Registries) -> Result<SweepResult, ExperimentError> {
        for p in &spec.grid {
            if p.y.is_some() || !p.x.is_finite() {
                return Err(ExperimentError::GridPoint {
                    x: p.x,
                    y: p.y,
                    reason: "power sweeps take one finite dBm value per point",
                });
            }
        }
        let two = PowerSplit::two_user(spec.params.omega1)?;
        let three = dominated_split(&two, spec.params.theta_last)?;
        let schemes = spec
            .params
            .schemes
            .iter()
            .map(|s| reg.schemes.get(s))
            .collect::<Result<Vec<_>, _>>()?;
        let cfg = spec.config.with_users(3);
        let rhos: Vec<f64> = spec
            .grid
            .iter()
            .map(|p| cfg.with_tx_power(p.x).rho())
            .collect();
        let fresh = spec.kind == SweepKind::PowerSweep;
        let points = spec.grid.len() as u64;

        let mut series = Vec::new();
        for s in &schemes {
            series.push(Series::new(format!("{}-2user", s.name()), "sum_rate"));
            series.push(Series::new(format!("{}-3user", s.name()), "sum_rate"));
        }

        let samples = run_trials(spec.trials, |t| {
            let mut out = Vec::with_capacity(rhos.len() * series.len());
            let shared = if fresh {
                None
            } else {
                Some(draw_cluster(&cfg, 0, trial_seed(cfg.rng_seed, t))?)
            };
            for (p, &rho) in rhos.iter().enumerate() {
                let own;
                let r = match &shared {
                    Some(r) => r,
                    None => {
                        own = draw_cluster(&cfg, 0, trial_seed(cfg.rng_seed, t * points + p as u64))?;
                        &own
                    }
                };
                let gains: Vec<f64> = r.effective_gains.iter().map(|g| g * rho).collect();
                for s in &schemes {
                    out.push(s.sum_rate(&gains[..2], &two)?);
                    out.push(s.sum_rate(&gains, &three)?);
                }
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
