//! Randomized invariant suite.
//!
//! Each property draws `trials` independent instances from its own seed
//! stream and records how many violate it. Instances come either from the
//! channel model or from a log-uniform gain distribution that reaches far
//! weaker and far stronger users than a realistic cell would.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::admission::{
    cumulative_power_closed_form, exhaustive_admit, greedy_admit, optimality_condition_holds,
    AdmissionInstance, DEFAULT_EXHAUSTIVE_CAP, OPS_PER_USER,
};
use crate::channel::draw_cluster;
use crate::config::SystemConfig;
use crate::rates::{
    cluster_size_rate_delta, dominated_split, noma_sum_rate, oma_optimal_dof, oma_sum_rate,
    oma_sum_upper_bound, sic_feasibility_check, two_user_gap, two_user_gap_maximizer, DofSplit,
    PowerSplit,
};
use crate::seed::{mix, rng_for, stream, trial_seed};

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    /// Instances per property.
    pub trials: usize,
    pub seed: u64,
    /// Random DoF splits tried per instance against the OMA bound.
    pub dof_samples: usize,
    /// Points of the dense grid searched for the gap maximizer.
    pub gap_grid: usize,
    pub config: SystemConfig,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            trials: 1000,
            seed: 1,
            dof_samples: 1000,
            gap_grid: 10_000,
            config: SystemConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub checked: usize,
    pub failed: usize,
    /// Description of the lowest-index failing instance.
    pub first_failure: Option<String>,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub properties: Vec<PropertyOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(PropertyOutcome::passed)
    }

    pub fn failed_properties(&self) -> usize {
        self.properties.iter().filter(|p| !p.passed()).count()
    }
}

type Check = fn(&mut ChaCha8Rng, &VerifyOptions) -> Result<(), String>;

/// Every property, in reporting order.
pub const PROPERTIES: &[(&str, Check)] = &[
    ("zero_forcing", zero_forcing),
    ("sic_feasibility", sic_feasibility),
    ("noma_dominates_oma", noma_dominates_oma),
    ("oma_bound_tight", oma_bound_tight),
    ("noma_above_oma_bound", noma_above_oma_bound),
    ("gap_maximizer", gap_maximizer),
    ("cluster_growth_monotone", cluster_growth_monotone),
    ("threshold_tight_allocation", threshold_tight_allocation),
    ("closed_form_power", closed_form_power),
    ("linear_admission_cost", linear_admission_cost),
    ("admission_monotone_in_power", admission_monotone_in_power),
    ("oracle_dominance", oracle_dominance),
    ("equal_threshold_agreement", equal_threshold_agreement),
    ("optimality_condition", optimality_condition),
];

pub fn run_suite(options: &VerifyOptions) -> VerifyReport {
    let properties = PROPERTIES
        .iter()
        .enumerate()
        .map(|(i, &(name, check))| run_property(name, check, i as u64, options))
        .collect();
    VerifyReport { properties }
}

fn run_property(name: &'static str, check: Check, index: u64, opts: &VerifyOptions) -> PropertyOutcome {
    let base = mix(opts.seed, index);
    let failures: Vec<(u64, String)> = (0..opts.trials as u64)
        .into_par_iter()
        .filter_map(|t| {
            let mut rng = rng_for(trial_seed(base, t), stream::INSTANCE);
            check(&mut rng, opts).err().map(|e| (t, e))
        })
        .collect();
    PropertyOutcome {
        name,
        checked: opts.trials,
        failed: failures.len(),
        first_failure: failures.first().map(|(t, e)| format!("instance {t}: {e}")),
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// `n` SNR-scaled gains, log-uniform over 60 dB, sorted descending.
pub fn random_gains(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut g: Vec<f64> = (0..n)
        .map(|_| 10f64.powf(rng.random_range(-1.0..5.0)))
        .collect();
    g.sort_by(|a, b| b.total_cmp(a));
    g
}

/// Point drawn uniformly from the probability simplex.
pub fn random_simplex(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|x| x / s).collect()
}

fn random_split(rng: &mut impl Rng, n: usize) -> PowerSplit {
    let mut w = random_simplex(rng, n);
    // rounding may push the sum a hair over 1
    let total: f64 = w.iter().sum();
    if total > 1.0 {
        w.iter_mut().for_each(|x| *x /= total);
    }
    PowerSplit::new(w.iter().map(|x| x.clamp(0.0, 1.0)).collect()).expect("simplex point")
}

fn random_thresholds(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| *[5.0, 10.0, 15.0].choose(rng).expect("nonempty"))
        .collect()
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn zero_forcing(rng: &mut ChaCha8Rng, o: &VerifyOptions) -> Result<(), String> {
    let cluster = rng.random_range(0..o.config.tx_antennas);
    let r = draw_cluster(&o.config, cluster, rng.random()).map_err(err)?;
    for u in 0..r.users() {
        let norm = r.detection_vectors[u].norm();
        ensure((norm - 1.0).abs() <= 1e-12, || format!("user {u}: |v| = {norm}"))?;
        let leak = r.leakage(u);
        ensure(leak < 1e-10, || format!("user {u}: leakage {leak:e}"))?;
    }
    Ok(())
}

fn sic_feasibility(rng: &mut ChaCha8Rng, o: &VerifyOptions) -> Result<(), String> {
    let users = rng.random_range(2..=6);
    let power = rng.random_range(0.0..50.0);
    let cfg = o.config.with_users(users).with_tx_power(power);
    let r = draw_cluster(&cfg, 0, rng.random()).map_err(err)?;
    let split = random_split(rng, users);
    let report = sic_feasibility_check(&r.scaled_gains(), &split).map_err(err)?;
    ensure(report.feasible, || format!("worst margin {:e}", report.worst_margin()))
}

fn noma_dominates_oma(rng: &mut ChaCha8Rng, _: &VerifyOptions) -> Result<(), String> {
    let n = rng.random_range(2..=6);
    let g = random_gains(rng, n);
    let s = random_split(rng, n);
    let noma = noma_sum_rate(&g, &s).map_err(err)?;
    let oma = oma_sum_rate(&g, &s, &oma_optimal_dof(&g, &s).map_err(err)?).map_err(err)?;
    ensure(noma - oma >= -1e-9, || format!("noma {noma} < oma {oma}"))
}

fn oma_bound_tight(rng: &mut ChaCha8Rng, o: &VerifyOptions) -> Result<(), String> {
    let n = rng.random_range(2..=6);
    let g = random_gains(rng, n);
    let s = random_split(rng, n);
    let bound = oma_sum_upper_bound(&g, &s).map_err(err)?;
    let best = oma_sum_rate(&g, &s, &oma_optimal_dof(&g, &s).map_err(err)?).map_err(err)?;
    ensure((best - bound).abs() <= 1e-9, || {
        format!("optimal split gives {best}, bound {bound}")
    })?;
    for _ in 0..o.dof_samples {
        let dof = DofSplit::new(random_simplex(rng, n)).map_err(err)?;
        let r = oma_sum_rate(&g, &s, &dof).map_err(err)?;
        ensure(r <= bound + 1e-9, || format!("split {dof:?} gives {r} > {bound}"))?;
    }
    Ok(())
}

fn noma_above_oma_bound(rng: &mut ChaCha8Rng, _: &VerifyOptions) -> Result<(), String> {
    let n = rng.random_range(2..=6);
    let g = random_gains(rng, n);
    let s = random_split(rng, n);
    let noma = noma_sum_rate(&g, &s).map_err(err)?;
    let bound = oma_sum_upper_bound(&g, &s).map_err(err)?;
    ensure(noma >= bound - 1e-9, || format!("noma {noma} < bound {bound}"))
}

fn gap_maximizer(rng: &mut ChaCha8Rng, o: &VerifyOptions) -> Result<(), String> {
    let g = random_gains(rng, 2);
    let step = 1.0 / o.gap_grid as f64;
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..=o.gap_grid {
        let w = i as f64 * step;
        let gap = two_user_gap(&g, w).map_err(err)?;
        ensure(gap >= -1e-12, || format!("negative gap {gap:e} at {w}"))?;
        if gap > best.1 {
            best = (w, gap);
        }
    }
    let formula = two_user_gap_maximizer(g[0]).map_err(err)?;
    ensure((best.0 - formula).abs() <= step, || {
        format!("grid argmax {} vs formula {formula} for gains {g:?}", best.0)
    })
}

fn cluster_growth_monotone(rng: &mut ChaCha8Rng, _: &VerifyOptions) -> Result<(), String> {
    let l = rng.random_range(1..=5);
    let g = random_gains(rng, l + 1);
    let small = random_split(rng, l);
    let small = PowerSplit::new({
        // full power on the smaller cluster
        let c = small.coefficients();
        let t: f64 = c.iter().sum();
        c.iter().map(|x| (x / t).min(1.0)).collect()
    })
    .map_err(err)?;
    let large = if rng.random_bool(0.5) {
        dominated_split(&small, rng.random_range(0.0..1.0)).map_err(err)?
    } else {
        // shrink each coefficient independently and give the rest to the new user
        let mut theta: Vec<f64> = small
            .coefficients()
            .iter()
            .map(|o| o * rng.random_range(0.0..=1.0))
            .collect();
        let used: f64 = theta.iter().sum();
        theta.push((1.0 - used).max(0.0));
        PowerSplit::new(theta).map_err(err)?
    };
    let d = cluster_size_rate_delta(&g, &small, &large).map_err(err)?;
    ensure(d.direct <= 1e-12, || format!("rate grows by {:e}", d.direct))?;
    for (name, f) in [("lambda1", d.lambda1), ("lambda2", d.lambda2), ("lambda3", d.lambda3)] {
        ensure(f <= 1.0 + 1e-12, || format!("{name} = {f}"))?;
    }
    ensure((d.direct - d.factored).abs() <= 1e-9, || {
        format!("direct {} vs factored {}", d.direct, d.factored)
    })
}

fn admission_instance(rng: &mut ChaCha8Rng, equal: bool) -> Result<AdmissionInstance, String> {
    let n = rng.random_range(1..=8);
    let g: Vec<f64> = random_gains(rng, n).iter().map(|x| x * 10.0).collect();
    if equal {
        let t = *[5.0, 10.0, 15.0].choose(rng).expect("nonempty");
        AdmissionInstance::with_common_threshold_db(g, t).map_err(err)
    } else {
        let t = random_thresholds(rng, n);
        AdmissionInstance::from_db(g, &t).map_err(err)
    }
}

fn threshold_tight_allocation(rng: &mut ChaCha8Rng, _: &VerifyOptions) -> Result<(), String> {
    let inst = admission_instance(rng, false)?;
    let r = greedy_admit(&inst).map_err(err)?;
    let total: f64 = r.power_coefficients.iter().sum();
    ensure((total + r.residual_power - 1.0).abs() <= 1e-12, || {
        format!("power {total} + residual {} != 1", r.residual_power)
    })?;
    ensure(r.residual_power >= -1e-12, || format!("overspent by {}", -r.residual_power))?;
    ensure(r.admitted == (0..r.admitted_count).collect::<Vec<_>>(), || {
        format!("admitted set {:?} is not a prefix", r.admitted)
    })?;
    for &k in &r.admitted {
        let (got, want) = (r.achieved_sinrs[k], inst.thresholds()[k]);
        ensure((got - want).abs() <= 1e-12 * want.max(1.0), || {
            format!("user {k}: SINR {got} vs threshold {want}")
        })?;
    }
    Ok(())
}

fn closed_form_power(rng: &mut ChaCha8Rng, _: &VerifyOptions) -> Result<(), String> {
    let inst = admission_instance(rng, false)?;
    let r = greedy_admit(&inst).map_err(err)?;
    let mut running = 0.0;
    for l in 1..=r.admitted_count {
        running += r.power_coefficients[l - 1];
        let closed = cumulative_power_closed_form(&inst, l).map_err(err)?;
        ensure((closed - running).abs() <= 1e-12, || {
            format!("prefix {l}: closed form {closed} vs running {running}")
        })?;
    }
    Ok(())
}

fn linear_admission_cost(rng: &mut ChaCha8Rng, _: &VerifyOptions) -> Result<(), String> {
    let inst = admission_instance(rng, false)?;
    let r = greedy_admit(&inst).map_err(err)?;
    let limit = OPS_PER_USER * inst.users() as u64;
    ensure(r.operations <= limit, || format!("{} operations for {} users", r.operations, inst.users()))
}

fn admission_monotone_in_power(rng: &mut ChaCha8Rng, _: &VerifyOptions) -> Result<(), String> {
    let inst = admission_instance(rng, false)?;
    let factor = 10f64.powf(rng.random_range(0.0..3.0));
    let low = greedy_admit(&inst).map_err(err)?.admitted_count;
    let high = greedy_admit(&inst.scaled(factor)).map_err(err)?.admitted_count;
    ensure(high >= low, || format!("{low} admitted before, {high} after scaling by {factor}"))
}

fn oracle_dominance(rng: &mut ChaCha8Rng, _: &VerifyOptions) -> Result<(), String> {
    let inst = admission_instance(rng, false)?;
    let g = greedy_admit(&inst).map_err(err)?.admitted_count;
    let e = exhaustive_admit(&inst, DEFAULT_EXHAUSTIVE_CAP).map_err(err)?.admitted_count;
    ensure(e >= g, || format!("exhaustive {e} < greedy {g}"))
}

fn equal_threshold_agreement(rng: &mut ChaCha8Rng, _: &VerifyOptions) -> Result<(), String> {
    let inst = admission_instance(rng, true)?;
    let g = greedy_admit(&inst).map_err(err)?;
    let e = exhaustive_admit(&inst, DEFAULT_EXHAUSTIVE_CAP).map_err(err)?;
    ensure(
        g.admitted_count == e.admitted_count && g.sum_rate_bps_hz == e.sum_rate_bps_hz,
        || {
            format!(
                "greedy ({}, {}) vs exhaustive ({}, {})",
                g.admitted_count, g.sum_rate_bps_hz, e.admitted_count, e.sum_rate_bps_hz
            )
        },
    )
}

fn optimality_condition(rng: &mut ChaCha8Rng, _: &VerifyOptions) -> Result<(), String> {
    let inst = admission_instance(rng, false)?;
    let g = greedy_admit(&inst).map_err(err)?.admitted_count;
    if !optimality_condition_holds(&inst, g) {
        return Ok(());
    }
    let e = exhaustive_admit(&inst, DEFAULT_EXHAUSTIVE_CAP).map_err(err)?.admitted_count;
    ensure(e == g, || {
        format!(
            "condition holds but exhaustive admits {e} vs greedy {g}; thresholds {:?}, gains {:?}",
            inst.thresholds(),
            inst.gains()
        )
    })
}
