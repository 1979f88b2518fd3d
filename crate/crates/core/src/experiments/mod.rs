//! Monte-Carlo sweeps.
//!
//! A [`SweepSpec`] names a [`SweepKind`], the grid to sweep, the number of
//! trials and the system parameters. Each kind is served by an
//! [`Experiment`] registered under the kind's name in an
//! [`ExperimentRegistry`]. Trials run in parallel and are reduced in trial
//! order, so results do not depend on the number of worker threads.
//!
//! Within one sweep all grid points share the channel draws of a trial
//! (except [`SweepKind::PowerSweep`], which redraws per point on purpose),
//! which makes the scheme comparisons paired.

mod admission;
mod power;
mod split;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::admission::{AdmissionError, PolicyRegistry, DEFAULT_EXHAUSTIVE_CAP};
use crate::channel::ChannelError;
use crate::config::SystemConfig;
use crate::rates::{RateError, SchemeRegistry};
use crate::stats::{RunningStats, Summary};

pub use admission::{AdmissionSweep, OracleCompare};
pub use power::PowerSweep;
pub use split::{FairnessSweep, SplitSweep};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("grid is empty")]
    EmptyGrid,
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("invalid grid point ({x}, {y:?}): {reason}")]
    GridPoint {
        x: f64,
        y: Option<f64>,
        reason: &'static str,
    },
    #[error("no experiment registered for `{0}`")]
    UnknownExperiment(String),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Admission(#[from] AdmissionError),
}

/// The data series a sweep reproduces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SweepKind {
    /// Sum rate vs. the strong user's power fraction, two users.
    SplitSweep2User,
    /// Sum rate vs. power fractions, three users. A point without a second
    /// coordinate splits the remainder equally.
    SplitSweep3User,
    /// Sum rate vs. transmit power, fresh channel draw per point.
    PowerSweep,
    /// Sum rate vs. transmit power averaged over shared draws.
    ErgodicPowerSweep,
    Fairness2User,
    Fairness3User,
    /// Admitted users vs. common target SINR (x, dB) and power (y, dBm).
    AdmissionVsSinr,
    /// Admitted users vs. number of requesting users (x) and power or SINR (y).
    AdmissionVsRequesting,
    /// Sequential vs. exhaustive admission with a common threshold.
    OracleCompareEqual,
    /// Sequential vs. exhaustive admission with thresholds drawn per user.
    OracleCompareMixed,
}

impl SweepKind {
    pub const ALL: [SweepKind; 10] = [
        SweepKind::SplitSweep2User,
        SweepKind::SplitSweep3User,
        SweepKind::PowerSweep,
        SweepKind::ErgodicPowerSweep,
        SweepKind::Fairness2User,
        SweepKind::Fairness3User,
        SweepKind::AdmissionVsSinr,
        SweepKind::AdmissionVsRequesting,
        SweepKind::OracleCompareEqual,
        SweepKind::OracleCompareMixed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepKind::SplitSweep2User => "split_sweep_2user",
            SweepKind::SplitSweep3User => "split_sweep_3user",
            SweepKind::PowerSweep => "power_sweep",
            SweepKind::ErgodicPowerSweep => "ergodic_power_sweep",
            SweepKind::Fairness2User => "fairness_2user",
            SweepKind::Fairness3User => "fairness_3user",
            SweepKind::AdmissionVsSinr => "admission_vs_sinr",
            SweepKind::AdmissionVsRequesting => "admission_vs_requesting",
            SweepKind::OracleCompareEqual => "oracle_compare_equal",
            SweepKind::OracleCompareMixed => "oracle_compare_mixed",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Grid used when the caller does not supply one.
    pub fn default_grid(self) -> Vec<SweepPoint> {
        let splits = range(0.0, 0.01, 1.0);
        match self {
            SweepKind::SplitSweep2User | SweepKind::Fairness2User => SweepPoint::line(&splits),
            SweepKind::SplitSweep3User | SweepKind::Fairness3User => {
                SweepPoint::surface(&range(0.0, 0.05, 0.95), &range(0.0, 0.05, 1.0))
            }
            SweepKind::PowerSweep | SweepKind::ErgodicPowerSweep => {
                SweepPoint::line(&range(0.0, 5.0, 50.0))
            }
            SweepKind::AdmissionVsSinr => {
                SweepPoint::surface(&range(0.0, 2.5, 20.0), &[30.0, 40.0, 50.0])
            }
            SweepKind::AdmissionVsRequesting => {
                SweepPoint::surface(&range(2.0, 1.0, 12.0), &[30.0, 40.0, 50.0])
            }
            SweepKind::OracleCompareEqual => {
                SweepPoint::surface(&range(30.0, 5.0, 50.0), &[5.0, 10.0, 15.0])
            }
            SweepKind::OracleCompareMixed => SweepPoint::line(&range(30.0, 5.0, 50.0)),
        }
    }
}

/// Inclusive arithmetic range `start, start + step, ..., stop`.
///
/// Points are computed as `start + i * step` and the endpoint is included
/// when it lies within half a step.
pub fn range(start: f64, step: f64, stop: f64) -> Vec<f64> {
    if step <= 0.0 || stop < start {
        return vec![start];
    }
    let n = ((stop - start) / step + 0.5).floor() as usize;
    (0..=n)
        .map(|i| {
            let v = start + i as f64 * step;
            // snap to 12 significant decimals so 0.07 prints as 0.07
            (v * 1e12).round() / 1e12
        })
        .collect()
}

/// One point of a one- or two-dimensional sweep grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub x: f64,
    pub y: Option<f64>,
}

impl SweepPoint {
    pub fn new(x: f64) -> Self {
        Self { x, y: None }
    }

    pub fn pair(x: f64, y: f64) -> Self {
        Self { x, y: Some(y) }
    }

    pub fn line(xs: &[f64]) -> Vec<Self> {
        xs.iter().map(|&x| Self::new(x)).collect()
    }

    /// Cartesian product, `x` varying slowest.
    pub fn surface(xs: &[f64], ys: &[f64]) -> Vec<Self> {
        xs.iter()
            .flat_map(|&x| ys.iter().map(move |&y| Self::pair(x, y)))
            .collect()
    }
}

/// Which quantity the second grid coordinate of
/// [`SweepKind::AdmissionVsRequesting`] sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecondAxis {
    TxPowerDbm,
    TargetSinrDb,
}

/// Knobs that only some sweep kinds read.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepParams {
    /// Multiple-access schemes compared by the rate sweeps.
    pub schemes: Vec<String>,
    /// Strong user's power fraction in the two-user power sweeps.
    pub omega1: f64,
    /// Power fraction of the added third user; the others are scaled by
    /// `1 - theta_last` so no coefficient grows.
    pub theta_last: f64,
    /// Common target SINR (dB) where the grid does not set one.
    pub target_sinr_db: f64,
    /// Values thresholds are drawn from in the mixed oracle comparison.
    pub mixed_sinr_db: Vec<f64>,
    pub exhaustive_cap: usize,
    /// Admission policy under test.
    pub policy: String,
    /// Policy the oracle comparison measures against.
    pub oracle: String,
    pub requesting_axis: SecondAxis,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            schemes: vec!["noma".into(), "oma".into()],
            omega1: 0.2,
            theta_last: 0.2,
            target_sinr_db: 10.0,
            mixed_sinr_db: vec![5.0, 10.0, 15.0],
            exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
            policy: "greedy".into(),
            oracle: "exhaustive".into(),
            requesting_axis: SecondAxis::TxPowerDbm,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub grid: Vec<SweepPoint>,
    pub trials: usize,
    pub config: SystemConfig,
    pub params: SweepParams,
}

impl SweepSpec {
    /// Spec with the kind's default grid and parameters.
    pub fn new(kind: SweepKind, trials: usize, config: SystemConfig) -> Self {
        Self {
            kind,
            grid: kind.default_grid(),
            trials,
            config,
            params: SweepParams::default(),
        }
    }

    pub fn with_grid(mut self, grid: Vec<SweepPoint>) -> Self {
        self.grid = grid;
        self
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.grid.is_empty() {
            return Err(ExperimentError::EmptyGrid);
        }
        if self.trials == 0 {
            return Err(ExperimentError::NoTrials);
        }
        self.config.validate().map_err(ChannelError::from)?;
        Ok(())
    }
}

/// Statistic of one metric of one scheme at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub scheme: String,
    pub metric: String,
    pub stats: Summary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub point: SweepPoint,
    pub entries: Vec<Entry>,
}

impl SweepRow {
    pub fn get(&self, scheme: &str, metric: &str) -> Option<&Summary> {
        self.entries
            .iter()
            .find(|e| e.scheme == scheme && e.metric == metric)
            .map(|e| &e.stats)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub kind: SweepKind,
    /// One row per grid point, in grid order.
    pub rows: Vec<SweepRow>,
    pub metadata: BTreeMap<String, String>,
}

impl SweepResult {
    /// Long-format CSV: one line per (point, scheme, metric).
    pub fn to_csv(&self) -> String {
        let two_d = self.rows.iter().any(|r| r.point.y.is_some());
        let mut out = String::from(if two_d {
            "sweep_point,sweep_point2,scheme,metric,mean,stderr,trials\n"
        } else {
            "sweep_point,scheme,metric,mean,stderr,trials\n"
        });
        for row in &self.rows {
            for e in &row.entries {
                let _ = write!(out, "{}", row.point.x);
                if two_d {
                    match row.point.y {
                        Some(y) => {
                            let _ = write!(out, ",{y}");
                        }
                        None => out.push(','),
                    }
                }
                let _ = writeln!(
                    out,
                    ",{},{},{},{},{}",
                    e.scheme, e.metric, e.stats.mean, e.stats.stderr, e.stats.trials
                );
            }
        }
        out
    }

    /// Summary for `(scheme, metric)` at every grid point, in grid order.
    pub fn series(&self, scheme: &str, metric: &str) -> Vec<Option<Summary>> {
        self.rows.iter().map(|r| r.get(scheme, metric).copied()).collect()
    }
}

/// Strategy registries an experiment may draw from.
#[derive(Clone)]
pub struct Registries {
    pub schemes: SchemeRegistry,
    pub policies: PolicyRegistry,
}

impl Registries {
    pub fn with_defaults(exhaustive_cap: usize) -> Self {
        Self {
            schemes: SchemeRegistry::with_defaults(),
            policies: PolicyRegistry::with_defaults(exhaustive_cap),
        }
    }
}

/// One family of sweeps.
pub trait Experiment: Send + Sync {
    fn kinds(&self) -> &[SweepKind];
    fn run(&self, spec: &SweepSpec, registries: &Registries) -> Result<SweepResult, ExperimentError>;
}

/// Experiments by sweep-kind name.
#[derive(Clone, Default)]
pub struct ExperimentRegistry {
    experiments: BTreeMap<&'static str, Arc<dyn Experiment>>,
}

impl ExperimentRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_defaults() -> Self {
        let mut r = Self::new();
        r.register(Arc::new(SplitSweep));
        r.register(Arc::new(FairnessSweep));
        r.register(Arc::new(PowerSweep));
        r.register(Arc::new(AdmissionSweep));
        r.register(Arc::new(OracleCompare));
        r
    }

    pub fn register(&mut self, experiment: Arc<dyn Experiment>) {
        for kind in experiment.kinds() {
            self.experiments.insert(kind.name(), experiment.clone());
        }
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Experiment>, ExperimentError> {
        self.experiments
            .get(name)
            .cloned()
            .ok_or_else(|| ExperimentError::UnknownExperiment(name.to_string()))
    }

    /// Validates `spec` and runs the experiment registered for its kind.
    pub fn run(&self, spec: &SweepSpec) -> Result<SweepResult, ExperimentError> {
        spec.validate()?;
        let registries = Registries::with_defaults(spec.params.exhaustive_cap);
        let mut result = self.get(spec.kind.name())?.run(spec, &registries)?;
        result.metadata.extend(base_metadata(spec));
        Ok(result)
    }
}

/// Runs the sweep with the default registry.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult, ExperimentError> {
    ExperimentRegistry::with_defaults().run(spec)
}

pub fn build_tag() -> String {
    format!("{}-{}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))
}

fn base_metadata(spec: &SweepSpec) -> BTreeMap<String, String> {
    let c = &spec.config;
    let p = &spec.params;
    let mut m = BTreeMap::new();
    let mut put = |k: &str, v: String| {
        m.insert(k.to_string(), v);
    };
    put("kind", spec.kind.name().into());
    put("trials", spec.trials.to_string());
    put("grid_points", spec.grid.len().to_string());
    put("rng_seed", c.rng_seed.to_string());
    put("build", build_tag());
    put("tx_antennas", c.tx_antennas.to_string());
    put("rx_antennas", c.rx_antennas.to_string());
    put("users_per_cluster", c.users_per_cluster.to_string());
    put("bandwidth_hz", c.bandwidth_hz.to_string());
    put("noise_density_dbm_hz", c.noise_density_dbm_hz.to_string());
    put("pathloss_fixed_db", c.pathloss_fixed_db.to_string());
    put("pathloss_slope", c.pathloss_slope.to_string());
    put("tx_power_dbm", c.tx_power_dbm.to_string());
    put("cell_radius_min_km", c.cell_radius_km.0.to_string());
    put("cell_radius_max_km", c.cell_radius_km.1.to_string());
    put("schemes", p.schemes.join(","));
    put("omega1", p.omega1.to_string());
    put("theta_last", p.theta_last.to_string());
    put("target_sinr_db", p.target_sinr_db.to_string());
    put(
        "mixed_sinr_db",
        p.mixed_sinr_db
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(","),
    );
    put("exhaustive_cap", p.exhaustive_cap.to_string());
    put("policy", p.policy.clone());
    put("oracle", p.oracle.clone());
    put(
        "requesting_axis",
        match p.requesting_axis {
            SecondAxis::TxPowerDbm => "tx_power",
            SecondAxis::TargetSinrDb => "target_sinr",
        }
        .into(),
    );
    put("oma_dof_rule", "proportional to power times gain (optimal)".into());
    m
}

/// Samples of one trial: `values[point * series + s]`, NaN when undefined.
type TrialSamples = Vec<f64>;

/// Evaluates `trial` for every trial index in parallel and returns the
/// samples in trial order.
fn run_trials<F>(trials: usize, trial: F) -> Result<Vec<TrialSamples>, ExperimentError>
where
    F: Fn(u64) -> Result<TrialSamples, ExperimentError> + Send + Sync,
{
    (0..trials as u64).into_par_iter().map(trial).collect()
}

/// Name of one reduced series.
#[derive(Debug, Clone)]
struct Series {
    scheme: String,
    metric: String,
}

impl Series {
    fn new(scheme: impl Into<String>, metric: impl Into<String>) -> Self {
        Self {
            scheme: scheme.into(),
            metric: metric.into(),
        }
    }
}

/// Reduces per-trial samples into one row per grid point, skipping NaN.
fn reduce(grid: &[SweepPoint], series: &[Series], samples: &[TrialSamples]) -> Vec<SweepRow> {
    let width = series.len();
    let mut acc = vec![RunningStats::new(); grid.len() * width];
    for trial in samples {
        debug_assert_eq!(trial.len(), acc.len());
        for (a, &v) in acc.iter_mut().zip(trial) {
            if !v.is_nan() {
                a.push(v);
            }
        }
    }
    grid.iter()
        .enumerate()
        .map(|(p, point)| SweepRow {
            point: *point,
            entries: series
                .iter()
                .enumerate()
                .map(|(s, name)| Entry {
                    scheme: name.scheme.clone(),
                    metric: name.metric.clone(),
                    stats: acc[p * width + s].summary(),
                })
                .collect(),
        })
        .collect()
}
