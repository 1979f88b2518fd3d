//! Command-line front end for the MIMO-NOMA sweeps.
//!
//! Settings are layered: built-in defaults, then the `--config` file, then
//! `--seed` and `--trials`, then every `--set key=value` in order.

pub mod config_file;
pub mod output;

use std::env;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mimo_noma::experiments::{run_sweep, SweepPoint};
use mimo_noma::rates::{two_user_gap, two_user_gap_maximizer};
use mimo_noma::seed::trial_seed;
use mimo_noma::verify::{run_suite, VerifyOptions};
use mimo_noma::{draw_cluster, SweepKind, SweepSpec};

pub use config_file::{parse_config, ParseError, RunConfig};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "NOMASIM_OUT_DIR";

pub const DEFAULT_TRIALS: usize = 1000;

/// Grid points the `gap` subcommand searches when no grid is configured.
pub const GAP_GRID_POINTS: usize = 10_000;

#[derive(Debug, Parser)]
#[command(name = "nomasim", version, about = "MIMO-NOMA cluster sweeps and invariant checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override one setting; applied after everything else, in order.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output CSV path.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Sum rate vs. power split.
    SweepSplit {
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=3))]
        users: u8,
    },
    /// Sum rate vs. transmit power, fresh channel per point.
    SweepPower,
    /// Sum rate vs. transmit power averaged over shared draws.
    Ergodic,
    /// Jain's fairness index vs. power split.
    Fairness {
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=3))]
        users: u8,
    },
    /// Two-user gap maximizer: closed form vs. grid search on one draw.
    Gap,
    /// Admitted users vs. target SINR or number of requesting users.
    Admission {
        #[arg(long, value_enum, default_value_t = AdmissionAxis::Sinr)]
        by: AdmissionAxis,
    },
    /// Sequential vs. exhaustive admission.
    OracleCompare {
        #[arg(long, value_enum, default_value_t = ThresholdMode::Equal)]
        thresholds: ThresholdMode,
    },
    /// Randomized invariant suite.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AdmissionAxis {
    Sinr,
    Requesting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ThresholdMode {
    Equal,
    Mixed,
}

impl Command {
    /// Sweep kind served by this subcommand, if it runs a sweep.
    pub fn sweep_kind(&self) -> Option<SweepKind> {
        Some(match self {
            Command::SweepSplit { users: 2 } => SweepKind::SplitSweep2User,
            Command::SweepSplit { .. } => SweepKind::SplitSweep3User,
            Command::SweepPower => SweepKind::PowerSweep,
            Command::Ergodic => SweepKind::ErgodicPowerSweep,
            Command::Fairness { users: 2 } => SweepKind::Fairness2User,
            Command::Fairness { .. } => SweepKind::Fairness3User,
            Command::Admission { by: AdmissionAxis::Sinr } => SweepKind::AdmissionVsSinr,
            Command::Admission { .. } => SweepKind::AdmissionVsRequesting,
            Command::OracleCompare {
                thresholds: ThresholdMode::Equal,
            } => SweepKind::OracleCompareEqual,
            Command::OracleCompare { .. } => SweepKind::OracleCompareMixed,
            Command::Gap | Command::Verify => return None,
        })
    }

    fn output_stem(&self) -> &'static str {
        match self {
            Command::Gap => "gap",
            Command::Verify => "verify",
            other => other.sweep_kind().map_or("out", SweepKind::name),
        }
    }
}

/// Loads the layered configuration for `common`.
pub fn load_config(common: &CommonArgs) -> Result<RunConfig> {
    let text = match &common.config {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => String::new(),
    };
    let mut layered = Vec::new();
    if let Some(s) = common.seed {
        layered.push(format!("rng_seed={s}"));
    }
    if let Some(t) = common.trials {
        layered.push(format!("trials={t}"));
    }
    layered.extend(common.overrides.iter().cloned());
    let cfg = parse_config(&text, &layered).map_err(|e| match &common.config {
        Some(p) => anyhow::Error::new(e).context(format!("in {}", p.display())),
        None => anyhow::Error::new(e),
    })?;
    Ok(cfg)
}

/// Output CSV: `--out`, else `$NOMASIM_OUT_DIR/<stem>.csv`, else `./<stem>.csv`.
pub fn output_path(common: &CommonArgs, command: &Command) -> PathBuf {
    if let Some(p) = &common.out {
        return p.clone();
    }
    let dir = env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from);
    dir.join(format!("{}.csv", command.output_stem()))
}

/// Sweep specification for `kind` under `cfg`.
pub fn build_spec(kind: SweepKind, cfg: &RunConfig) -> SweepSpec {
    let trials = cfg.trials.unwrap_or(DEFAULT_TRIALS);
    let mut spec = SweepSpec::new(kind, trials, cfg.system.clone());
    spec.params = cfg.params.clone();
    if let Some(xs) = &cfg.grid {
        spec.grid = match &cfg.grid2 {
            Some(ys) => SweepPoint::surface(xs, ys),
            None => SweepPoint::line(xs),
        };
    }
    spec
}

/// Runs one invocation. `Ok(false)` means an invariant failed.
pub fn run(cli: &Cli) -> Result<bool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.common.threads {
        builder = builder.num_threads(n as usize);
    }
    let pool = builder.build().context("starting worker threads")?;
    pool.install(|| dispatch(cli))
}

fn dispatch(cli: &Cli) -> Result<bool> {
    let cfg = load_config(&cli.common)?;
    let out = output_path(&cli.common, &cli.command);
    match &cli.command {
        Command::Verify => run_verify(&cfg, &out),
        Command::Gap => run_gap(&cfg, &out),
        cmd => {
            let kind = cmd.sweep_kind().expect("sweep subcommand");
            run_sweep_command(kind, &cfg, &out)?;
            Ok(true)
        }
    }
}

fn write_companions(out: &Path, meta: &str, title: &str) -> Result<()> {
    let meta_path = output::metadata_path(out);
    output::write_file(&meta_path, meta)
        .with_context(|| format!("writing {}", meta_path.display()))?;
    let plot_path = output::plot_script_path(out);
    let csv_name = out
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    output::write_file(&plot_path, &output::plot_script(&csv_name, title))
        .with_context(|| format!("writing {}", plot_path.display()))?;
    Ok(())
}

fn run_sweep_command(kind: SweepKind, cfg: &RunConfig, out: &Path) -> Result<()> {
    let spec = build_spec(kind, cfg);
    let result = run_sweep(&spec)?;
    output::write_file(out, &result.to_csv()).with_context(|| format!("writing {}", out.display()))?;

    let mut echo = cfg.clone();
    echo.trials = Some(spec.trials);
    let meta = output::metadata_text(
        &config_file::render_config(&echo),
        &result,
        config_file::KEYS,
    );
    write_companions(out, &meta, kind.name())?;

    println!(
        "{}: {} grid points, {} trials -> {}",
        kind.name(),
        result.rows.len(),
        spec.trials,
        out.display()
    );
    for (k, v) in result.metadata.iter().filter(|(k, _)| k.starts_with("max_gap")) {
        println!("  {k} = {v}");
    }
    Ok(())
}

fn run_gap(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let system = cfg.system.with_users(2);
    let r = draw_cluster(&system, 0, trial_seed(system.rng_seed, 0))?;
    let gains = r.scaled_gains();
    let grid = match &cfg.grid {
        Some(g) => g.clone(),
        None => (0..=GAP_GRID_POINTS)
            .map(|i| i as f64 / GAP_GRID_POINTS as f64)
            .collect(),
    };
    if grid.iter().any(|w| !(0.0..=1.0).contains(w)) {
        bail!("gap grid must lie in [0, 1]");
    }
    let mut sorted = grid.clone();
    sorted.sort_by(f64::total_cmp);
    let step = sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max);

    let mut csv = String::from("sweep_point,scheme,metric,mean,stderr,trials\n");
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    for &w in &grid {
        let g = two_user_gap(&gains, w)?;
        let _ = writeln!(csv, "{w},gap,sum_rate_gap,{g},0,1");
        if g > best.1 {
            best = (w, g);
        }
    }
    let formula = two_user_gap_maximizer(gains[0])?;
    let matched = (best.0 - formula).abs() <= step;
    output::write_file(out, &csv).with_context(|| format!("writing {}", out.display()))?;

    let mut meta = config_file::render_config(cfg);
    let _ = writeln!(meta, "# strong_gain = {}", gains[0]);
    let _ = writeln!(meta, "# weak_gain = {}", gains[1]);
    let _ = writeln!(meta, "# formula_maximizer = {formula}");
    let _ = writeln!(meta, "# grid_argmax = {}", best.0);
    let _ = writeln!(meta, "# grid_step = {step}");
    let _ = writeln!(meta, "# build = {}", mimo_noma::experiments::build_tag());
    write_companions(out, &meta, "gap")?;

    println!("strong gain {:.6e}, weak gain {:.6e}", gains[0], gains[1]);
    println!("closed-form maximizer {formula:.6}");
    println!("grid argmax {:.6} (gap {:.6} bps/Hz, step {step:.2e})", best.0, best.1);
    println!("within one grid step: {}", if matched { "yes" } else { "no" });
    Ok(matched)
}

fn run_verify(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let opts = VerifyOptions {
        trials: cfg.trials.unwrap_or(DEFAULT_TRIALS),
        seed: cfg.system.rng_seed,
        config: cfg.system.clone(),
        ..VerifyOptions::default()
    };
    let report = run_suite(&opts);
    let mut csv = String::from("property,checked,failed\n");
    for p in &report.properties {
        let _ = writeln!(csv, "{},{},{}", p.name, p.checked, p.failed);
        println!(
            "{} {} ({} of {} failed)",
            if p.passed() { "PASS" } else { "FAIL" },
            p.name,
            p.failed,
            p.checked
        );
        if let Some(f) = &p.first_failure {
            println!("    first failure: {f}");
        }
    }
    output::write_file(out, &csv).with_context(|| format!("writing {}", out.display()))?;
    let passed = report.properties.len() - report.failed_properties();
    println!("{passed} of {} properties passed", report.properties.len());
    Ok(report.passed())
}
