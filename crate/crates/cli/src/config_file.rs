//! Flat `key = value` configuration files.
//!
//! One pair per line; `#` starts a comment; blank lines are ignored. Keys
//! not listed in [`KEYS`] are rejected. Overrides given as `key=value`
//! strings are applied after the file, in order.

use std::fmt;

use mimo_noma::config::ConfigError;
use mimo_noma::experiments::{range, SecondAxis, SweepParams};
use mimo_noma::SystemConfig;
use thiserror::Error;

/// Every accepted key.
pub const KEYS: &[&str] = &[
    "tx_antennas",
    "rx_antennas",
    "users_per_cluster",
    "bandwidth_hz",
    "noise_density_dbm_hz",
    "pathloss_fixed_db",
    "pathloss_slope",
    "tx_power_dbm",
    "cell_radius_min_km",
    "cell_radius_max_km",
    "rng_seed",
    "trials",
    "grid",
    "grid2",
    "schemes",
    "omega1",
    "theta_last",
    "target_sinr_db",
    "mixed_sinr_db",
    "exhaustive_cap",
    "policy",
    "oracle",
    "requesting_axis",
];

/// Where a setting came from, for error messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Override(String),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Override(s) => write!(f, "override `{s}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("{origin}: expected `key = value`, found `{text}`")]
    Syntax { origin: Origin, text: String },
    #[error("{origin}: unknown key `{key}`")]
    UnknownKey { origin: Origin, key: String },
    #[error("{origin}: invalid value `{value}` for `{key}`: {reason}")]
    Value {
        origin: Origin,
        key: String,
        value: String,
        reason: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(#[from] ConfigError),
    #[error("invalid configuration: {0}")]
    Param(String),
}

/// Everything a configuration file can set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub trials: Option<usize>,
    pub grid: Option<Vec<f64>>,
    pub grid2: Option<Vec<f64>>,
    pub params: SweepParams,
}

/// Parses `text` and then applies `overrides`.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<RunConfig, ParseError> {
    let mut cfg = RunConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        apply_pair(&mut cfg, line, Origin::Line(i + 1))?;
    }
    for o in overrides {
        apply_pair(&mut cfg, o.trim(), Origin::Override(o.clone()))?;
    }
    cfg.system.validate()?;
    validate_params(&cfg)?;
    Ok(cfg)
}

fn validate_params(cfg: &RunConfig) -> Result<(), ParseError> {
    let p = &cfg.params;
    if !(0.0..=1.0).contains(&p.omega1) {
        return Err(ParseError::Param(format!("omega1 = {} is outside [0, 1]", p.omega1)));
    }
    if !(0.0..=1.0).contains(&p.theta_last) {
        return Err(ParseError::Param(format!(
            "theta_last = {} is outside [0, 1]",
            p.theta_last
        )));
    }
    if cfg.trials == Some(0) {
        return Err(ParseError::Param("trials must be at least 1".into()));
    }
    if cfg.grid2.is_some() && cfg.grid.is_none() {
        return Err(ParseError::Param("grid2 requires grid".into()));
    }
    Ok(())
}

fn apply_pair(cfg: &mut RunConfig, line: &str, origin: Origin) -> Result<(), ParseError> {
    let Some((key, value)) = line.split_once('=') else {
        return Err(ParseError::Syntax {
            origin,
            text: line.to_string(),
        });
    };
    let (key, value) = (key.trim(), value.trim());
    if key.is_empty() {
        return Err(ParseError::Syntax {
            origin,
            text: line.to_string(),
        });
    }
    let bad = |reason: &str| ParseError::Value {
        origin: origin.clone(),
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    };
    let float = || -> Result<f64, ParseError> {
        value
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| bad("expected a finite number"))
    };
    let count = || -> Result<usize, ParseError> {
        value.parse::<usize>().map_err(|_| bad("expected a nonnegative integer"))
    };
    let s = &mut cfg.system;
    let p = &mut cfg.params;
    match key {
        "tx_antennas" => s.tx_antennas = count()?,
        "rx_antennas" => s.rx_antennas = count()?,
        "users_per_cluster" => s.users_per_cluster = count()?,
        "bandwidth_hz" => s.bandwidth_hz = float()?,
        "noise_density_dbm_hz" => s.noise_density_dbm_hz = float()?,
        "pathloss_fixed_db" => s.pathloss_fixed_db = float()?,
        "pathloss_slope" => s.pathloss_slope = float()?,
        "tx_power_dbm" => s.tx_power_dbm = float()?,
        "cell_radius_min_km" => s.cell_radius_km.0 = float()?,
        "cell_radius_max_km" => s.cell_radius_km.1 = float()?,
        "rng_seed" => {
            s.rng_seed = value.parse().map_err(|_| bad("expected an unsigned 64-bit integer"))?
        }
        "trials" => cfg.trials = Some(count()?),
        "grid" => cfg.grid = Some(parse_grid(value).map_err(|r| bad(&r))?),
        "grid2" => cfg.grid2 = Some(parse_grid(value).map_err(|r| bad(&r))?),
        "schemes" => p.schemes = parse_names(value).ok_or_else(|| bad("expected a name list"))?,
        "omega1" => p.omega1 = float()?,
        "theta_last" => p.theta_last = float()?,
        "target_sinr_db" => p.target_sinr_db = float()?,
        "mixed_sinr_db" => {
            p.mixed_sinr_db = parse_list(value).map_err(|r| bad(&r))?;
            if p.mixed_sinr_db.is_empty() {
                return Err(bad("expected at least one value"));
            }
        }
        "exhaustive_cap" => p.exhaustive_cap = count()?,
        "policy" => p.policy = single_name(value).ok_or_else(|| bad("expected a name"))?,
        "oracle" => p.oracle = single_name(value).ok_or_else(|| bad("expected a name"))?,
        "requesting_axis" => {
            p.requesting_axis = match value {
                "tx_power" => SecondAxis::TxPowerDbm,
                "target_sinr" => SecondAxis::TargetSinrDb,
                _ => return Err(bad("expected `tx_power` or `target_sinr`")),
            }
        }
        _ => {
            return Err(ParseError::UnknownKey {
                origin,
                key: key.to_string(),
            })
        }
    }
    Ok(())
}

fn single_name(value: &str) -> Option<String> {
    let v = value.trim();
    (!v.is_empty() && !v.contains([',', ' '])).then(|| v.to_string())
}

fn parse_names(value: &str) -> Option<Vec<String>> {
    let names: Vec<String> = value.split(',').map(|s| s.trim().to_string()).collect();
    (!names.iter().any(String::is_empty)).then_some(names)
}

fn parse_list(value: &str) -> Result<Vec<f64>, String> {
    value
        .split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("`{t}` is not a finite number"))
        })
        .collect()
}

/// `start:step:stop` (inclusive) or a comma-separated list.
pub fn parse_grid(value: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = value.split(':').collect();
    match parts.len() {
        1 => {
            let v = parse_list(value)?;
            if v.is_empty() {
                return Err("empty grid".into());
            }
            Ok(v)
        }
        3 => {
            let nums = parse_list(&parts.join(","))?;
            let (start, step, stop) = (nums[0], nums[1], nums[2]);
            if step <= 0.0 {
                return Err("step must be positive".into());
            }
            if stop < start {
                return Err("stop must not be below start".into());
            }
            if (stop - start) / step > 1e7 {
                return Err("grid has more than 10^7 points".into());
            }
            Ok(range(start, step, stop))
        }
        _ => Err("expected `start:step:stop` or a comma-separated list".into()),
    }
}

/// Renders a list the way [`parse_grid`] reads it back.
pub fn format_list(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// Configuration file text that [`parse_config`] turns back into `cfg`.
pub fn render_config(cfg: &RunConfig) -> String {
    let s = &cfg.system;
    let p = &cfg.params;
    let mut lines = vec![
        format!("tx_antennas = {}", s.tx_antennas),
        format!("rx_antennas = {}", s.rx_antennas),
        format!("users_per_cluster = {}", s.users_per_cluster),
        format!("bandwidth_hz = {}", s.bandwidth_hz),
        format!("noise_density_dbm_hz = {}", s.noise_density_dbm_hz),
        format!("pathloss_fixed_db = {}", s.pathloss_fixed_db),
        format!("pathloss_slope = {}", s.pathloss_slope),
        format!("tx_power_dbm = {}", s.tx_power_dbm),
        format!("cell_radius_min_km = {}", s.cell_radius_km.0),
        format!("cell_radius_max_km = {}", s.cell_radius_km.1),
        format!("rng_seed = {}", s.rng_seed),
    ];
    if let Some(t) = cfg.trials {
        lines.push(format!("trials = {t}"));
    }
    if let Some(g) = &cfg.grid {
        lines.push(format!("grid = {}", format_list(g)));
    }
    if let Some(g) = &cfg.grid2 {
        lines.push(format!("grid2 = {}", format_list(g)));
    }
    lines.extend([
        format!("schemes = {}", p.schemes.join(",")),
        format!("omega1 = {}", p.omega1),
        format!("theta_last = {}", p.theta_last),
        format!("target_sinr_db = {}", p.target_sinr_db),
        format!("mixed_sinr_db = {}", format_list(&p.mixed_sinr_db)),
        format!("exhaustive_cap = {}", p.exhaustive_cap),
        format!("policy = {}", p.policy),
        format!("oracle = {}", p.oracle),
        format!(
            "requesting_axis = {}",
            match p.requesting_axis {
                SecondAxis::TxPowerDbm => "tx_power",
                SecondAxis::TargetSinrDb => "target_sinr",
            }
        ),
    ]);
    let mut out = lines.join("\n");
    out.push('\n');
    out
}
