//! Physical and experiment parameters shared by every module.

use thiserror::Error;

use crate::db_to_linear;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("tx_antennas must be positive")]
    NoTxAntennas,
    #[error("rx_antennas ({rx}) must be at least tx_antennas ({tx})")]
    TooFewRxAntennas { tx: usize, rx: usize },
    #[error("users_per_cluster must be at least 2, got {0}")]
    TooFewUsers(usize),
    #[error("bandwidth_hz must be positive and finite, got {0}")]
    Bandwidth(f64),
    #[error("cell radius range must satisfy 0 < min < max, got ({0}, {1})")]
    CellRadius(f64, f64),
    #[error("{field} must be finite, got {value}")]
    NotFinite { field: &'static str, value: f64 },
}

/// All physical parameters of one simulated system.
///
/// Powers are in dBm, the noise density in dBm/Hz and distances in km. The
/// path loss at distance `d` km is `pathloss_fixed_db + pathloss_slope * log10(d)` dB.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    pub users_per_cluster: usize,
    pub bandwidth_hz: f64,
    pub noise_density_dbm_hz: f64,
    pub pathloss_fixed_db: f64,
    pub pathloss_slope: f64,
    pub tx_power_dbm: f64,
    pub cell_radius_km: (f64, f64),
    pub rng_seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            tx_antennas: 3,
            rx_antennas: 3,
            users_per_cluster: 8,
            bandwidth_hz: 10e6,
            noise_density_dbm_hz: -174.0,
            pathloss_fixed_db: 114.0,
            pathloss_slope: 38.0,
            tx_power_dbm: 35.0,
            cell_radius_km: (0.4, 2.0),
            rng_seed: 1,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.tx_antennas == 0 {
            return Err(ConfigError::NoTxAntennas);
        }
        if self.rx_antennas < self.tx_antennas {
            return Err(ConfigError::TooFewRxAntennas {
                tx: self.tx_antennas,
                rx: self.rx_antennas,
            });
        }
        if self.users_per_cluster < 2 {
            return Err(ConfigError::TooFewUsers(self.users_per_cluster));
        }
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return Err(ConfigError::Bandwidth(self.bandwidth_hz));
        }
        for (field, value) in [
            ("noise_density_dbm_hz", self.noise_density_dbm_hz),
            ("pathloss_fixed_db", self.pathloss_fixed_db),
            ("pathloss_slope", self.pathloss_slope),
            ("tx_power_dbm", self.tx_power_dbm),
        ] {
            if !value.is_finite() {
                return Err(ConfigError::NotFinite { field, value });
            }
        }
        let (lo, hi) = self.cell_radius_km;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
            return Err(ConfigError::CellRadius(lo, hi));
        }
        Ok(())
    }

    /// Noise power over the whole band, in dBm.
    pub fn noise_power_dbm(&self) -> f64 {
        self.noise_density_dbm_hz + 10.0 * self.bandwidth_hz.log10()
    }

    /// Transmit power over noise power, linear, before path loss.
    pub fn rho(&self) -> f64 {
        db_to_linear(self.tx_power_dbm - self.noise_power_dbm())
    }

    /// Path loss in dB at `distance_km`.
    pub fn pathloss_db(&self, distance_km: f64) -> f64 {
        self.pathloss_fixed_db + self.pathloss_slope * distance_km.log10()
    }

    pub fn with_users(&self, users: usize) -> Self {
        Self {
            users_per_cluster: users,
            ..self.clone()
        }
    }

    pub fn with_tx_power(&self, tx_power_dbm: f64) -> Self {
        Self {
            tx_power_dbm,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn defaults_are_valid() {
        SystemConfig::default().validate().unwrap();
    }

    #[test]
    fn noise_power_for_ten_megahertz() {
        let cfg = SystemConfig::default();
        assert_relative_eq!(cfg.noise_power_dbm(), -104.0, epsilon = 1e-12);
    }

    #[test]
    fn rho_at_35_dbm() {
        let cfg = SystemConfig::default().with_tx_power(35.0);
        assert_relative_eq!(cfg.rho(), 10f64.powf(13.9), max_relative = 1e-12);
    }

    #[test]
    fn rejects_fewer_rx_than_tx_antennas() {
        let cfg = SystemConfig {
            rx_antennas: 2,
            ..SystemConfig::default()
        };
        assert_eq!(
            cfg.validate(),
            Err(ConfigError::TooFewRxAntennas { tx: 3, rx: 2 })
        );
    }

    #[test]
    fn rejects_single_user_and_bad_radius() {
        assert!(matches!(
            SystemConfig::default().with_users(1).validate(),
            Err(ConfigError::TooFewUsers(1))
        ));
        let cfg = SystemConfig {
            cell_radius_km: (1.0, 1.0),
            ..SystemConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(ConfigError::CellRadius(..))));
    }

    #[test]
    fn pathloss_at_one_km_is_fixed_term() {
        let cfg = SystemConfig::default();
        assert_relative_eq!(cfg.pathloss_db(1.0), 114.0);
        assert_relative_eq!(cfg.pathloss_db(0.1), 114.0 - 38.0, epsilon = 1e-12);
    }
}
