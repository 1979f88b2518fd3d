//! Channel realizations, zero-forcing detection vectors and effective gains.
//!
//! Every user of cluster `m` sees an `N x M` channel matrix. With the
//! identity precoder the `k`-th precoder column is the `k`-th unit vector, so
//! a detection vector that is orthogonal to every column `k != m` of the
//! user's channel removes all inter-cluster interference. Among those vectors
//! the one aligned with the projection of the own column maximizes the
//! effective gain `|v^H H p_m|^2`.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::config::{ConfigError, SystemConfig};
use crate::seed;

pub type C64 = Complex<f64>;

/// Singular values below this fraction of the largest one count as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cluster index {index} out of range for {clusters} clusters")]
    ClusterIndex { index: usize, clusters: usize },
    #[error("channel is {rows}x{cols}; need at least as many rows as columns")]
    Shape { rows: usize, cols: usize },
    #[error("interference columns span the whole receive space")]
    TrivialNullSpace,
    #[error("own column has no component outside the interference span")]
    DegenerateChannel,
}

/// Unit-norm receive combiner for the column `own` of `channel`.
///
/// The returned vector is orthogonal to every other column and maximizes
/// `|v^H h_own|` among such vectors. Its global phase is fixed so that
/// `v^H h_own` is real and positive.
pub fn compute_detection_vector(
    channel: &DMatrix<C64>,
    own: usize,
) -> Result<DVector<C64>, ChannelError> {
    let (rows, cols) = channel.shape();
    if rows < cols {
        return Err(ChannelError::Shape { rows, cols });
    }
    if own >= cols {
        return Err(ChannelError::ClusterIndex {
            index: own,
            clusters: cols,
        });
    }
    let own_col: DVector<C64> = channel.column(own).into_owned();

    let basis = interference_basis(channel, own);
    if basis.len() >= rows {
        return Err(ChannelError::TrivialNullSpace);
    }

    // Two projection passes keep the residual leakage at rounding level even
    // when the interference columns are poorly conditioned.
    let mut projected = own_col.clone();
    for _ in 0..2 {
        for u in &basis {
            let coeff = u.dotc(&projected);
            projected -= u * coeff;
        }
    }

    let norm = projected.norm();
    let own_norm = own_col.norm();
    if own_norm == 0.0 || norm <= RANK_TOLERANCE * own_norm {
        return Err(ChannelError::DegenerateChannel);
    }
    Ok(projected.unscale(norm))
}

/// Orthonormal basis of the span of all columns except `own`.
fn interference_basis(channel: &DMatrix<C64>, own: usize) -> Vec<DVector<C64>> {
    let cols = channel.ncols();
    if cols <= 1 {
        return Vec::new();
    }
    let keep: Vec<usize> = (0..cols).filter(|&k| k != own).collect();
    let interference = channel.select_columns(&keep);
    let svd = interference.svd(true, false);
    let u = svd.u.expect("left singular vectors were requested");
    let largest = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if largest == 0.0 {
        return Vec::new();
    }
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > RANK_TOLERANCE * largest)
        .map(|(j, _)| u.column(j).into_owned())
        .collect()
}

/// One channel draw for the users of a single cluster.
///
/// `channels`, `detection_vectors`, `distances_km` and `draw_gains` are in
/// draw order. `effective_gains` holds the same gains sorted in descending
/// order and `order[i]` is the draw index of the user at sorted position `i`.
#[derive(Debug, Clone)]
pub struct ClusterRealization {
    pub cluster_index: usize,
    pub channels: Vec<DMatrix<C64>>,
    pub precoder: DMatrix<C64>,
    pub detection_vectors: Vec<DVector<C64>>,
    pub distances_km: Vec<f64>,
    pub draw_gains: Vec<f64>,
    pub order: Vec<usize>,
    pub effective_gains: Vec<f64>,
    pub rho: f64,
}

impl ClusterRealization {
    pub fn users(&self) -> usize {
        self.channels.len()
    }

    /// Sorted gains multiplied by the transmit SNR.
    pub fn scaled_gains(&self) -> Vec<f64> {
        self.effective_gains.iter().map(|g| g * self.rho).collect()
    }

    /// Sorted, SNR-scaled gains of the first `n` drawn users only.
    ///
    /// Sweeps over the number of requesting users use this so that a larger
    /// pool always contains the smaller one.
    pub fn prefix_scaled_gains(&self, n: usize) -> Vec<f64> {
        let mut g: Vec<f64> = self.draw_gains[..n.min(self.users())]
            .iter()
            .map(|g| g * self.rho)
            .collect();
        g.sort_by(|a, b| b.total_cmp(a));
        g
    }

    /// `|v^H H p_k|` for the user at draw index `user` and precoder column `k`.
    pub fn response(&self, user: usize, column: usize) -> f64 {
        let hp = &self.channels[user] * self.precoder.column(column);
        self.detection_vectors[user].dotc(&hp).norm()
    }

    /// Largest `|v^H H p_k|` over the precoder columns `k` of other clusters.
    pub fn leakage(&self, user: usize) -> f64 {
        (0..self.precoder.ncols())
            .filter(|&k| k != self.cluster_index)
            .map(|k| self.response(user, k))
            .fold(0.0, f64::max)
    }
}

/// Sorts gains in descending order, ties broken by the original index.
pub fn descending_order(gains: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..gains.len()).collect();
    idx.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]).then(a.cmp(&b)));
    idx
}

/// Draws the channels of every user in cluster `cluster_index`.
///
/// Users are drawn one after another, each taking its distance and then its
/// channel entries from the generator, so the first `n` users of a larger
/// draw coincide with a draw of `n` users from the same seed.
pub fn draw_cluster(
    config: &SystemConfig,
    cluster_index: usize,
    trial_seed: u64,
) -> Result<ClusterRealization, ChannelError> {
    config.validate()?;
    let m = config.tx_antennas;
    let n = config.rx_antennas;
    if cluster_index >= m {
        return Err(ChannelError::ClusterIndex {
            index: cluster_index,
            clusters: m,
        });
    }
    let mut rng = seed::rng_for(trial_seed, cluster_index as u64);
    let (lo, hi) = config.cell_radius_km;
    let users = config.users_per_cluster;

    let mut channels = Vec::with_capacity(users);
    let mut distances_km = Vec::with_capacity(users);
    for _ in 0..users {
        let d = rng.random_range(lo..hi);
        let amplitude = 10f64.powf(-config.pathloss_db(d) / 20.0) * std::f64::consts::FRAC_1_SQRT_2;
        let h = DMatrix::from_fn(n, m, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re * amplitude, im * amplitude)
        });
        distances_km.push(d);
        channels.push(h);
    }

    let precoder = DMatrix::<C64>::identity(m, m);
    let mut detection_vectors = Vec::with_capacity(users);
    let mut draw_gains = Vec::with_capacity(users);
    for h in &channels {
        let v = compute_detection_vector(h, cluster_index)?;
        let hp = h * precoder.column(cluster_index);
        draw_gains.push(v.dotc(&hp).norm_sqr());
        detection_vectors.push(v);
    }
    let order = descending_order(&draw_gains);
    let effective_gains = order.iter().map(|&i| draw_gains[i]).collect();

    Ok(ClusterRealization {
        cluster_index,
        channels,
        precoder,
        detection_vectors,
        distances_km,
        draw_gains,
        order,
        effective_gains,
        rho: config.rho(),
    })
}
