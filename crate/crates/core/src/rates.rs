//! NOMA and OMA rates of a single cluster.
//!
//! Every function takes the cluster's effective gains already multiplied by
//! the transmit SNR (`rho * |v^H H p|^2`), sorted in descending order, so the
//! strongest user comes first and decodes everybody else's signal before its
//! own. User indices are zero-based.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

/// Slack allowed on the sum of a power split.
pub const SPLIT_SUM_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RateError {
    #[error("user index {index} out of range for {users} users")]
    UserIndex { index: usize, users: usize },
    #[error("{what} has {got} entries, expected {expected}")]
    Arity {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("coefficient {index} = {value} is outside [0, 1]")]
    Coefficient { index: usize, value: f64 },
    #[error("power split sums to {0}, more than 1")]
    PowerOverrun(f64),
    #[error("degrees-of-freedom split sums to {0}, not 1")]
    DofSum(f64),
    #[error("gain must be positive and finite, got {0}")]
    Gain(f64),
    #[error("all rates are zero")]
    AllZeroRates,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unknown multiple-access scheme `{0}`")]
    UnknownScheme(String),
}

fn check_unit_entries(values: &[f64]) -> Result<f64, RateError> {
    let mut sum = 0.0;
    for (index, &value) in values.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(RateError::Coefficient { index, value });
        }
        sum += value;
    }
    Ok(sum)
}

/// Fractions of the cluster power given to each user, in gain order.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSplit(Vec<f64>);

impl PowerSplit {
    pub fn new(coefficients: Vec<f64>) -> Result<Self, RateError> {
        let sum = check_unit_entries(&coefficients)?;
        if sum > 1.0 + SPLIT_SUM_SLACK {
            return Err(RateError::PowerOverrun(sum));
        }
        Ok(Self(coefficients))
    }

    /// Equal power for `users` users.
    pub fn uniform(users: usize) -> Self {
        Self(vec![1.0 / users as f64; users])
    }

    /// Two-user split `(omega1, 1 - omega1)`.
    pub fn two_user(omega1: f64) -> Result<Self, RateError> {
        Self::new(vec![omega1, 1.0 - omega1])
    }

    /// Three-user split where the second user takes the fraction `omega2_rel`
    /// of what the first leaves, and the third gets the rest.
    pub fn three_user(omega1: f64, omega2_rel: f64) -> Result<Self, RateError> {
        let rest = 1.0 - omega1;
        let second = omega2_rel * rest;
        Self::new(vec![omega1, second, (rest - second).max(0.0)])
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Fractions of the orthogonal resources given to each OMA user.
#[derive(Debug, Clone, PartialEq)]
pub struct DofSplit(Vec<f64>);

impl DofSplit {
    pub fn new(fractions: Vec<f64>) -> Result<Self, RateError> {
        let sum = check_unit_entries(&fractions)?;
        if (sum - 1.0).abs() > SPLIT_SUM_SLACK {
            return Err(RateError::DofSum(sum));
        }
        Ok(Self(fractions))
    }

    pub fn uniform(users: usize) -> Self {
        Self(vec![1.0 / users as f64; users])
    }

    pub fn fractions(&self) -> &[f64] {
        &self.0
    }
}

/// Per-user rates of one scheme on one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub per_user_bps_hz: Vec<f64>,
    pub sum_bps_hz: f64,
    pub jain_index: f64,
}

impl RateReport {
    pub fn from_rates(per_user_bps_hz: Vec<f64>) -> Result<Self, RateError> {
        let jain = jain_index(&per_user_bps_hz)?;
        Ok(Self {
            sum_bps_hz: per_user_bps_hz.iter().sum(),
            per_user_bps_hz,
            jain_index: jain,
        })
    }
}

fn check_arity(what: &'static str, got: usize, expected: usize) -> Result<(), RateError> {
    if got != expected {
        return Err(RateError::Arity {
            what,
            got,
            expected,
        });
    }
    Ok(())
}

/// NOMA rate of user `user` after cancelling every weaker user's signal.
///
/// The stronger users `0..user` remain as interference.
pub fn noma_user_rate(gains: &[f64], split: &PowerSplit, user: usize) -> Result<f64, RateError> {
    check_arity("power split", split.len(), gains.len())?;
    if user >= gains.len() {
        return Err(RateError::UserIndex {
            index: user,
            users: gains.len(),
        });
    }
    let omega = split.coefficients();
    let stronger: f64 = omega[..user].iter().sum();
    let g = gains[user];
    Ok((omega[user] * g / (1.0 + g * stronger)).ln_1p() / std::f64::consts::LN_2)
}

/// OMA rate `lambda * log2(1 + Omega * gain / lambda)`, zero when `lambda = 0`.
pub fn oma_user_rate(
    gains: &[f64],
    split: &PowerSplit,
    dof: &DofSplit,
    user: usize,
) -> Result<f64, RateError> {
    check_arity("power split", split.len(), gains.len())?;
    check_arity("dof split", dof.0.len(), gains.len())?;
    if user >= gains.len() {
        return Err(RateError::UserIndex {
            index: user,
            users: gains.len(),
        });
    }
    let lambda = dof.0[user];
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let k = split.0[user] * gains[user];
    Ok(lambda * (k / lambda).ln_1p() / std::f64::consts::LN_2)
}

pub fn oma_sum_rate(gains: &[f64], split: &PowerSplit, dof: &DofSplit) -> Result<f64, RateError> {
    (0..gains.len())
        .map(|l| oma_user_rate(gains, split, dof, l))
        .sum()
}

/// Degrees-of-freedom split proportional to `Omega_l * gain_l`, which attains
/// the OMA sum-rate bound. Falls back to a uniform split when every product
/// is zero.
pub fn oma_optimal_dof(gains: &[f64], split: &PowerSplit) -> Result<DofSplit, RateError> {
    check_arity("power split", split.len(), gains.len())?;
    let products: Vec<f64> = gains.iter().zip(&split.0).map(|(g, o)| g * o).collect();
    let total: f64 = products.iter().sum();
    if total <= 0.0 {
        return Ok(DofSplit::uniform(gains.len()));
    }
    let mut fractions: Vec<f64> = products.iter().map(|p| p / total).collect();
    // renormalize so the sum is 1 to the last bit the validator can see
    let s: f64 = fractions.iter().sum();
    fractions.iter_mut().for_each(|f| *f /= s);
    Ok(DofSplit(fractions))
}

/// `log2(1 + sum_l Omega_l * gain_l)`: the largest OMA sum rate over all
/// degrees-of-freedom splits, and a lower bound on the NOMA sum rate.
pub fn oma_sum_upper_bound(gains: &[f64], split: &PowerSplit) -> Result<f64, RateError> {
    check_arity("power split", split.len(), gains.len())?;
    let total: f64 = gains.iter().zip(&split.0).map(|(g, o)| g * o).sum();
    Ok(total.ln_1p() / std::f64::consts::LN_2)
}

pub fn noma_sum_rate(gains: &[f64], split: &PowerSplit) -> Result<f64, RateError> {
    (0..gains.len()).map(|l| noma_user_rate(gains, split, l)).sum()
}

/// Margins of the successive-cancellation condition for every pair `l < k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SicReport {
    /// `(l, k, rate of user k decoded at l minus rate of user k at k)`.
    pub margins: Vec<(usize, usize, f64)>,
    pub feasible: bool,
}

impl SicReport {
    pub fn worst_margin(&self) -> f64 {
        self.margins
            .iter()
            .map(|m| m.2)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Checks that every user can decode the signals of all weaker users at
/// least as well as those users decode their own.
pub fn sic_feasibility_check(gains: &[f64], split: &PowerSplit) -> Result<SicReport, RateError> {
    check_arity("power split", split.len(), gains.len())?;
    let omega = &split.0;
    let rate_at = |receiver_gain: f64, k: usize| {
        let stronger: f64 = omega[..k].iter().sum();
        (omega[k] * receiver_gain / (1.0 + receiver_gain * stronger)).ln_1p()
            / std::f64::consts::LN_2
    };
    let mut margins = Vec::new();
    for l in 0..gains.len() {
        for k in l + 1..gains.len() {
            margins.push((l, k, rate_at(gains[l], k) - rate_at(gains[k], k)));
        }
    }
    let feasible = margins.iter().all(|m| m.2 >= -1e-12);
    Ok(SicReport { margins, feasible })
}

/// Power fraction of the stronger of two users that maximizes the NOMA over
/// OMA sum-rate gap. Depends only on the stronger user's SNR-scaled gain.
pub fn two_user_gap_maximizer(strong_gain: f64) -> Result<f64, RateError> {
    if !(strong_gain.is_finite() && strong_gain > 0.0) {
        return Err(RateError::Gain(strong_gain));
    }
    // (sqrt(x + 1) - 1) / x without cancellation for small x
    Ok(1.0 / ((strong_gain + 1.0).sqrt() + 1.0))
}

/// NOMA sum rate minus the OMA bound for two users with split `(omega1, 1 - omega1)`.
pub fn two_user_gap(gains: &[f64], omega1: f64) -> Result<f64, RateError> {
    check_arity("gains", gains.len(), 2)?;
    if !(0.0..=1.0).contains(&omega1) {
        return Err(RateError::Coefficient {
            index: 0,
            value: omega1,
        });
    }
    let (x1, x2) = (gains[0], gains[1]);
    let omega2 = 1.0 - omega1;
    // numerator minus denominator of the rate ratio, expanded by hand, so
    // tiny gaps at low SNR keep their relative precision
    let den = (1.0 + omega1 * x2) * (1.0 + omega1 * x1 + omega2 * x2);
    let excess = omega1 * omega2 * x2 * (x1 - x2);
    Ok((excess / den).ln_1p() / std::f64::consts::LN_2)
}

/// Sum-rate change when a cluster grows from `l` to `l + 1` users.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSizeDelta {
    /// `S(l + 1) - S(l)` from the two sum rates.
    pub direct: f64,
    /// `log2(lambda1 * lambda2 * lambda3)`.
    pub factored: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

/// Split for `l + 1` users that scales the `l`-user split by `1 - last` and
/// gives `last` to the new, weakest user.
pub fn dominated_split(split_l: &PowerSplit, last: f64) -> Result<PowerSplit, RateError> {
    if !(0.0..=1.0).contains(&last) {
        return Err(RateError::Coefficient {
            index: split_l.len(),
            value: last,
        });
    }
    let mut theta: Vec<f64> = split_l.0.iter().map(|o| o * (1.0 - last)).collect();
    theta.push(last);
    PowerSplit::new(theta)
}

/// Compares the NOMA sum rate of the `l` strongest users under `split_l`
/// with that of all `l + 1` users under `split_lplus1`.
///
/// Both splits must use the full power and the larger cluster may not give
/// any of the first `l` users more power than the smaller one did. The
/// difference is returned both directly and through its three-factor
/// product form.
pub fn cluster_size_rate_delta(
    gains: &[f64],
    split_l: &PowerSplit,
    split_lplus1: &PowerSplit,
) -> Result<ClusterSizeDelta, RateError> {
    let l = split_l.len();
    if l == 0 {
        return Err(RateError::Precondition("need at least one user".into()));
    }
    check_arity("gains", gains.len(), l + 1)?;
    check_arity("larger split", split_lplus1.len(), l + 1)?;
    if gains.windows(2).any(|w| w[0] < w[1]) {
        return Err(RateError::Precondition("gains must be sorted descending".into()));
    }
    for (name, s) in [("smaller", split_l), ("larger", split_lplus1)] {
        if (s.total() - 1.0).abs() > 1e-9 {
            return Err(RateError::Precondition(format!(
                "{name} split sums to {}, not 1",
                s.total()
            )));
        }
    }
    let omega = split_l.coefficients();
    let theta = split_lplus1.coefficients();
    if let Some(k) = (0..l).find(|&k| theta[k] > omega[k] + 1e-12) {
        return Err(RateError::Precondition(format!(
            "coefficient {k} grows from {} to {}",
            omega[k], theta[k]
        )));
    }

    let direct = noma_sum_rate(gains, split_lplus1)? - noma_sum_rate(&gains[..l], split_l)?;

    let prefix = |c: &[f64], k: usize| c[..k].iter().sum::<f64>();
    let x = gains;
    let (lambda1, lambda2, lambda3);
    if l == 1 {
        // with one user the first factor coincides with the leading term of the last
        lambda1 = 1.0;
        lambda2 = 1.0;
    } else {
        lambda1 = (1.0 + theta[0] * x[0]) / (1.0 + omega[0] * x[0]) * (1.0 + omega[0] * x[1])
            / (1.0 + theta[0] * x[1]);
        // zero-based k runs over one-based positions 2..=l-1
        lambda2 = (1..l - 1)
            .map(|k| {
                let t = prefix(theta, k + 1);
                let o = prefix(omega, k + 1);
                (1.0 + t * x[k]) / (1.0 + o * x[k]) * (1.0 + o * x[k + 1]) / (1.0 + t * x[k + 1])
            })
            .product();
    }
    {
        let t = prefix(theta, l);
        let o = prefix(omega, l);
        lambda3 = (1.0 + t * x[l - 1]) / (1.0 + o * x[l - 1]) * (1.0 + x[l]) / (1.0 + t * x[l]);
    }
    let factored = (lambda1 * lambda2 * lambda3).log2();
    Ok(ClusterSizeDelta {
        direct,
        factored,
        lambda1,
        lambda2,
        lambda3,
    })
}

/// Jain's fairness index `(sum r)^2 / (n * sum r^2)` over all `n` entries.
pub fn jain_index(rates: &[f64]) -> Result<f64, RateError> {
    let sum: f64 = rates.iter().sum();
    let sq: f64 = rates.iter().map(|r| r * r).sum();
    if rates.is_empty() || sq <= 0.0 {
        return Err(RateError::AllZeroRates);
    }
    Ok(sum * sum / (rates.len() as f64 * sq))
}

/// A multiple-access scheme that turns sorted gains and a power split into
/// per-user rates.
pub trait MultipleAccess: Send + Sync {
    fn name(&self) -> &str;

    fn user_rates(&self, gains: &[f64], split: &PowerSplit) -> Result<Vec<f64>, RateError>;

    fn sum_rate(&self, gains: &[f64], split: &PowerSplit) -> Result<f64, RateError> {
        Ok(self.user_rates(gains, split)?.iter().sum())
    }

    fn report(&self, gains: &[f64], split: &PowerSplit) -> Result<RateReport, RateError> {
        RateReport::from_rates(self.user_rates(gains, split)?)
    }
}

/// Superposition coding with successive interference cancellation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Noma;

impl MultipleAccess for Noma {
    fn name(&self) -> &str {
        "noma"
    }

    fn user_rates(&self, gains: &[f64], split: &PowerSplit) -> Result<Vec<f64>, RateError> {
        (0..gains.len())
            .map(|l| noma_user_rate(gains, split, l))
            .collect()
    }
}

/// How an OMA scheme divides the orthogonal resources.
#[derive(Debug, Clone, PartialEq)]
pub enum DofRule {
    /// Proportional to `Omega_l * gain_l`.
    Optimal,
    Uniform,
    Fixed(DofSplit),
}

/// Orthogonal access with the same power split as NOMA.
#[derive(Debug, Clone)]
pub struct Oma {
    name: String,
    rule: DofRule,
}

impl Oma {
    pub fn optimal() -> Self {
        Self {
            name: "oma".into(),
            rule: DofRule::Optimal,
        }
    }

    pub fn uniform() -> Self {
        Self {
            name: "oma-uniform".into(),
            rule: DofRule::Uniform,
        }
    }

    pub fn fixed(name: impl Into<String>, dof: DofSplit) -> Self {
        Self {
            name: name.into(),
            rule: DofRule::Fixed(dof),
        }
    }

    pub fn dof_for(&self, gains: &[f64], split: &PowerSplit) -> Result<DofSplit, RateError> {
        match &self.rule {
            DofRule::Optimal => oma_optimal_dof(gains, split),
            DofRule::Uniform => Ok(DofSplit::uniform(gains.len())),
            DofRule::Fixed(d) => Ok(d.clone()),
        }
    }
}

impl MultipleAccess for Oma {
    fn name(&self) -> &str {
        &self.name
    }

    fn user_rates(&self, gains: &[f64], split: &PowerSplit) -> Result<Vec<f64>, RateError> {
        let dof = self.dof_for(gains, split)?;
        (0..gains.len())
            .map(|l| oma_user_rate(gains, split, &dof, l))
            .collect()
    }
}

/// Multiple-access schemes by name.
#[derive(Clone, Default)]
pub struct SchemeRegistry {
    schemes: BTreeMap<String, Arc<dyn MultipleAccess>>,
}

impl SchemeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// `noma`, `oma` (optimal resource split) and `oma-uniform`.
    pub fn with_defaults() -> Self {
        let mut r = Self::new();
        r.register(Arc::new(Noma));
        r.register(Arc::new(Oma::optimal()));
        r.register(Arc::new(Oma::uniform()));
        r
    }

    pub fn register(&mut self, scheme: Arc<dyn MultipleAccess>) {
        self.schemes.insert(scheme.name().to_string(), scheme);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn MultipleAccess>, RateError> {
        self.schemes
            .get(name)
            .cloned()
            .ok_or_else(|| RateError::UnknownScheme(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.schemes.keys().map(String::as_str)
    }
}
