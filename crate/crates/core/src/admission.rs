//! SINR-threshold user admission within one NOMA cluster.
//!
//! Users are served in descending gain order. A user placed after the
//! already admitted set `A` meets its threshold `gamma` exactly with
//!
//! ```text
//! Omega = gamma * sum_{i in A} Omega_i + gamma / g
//! ```
//!
//! where `g` is its SNR-scaled gain. A set is feasible when the cumulative
//! power stays within the cluster budget of 1.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::db_to_linear;
use crate::rates::{noma_user_rate, PowerSplit, RateError};

/// Default largest pool the exhaustive search accepts.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 12;

/// Sum rates closer than this count as equal in the exhaustive tie-break.
pub const RATE_TIE_TOLERANCE: f64 = 1e-12;

/// Arithmetic operations the sequential rule spends per examined user.
pub const OPS_PER_USER: u64 = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdmissionError {
    #[error("gains and thresholds differ in length ({gains} vs {thresholds})")]
    Length { gains: usize, thresholds: usize },
    #[error("gains must be nonnegative and sorted descending")]
    Unsorted,
    #[error("threshold {index} = {value} must be positive and finite")]
    Threshold { index: usize, value: f64 },
    #[error("requested prefix of {requested} users exceeds pool of {users}")]
    Prefix { requested: usize, users: usize },
    #[error("exhaustive search over {users} users exceeds the cap of {cap}")]
    CapExceeded { users: usize, cap: usize },
    #[error("unknown admission policy `{0}`")]
    UnknownPolicy(String),
    #[error(transparent)]
    Rate(#[from] RateError),
}

/// Users requesting admission: SNR-scaled gains sorted descending and the
/// linear SINR thresholds aligned with them.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissionInstance {
    gains: Vec<f64>,
    thresholds: Vec<f64>,
}

impl AdmissionInstance {
    pub fn new(gains: Vec<f64>, thresholds: Vec<f64>) -> Result<Self, AdmissionError> {
        if gains.len() != thresholds.len() {
            return Err(AdmissionError::Length {
                gains: gains.len(),
                thresholds: thresholds.len(),
            });
        }
        if gains.iter().any(|g| g.is_nan() || *g < 0.0) || gains.windows(2).any(|w| w[0] < w[1]) {
            return Err(AdmissionError::Unsorted);
        }
        if let Some((index, &value)) = thresholds
            .iter()
            .enumerate()
            .find(|(_, t)| !(t.is_finite() && **t > 0.0))
        {
            return Err(AdmissionError::Threshold { index, value });
        }
        Ok(Self { gains, thresholds })
    }

    /// Same as [`AdmissionInstance::new`] with thresholds given in dB.
    pub fn from_db(gains: Vec<f64>, thresholds_db: &[f64]) -> Result<Self, AdmissionError> {
        Self::new(gains, thresholds_db.iter().map(|&t| db_to_linear(t)).collect())
    }

    /// Every user gets the same threshold.
    pub fn with_common_threshold_db(gains: Vec<f64>, threshold_db: f64) -> Result<Self, AdmissionError> {
        let n = gains.len();
        Self::new(gains, vec![db_to_linear(threshold_db); n])
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn users(&self) -> usize {
        self.gains.len()
    }

    /// Minimum power that serves `user` at its threshold when the stronger
    /// admitted users already hold `allocated` of the budget.
    #[inline]
    pub fn required_power(&self, user: usize, allocated: f64) -> f64 {
        let t = self.thresholds[user];
        t * allocated + t / self.gains[user]
    }

    /// Same instance with every gain multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            gains: self.gains.iter().map(|g| g * factor).collect(),
            thresholds: self.thresholds.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissionResult {
    /// Admitted users as indices into the gain order, ascending.
    pub admitted: Vec<usize>,
    pub admitted_count: usize,
    /// One coefficient per requesting user, zero for rejected ones.
    pub power_coefficients: Vec<f64>,
    pub residual_power: f64,
    pub sum_rate_bps_hz: f64,
    /// SINR each user attains under `power_coefficients` (zero if rejected).
    pub achieved_sinrs: Vec<f64>,
    /// Arithmetic operations spent on power allocation.
    pub operations: u64,
}

impl AdmissionResult {
    fn from_allocation(
        instance: &AdmissionInstance,
        admitted: Vec<usize>,
        power_coefficients: Vec<f64>,
        operations: u64,
    ) -> Result<Self, AdmissionError> {
        let allocated: f64 = power_coefficients.iter().sum();
        let split = PowerSplit::new(power_coefficients.clone())?;
        let gains = instance.gains();
        let mut sum_rate = 0.0;
        let mut achieved_sinrs = Vec::with_capacity(gains.len());
        let mut stronger = 0.0;
        for (k, (&g, &omega)) in gains.iter().zip(&power_coefficients).enumerate() {
            achieved_sinrs.push(if omega > 0.0 {
                omega * g / (1.0 + g * stronger)
            } else {
                0.0
            });
            stronger += omega;
            if omega > 0.0 {
                sum_rate += noma_user_rate(gains, &split, k)?;
            }
        }
        Ok(Self {
            admitted_count: admitted.len(),
            admitted,
            power_coefficients,
            residual_power: 1.0 - allocated,
            sum_rate_bps_hz: sum_rate,
            achieved_sinrs,
            operations,
        })
    }
}

/// What to do with a user whose threshold cannot be met.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnShortfall {
    /// Reject it and every weaker user.
    Stop,
    /// Reject it and keep trying the weaker users.
    Skip,
}

struct Allocation {
    admitted: Vec<usize>,
    coefficients: Vec<f64>,
    operations: u64,
}

/// Walks `candidates` (ascending gain-order indices) and allocates each user
/// its threshold power while the budget lasts.
fn allocate(
    instance: &AdmissionInstance,
    candidates: impl IntoIterator<Item = usize>,
    on_shortfall: OnShortfall,
) -> Allocation {
    let mut coefficients = vec![0.0; instance.users()];
    let mut admitted = Vec::new();
    let mut allocated = 0.0;
    let mut operations = 0;
    for k in candidates {
        let need = instance.required_power(k, allocated);
        operations += OPS_PER_USER;
        if need > 1.0 - allocated {
            match on_shortfall {
                OnShortfall::Stop => break,
                OnShortfall::Skip => continue,
            }
        }
        coefficients[k] = need;
        allocated += need;
        admitted.push(k);
    }
    Allocation {
        admitted,
        coefficients,
        operations,
    }
}

/// Cumulative power of the sequential allocation after its first `users`
/// users, in closed form:
/// `sum_k (gamma_k / g_k) * prod_{i > k} (gamma_i + 1)`.
pub fn cumulative_power_closed_form(
    instance: &AdmissionInstance,
    users: usize,
) -> Result<f64, AdmissionError> {
    if users > instance.users() {
        return Err(AdmissionError::Prefix {
            requested: users,
            users: instance.users(),
        });
    }
    let t = instance.thresholds();
    let g = instance.gains();
    Ok((0..users)
        .map(|k| {
            let tail: f64 = t[k + 1..users].iter().map(|x| x + 1.0).product();
            t[k] / g[k] * tail
        })
        .sum())
}

/// Sufficient condition under which the sequential scheme admits as many
/// users as any subset: `gamma_k / g_k` is nondecreasing over the admitted
/// prefix and no admitted threshold exceeds a rejected one.
pub fn optimality_condition_holds(instance: &AdmissionInstance, admitted_count: usize) -> bool {
    let l = admitted_count.min(instance.users());
    let t = instance.thresholds();
    let g = instance.gains();
    let ratios_sorted = (1..l).all(|k| t[k - 1] / g[k - 1] <= t[k] / g[k]);
    let max_in = t[..l].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_out = t[l..].iter().copied().fold(f64::INFINITY, f64::min);
    ratios_sorted && max_in <= min_out
}

/// An admission policy selected by name at run time.
pub trait AdmissionPolicy: Send + Sync {
    fn name(&self) -> &str;
    fn admit(&self, instance: &AdmissionInstance) -> Result<AdmissionResult, AdmissionError>;
}

/// Sequential admission in gain order, stopping at the first user whose
/// threshold does not fit the remaining budget. Linear in the pool size.
#[derive(Debug, Clone, Copy, Default)]
pub struct Greedy;

pub fn greedy_admit(instance: &AdmissionInstance) -> Result<AdmissionResult, AdmissionError> {
    let a = allocate(instance, 0..instance.users(), OnShortfall::Stop);
    AdmissionResult::from_allocation(instance, a.admitted, a.coefficients, a.operations)
}

impl AdmissionPolicy for Greedy {
    fn name(&self) -> &str {
        "greedy"
    }

    fn admit(&self, instance: &AdmissionInstance) -> Result<AdmissionResult, AdmissionError> {
        greedy_admit(instance)
    }
}

/// Like [`Greedy`] but keeps trying weaker users after a shortfall.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedySkip;

impl AdmissionPolicy for GreedySkip {
    fn name(&self) -> &str {
        "greedy-skip"
    }

    fn admit(&self, instance: &AdmissionInstance) -> Result<AdmissionResult, AdmissionError> {
        let a = allocate(instance, 0..instance.users(), OnShortfall::Skip);
        AdmissionResult::from_allocation(instance, a.admitted, a.coefficients, a.operations)
    }
}

/// Enumerates every subset and keeps the largest feasible one, preferring
/// the higher sum rate and then the lexicographically smallest index set.
#[derive(Debug, Clone, Copy)]
pub struct Exhaustive {
    pub cap: usize,
}

impl Default for Exhaustive {
    fn default() -> Self {
        Self {
            cap: DEFAULT_EXHAUSTIVE_CAP,
        }
    }
}

pub fn exhaustive_admit(
    instance: &AdmissionInstance,
    cap: usize,
) -> Result<AdmissionResult, AdmissionError> {
    let n = instance.users();
    if n > cap {
        return Err(AdmissionError::CapExceeded { users: n, cap });
    }
    let mut best: Option<AdmissionResult> = None;
    let mut operations = 0;
    for mask in 0u64..(1u64 << n) {
        let members: Vec<usize> = (0..n).filter(|k| mask >> k & 1 == 1).collect();
        if let Some(b) = &best {
            if members.len() < b.admitted_count {
                continue;
            }
        }
        let a = allocate(instance, members.iter().copied(), OnShortfall::Stop);
        operations += a.operations;
        if a.admitted.len() != members.len() {
            continue;
        }
        let candidate = AdmissionResult::from_allocation(instance, a.admitted, a.coefficients, 0)?;
        let better = match &best {
            None => true,
            Some(b) => {
                candidate.admitted_count > b.admitted_count
                    || (candidate.admitted_count == b.admitted_count
                        && (candidate.sum_rate_bps_hz > b.sum_rate_bps_hz + RATE_TIE_TOLERANCE
                            || ((candidate.sum_rate_bps_hz - b.sum_rate_bps_hz).abs()
                                <= RATE_TIE_TOLERANCE
                                && candidate.admitted < b.admitted)))
            }
        };
        if better {
            best = Some(candidate);
        }
    }
    // the empty set is always feasible, so `best` is set
    let mut best = best.expect("empty subset is feasible");
    best.operations = operations;
    Ok(best)
}

impl AdmissionPolicy for Exhaustive {
    fn name(&self) -> &str {
        "exhaustive"
    }

    fn admit(&self, instance: &AdmissionInstance) -> Result<AdmissionResult, AdmissionError> {
        exhaustive_admit(instance, self.cap)
    }
}

/// Admission policies by name.
#[derive(Clone, Default)]
pub struct PolicyRegistry {
    policies: BTreeMap<String, Arc<dyn AdmissionPolicy>>,
}

impl PolicyRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// `greedy`, `greedy-skip` and `exhaustive` (with the given cap).
    pub fn with_defaults(exhaustive_cap: usize) -> Self {
        let mut r = Self::new();
        r.register(Arc::new(Greedy));
        r.register(Arc::new(GreedySkip));
        r.register(Arc::new(Exhaustive {
            cap: exhaustive_cap,
        }));
        r
    }

    pub fn register(&mut self, policy: Arc<dyn AdmissionPolicy>) {
        self.policies.insert(policy.name().to_string(), policy);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn AdmissionPolicy>, AdmissionError> {
        self.policies
            .get(name)
            .cloned()
            .ok_or_else(|| AdmissionError::UnknownPolicy(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.policies.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn inst(gains: &[f64], thresholds: &[f64]) -> AdmissionInstance {
        AdmissionInstance::new(gains.to_vec(), thresholds.to_vec()).unwrap()
    }

    #[test]
    fn two_users_fill_the_budget() {
        let r = greedy_admit(&inst(&[4.0, 2.0], &[1.0, 1.0])).unwrap();
        assert_eq!(r.admitted_count, 2);
        assert_relative_eq!(r.power_coefficients[0], 0.25);
        assert_relative_eq!(r.power_coefficients[1], 0.75);
        assert!(r.residual_power.abs() < 1e-15);
        for s in &r.achieved_sinrs {
            assert_relative_eq!(*s, 1.0, epsilon = 1e-12);
        }
        assert_relative_eq!(r.sum_rate_bps_hz, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn third_user_does_not_fit() {
        let r = greedy_admit(&inst(&[4.0, 2.0, 2.0], &[1.0, 1.0, 1.0])).unwrap();
        assert_eq!(r.admitted_count, 2);
        assert_eq!(r.power_coefficients[2], 0.0);
        assert_eq!(r.achieved_sinrs[2], 0.0);
    }

    #[test]
    fn unaffordable_first_user_admits_nobody() {
        let r = greedy_admit(&inst(&[0.5, 0.1], &[1.0, 1.0])).unwrap();
        assert_eq!(r.admitted_count, 0);
        assert_eq!(r.residual_power, 1.0);
        assert_eq!(r.sum_rate_bps_hz, 0.0);
    }

    #[test]
    fn stop_versus_skip() {
        // the third user's high threshold blocks the sequential rule
        let i = inst(&[100.0, 100.0, 100.0, 100.0], &[1.0, 1.0, 100.0, 1.0]);
        let stop = greedy_admit(&i).unwrap();
        let skip = GreedySkip.admit(&i).unwrap();
        let best = exhaustive_admit(&i, 12).unwrap();
        assert_eq!(stop.admitted, vec![0, 1]);
        assert_eq!(skip.admitted, vec![0, 1, 3]);
        assert_eq!(best.admitted_count, 3);
        // the optimality condition holds for the stopped allocation even
        // though a larger feasible set exists
        assert!(optimality_condition_holds(&i, stop.admitted_count));
    }

    #[test]
    fn closed_form_matches_recursion() {
        let i = inst(&[4.0, 2.0], &[1.0, 1.0]);
        assert_relative_eq!(cumulative_power_closed_form(&i, 1).unwrap(), 0.25);
        assert_relative_eq!(cumulative_power_closed_form(&i, 2).unwrap(), 1.0);
        assert_eq!(cumulative_power_closed_form(&i, 0).unwrap(), 0.0);
        assert!(cumulative_power_closed_form(&i, 3).is_err());
    }

    #[test]
    fn exhaustive_single_user() {
        let r = exhaustive_admit(&inst(&[8.0], &[2.0]), 12).unwrap();
        assert_eq!(r.admitted, vec![0]);
        assert_relative_eq!(r.power_coefficients[0], 0.25);
    }

    #[test]
    fn exhaustive_cap() {
        let i = AdmissionInstance::with_common_threshold_db(vec![1.0; 4], 0.0).unwrap();
        assert_eq!(
            exhaustive_admit(&i, 3),
            Err(AdmissionError::CapExceeded { users: 4, cap: 3 })
        );
    }

    #[test]
    fn exhaustive_prefers_lexicographically_smallest_on_ties() {
        // equal gains and thresholds: every pair has the same rate
        let i = inst(&[10.0, 10.0, 10.0], &[1.0, 1.0, 1.0]);
        let r = exhaustive_admit(&i, 12).unwrap();
        assert_eq!(r.admitted, greedy_admit(&i).unwrap().admitted);
    }

    #[test]
    fn optimality_condition_cases() {
        let equal = inst(&[9.0, 5.0, 2.0, 1.0], &[2.0; 4]);
        for l in 0..=4 {
            assert!(optimality_condition_holds(&equal, l));
        }
        // admitted thresholds above a rejected one
        let violated = inst(&[9.0, 8.0, 1.0], &[5.0, 4.0, 1.0]);
        assert!(!optimality_condition_holds(&violated, 2));
    }

    #[test]
    fn operation_count_is_linear() {
        let i = AdmissionInstance::with_common_threshold_db(vec![1e6; 10], 0.0).unwrap();
        let r = greedy_admit(&i).unwrap();
        assert!(r.operations <= OPS_PER_USER * 10);
    }

    #[test]
    fn instance_validation() {
        assert_eq!(
            AdmissionInstance::new(vec![1.0, 2.0], vec![1.0, 1.0]),
            Err(AdmissionError::Unsorted)
        );
        assert!(matches!(
            AdmissionInstance::new(vec![2.0, 1.0], vec![1.0, 0.0]),
            Err(AdmissionError::Threshold { index: 1, .. })
        ));
        assert!(matches!(
            AdmissionInstance::new(vec![2.0], vec![1.0, 1.0]),
            Err(AdmissionError::Length { .. })
        ));
    }

    #[test]
    fn registry_lookup() {
        let reg = PolicyRegistry::with_defaults(8);
        assert_eq!(reg.names().collect::<Vec<_>>(), ["exhaustive", "greedy", "greedy-skip"]);
        assert!(reg.get("random").is_err());
    }
}
