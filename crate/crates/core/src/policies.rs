//! Channel-selection policies behind a single select/observe interface.
//!
//! Index policies (UCB, CUCB) use `mu_hat + sqrt(2 ln t / n)`. Sampling
//! policies draw `theta_k` from a Beta(S+1, F+1) or Normal(mu_hat, beta/n)
//! posterior. The correlated variants restrict the argmax to the empirically
//! competitive set plus the empirical leader, built from pseudo-reward
//! estimates. Any policy can be wrapped so that it exploits the empirical
//! leader whenever the current AoI exceeds `c * ln(t + 1)`.
//!
//! Arms are zero-based. Every argmax breaks ties toward the lowest index.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{PseudoRewardTable, MAX_ARMS};

pub const DEFAULT_BETA: f64 = 1.5;
pub const DEFAULT_AOI_THRESHOLD_C: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Ucb,
    TsBeta,
    TsGauss,
    Cucb,
    CtsBeta,
    CtsGauss,
    /// Always plays the given arm. With the optimal arm this is the oracle.
    Fixed(usize),
}

impl PolicyKind {
    /// The six learning policies, in a stable order.
    pub const LEARNING: [PolicyKind; 6] = [
        PolicyKind::Ucb,
        PolicyKind::TsBeta,
        PolicyKind::TsGauss,
        PolicyKind::Cucb,
        PolicyKind::CtsBeta,
        PolicyKind::CtsGauss,
    ];

    pub fn is_correlated(self) -> bool {
        matches!(self, PolicyKind::Cucb | PolicyKind::CtsBeta | PolicyKind::CtsGauss)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyKind::Ucb => f.write_str("ucb"),
            PolicyKind::TsBeta => f.write_str("ts_beta"),
            PolicyKind::TsGauss => f.write_str("ts_gauss"),
            PolicyKind::Cucb => f.write_str("cucb"),
            PolicyKind::CtsBeta => f.write_str("cts_beta"),
            PolicyKind::CtsGauss => f.write_str("cts_gauss"),
            PolicyKind::Fixed(arm) => write!(f, "fixed:{}", arm + 1),
        }
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ucb" => PolicyKind::Ucb,
            "ts_beta" => PolicyKind::TsBeta,
            "ts_gauss" => PolicyKind::TsGauss,
            "cucb" => PolicyKind::Cucb,
            "cts_beta" => PolicyKind::CtsBeta,
            "cts_gauss" => PolicyKind::CtsGauss,
            other => {
                let arm = other
                    .strip_prefix("fixed:")
                    .and_then(|a| a.parse::<usize>().ok())
                    .filter(|&a| a >= 1)
                    .ok_or_else(|| Error::InvalidConfig(format!("unknown policy {other:?}")))?;
                PolicyKind::Fixed(arm - 1)
            }
        })
    }
}

impl TryFrom<String> for PolicyKind {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        value.parse()
    }
}

impl From<PolicyKind> for String {
    fn from(kind: PolicyKind) -> String {
        kind.to_string()
    }
}

impl Serialize for PolicyKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PolicyKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub policy: PolicyKind,
    #[serde(default)]
    pub aoi_aware: bool,
    /// Variance scale of the Gaussian posterior.
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_threshold_c")]
    pub aoi_threshold_c: f64,
}

fn default_beta() -> f64 {
    DEFAULT_BETA
}

fn default_threshold_c() -> f64 {
    DEFAULT_AOI_THRESHOLD_C
}

impl PolicyConfig {
    pub fn new(policy: PolicyKind) -> Self {
        Self {
            policy,
            aoi_aware: false,
            beta: DEFAULT_BETA,
            aoi_threshold_c: DEFAULT_AOI_THRESHOLD_C,
        }
    }

    pub fn aoi_aware(mut self) -> Self {
        self.aoi_aware = true;
        self
    }

    /// Parses `name` or `name_aoi`, e.g. `cts_beta_aoi`.
    pub fn parse_label(label: &str) -> Result<Self> {
        match label.strip_suffix("_aoi") {
            Some(base) => Ok(Self::new(base.parse()?).aoi_aware()),
            None => Ok(Self::new(label.parse()?)),
        }
    }

    /// Name used in reports and for seeding the policy's random stream.
    pub fn label(&self) -> String {
        if self.aoi_aware {
            format!("{}_aoi", self.policy)
        } else {
            self.policy.to_string()
        }
    }

    pub fn validate(&self, arms: usize) -> Result<()> {
        if !(self.beta > 1.0) {
            return Err(Error::InvalidConfig(format!("beta must exceed 1, got {}", self.beta)));
        }
        if self.aoi_threshold_c.is_nan() || self.aoi_threshold_c < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "aoi_threshold_c must be non-negative, got {}",
                self.aoi_threshold_c
            )));
        }
        if let PolicyKind::Fixed(arm) = self.policy {
            if arm >= arms {
                return Err(Error::ArmOutOfRange { arm, arms });
            }
        }
        Ok(())
    }
}

/// Set of arm indices, stored as a bit mask.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ArmSet(u64);

impl ArmSet {
    pub fn empty() -> Self {
        ArmSet(0)
    }

    pub fn all(arms: usize) -> Self {
        debug_assert!(arms <= MAX_ARMS);
        if arms == 64 {
            ArmSet(u64::MAX)
        } else {
            ArmSet((1u64 << arms) - 1)
        }
    }

    pub fn singleton(arm: usize) -> Self {
        ArmSet(1u64 << arm)
    }

    pub fn insert(&mut self, arm: usize) {
        self.0 |= 1u64 << arm;
    }

    pub fn contains(self, arm: usize) -> bool {
        self.0 & (1u64 << arm) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn union(self, other: ArmSet) -> ArmSet {
        ArmSet(self.0 | other.0)
    }

    /// Ascending arm indices.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let arm = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(arm)
        })
    }

    fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }
}

impl FromIterator<usize> for ArmSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = ArmSet::empty();
        for arm in iter {
            set.insert(arm);
        }
        set
    }
}

/// Per-arm learning state. Pseudo-reward accumulators are kept on the pulled
/// arm: `pseudo_sum[l]` adds `s_{l,k}(r)` over every pull of this arm `k`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ArmStatistics {
    pub pulls: u64,
    pub successes: u64,
    pub failures: u64,
    pub pseudo_sum: Vec<u64>,
    /// Number of pulls whose pseudo-reward for `l` was reachable.
    pub pseudo_count: Vec<u64>,
}

impl ArmStatistics {
    pub fn new(arms: usize) -> Self {
        Self {
            pseudo_sum: vec![0; arms],
            pseudo_count: vec![0; arms],
            ..Default::default()
        }
    }

    /// Empirical mean; zero before the first pull.
    #[inline]
    pub fn mu_hat(&self) -> f64 {
        if self.pulls == 0 {
            0.0
        } else {
            self.successes as f64 / self.pulls as f64
        }
    }

    /// `phi_hat_{l,k}` for this arm `k`, if any reachable pseudo-reward has
    /// been recorded.
    #[inline]
    pub fn pseudo_estimate(&self, l: usize) -> Option<f64> {
        let count = self.pseudo_count[l];
        (count > 0).then(|| self.pseudo_sum[l] as f64 / count as f64)
    }
}

#[derive(Debug, Clone)]
pub struct PolicyState {
    config: PolicyConfig,
    /// Current slot, 1-based.
    t: u64,
    arms: Vec<ArmStatistics>,
    table: Arc<PseudoRewardTable>,
    rng: ChaCha8Rng,
}

impl PolicyState {
    pub fn new(config: PolicyConfig, table: Arc<PseudoRewardTable>, rng: ChaCha8Rng) -> Result<Self> {
        let k = table.num_arms();
        if !(2..=MAX_ARMS).contains(&k) {
            return Err(Error::InvalidConfig(format!("unsupported arm count {k}")));
        }
        config.validate(k)?;
        Ok(Self {
            config,
            t: 1,
            arms: (0..k).map(|_| ArmStatistics::new(k)).collect(),
            table,
            rng,
        })
    }

    pub fn config(&self) -> &PolicyConfig {
        &self.config
    }

    pub fn slot(&self) -> u64 {
        self.t
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn arms(&self) -> &[ArmStatistics] {
        &self.arms
    }

    /// Direct access for seeding statistics in diagnostics and tests.
    pub fn arms_mut(&mut self) -> &mut [ArmStatistics] {
        &mut self.arms
    }

    /// Overrides the slot counter, e.g. after seeding statistics.
    pub fn set_slot(&mut self, t: u64) {
        self.t = t.max(1);
    }

    pub fn pulls(&self) -> Vec<u64> {
        self.arms.iter().map(|a| a.pulls).collect()
    }

    /// `phi_hat_{k,l}`: pseudo-reward estimate of arm `k` from pulls of `l`.
    pub fn pseudo_estimate(&self, k: usize, l: usize) -> Option<f64> {
        if k == l {
            let arm = &self.arms[l];
            return (arm.pulls > 0).then(|| arm.mu_hat());
        }
        self.arms[l].pseudo_estimate(k)
    }

    /// Arms pulled at least `(t - 1) / K` times (and at least once).
    pub fn significant_set(&self) -> ArmSet {
        let k = self.arms.len() as u64;
        let needed = self.t - 1;
        self.arms
            .iter()
            .enumerate()
            .filter(|(_, a)| a.pulls >= 1 && a.pulls * k >= needed)
            .map(|(i, _)| i)
            .collect()
    }

    /// Empirical leader within `significant` and the empirically competitive
    /// set: arms whose pseudo-reward estimate with respect to every other
    /// significant arm reaches the leader's empirical mean.
    ///
    /// An arm is not compared against itself, and estimates with no
    /// reachable history are skipped.
    pub fn competitive_set(&self, significant: ArmSet) -> (ArmSet, usize) {
        let leader = argmax(significant, |k| self.arms[k].mu_hat())
            .expect("significant set must be non-empty");
        let target = self.arms[leader].mu_hat();
        let mut competitive = ArmSet::empty();
        for k in 0..self.arms.len() {
            let keep = significant
                .iter()
                .filter(|&l| l != k)
                .filter_map(|l| self.arms[l].pseudo_estimate(k))
                .all(|phi| phi >= target);
            if keep {
                competitive.insert(k);
            }
        }
        (competitive, leader)
    }

    /// Arms a correlated policy may play this slot. Falls back to every arm
    /// while no arm is significant.
    pub fn candidate_set(&self) -> ArmSet {
        let significant = self.significant_set();
        if significant.is_empty() {
            return ArmSet::all(self.arms.len());
        }
        let (competitive, leader) = self.competitive_set(significant);
        competitive.union(ArmSet::singleton(leader))
    }

    /// Arm with the highest empirical mean.
    pub fn empirical_leader(&self) -> usize {
        argmax(ArmSet::all(self.arms.len()), |k| self.arms[k].mu_hat()).expect("at least two arms")
    }

    /// AoI level above which the AoI-aware wrapper exploits.
    pub fn aoi_threshold(&self) -> f64 {
        self.config.aoi_threshold_c * ((self.t + 1) as f64).ln()
    }

    /// Chooses the arm for the current slot given the current AoI.
    pub fn select(&mut self, aoi: u64) -> usize {
        if self.config.aoi_aware && aoi as f64 > self.aoi_threshold() {
            return self.empirical_leader();
        }
        let all = ArmSet::all(self.arms.len());
        match self.config.policy {
            PolicyKind::Fixed(arm) => arm,
            PolicyKind::Ucb => self.first_unplayed().unwrap_or_else(|| self.ucb_argmax(all)),
            PolicyKind::Cucb => self.first_unplayed().unwrap_or_else(|| {
                let candidates = self.candidate_set();
                self.ucb_argmax(candidates)
            }),
            PolicyKind::TsBeta => self.beta_argmax(all),
            PolicyKind::CtsBeta => {
                let candidates = self.candidate_set();
                self.beta_argmax(candidates)
            }
            PolicyKind::TsGauss => self.first_unplayed().unwrap_or_else(|| self.gauss_argmax(all)),
            PolicyKind::CtsGauss => self.first_unplayed().unwrap_or_else(|| {
                let candidates = self.candidate_set();
                self.gauss_argmax(candidates)
            }),
        }
    }

    /// Records reward `reward` for `arm` and advances the slot.
    pub fn observe(&mut self, arm: usize, reward: u8) -> Result<()> {
        if reward > 1 {
            return Err(Error::NonBinaryReward(reward));
        }
        let k = self.arms.len();
        if arm >= k {
            return Err(Error::ArmOutOfRange { arm, arms: k });
        }
        let stats = &mut self.arms[arm];
        stats.pulls += 1;
        if reward == 1 {
            stats.successes += 1;
        } else {
            stats.failures += 1;
        }
        if self.config.policy.is_correlated() {
            for l in (0..k).filter(|&l| l != arm) {
                if let Some(s) = self.table.get(l, arm, reward).value() {
                    stats.pseudo_sum[l] += u64::from(s);
                    stats.pseudo_count[l] += 1;
                }
            }
        }
        self.t += 1;
        Ok(())
    }

    fn first_unplayed(&self) -> Option<usize> {
        self.arms.iter().position(|a| a.pulls == 0)
    }

    fn ucb_argmax(&self, candidates: ArmSet) -> usize {
        if candidates.len() == 1 {
            return candidates.first().expect("non-empty");
        }
        let log_t = (self.t as f64).ln();
        argmax(candidates, |k| {
            let a = &self.arms[k];
            if a.pulls == 0 {
                f64::INFINITY
            } else {
                a.mu_hat() + (2.0 * log_t / a.pulls as f64).sqrt()
            }
        })
        .expect("non-empty candidate set")
    }

    fn beta_argmax(&mut self, candidates: ArmSet) -> usize {
        if candidates.len() == 1 {
            return candidates.first().expect("non-empty");
        }
        let Self { arms, rng, .. } = self;
        argmax(candidates, |k| {
            let a = &arms[k];
            sample_beta(rng, a.successes as f64 + 1.0, a.failures as f64 + 1.0)
        })
        .expect("non-empty candidate set")
    }

    fn gauss_argmax(&mut self, candidates: ArmSet) -> usize {
        if candidates.len() == 1 {
            return candidates.first().expect("non-empty");
        }
        let beta = self.config.beta;
        let Self { arms, rng, .. } = self;
        argmax(candidates, |k| {
            let a = &arms[k];
            let sd = (beta / a.pulls as f64).sqrt();
            Normal::new(a.mu_hat(), sd)
                .expect("finite positive deviation")
                .sample(rng)
        })
        .expect("non-empty candidate set")
    }
}

fn sample_beta(rng: &mut ChaCha8Rng, alpha: f64, beta: f64) -> f64 {
    Beta::new(alpha, beta).expect("shape parameters are >= 1").sample(rng)
}

/// Index of the largest score in ascending arm order; ties keep the first.
/// Scores are evaluated exactly once per arm, in ascending order.
fn argmax(set: ArmSet, mut score: impl FnMut(usize) -> f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for k in set.iter() {
        let s = score(k);
        match best {
            Some((_, b)) if !(s > b) => {}
            _ => best = Some((k, s)),
        }
    }
    best.map(|(k, _)| k)
}

/// Convenience: a policy state seeded from a `u64`, for tests and examples.
pub fn seeded_state(config: PolicyConfig, table: Arc<PseudoRewardTable>, seed: u64) -> Result<PolicyState> {
    use rand::SeedableRng;
    PolicyState::new(config, table, ChaCha8Rng::seed_from_u64(seed))
}
