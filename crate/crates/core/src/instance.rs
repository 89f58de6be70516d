//! Correlated bandit instances.
//!
//! A latent categorical state `X` is drawn each slot and every arm's reward is
//! a known 0/1 function of it. From that table we derive the arm means, the
//! pseudo-reward table `s_{l,k}(r)`, the expected pseudo-rewards `phi_{l,k}`
//! and the competitive / non-competitive split of the sub-optimal arms.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest supported arm count. Policies keep arm sets as 64-bit masks.
pub const MAX_ARMS: usize = 64;

const PROB_SUM_TOLERANCE: f64 = 1e-12;

/// Embedded document for the four-arm instance with one competitive
/// sub-optimal arm.
pub const I1_DOCUMENT: &str = include_str!("../instances/i1.json");
/// Embedded document for the four-arm instance with no competitive
/// sub-optimal arm.
pub const I2_DOCUMENT: &str = include_str!("../instances/i2.json");

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 2] = ["i1", "i2"];

#[derive(Debug, Clone, PartialEq)]
pub struct LatentDistribution<T> {
    labels: Vec<String>,
    probs: Vec<T>,
}

impl<T: Scalar> LatentDistribution<T> {
    pub fn new(labels: Vec<String>, probs: Vec<T>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::instance("probs", "at least one state required"));
        }
        if labels.len() != probs.len() {
            return Err(Error::instance(
                "states",
                format!("{} labels for {} probabilities", labels.len(), probs.len()),
            ));
        }
        let mut seen = HashSet::new();
        for (i, label) in labels.iter().enumerate() {
            if !seen.insert(label.as_str()) {
                return Err(Error::instance(
                    format!("states[{i}]"),
                    format!("duplicate state label {label:?}"),
                ));
            }
        }
        for (i, p) in probs.iter().enumerate() {
            let pf = p.as_f64();
            if !(0.0..=1.0).contains(&pf) {
                return Err(Error::instance(
                    format!("probs[{i}]"),
                    format!("probability {pf} outside [0, 1]"),
                ));
            }
        }
        let total = probs.iter().fold(T::zero(), |acc, &p| acc + p);
        if (total.as_f64() - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(Error::instance(
                "probs",
                format!("probabilities sum to {}", total.as_f64()),
            ));
        }
        Ok(Self { labels, probs })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// `rewards[k][i]` is the reward of arm `k` in latent state `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditInstance<T> {
    name: String,
    latent: LatentDistribution<T>,
    rewards: Vec<Vec<u8>>,
}

impl<T: Scalar> BanditInstance<T> {
    pub fn new(name: impl Into<String>, latent: LatentDistribution<T>, rewards: Vec<Vec<u8>>) -> Result<Self> {
        if rewards.len() < 2 {
            return Err(Error::instance(
                "rewards",
                format!("K ≥ 2 required, got {} arm(s)", rewards.len()),
            ));
        }
        if rewards.len() > MAX_ARMS {
            return Err(Error::instance(
                "rewards",
                format!("at most {MAX_ARMS} arms supported, got {}", rewards.len()),
            ));
        }
        for (k, row) in rewards.iter().enumerate() {
            if row.len() != latent.len() {
                return Err(Error::instance(
                    format!("rewards[{k}]"),
                    format!("{} entries for {} states", row.len(), latent.len()),
                ));
            }
            if let Some(i) = row.iter().position(|&y| y > 1) {
                return Err(Error::instance(
                    format!("rewards[{k}][{i}]"),
                    format!("entry {} is not binary", row[i]),
                ));
            }
        }
        Ok(Self {
            name: name.into(),
            latent,
            rewards,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn latent(&self) -> &LatentDistribution<T> {
        &self.latent
    }

    pub fn rewards(&self) -> &[Vec<u8>] {
        &self.rewards
    }

    pub fn num_arms(&self) -> usize {
        self.rewards.len()
    }

    pub fn num_states(&self) -> usize {
        self.latent.len()
    }

    /// `Y_k(x_state)`.
    pub fn reward(&self, arm: usize, state: usize) -> u8 {
        self.rewards[arm][state]
    }

    /// Same instance with probabilities converted to another scalar type.
    pub fn convert<U: Scalar>(&self) -> BanditInstance<U> {
        let probs = self
            .latent
            .probs
            .iter()
            .map(|p| U::from_f64(p.as_f64()).expect("probability representable"))
            .collect();
        BanditInstance {
            name: self.name.clone(),
            latent: LatentDistribution {
                labels: self.latent.labels.clone(),
                probs,
            },
            rewards: self.rewards.clone(),
        }
    }

    pub fn to_document(&self) -> InstanceDocument {
        InstanceDocument {
            name: self.name.clone(),
            states: self.latent.labels.clone(),
            probs: self
                .latent
                .probs
                .iter()
                .map(|p| serde_json::Number::from_f64(p.as_f64()).expect("finite probability"))
                .collect(),
            rewards: self
                .rewards
                .iter()
                .map(|row| row.iter().map(|&y| i64::from(y)).collect())
                .collect(),
        }
    }
}

/// On-disk instance format.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub name: String,
    pub states: Vec<String>,
    pub probs: Vec<serde_json::Number>,
    pub rewards: Vec<Vec<i64>>,
}

impl InstanceDocument {
    pub fn into_instance<T: Scalar>(self) -> Result<BanditInstance<T>> {
        let probs = self
            .probs
            .iter()
            .enumerate()
            .map(|(i, n)| {
                decimal_to_scalar::<T>(&n.to_string()).ok_or_else(|| {
                    Error::instance(format!("probs[{i}]"), format!("unrepresentable number {n}"))
                })
            })
            .collect::<Result<Vec<T>>>()?;
        let latent = LatentDistribution::new(self.states, probs)?;
        let mut rewards = Vec::with_capacity(self.rewards.len());
        for (k, row) in self.rewards.into_iter().enumerate() {
            let mut converted = Vec::with_capacity(row.len());
            for (i, y) in row.into_iter().enumerate() {
                match y {
                    0 | 1 => converted.push(y as u8),
                    other => {
                        return Err(Error::instance(
                            format!("rewards[{k}][{i}]"),
                            format!("entry {other} is not binary"),
                        ))
                    }
                }
            }
            rewards.push(converted);
        }
        BanditInstance::new(self.name, latent, rewards)
    }
}

/// Parses an instance document (JSON) and validates it.
pub fn load_instance<T: Scalar>(document: &str) -> Result<BanditInstance<T>> {
    let doc: InstanceDocument = serde_json::from_str(document).map_err(|e| {
        Error::instance("document", format!("malformed instance document: {e}"))
    })?;
    doc.into_instance()
}

/// One of the embedded instances, by name.
pub fn builtin<T: Scalar>(name: &str) -> Option<BanditInstance<T>> {
    let doc = match name {
        "i1" => I1_DOCUMENT,
        "i2" => I2_DOCUMENT,
        _ => return None,
    };
    Some(load_instance(doc).expect("embedded instances are valid"))
}

/// Converts a decimal literal such as `0.25` or `1e-3` exactly, by building
/// `mantissa / 10^scale` in `T`. Falls back to `from_f64` when the digits do
/// not fit in 64 bits.
fn decimal_to_scalar<T: Scalar>(text: &str) -> Option<T> {
    let (body, exp) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let negative = body.starts_with('-');
    let body = body.trim_start_matches(['-', '+']);
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    let digits = format!("{int_part}{frac_part}");
    let scale = frac_part.len() as i32 - exp;
    let exact = digits.parse::<u64>().ok().and_then(|mantissa| {
        let ten = T::from_u64(10)?;
        let mut value = T::from_u64(mantissa)?;
        if scale >= 0 {
            for _ in 0..scale {
                value = value / ten;
            }
        } else {
            for _ in 0..-scale {
                value = value * ten;
            }
        }
        Some(value)
    });
    let value = match exact {
        Some(v) if scale.abs() <= 18 => v,
        _ => T::from_f64(text.parse::<f64>().ok()?)?,
    };
    Some(if negative { T::zero() - value } else { value })
}

/// `s_{l,k}(r)`: a 0/1 value, or unreachable when arm `k` never yields `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PseudoReward {
    Value(u8),
    Unreachable,
}

impl PseudoReward {
    pub fn value(self) -> Option<u8> {
        match self {
            PseudoReward::Value(v) => Some(v),
            PseudoReward::Unreachable => None,
        }
    }
}

/// Dense `K x K x 2` table of pseudo-rewards, indexed `[l][k][r]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoRewardTable {
    arms: usize,
    entries: Vec<PseudoReward>,
}

impl PseudoRewardTable {
    pub fn from_fn(arms: usize, mut f: impl FnMut(usize, usize, u8) -> PseudoReward) -> Self {
        let mut entries = Vec::with_capacity(arms * arms * 2);
        for l in 0..arms {
            for k in 0..arms {
                for r in 0..2u8 {
                    entries.push(f(l, k, r));
                }
            }
        }
        Self { arms, entries }
    }

    /// Every pseudo-reward equal to 1: carries no information, so correlated
    /// policies reduce to their plain counterparts.
    pub fn all_ones(arms: usize) -> Self {
        Self::from_fn(arms, |_, _, _| PseudoReward::Value(1))
    }

    pub fn num_arms(&self) -> usize {
        self.arms
    }

    #[inline]
    pub fn get(&self, l: usize, k: usize, r: u8) -> PseudoReward {
        self.entries[(l * self.arms + k) * 2 + r as usize]
    }
}

/// `s_{l,k}(r) = max { Y_l(x) : Y_k(x) = r }`.
pub fn pseudo_reward_table<T: Scalar>(inst: &BanditInstance<T>) -> PseudoRewardTable {
    let rewards = inst.rewards();
    PseudoRewardTable::from_fn(inst.num_arms(), |l, k, r| {
        rewards[k]
            .iter()
            .zip(&rewards[l])
            .filter(|(&yk, _)| yk == r)
            .map(|(_, &yl)| yl)
            .max()
            .map_or(PseudoReward::Unreachable, PseudoReward::Value)
    })
}

/// `mu_k = sum_i P(x_i) Y_k(x_i)`.
pub fn arm_means<T: Scalar>(inst: &BanditInstance<T>) -> Vec<T> {
    let probs = inst.latent().probs();
    inst.rewards()
        .iter()
        .map(|row| {
            row.iter()
                .zip(probs)
                .filter(|(&y, _)| y == 1)
                .fold(T::zero(), |acc, (_, &p)| acc + p)
        })
        .collect()
}

/// `phi_{l,k} = E[s_{l,k}(Y_k(X))]`.
pub fn expected_pseudo_reward<T: Scalar>(inst: &BanditInstance<T>, l: usize, k: usize) -> T {
    expected_pseudo_with(inst, &pseudo_reward_table(inst), l, k)
}

fn expected_pseudo_with<T: Scalar>(
    inst: &BanditInstance<T>,
    table: &PseudoRewardTable,
    l: usize,
    k: usize,
) -> T {
    let probs = inst.latent().probs();
    inst.rewards()[k]
        .iter()
        .zip(probs)
        .filter(|(&yk, _)| table.get(l, k, yk) == PseudoReward::Value(1))
        .fold(T::zero(), |acc, (_, &p)| acc + p)
}

/// Full `phi` matrix, indexed `[l][k]`.
pub fn expected_pseudo_matrix<T: Scalar>(inst: &BanditInstance<T>) -> Vec<Vec<T>> {
    let table = pseudo_reward_table(inst);
    let k = inst.num_arms();
    (0..k)
        .map(|l| (0..k).map(|kk| expected_pseudo_with(inst, &table, l, kk)).collect())
        .collect()
}

/// Derived quantities of an instance. Arm indices are zero-based.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSummary<T> {
    pub num_arms: usize,
    pub means: Vec<T>,
    pub optimal_arm: usize,
    pub optimal_mean: T,
    /// `mu* - mu_k`.
    pub gaps: Vec<T>,
    /// `phi_{l,k}` for every pair, indexed `[l][k]`.
    pub expected_pseudo: Vec<Vec<T>>,
    /// `mu* - phi_{k,k*}`; zero for the optimal arm.
    pub pseudo_gaps: Vec<T>,
    /// Sub-optimal arms with non-positive pseudo-gap.
    pub competitive_suboptimal: Vec<usize>,
    /// Sub-optimal arms with negative pseudo-gap.
    pub strictly_competitive: Vec<usize>,
    pub competitive_count: usize,
    pub mu_min: T,
}

impl<T: Scalar> InstanceSummary<T> {
    /// Sub-optimal arms with positive pseudo-gap.
    pub fn non_competitive(&self) -> Vec<usize> {
        (0..self.num_arms)
            .filter(|&k| k != self.optimal_arm && !self.competitive_suboptimal.contains(&k))
            .collect()
    }

    /// Competitive set including the optimal arm.
    pub fn competitive_with_optimal(&self) -> Vec<usize> {
        let mut set = self.competitive_suboptimal.clone();
        set.push(self.optimal_arm);
        set.sort_unstable();
        set
    }

    /// Smallest gap among sub-optimal arms.
    pub fn delta_min(&self) -> T {
        (0..self.num_arms)
            .filter(|&k| k != self.optimal_arm)
            .map(|k| self.gaps[k])
            .fold(None, |acc: Option<T>, g| match acc {
                Some(m) if m <= g => Some(m),
                _ => Some(g),
            })
            .unwrap_or_else(T::zero)
    }
}

/// Computes means, gaps, pseudo-gaps and the competitive classification.
pub fn classify_arms<T: Scalar>(inst: &BanditInstance<T>) -> Result<InstanceSummary<T>> {
    let means = arm_means(inst);
    let mut best = means[0];
    for &m in &means[1..] {
        if m > best {
            best = m;
        }
    }
    let argmax: Vec<usize> = (0..means.len()).filter(|&k| means[k] == best).collect();
    if argmax.len() > 1 {
        return Err(Error::OptimalArmNotUnique(argmax));
    }
    let optimal_arm = argmax[0];
    let mu_min = means
        .iter()
        .copied()
        .fold(best, |acc, m| if m < acc { m } else { acc });
    let gaps: Vec<T> = means.iter().map(|&m| best - m).collect();
    let expected_pseudo = expected_pseudo_matrix(inst);

    let mut pseudo_gaps = Vec::with_capacity(means.len());
    let mut competitive_suboptimal = Vec::new();
    let mut strictly_competitive = Vec::new();
    for k in 0..means.len() {
        if k == optimal_arm {
            pseudo_gaps.push(T::zero());
            continue;
        }
        let gap = best - expected_pseudo[k][optimal_arm];
        if gap <= T::zero() {
            competitive_suboptimal.push(k);
        }
        if gap < T::zero() {
            strictly_competitive.push(k);
        }
        pseudo_gaps.push(gap);
    }

    Ok(InstanceSummary {
        num_arms: means.len(),
        competitive_count: competitive_suboptimal.len(),
        means,
        optimal_arm,
        optimal_mean: best,
        gaps,
        expected_pseudo,
        pseudo_gaps,
        competitive_suboptimal,
        strictly_competitive,
        mu_min,
    })
}

/// Inverse-CDF sampler for the latent state.
#[derive(Debug, Clone)]
pub struct StateSampler {
    cumulative: Vec<f64>,
}

impl StateSampler {
    pub fn new<T: Scalar>(latent: &LatentDistribution<T>) -> Self {
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = latent
            .probs()
            .iter()
            .map(|p| {
                acc += p.as_f64();
                acc
            })
            .collect();
        // Rounding can leave the last entry a hair below 1.
        if let Some(last) = cumulative.last_mut() {
            *last = f64::INFINITY;
        }
        Self { cumulative }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        // Zero-probability states have an empty interval and are never hit.
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .expect("last bound is infinite")
    }
}

/// Draws one latent state index.
pub fn sample_state<T: Scalar, R: Rng + ?Sized>(inst: &BanditInstance<T>, rng: &mut R) -> usize {
    StateSampler::new(inst.latent()).sample(rng)
}
