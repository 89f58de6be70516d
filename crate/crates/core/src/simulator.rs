//! Monte-Carlo AoI episodes and regret estimation.
//!
//! Each slot draws one latent state, which decides the reward of the policy's
//! channel and of the oracle's channel `k*`. Both AoI sequences start at 1,
//! reset to 1 after a successful slot and grow by one otherwise.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{classify_arms, pseudo_reward_table, BanditInstance, PseudoRewardTable, StateSampler};
use crate::policies::{PolicyConfig, PolicyState};
use crate::rng::{substream, ENVIRONMENT_LABEL};
use crate::scalar::Scalar;

pub const DEFAULT_CHECKPOINTS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMode {
    /// Subtract `c / mu*` from the cumulative AoI.
    Analytic,
    /// Subtract the AoI of an oracle sharing the same latent draws.
    #[default]
    CoupledOracle,
}

impl BaselineMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BaselineMode::Analytic => "analytic",
            BaselineMode::CoupledOracle => "coupled_oracle",
        }
    }
}

impl std::str::FromStr for BaselineMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(BaselineMode::Analytic),
            "coupled_oracle" | "coupled" => Ok(BaselineMode::CoupledOracle),
            other => Err(Error::InvalidConfig(format!("unknown baseline mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub horizon: u64,
    pub n_runs: usize,
    pub master_seed: u64,
    pub checkpoints: Vec<u64>,
    pub baseline_mode: BaselineMode,
    pub policies: Vec<PolicyConfig>,
}

impl SimConfig {
    /// Config with log-spaced checkpoints and the coupled baseline.
    pub fn new(horizon: u64, n_runs: usize, master_seed: u64, policies: Vec<PolicyConfig>) -> Self {
        Self {
            horizon,
            n_runs,
            master_seed,
            checkpoints: log_spaced_checkpoints(horizon, DEFAULT_CHECKPOINTS),
            baseline_mode: BaselineMode::CoupledOracle,
            policies,
        }
    }

    pub fn with_checkpoints(mut self, mut checkpoints: Vec<u64>) -> Self {
        checkpoints.sort_unstable();
        checkpoints.dedup();
        self.checkpoints = checkpoints;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidConfig("horizon must be at least 1".into()));
        }
        if self.n_runs == 0 {
            return Err(Error::InvalidConfig("n_runs must be at least 1".into()));
        }
        if self.checkpoints.is_empty() {
            return Err(Error::InvalidConfig("at least one checkpoint required".into()));
        }
        if !self.checkpoints.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidConfig("checkpoints must be strictly increasing".into()));
        }
        let (first, last) = (self.checkpoints[0], self.checkpoints[self.checkpoints.len() - 1]);
        if first < 1 || last > self.horizon {
            return Err(Error::InvalidConfig(format!(
                "checkpoints must lie in [1, {}], got [{first}, {last}]",
                self.horizon
            )));
        }
        Ok(())
    }
}

/// Up to `count` distinct slots, roughly geometric between 1 and `horizon`,
/// always ending at `horizon`.
pub fn log_spaced_checkpoints(horizon: u64, count: usize) -> Vec<u64> {
    if horizon == 0 || count == 0 {
        return Vec::new();
    }
    if count == 1 {
        return vec![horizon];
    }
    let top = (horizon as f64).ln();
    let mut points: Vec<u64> = (0..count)
        .map(|i| {
            let x = (top * i as f64 / (count - 1) as f64).exp().round() as u64;
            x.clamp(1, horizon)
        })
        .collect();
    points.push(horizon);
    points.sort_unstable();
    points.dedup();
    points
}

/// Next-slot AoI.
#[inline]
pub fn step_aoi(aoi: u64, success: bool) -> u64 {
    if success {
        1
    } else {
        aoi + 1
    }
}

/// Immutable per-instance data shared by every episode.
#[derive(Debug, Clone)]
pub struct Environment {
    name: String,
    sampler: StateSampler,
    /// Bit `k` of entry `i` is `Y_k(x_i)`.
    success_masks: Vec<u64>,
    optimal_arm: usize,
    optimal_mean: f64,
    table: Arc<PseudoRewardTable>,
}

impl Environment {
    pub fn new<T: Scalar>(inst: &BanditInstance<T>) -> Result<Self> {
        let summary = classify_arms(inst)?;
        let success_masks = (0..inst.num_states())
            .map(|i| {
                (0..inst.num_arms())
                    .filter(|&k| inst.reward(k, i) == 1)
                    .fold(0u64, |m, k| m | (1 << k))
            })
            .collect();
        Ok(Self {
            name: inst.name().to_string(),
            sampler: StateSampler::new(inst.latent()),
            success_masks,
            optimal_arm: summary.optimal_arm,
            optimal_mean: summary.optimal_mean.as_f64(),
            table: Arc::new(pseudo_reward_table(inst)),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn optimal_arm(&self) -> usize {
        self.optimal_arm
    }

    pub fn optimal_mean(&self) -> f64 {
        self.optimal_mean
    }

    pub fn table(&self) -> &Arc<PseudoRewardTable> {
        &self.table
    }

    pub fn num_arms(&self) -> usize {
        self.table.num_arms()
    }

    #[inline]
    fn succeeds(&self, state: usize, arm: usize) -> bool {
        self.success_masks[state] >> arm & 1 == 1
    }
}

/// Checkpoint sums of one episode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpisodeTrace {
    pub cumulative_aoi: Vec<u64>,
    pub oracle_cumulative_aoi: Vec<u64>,
    pub pulls: Vec<u64>,
}

impl EpisodeTrace {
    /// Regret of this run at checkpoint index `idx`.
    pub fn regret(&self, idx: usize, checkpoint: u64, mode: BaselineMode, optimal_mean: f64) -> f64 {
        match mode {
            BaselineMode::CoupledOracle => {
                self.cumulative_aoi[idx] as f64 - self.oracle_cumulative_aoi[idx] as f64
            }
            BaselineMode::Analytic => self.cumulative_aoi[idx] as f64 - checkpoint as f64 / optimal_mean,
        }
    }
}

/// Runs `horizon` slots of `policy` against `env`, drawing latent states
/// from `rng`. `checkpoints` must be increasing and within `[1, horizon]`.
pub fn run_episode<R: Rng + ?Sized>(
    env: &Environment,
    policy: &mut PolicyState,
    horizon: u64,
    checkpoints: &[u64],
    rng: &mut R,
) -> Result<EpisodeTrace> {
    let mut cumulative_aoi = Vec::with_capacity(checkpoints.len());
    let mut oracle_cumulative_aoi = Vec::with_capacity(checkpoints.len());
    let mut next_checkpoint = checkpoints.iter().peekable();

    let (mut aoi, mut oracle_aoi) = (1u64, 1u64);
    let (mut total, mut oracle_total) = (0u64, 0u64);
    for t in 1..=horizon {
        total += aoi;
        oracle_total += oracle_aoi;

        let arm = policy.select(aoi);
        let state = env.sampler.sample(rng);
        let success = env.succeeds(state, arm);
        policy.observe(arm, u8::from(success))?;
        aoi = step_aoi(aoi, success);
        oracle_aoi = step_aoi(oracle_aoi, env.succeeds(state, env.optimal_arm));

        while next_checkpoint.peek() == Some(&&t) {
            cumulative_aoi.push(total);
            oracle_cumulative_aoi.push(oracle_total);
            next_checkpoint.next();
        }
    }
    Ok(EpisodeTrace {
        cumulative_aoi,
        oracle_cumulative_aoi,
        pulls: policy.pulls(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegretPoint {
    pub checkpoint: u64,
    pub mean_regret: f64,
    pub stderr: f64,
    pub n_runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretCurve {
    pub policy: String,
    pub baseline_mode: BaselineMode,
    pub points: Vec<RegretPoint>,
    /// Set when only one run was available, so every stderr is reported as 0.
    pub degenerate: bool,
}

impl RegretCurve {
    pub fn at(&self, checkpoint: u64) -> Option<&RegretPoint> {
        self.points.iter().find(|p| p.checkpoint == checkpoint)
    }

    pub fn last(&self) -> &RegretPoint {
        self.points.last().expect("curves have at least one checkpoint")
    }
}

/// Sample mean and standard error (n - 1 denominator). A single value has
/// standard error 0.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

pub fn estimate_regret(
    policy: &str,
    traces: &[EpisodeTrace],
    checkpoints: &[u64],
    optimal_mean: f64,
    mode: BaselineMode,
) -> Result<RegretCurve> {
    if traces.is_empty() {
        return Err(Error::EmptyTraces);
    }
    if !(optimal_mean > 0.0 && optimal_mean <= 1.0) {
        return Err(Error::InvalidConfig(format!("optimal mean {optimal_mean} outside (0, 1]")));
    }
    let mut values = vec![0.0; traces.len()];
    let points = checkpoints
        .iter()
        .enumerate()
        .map(|(idx, &c)| {
            for (v, trace) in values.iter_mut().zip(traces) {
                *v = trace.regret(idx, c, mode, optimal_mean);
            }
            let (mean_regret, stderr) = mean_and_stderr(&values);
            RegretPoint {
                checkpoint: c,
                mean_regret,
                stderr,
                n_runs: traces.len(),
            }
        })
        .collect();
    Ok(RegretCurve {
        policy: policy.to_string(),
        baseline_mode: mode,
        points,
        degenerate: traces.len() == 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PullStat {
    pub mean_pulls: f64,
    pub stderr: f64,
}

/// Everything produced for one policy of an ensemble.
#[derive(Debug, Clone)]
pub struct PolicyOutcome {
    pub config: PolicyConfig,
    pub curve: RegretCurve,
    pub pulls: Vec<PullStat>,
    pub traces: Vec<EpisodeTrace>,
}

impl PolicyOutcome {
    pub fn label(&self) -> String {
        self.config.label()
    }

    /// Per-run regret at the checkpoint index `idx`.
    pub fn run_regrets(&self, idx: usize, checkpoint: u64, mode: BaselineMode, optimal_mean: f64) -> Vec<f64> {
        self.traces
            .iter()
            .map(|t| t.regret(idx, checkpoint, mode, optimal_mean))
            .collect()
    }
}

/// Runs `config.n_runs` episodes of one policy. Run `i` draws latent states
/// from the `(seed, "environment", i)` stream, shared across policies, and
/// policy randomness from `(seed, label, i)`.
pub fn run_policy(config: &SimConfig, env: &Environment, policy: PolicyConfig) -> Result<PolicyOutcome> {
    config.validate()?;
    policy.validate(env.num_arms())?;
    let label = policy.label();
    let traces = (0..config.n_runs as u64)
        .into_par_iter()
        .map(|run| {
            let mut env_rng = substream(config.master_seed, ENVIRONMENT_LABEL, run);
            let policy_rng = substream(config.master_seed, &label, run);
            let mut state = PolicyState::new(policy, Arc::clone(env.table()), policy_rng)?;
            run_episode(env, &mut state, config.horizon, &config.checkpoints, &mut env_rng)
        })
        .collect::<Result<Vec<_>>>()?;

    let curve = estimate_regret(
        &label,
        &traces,
        &config.checkpoints,
        env.optimal_mean(),
        config.baseline_mode,
    )?;
    let pulls = (0..env.num_arms())
        .map(|k| {
            let counts: Vec<f64> = traces.iter().map(|t| t.pulls[k] as f64).collect();
            let (mean_pulls, stderr) = mean_and_stderr(&counts);
            PullStat { mean_pulls, stderr }
        })
        .collect();
    Ok(PolicyOutcome {
        config: policy,
        curve,
        pulls,
        traces,
    })
}

/// Runs every configured policy on `inst`.
pub fn run_ensemble<T: Scalar>(config: &SimConfig, inst: &BanditInstance<T>) -> Result<Vec<PolicyOutcome>> {
    config.validate()?;
    let env = Environment::new(inst)?;
    config
        .policies
        .iter()
        .map(|&p| run_policy(config, &env, p))
        .collect()
}
