//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.
//!
//! The statistical criteria share two ensembles (one per builtin instance,
//! T = 100 000, 1000 runs, coupled baseline).

use std::sync::Arc;
use std::time::Instant;

use aoi_bandit::bounds::{
    cts_upper, cucb_upper, lower_bound, solve_t0, solve_tb, t0_condition, tb_condition, tb_floor, BoundParams,
    Threshold, DEFAULT_SEARCH_CAP,
};
use aoi_bandit::instance::{
    arm_means, builtin, classify_arms, expected_pseudo_reward, BanditInstance, LatentDistribution, PseudoRewardTable,
};
use aoi_bandit::policies::{seeded_state, PolicyConfig, PolicyKind};
use aoi_bandit::simulator::{
    log_spaced_checkpoints, mean_and_stderr, run_ensemble, BaselineMode, PolicyOutcome, SimConfig,
};
use aoi_bandit::{ExactInstance, Instance, Rational, Summary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const HORIZON: u64 = 100_000;
const RUNS: usize = 1000;
const SEED: u64 = 20_240_601;
const CTS_BETA: f64 = 1.5;

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn check(id: &'static str, pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        id,
        pass,
        detail: detail.into(),
    }
}

struct Ensemble {
    summary: Summary,
    checkpoints: Vec<u64>,
    outcomes: Vec<PolicyOutcome>,
}

impl Ensemble {
    fn run(name: &str, kinds: &[PolicyKind]) -> Self {
        let inst: Instance = builtin(name).unwrap();
        let summary = classify_arms(&inst).unwrap();
        let mut checkpoints = log_spaced_checkpoints(HORIZON, 50);
        checkpoints.extend([10_000, 20_000, 30_000, HORIZON]);
        let policies = kinds.iter().map(|&k| PolicyConfig::new(k)).collect();
        let config = SimConfig::new(HORIZON, RUNS, SEED, policies).with_checkpoints(checkpoints);
        let started = Instant::now();
        let outcomes = run_ensemble(&config, &inst).unwrap();
        println!(
            "   ensemble {name}: {} policies x {RUNS} runs x T={HORIZON} in {:.1}s",
            kinds.len(),
            started.elapsed().as_secs_f64()
        );
        Self {
            summary,
            checkpoints: config.checkpoints,
            outcomes,
        }
    }

    fn policy(&self, kind: PolicyKind) -> &PolicyOutcome {
        self.outcomes.iter().find(|o| o.config.policy == kind).unwrap()
    }

    fn index(&self, checkpoint: u64) -> usize {
        self.checkpoints.iter().position(|&c| c == checkpoint).unwrap()
    }

    fn regrets(&self, kind: PolicyKind, checkpoint: u64) -> Vec<f64> {
        let idx = self.index(checkpoint);
        self.policy(kind).run_regrets(
            idx,
            checkpoint,
            BaselineMode::CoupledOracle,
            self.summary.optimal_mean,
        )
    }

    /// Mean and stderr of the per-run regret increase between two checkpoints.
    fn increase(&self, kind: PolicyKind, from: u64, to: u64) -> (f64, f64) {
        let a = self.regrets(kind, from);
        let b = self.regrets(kind, to);
        let diffs: Vec<f64> = b.iter().zip(&a).map(|(b, a)| b - a).collect();
        mean_and_stderr(&diffs)
    }
}

fn a1() -> Outcome {
    let exact: ExactInstance = builtin("i1").unwrap();
    let means_ok = arm_means(&exact)
        == vec![Rational::new(1, 5), Rational::new(3, 5), Rational::new(1, 2), Rational::new(3, 10)];
    let inst: Instance = builtin("i1").unwrap();
    let means = arm_means(&inst);
    let means_f_ok = means.iter().zip([0.2, 0.6, 0.5, 0.3]).all(|(m, e)| (m - e).abs() <= 1e-12);
    let phi_ok = [(0, 0.4), (2, 1.0), (3, 0.4)]
        .iter()
        .all(|&(l, e)| (expected_pseudo_reward(&inst, l, 1) - e).abs() <= 1e-12);
    let s = classify_arms(&inst).unwrap();
    let class_ok = s.optimal_arm == 1 && s.competitive_count == 1 && s.competitive_suboptimal == vec![2];
    check(
        "A1",
        means_ok && means_f_ok && phi_ok && class_ok,
        format!(
            "means={means:?} phi_(1,3,4),2=({}, {}, {}) k*={} C={} competitive={:?}",
            expected_pseudo_reward(&inst, 0, 1),
            expected_pseudo_reward(&inst, 2, 1),
            expected_pseudo_reward(&inst, 3, 1),
            s.optimal_arm + 1,
            s.competitive_count,
            s.competitive_suboptimal.iter().map(|k| k + 1).collect::<Vec<_>>()
        ),
    )
}

fn a2() -> Outcome {
    let inst: Instance = builtin("i2").unwrap();
    let s = classify_arms(&inst).unwrap();
    let params = BoundParams::new(0.5, 1.0, CTS_BETA);
    let horizons = [1u64, 2, 10, 1_000, 1_000_000, 1_000_000_000_000];
    let zero = horizons.iter().all(|&t| lower_bound(&s, &params, t).unwrap() == 0.0);
    check(
        "A2",
        s.optimal_arm == 3 && s.competitive_count == 0 && zero,
        format!("k*={} C={} lower bound zero on {horizons:?}: {zero}", s.optimal_arm + 1, s.competitive_count),
    )
}

fn a3(i2: &Ensemble) -> Outcome {
    let (ucb, ucb_se) = i2.increase(PolicyKind::Ucb, 20_000, HORIZON);
    let budget = 0.1 * (ucb - 3.0 * ucb_se);
    let mut pass = budget > 0.0;
    let mut parts = vec![format!("UCB increase {ucb:.3}±{ucb_se:.3} -> budget {budget:.3}")];
    for kind in [PolicyKind::Cucb, PolicyKind::CtsBeta] {
        let (inc, se) = i2.increase(kind, 20_000, HORIZON);
        let upper = inc + 3.0 * se;
        pass &= upper < budget;
        parts.push(format!("{kind} increase {inc:.3}±{se:.3} (upper {upper:.3})"));
    }
    check("A3", pass, parts.join("; "))
}

fn a4(i1: &Ensemble) -> Outcome {
    let last = |kind| *i1.policy(kind).curve.last();
    let mut pass = true;
    let mut parts = Vec::new();
    for (better, worse) in [(PolicyKind::CtsBeta, PolicyKind::TsBeta), (PolicyKind::Cucb, PolicyKind::Ucb)] {
        let (b, w) = (last(better), last(worse));
        let combined = (b.stderr.powi(2) + w.stderr.powi(2)).sqrt();
        let margin = (w.mean_regret - b.mean_regret) / combined;
        pass &= margin >= 3.0;
        parts.push(format!(
            "{better} {:.2}±{:.2} < {worse} {:.2}±{:.2} by {margin:.1} combined stderr",
            b.mean_regret, b.stderr, w.mean_regret, w.stderr
        ));
    }
    check("A4", pass, parts.join("; "))
}

fn a5(i1: &Ensemble) -> Outcome {
    let curve = &i1.policy(PolicyKind::Ucb).curve;
    let ratios: Vec<f64> = [10_000u64, 30_000, HORIZON]
        .iter()
        .map(|&t| curve.at(t).unwrap().mean_regret / (t as f64).ln())
        .collect();
    let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
    let variation = (max - min) / min;
    check(
        "A5",
        min > 0.0 && variation < 0.25,
        format!("regret/ln T at 1e4, 3e4, 1e5 = {ratios:.3?}, variation {:.1}%", 100.0 * variation),
    )
}

fn a6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut failures = 0;
    for _ in 0..100 {
        let seed: u64 = rng.random();
        for name in ["i1", "i2"] {
            let inst: Instance = builtin(name).unwrap();
            let k_star = classify_arms(&inst).unwrap().optimal_arm;
            let config = SimConfig::new(2_000, 1, seed, vec![PolicyConfig::new(PolicyKind::Fixed(k_star))]);
            let out = run_ensemble(&config, &inst).unwrap();
            if out[0].curve.points.iter().any(|p| p.mean_regret != 0.0) {
                failures += 1;
            }
        }
    }
    check("A6", failures == 0, format!("{failures} non-zero oracle regrets over 100 seeds x 2 instances"))
}

fn random_instance(rng: &mut ChaCha8Rng, max_arms: usize, max_states: usize) -> Instance {
    let arms = rng.random_range(2..=max_arms);
    let states = rng.random_range(1..=max_states);
    let weights: Vec<f64> = (0..states).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let head: f64 = probs[..states - 1].iter().sum();
    probs[states - 1] = 1.0 - head;
    let rewards = (0..arms)
        .map(|_| (0..states).map(|_| rng.random_range(0..=1u8)).collect())
        .collect();
    let labels = (0..states).map(|i| format!("x{i}")).collect();
    BanditInstance::new("random", LatentDistribution::new(labels, probs).unwrap(), rewards).unwrap()
}

/// Selection trace of one policy on `env`, reusing the environment stream
/// `env_seed` so every policy sees the same latent states.
fn selection_trace(inst: &Instance, config: PolicyConfig, policy_seed: u64, env_seed: u64, horizon: u64) -> Vec<usize> {
    let table = Arc::new(PseudoRewardTable::all_ones(inst.num_arms()));
    let mut state = seeded_state(config, table, policy_seed).unwrap();
    let sampler = aoi_bandit::instance::StateSampler::new(inst.latent());
    let mut rng = ChaCha8Rng::seed_from_u64(env_seed);
    let mut aoi = 1;
    (0..horizon)
        .map(|_| {
            let arm = state.select(aoi);
            let x = sampler.sample(&mut rng);
            let r = inst.reward(arm, x);
            state.observe(arm, r).unwrap();
            aoi = aoi_bandit::simulator::step_aoi(aoi, r == 1);
            arm
        })
        .collect()
}

fn a7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mismatches = Vec::new();
    for i in 0..50u64 {
        let inst = random_instance(&mut rng, 4, 6);
        for (correlated, plain) in [(PolicyKind::Cucb, PolicyKind::Ucb), (PolicyKind::CtsBeta, PolicyKind::TsBeta)] {
            let a = selection_trace(&inst, PolicyConfig::new(correlated), i, 1000 + i, 500);
            let b = selection_trace(&inst, PolicyConfig::new(plain), i, 1000 + i, 500);
            if a != b {
                mismatches.push(format!("instance {i}: {correlated} vs {plain}"));
            }
        }
    }
    check(
        "A7",
        mismatches.is_empty(),
        format!("50 instances x 2 pairs, T=500, mismatches: {mismatches:?}"),
    )
}

fn a8(i1: &Ensemble, i2: &Ensemble) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, ens) in [("i1", i1), ("i2", i2)] {
        let s = &ens.summary;
        let t0 = solve_t0(s, DEFAULT_SEARCH_CAP).unwrap();
        let tb = solve_tb(s, CTS_BETA, DEFAULT_SEARCH_CAP).unwrap();
        for (kind, bound) in [
            (PolicyKind::Cucb, Box::new(|t| cucb_upper(s, t, t0)) as Box<dyn Fn(u64) -> f64>),
            (PolicyKind::CtsGauss, Box::new(|t| cts_upper(s, t, CTS_BETA, tb))),
        ] {
            let violations = ens
                .policy(kind)
                .curve
                .points
                .iter()
                .filter(|p| p.mean_regret - 3.0 * p.stderr > bound(p.checkpoint))
                .count();
            pass &= violations == 0;
            let last = ens.policy(kind).curve.last();
            parts.push(format!(
                "{name}/{kind}: {violations} violations (final {:.1} vs bound {:.4e})",
                last.mean_regret,
                bound(last.checkpoint)
            ));
        }
    }
    let s1 = &i1.summary;
    let small = cucb_upper(s1, 100, solve_t0(s1, DEFAULT_SEARCH_CAP).unwrap());
    let small_ok = (small - 1000.0 / 3.0).abs() < 1e-9 && format!("{small:.2}") == "333.33";
    pass &= small_ok;
    parts.push(format!("i1 small-T branch at T=100: {small}"));
    check("A8", pass, parts.join("; "))
}

/// Enumerates every state directly from the definition, without the
/// pseudo-reward table.
fn brute_force_phi(inst: &Instance, l: usize, k: usize) -> f64 {
    let n = inst.num_states();
    let probs = inst.latent().probs();
    let mut phi = 0.0;
    for x in 0..n {
        let r = inst.reward(k, x);
        let mut sup = 0u8;
        for x2 in 0..n {
            if inst.reward(k, x2) == r {
                sup = sup.max(inst.reward(l, x2));
            }
        }
        phi += probs[x] * f64::from(sup);
    }
    phi
}

fn a9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut max_err, mut dominance_failures) = (0.0f64, 0);
    for _ in 0..200 {
        let inst = random_instance(&mut rng, 5, 8);
        let means: Vec<f64> = (0..inst.num_arms())
            .map(|k| (0..inst.num_states()).map(|x| inst.latent().probs()[x] * f64::from(inst.reward(k, x))).sum())
            .collect();
        for l in 0..inst.num_arms() {
            for k in 0..inst.num_arms() {
                let phi = expected_pseudo_reward(&inst, l, k);
                max_err = max_err.max((phi - brute_force_phi(&inst, l, k)).abs());
                if phi < means[l] - 1e-12 {
                    dominance_failures += 1;
                }
            }
        }
    }
    check(
        "A9",
        max_err <= 1e-12 && dominance_failures == 0,
        format!("max |phi - brute force| = {max_err:e}, phi < mu violations = {dominance_failures}"),
    )
}

fn a10() -> Outcome {
    let inst: Instance = builtin("i1").unwrap();
    let s = classify_arms(&inst).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    match solve_t0(&s, DEFAULT_SEARCH_CAP).unwrap() {
        Threshold::At(t0) => {
            let ok = t0_condition(&s, t0) && !t0_condition(&s, t0 - 1);
            pass &= ok;
            parts.push(format!("t0={t0} certificate {ok}"));
        }
        Threshold::Infeasible => {
            pass = false;
            parts.push("t0 infeasible".into());
        }
    }
    for beta in [1.01, 1.5, 2.0] {
        match solve_tb(&s, beta, DEFAULT_SEARCH_CAP).unwrap() {
            Threshold::At(tb) => {
                let floor = (11.0 * beta).exp();
                let certificate = tb_condition(&s, beta, tb) && (tb == tb_floor(beta) || !tb_condition(&s, beta, tb - 1));
                let ok = tb as f64 >= floor && certificate;
                pass &= ok;
                parts.push(format!("beta={beta}: tb={tb} >= exp(11 beta)={floor:.1}, certificate {certificate}"));
            }
            Threshold::Infeasible => {
                pass = false;
                parts.push(format!("beta={beta}: infeasible"));
            }
        }
    }
    check("A10", pass, parts.join("; "))
}

fn main() {
    let started = Instant::now();
    let mut results = vec![a1(), a2(), a6(), a7(), a9(), a10()];

    let i2 = Ensemble::run("i2", &[PolicyKind::Ucb, PolicyKind::Cucb, PolicyKind::CtsBeta, PolicyKind::CtsGauss]);
    let i1 = Ensemble::run(
        "i1",
        &[
            PolicyKind::Ucb,
            PolicyKind::TsBeta,
            PolicyKind::Cucb,
            PolicyKind::CtsBeta,
            PolicyKind::CtsGauss,
        ],
    );
    results.extend([a3(&i2), a4(&i1), a5(&i1), a8(&i1, &i2)]);
    results.sort_by_key(|r| r.id[1..].parse::<u32>().unwrap());

    for r in &results {
        println!("{} {:4} {}", if r.pass { "PASS" } else { "FAIL" }, r.id, r.detail);
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        results.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
