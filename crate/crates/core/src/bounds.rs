//! Numerical AoI-regret bounds.
//!
//! Lower bound for alpha-consistent policies, and the CUCB / Gaussian-CTS
//! upper bounds built from the expected sub-optimal pull counts of
//! competitive and non-competitive arms. All logarithms are natural.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::instance::InstanceSummary;
use crate::scalar::Scalar;

pub const DEFAULT_SEARCH_CAP: u64 = 1_000_000_000_000;

/// Relative size below which series terms stop contributing.
const SERIES_RTOL: f64 = 1e-15;

/// Horizon threshold: the first slot at which the logarithmic branch of an
/// upper bound applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threshold {
    At(u64),
    Infeasible,
}

impl Threshold {
    pub fn slot(self) -> Option<u64> {
        match self {
            Threshold::At(t) => Some(t),
            Threshold::Infeasible => None,
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::At(t) => write!(f, "{t}"),
            Threshold::Infeasible => f.write_str("INFEASIBLE"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundParams<T> {
    pub alpha: T,
    /// Constant of the alpha-consistency pull-count bound.
    pub m: T,
    /// KL divergence between each strictly competitive arm's reward
    /// distribution and its perturbed counterpart, keyed by arm index.
    pub divergences: BTreeMap<usize, T>,
    pub beta: T,
    pub search_cap: u64,
}

impl<T: Float> BoundParams<T> {
    pub fn new(alpha: T, m: T, beta: T) -> Self {
        Self {
            alpha,
            m,
            divergences: BTreeMap::new(),
            beta,
            search_cap: DEFAULT_SEARCH_CAP,
        }
    }

    pub fn with_divergence(mut self, arm: usize, divergence: T) -> Self {
        self.divergences.insert(arm, divergence);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let zero = T::zero();
        if !(self.alpha > zero && self.alpha < T::one()) {
            return Err(Error::InvalidConfig("alpha must lie in (0, 1)".into()));
        }
        if !(self.m > zero) {
            return Err(Error::InvalidConfig("M must be positive".into()));
        }
        if !(self.beta > T::one()) {
            return Err(Error::InvalidConfig("beta must exceed 1".into()));
        }
        if let Some((arm, _)) = self.divergences.iter().find(|(_, d)| !(**d > zero)) {
            return Err(Error::InvalidConfig(format!("divergence for arm {} must be positive", arm + 1)));
        }
        Ok(())
    }
}

/// `KL(Ber(p) || Ber(q))` in nats, with `0 ln 0 = 0`. Infinite when `q` is 0
/// or 1 and `p` differs.
pub fn bernoulli_kl<T: Float>(p: T, q: T) -> T {
    let term = |a: T, b: T| -> T {
        if a == T::zero() {
            T::zero()
        } else if b == T::zero() {
            T::infinity()
        } else {
            a * (a / b).ln()
        }
    };
    term(p, q) + term(T::one() - p, T::one() - q)
}

fn cast<T: Float>(x: f64) -> T {
    T::from(x).expect("float literal representable")
}

fn count<T: Float>(x: u64) -> T {
    T::from(x).expect("integer representable")
}

/// Gap that the threshold conditions compare against: the smallest of
/// `Delta_min` and the pseudo-gaps of the non-competitive arms.
pub fn threshold_gap<T: Float + Scalar>(summary: &InstanceSummary<T>) -> T {
    summary
        .non_competitive()
        .into_iter()
        .map(|k| summary.pseudo_gaps[k])
        .fold(summary.delta_min(), |acc, g| acc.min(g))
}

/// Smallest integer `tau` in `[floor, cap]` with `holds(tau)`, assuming
/// `holds` is monotone (false then true) on that range.
fn first_true(floor: u64, cap: u64, holds: impl Fn(u64) -> bool) -> Threshold {
    if floor > cap || !holds(cap) {
        return Threshold::Infeasible;
    }
    if holds(floor) {
        return Threshold::At(floor);
    }
    let (mut lo, mut hi) = (floor, cap);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Threshold::At(hi)
}

/// `gap >= scale * sqrt(c * ln tau / tau)`.
fn gap_condition<T: Float>(gap: T, scale: T, c: T, tau: u64) -> bool {
    let tau = count::<T>(tau);
    gap >= scale * (c * tau.ln() / tau).sqrt()
}

/// `t0 = inf { tau >= 2 : g >= 4 sqrt(2 K ln tau / tau) }`.
pub fn t0_condition<T: Float + Scalar>(summary: &InstanceSummary<T>, tau: u64) -> bool {
    let k = count::<T>(summary.num_arms as u64);
    gap_condition(threshold_gap(summary), cast(4.0), cast::<T>(2.0) * k, tau)
}

pub fn solve_t0<T: Float + Scalar>(summary: &InstanceSummary<T>, cap: u64) -> Result<Threshold> {
    if !(threshold_gap(summary) > T::zero()) {
        return Err(Error::NoPositiveGap);
    }
    if t0_condition(summary, 2) {
        return Ok(Threshold::At(2));
    }
    // sqrt(ln tau / tau) peaks at e, so the condition is monotone from 3 on.
    Ok(first_true(3, cap, |tau| t0_condition(summary, tau)))
}

/// `t_b = inf { tau >= exp(11 beta) : g >= 6 sqrt(2 K beta ln tau / tau) }`.
pub fn tb_condition<T: Float + Scalar>(summary: &InstanceSummary<T>, beta: T, tau: u64) -> bool {
    let k = count::<T>(summary.num_arms as u64);
    gap_condition(threshold_gap(summary), cast(6.0), cast::<T>(2.0) * k * beta, tau)
}

/// `ceil(exp(11 beta))`, saturating at `u64::MAX`.
pub fn tb_floor<T: Float>(beta: T) -> u64 {
    let floor = (cast::<T>(11.0) * beta).exp().ceil();
    floor.to_u64().unwrap_or(u64::MAX)
}

pub fn solve_tb<T: Float + Scalar>(summary: &InstanceSummary<T>, beta: T, cap: u64) -> Result<Threshold> {
    if !(threshold_gap(summary) > T::zero()) {
        return Err(Error::NoPositiveGap);
    }
    // The floor exceeds e, where the condition is already monotone.
    Ok(first_true(tb_floor(beta), cap, |tau| tb_condition(summary, beta, tau)))
}

/// Leading terms of a power sum that are added one by one.
const EXACT_TERMS: u64 = 100_000;

/// `sum_{t=from}^{to} t^-p` for `p > 1`. The first [`EXACT_TERMS`] terms are
/// summed directly; the rest is the midpoint-rule integral
/// `int_{n+1/2}^{to+1/2} t^-p dt`, whose relative error is of order
/// `p (p+1) / (24 n^2)`.
pub fn power_sum<T: Float>(from: u64, to: u64, p: T) -> T {
    let from = from.max(1);
    if from > to {
        return T::zero();
    }
    let last_exact = to.min(from.saturating_add(EXACT_TERMS - 1));
    let mut sum = T::zero();
    for t in from..=last_exact {
        sum = sum + count::<T>(t).powf(-p);
    }
    if last_exact < to {
        let half = cast::<T>(0.5);
        let (a, b) = (count::<T>(last_exact) + half, count::<T>(to) + half);
        let q = T::one() - p;
        sum = sum + (b.powf(q) - a.powf(q)) / q;
    }
    sum
}

/// `sum_{t=1}^{T} 3 t^-3`.
pub fn inverse_cube_series<T: Float>(horizon: u64) -> T {
    cast::<T>(3.0) * power_sum(1, horizon, cast(3.0))
}

/// `sum_{t=1}^{T} 2 K t exp(-t Delta_min^2 / (2K))`.
///
/// Terms rise until `t = 2K / Delta_min^2` and then fall with ratio
/// `r_t = (t+1)/t * exp(-Delta_min^2 / 2K) < 1`, so past the peak the
/// remainder is at most `term * r / (1 - r)`; summation stops once that
/// bound drops below the relative tolerance.
pub fn exponential_series<T: Float>(arms: usize, delta_min: T, horizon: u64) -> T {
    let k = count::<T>(arms as u64);
    let two_k = cast::<T>(2.0) * k;
    let rate = delta_min * delta_min / two_k;
    if !(rate > T::zero()) {
        // No decay: the series grows like T^2.
        let t = count::<T>(horizon);
        return k * t * (t + T::one());
    }
    let peak = T::one() / rate;
    let rtol = cast::<T>(SERIES_RTOL);
    let mut sum = T::zero();
    for step in 1..=horizon {
        let t = count::<T>(step);
        let term = two_k * t * (-t * rate).exp();
        sum = sum + term;
        if t > peak {
            let ratio = (t + T::one()) / t * (-rate).exp();
            if ratio < T::one() && term * ratio / (T::one() - ratio) <= rtol * sum {
                break;
            }
        }
    }
    sum
}

/// Non-competitive pull bound under CUCB (the same for every such arm):
/// `K t0 + K^3 sum_{t=K t0}^{T} 2 (t/K)^-2 + sum_{t=1}^{T} 3 t^-3`.
pub fn cucb_noncompetitive_term<T: Float>(arms: usize, t0: u64, horizon: u64) -> T {
    let k = count::<T>(arms as u64);
    let start = (arms as u64).saturating_mul(t0);
    // sum 2 (t/K)^-2 = 2 K^2 sum t^-2
    let tail = cast::<T>(2.0) * k * k * power_sum(start, horizon, cast(2.0));
    k * count::<T>(t0) + k * k * k * tail + inverse_cube_series(horizon)
}

/// Competitive pull bound under CUCB:
/// `8 ln T / Delta_k^2 + (1 + pi^2/3) + sum_{t=1}^{T} 2Kt exp(-t Delta_min^2 / 2K)`.
pub fn cucb_competitive_term<T: Float>(arms: usize, delta_k: T, delta_min: T, horizon: u64) -> T {
    let pi = cast::<T>(std::f64::consts::PI);
    cast::<T>(8.0) * count::<T>(horizon).ln() / (delta_k * delta_k)
        + T::one()
        + pi * pi / cast(3.0)
        + exponential_series(arms, delta_min, horizon)
}

/// Non-competitive pull bound under Gaussian CTS:
/// `K t_b + sum 3 t^-3 + K^2 sum_{t=K t_b}^{T} ((2K+3)(t/K)^-2 + (t/K)^(1-2 beta))`.
pub fn cts_noncompetitive_term<T: Float>(arms: usize, tb: u64, beta: T, horizon: u64) -> T {
    let k = count::<T>(arms as u64);
    let start = (arms as u64).saturating_mul(tb);
    let weight = cast::<T>(2.0) * k + cast(3.0);
    let exponent = T::one() - cast::<T>(2.0) * beta;
    let tail = weight * k * k * power_sum(start, horizon, cast(2.0))
        + k.powf(-exponent) * power_sum(start, horizon, -exponent);
    k * count::<T>(tb) + inverse_cube_series(horizon) + k * k * tail
}

/// Competitive pull bound under Gaussian CTS:
/// `18 ln(T Delta_k^2) / Delta_k^2 + exp(11 beta) + 9 / Delta_k^2 + sum 2Kt exp(...)`,
/// with the logarithm clamped at zero.
pub fn cts_competitive_term<T: Float>(arms: usize, delta_k: T, delta_min: T, beta: T, horizon: u64) -> T {
    let d2 = delta_k * delta_k;
    let log_term = (count::<T>(horizon) * d2).ln().max(T::zero());
    cast::<T>(18.0) * log_term / d2
        + (cast::<T>(11.0) * beta).exp()
        + cast::<T>(9.0) / d2
        + exponential_series(arms, delta_min, horizon)
}

/// `(1 - mu*) / (mu* mu_min) + (1/mu_min - 1/mu*) * weighted_pulls`.
pub fn assemble_upper<T: Float>(optimal_mean: T, mu_min: T, weighted_pulls: T) -> T {
    let constant = (T::one() - optimal_mean) / (optimal_mean * mu_min);
    let factor = T::one() / mu_min - T::one() / optimal_mean;
    if factor == T::zero() {
        return constant;
    }
    constant + factor * weighted_pulls
}

/// Linear small-horizon branch `(1/mu_min - 1/mu*) T`.
pub fn linear_branch<T: Float + Scalar>(summary: &InstanceSummary<T>, horizon: u64) -> T {
    (T::one() / summary.mu_min - T::one() / summary.optimal_mean) * count(horizon)
}

/// Per-arm pull bound that enters an upper bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmTerm<T> {
    pub arm: usize,
    pub competitive: bool,
    pub pulls: T,
}

/// Per-arm terms for CUCB, or `None` on the linear branch.
pub fn cucb_components<T: Float + Scalar>(
    summary: &InstanceSummary<T>,
    horizon: u64,
    t0: Threshold,
) -> Option<Vec<ArmTerm<T>>> {
    let t0 = t0.slot().filter(|&t0| horizon > t0)?;
    let delta_min = summary.delta_min();
    let nc = cucb_noncompetitive_term(summary.num_arms, t0, horizon);
    Some(arm_terms(summary, nc, |delta_k| {
        cucb_competitive_term(summary.num_arms, delta_k, delta_min, horizon)
    }))
}

/// Per-arm terms for Gaussian CTS, or `None` on the linear branch.
pub fn cts_components<T: Float + Scalar>(
    summary: &InstanceSummary<T>,
    horizon: u64,
    beta: T,
    tb: Threshold,
) -> Option<Vec<ArmTerm<T>>> {
    let tb = tb.slot().filter(|&tb| horizon > tb)?;
    let delta_min = summary.delta_min();
    let nc = cts_noncompetitive_term(summary.num_arms, tb, beta, horizon);
    Some(arm_terms(summary, nc, |delta_k| {
        cts_competitive_term(summary.num_arms, delta_k, delta_min, beta, horizon)
    }))
}

fn arm_terms<T: Float + Scalar>(
    summary: &InstanceSummary<T>,
    noncompetitive: T,
    competitive: impl Fn(T) -> T,
) -> Vec<ArmTerm<T>> {
    (0..summary.num_arms)
        .filter(|&k| k != summary.optimal_arm)
        .map(|k| {
            let is_competitive = summary.competitive_suboptimal.contains(&k);
            ArmTerm {
                arm: k,
                competitive: is_competitive,
                pulls: if is_competitive {
                    competitive(summary.gaps[k])
                } else {
                    noncompetitive
                },
            }
        })
        .collect()
}

fn weighted<T: Float + Scalar>(summary: &InstanceSummary<T>, terms: &[ArmTerm<T>]) -> T {
    terms
        .iter()
        .fold(T::zero(), |acc, term| acc + summary.gaps[term.arm] * term.pulls)
}

/// Upper bound on the expected AoI regret of CUCB at horizon `T`.
pub fn cucb_upper<T: Float + Scalar>(summary: &InstanceSummary<T>, horizon: u64, t0: Threshold) -> T {
    match cucb_components(summary, horizon, t0) {
        Some(terms) => assemble_upper(summary.optimal_mean, summary.mu_min, weighted(summary, &terms)),
        None => linear_branch(summary, horizon),
    }
}

/// Upper bound on the expected AoI regret of Gaussian CTS at horizon `T`.
pub fn cts_upper<T: Float + Scalar>(summary: &InstanceSummary<T>, horizon: u64, beta: T, tb: Threshold) -> T {
    match cts_components(summary, horizon, beta, tb) {
        Some(terms) => assemble_upper(summary.optimal_mean, summary.mu_min, weighted(summary, &terms)),
        None => linear_branch(summary, horizon),
    }
}

/// Lower bound on the AoI regret of any alpha-consistent policy, floored at
/// zero. Zero when no arm is strictly competitive.
pub fn lower_bound<T: Float + Scalar>(summary: &InstanceSummary<T>, params: &BoundParams<T>, horizon: u64) -> Result<T> {
    let log_term = (T::one() - params.alpha) * count::<T>(horizon).ln() - (cast::<T>(4.0) * params.m).ln();
    let mut best = T::zero();
    for &k in &summary.strictly_competitive {
        let divergence = *params.divergences.get(&k).ok_or(Error::MissingDivergence(k + 1))?;
        let value = summary.gaps[k] / divergence * log_term / summary.optimal_mean;
        best = best.max(value);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HorizonBounds<T> {
    pub horizon: u64,
    pub lower: Option<T>,
    pub upper_cucb: T,
    pub upper_cts: T,
    /// Per-arm pull bounds; empty on the linear branch.
    pub cucb_terms: Vec<ArmTerm<T>>,
    pub cts_terms: Vec<ArmTerm<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport<T> {
    pub t0: Threshold,
    pub tb: Threshold,
    pub beta: T,
    pub alpha: T,
    pub m: T,
    pub rows: Vec<HorizonBounds<T>>,
}

/// Evaluates every bound over `grid`. The lower bound is skipped when
/// `include_lower` is false.
pub fn evaluate_bounds<T: Float + Scalar>(
    summary: &InstanceSummary<T>,
    params: &BoundParams<T>,
    grid: &[u64],
    include_lower: bool,
) -> Result<BoundReport<T>> {
    params.validate()?;
    let t0 = solve_t0(summary, params.search_cap)?;
    let tb = solve_tb(summary, params.beta, params.search_cap)?;
    let rows = grid
        .iter()
        .map(|&horizon| {
            let lower = if include_lower {
                Some(lower_bound(summary, params, horizon)?)
            } else {
                None
            };
            let cucb_terms = cucb_components(summary, horizon, t0);
            let cts_terms = cts_components(summary, horizon, params.beta, tb);
            Ok(HorizonBounds {
                horizon,
                lower,
                upper_cucb: cucb_upper(summary, horizon, t0),
                upper_cts: cts_upper(summary, horizon, params.beta, tb),
                cucb_terms: cucb_terms.unwrap_or_default(),
                cts_terms: cts_terms.unwrap_or_default(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundReport {
        t0,
        tb,
        beta: params.beta,
        alpha: params.alpha,
        m: params.m,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{builtin, classify_arms, BanditInstance};
    use approx::assert_relative_eq;

    fn summary(name: &str) -> InstanceSummary<f64> {
        let inst: BanditInstance<f64> = builtin(name).unwrap();
        classify_arms(&inst).unwrap()
    }

    #[test]
    fn kl_examples() {
        assert_eq!(bernoulli_kl(0.5, 0.5), 0.0);
        assert_relative_eq!(bernoulli_kl(0.2, 0.4), 0.091_516_221_849_435_78, epsilon = 1e-12);
        assert!(bernoulli_kl(0.3, 1.0).is_infinite());
        assert!(bernoulli_kl(0.3, 0.0).is_infinite());
        assert_eq!(bernoulli_kl(1.0, 1.0), 0.0);
        assert_eq!(bernoulli_kl(0.0, 0.0), 0.0);
    }

    #[test]
    fn t0_on_i1_matches_frozen_value() {
        let s = summary("i1");
        assert_relative_eq!(threshold_gap(&s), 0.1, epsilon = 1e-15);
        let t0 = solve_t0(&s, DEFAULT_SEARCH_CAP).unwrap();
        assert_eq!(t0, Threshold::At(152_792));
        assert!(t0_condition(&s, 152_792));
        assert!(!t0_condition(&s, 152_791));
    }

    #[test]
    fn t0_small_cap_is_infeasible() {
        assert_eq!(solve_t0(&summary("i1"), 100).unwrap(), Threshold::Infeasible);
    }

    #[test]
    fn tb_floor_binds_for_large_gap() {
        // With g = 1 the condition holds at exp(11 beta) for beta = 1.01.
        let mut s = summary("i2");
        s.gaps = vec![1.0, 1.0, 1.0, 0.0];
        s.pseudo_gaps = vec![1.0, 1.0, 1.0, 0.0];
        assert_eq!(solve_tb(&s, 1.01, DEFAULT_SEARCH_CAP).unwrap(), Threshold::At(tb_floor(1.01)));
        assert_eq!(tb_floor(1.01), 66_837);
    }

    #[test]
    fn tb_cap_below_floor_is_infeasible() {
        assert_eq!(solve_tb(&summary("i1"), 1.5, 1_000).unwrap(), Threshold::Infeasible);
    }

    #[test]
    fn tb_on_i1_matches_frozen_values() {
        let s = summary("i1");
        assert_eq!(solve_tb(&s, 1.01, DEFAULT_SEARCH_CAP).unwrap(), Threshold::At(373_195));
        assert_eq!(solve_tb(&s, 1.5, DEFAULT_SEARCH_CAP).unwrap(), Threshold::At(14_650_720));
    }

    #[test]
    fn zero_gap_rejected() {
        let mut s = summary("i1");
        s.gaps = vec![0.0; 4];
        assert!(matches!(solve_t0(&s, 100), Err(Error::NoPositiveGap)));
    }

    #[test]
    fn linear_branch_on_i1() {
        let s = summary("i1");
        let t0 = solve_t0(&s, DEFAULT_SEARCH_CAP).unwrap();
        assert_relative_eq!(cucb_upper(&s, 100, t0), 1000.0 / 3.0, epsilon = 1e-12);
        let tb = solve_tb(&s, 1.5, DEFAULT_SEARCH_CAP).unwrap();
        assert_relative_eq!(cts_upper(&s, 5_000, 1.5, tb), 5_000.0 * 10.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn i2_upper_is_flat_between_2t0_and_4t0() {
        let s = summary("i2");
        let t0 = solve_t0(&s, DEFAULT_SEARCH_CAP).unwrap();
        let t0v = t0.slot().unwrap();
        assert_eq!(t0v, 33_326);
        let a = cucb_upper(&s, 2 * t0v, t0);
        let b = cucb_upper(&s, 4 * t0v, t0);
        assert!(b >= a && b - a < 1.0, "{a} -> {b}");
    }

    #[test]
    fn equal_means_leave_only_the_constant() {
        assert_relative_eq!(assemble_upper(0.5, 0.5, 1e9), 0.5 / 0.25);
    }

    #[test]
    fn smaller_beta_gives_heavier_tail() {
        let tail = |beta: f64| cts_noncompetitive_term(4, 10, beta, 10_000) - cts_noncompetitive_term(4, 10, beta, 40);
        assert!(tail(1.01) > tail(2.0));
    }

    #[test]
    fn cts_log_term_clamped_for_tiny_horizon() {
        // T Delta^2 = 2 * 0.01 < 1: the log term would be negative.
        let clamped = cts_competitive_term(4, 0.1, 0.1, 1.5, 2);
        let expected = (16.5f64).exp() + 900.0 + exponential_series(4, 0.1, 2);
        assert_relative_eq!(clamped, expected, epsilon = 1e-6);
    }

    #[test]
    fn lower_bound_examples() {
        let s = summary("i1");
        let params = BoundParams::new(0.5, 1.0, 1.5).with_divergence(2, 0.05);
        let v = lower_bound(&s, &params, 1_000_000).unwrap();
        assert_relative_eq!(v, 18.404_869_726_207_49, epsilon = 1e-9);
        assert_eq!(lower_bound(&s, &params, 10).unwrap(), 0.0);

        let missing = BoundParams::new(0.5, 1.0, 1.5);
        assert!(matches!(lower_bound(&s, &missing, 100), Err(Error::MissingDivergence(3))));

        let s2 = summary("i2");
        for t in [1, 10, 1_000_000] {
            assert_eq!(lower_bound(&s2, &missing, t).unwrap(), 0.0);
        }
    }

    #[test]
    fn power_sum_matches_direct_sum_past_the_exact_prefix() {
        for (from, p) in [(1u64, 2.0f64), (37, 2.0), (5, 3.0), (2, 1.02)] {
            let to = 700_000;
            let direct: f64 = (from..=to).map(|t| (t as f64).powf(-p)).sum();
            assert_relative_eq!(power_sum(from, to, p), direct, max_relative = 1e-12);
        }
        assert_eq!(power_sum::<f64>(10, 9, 2.0), 0.0);
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        assert_relative_eq!(power_sum(1, u64::MAX / 2, 2.0), zeta2, max_relative = 1e-12);
    }

    #[test]
    fn exponential_series_matches_direct_sum() {
        let direct: f64 = (1..=200_000u64)
            .map(|t| 8.0 * t as f64 * (-(t as f64) * 0.01 / 8.0).exp())
            .sum();
        assert_relative_eq!(exponential_series(4, 0.1, 200_000), direct, max_relative = 1e-12);
    }

    #[test]
    fn report_over_grid() {
        let s = summary("i2");
        let params = BoundParams::new(0.5, 1.0, 1.5);
        let report = evaluate_bounds(&s, &params, &[100, 1_000, 100_000], true).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert!(report.rows.iter().all(|r| r.lower == Some(0.0)));
        assert!(report.rows[2].cts_terms.is_empty());
        assert_eq!(report.rows[2].cucb_terms.len(), 3);
    }

    #[test]
    fn params_validated() {
        assert!(BoundParams::new(1.0, 1.0, 1.5).validate().is_err());
        assert!(BoundParams::new(0.5, 0.0, 1.5).validate().is_err());
        assert!(BoundParams::new(0.5, 1.0, 1.0).validate().is_err());
        assert!(BoundParams::new(0.5, 1.0, 1.5).with_divergence(0, -1.0).validate().is_err());
    }

    #[test]
    fn bounds_work_in_single_precision() {
        let inst: BanditInstance<f32> = builtin("i1").unwrap();
        let s = classify_arms(&inst).unwrap();
        let t0 = solve_t0(&s, DEFAULT_SEARCH_CAP).unwrap().slot().unwrap();
        assert!(t0_condition(&s, t0) && !t0_condition(&s, t0 - 1));
        assert!((t0 as i64 - 152_792).abs() < 2_000);
    }
}
