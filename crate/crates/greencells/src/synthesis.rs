//! Online (receding-horizon) strategy synthesis.
//!
//! Every control period the controller plans over a short horizon `h` (180
//! minutes by default): candidate ON/OFF sequences for the controllable
//! (capacity-layer) cells are scored by averaging simulated rollouts, and the
//! sequence with the lowest estimated reward wins. Only the first period of
//! the winning [`Strategy`] is executed; the rest is discarded and re-planned
//! at the next boundary.
//!
//! Three interchangeable optimizers search the candidate space:
//!
//! * `exhaustive`: enumerates all `2^(k*m)` sequences (k controllable cells,
//!   m periods); exact, capped at [`DEFAULT_DECISION_BIT_CAP`] bits.
//! * `hill_climb`: steepest single-bit descent with deterministic restarts
//!   (all-ON, all-OFF, then seeded random starts).
//! * `cross_entropy`: samples from independent per-bit ON probabilities,
//!   updates them toward the elite fraction of each generation.
//!
//! Both stochastic optimizers enumerate the whole space instead of sampling
//! whenever the candidate budget covers it, and all candidates within one
//! call are scored with common random numbers (the same rollout seeds), so
//! estimates are directly comparable.
//!
//! [`brute_force_optimal`] is the independent oracle: a deliberately plain
//! enumeration that re-simulates every candidate with the ordinary
//! step-reward path. It shares only the elementary reward/demand kernels with
//! the fast evaluator, never its precomputation, and the two must agree
//! bit-for-bit on deterministic instances.

use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::action::ActionVector;
use crate::network::Network;
use crate::reward::{cell_energy, pixel_penalty, step_reward, RewardParams};
use crate::rng::{derive_seed, rng_from_seed};
use crate::sim::{ControlContext, Controller};
use crate::traffic::{DemandModel, TrafficError};

/// Exhaustive enumeration refuses decision spaces larger than this.
pub const DEFAULT_DECISION_BIT_CAP: u32 = 20;

#[derive(Debug, Error)]
pub enum SynthesisError {
    #[error("short horizon ({horizon} min) must be a positive multiple of the control period ({period} min)")]
    HorizonPeriodMismatch { horizon: u32, period: u32 },
    #[error("control period ({period} min) must be a positive multiple of the accumulation step ({step} min)")]
    PeriodStepMismatch { period: u32, step: u32 },
    #[error("rollouts_per_candidate must be >= 1")]
    NoRollouts,
    #[error("candidate_budget must be >= 1")]
    NoBudget,
    #[error("planning window [{start_minute}, {end_minute}) min exceeds the trace ({trace_minutes} min)")]
    OutOfTrace {
        start_minute: u64,
        end_minute: u64,
        trace_minutes: u64,
    },
    #[error("decision space of {bits} bits exceeds the cap of {cap} bits")]
    DecisionSpaceTooLarge { bits: u32, cap: u32 },
    #[error(transparent)]
    Traffic(#[from] TrafficError),
}

/// Candidate search algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Exhaustive,
    HillClimb,
    CrossEntropy,
}

impl OptimizerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OptimizerKind::Exhaustive => "exhaustive",
            OptimizerKind::HillClimb => "hill-climb",
            OptimizerKind::CrossEntropy => "cross-entropy",
        }
    }
}

/// Configuration of one short-horizon synthesis call (and of the controllers
/// that repeat it every period).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisConfig {
    pub short_horizon_minutes: u32,
    pub control_period_minutes: u32,
    pub rollouts_per_candidate: u32,
    pub candidate_budget: u32,
    pub optimizer: OptimizerKind,
    pub seed: u64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            short_horizon_minutes: 180,
            control_period_minutes: 60,
            rollouts_per_candidate: 1,
            candidate_budget: 256,
            optimizer: OptimizerKind::HillClimb,
            seed: 0,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self, params: &RewardParams) -> Result<(), SynthesisError> {
        if self.control_period_minutes == 0
            || self.short_horizon_minutes == 0
            || self.short_horizon_minutes % self.control_period_minutes != 0
        {
            return Err(SynthesisError::HorizonPeriodMismatch {
                horizon: self.short_horizon_minutes,
                period: self.control_period_minutes,
            });
        }
        if params.step_minutes == 0 || self.control_period_minutes % params.step_minutes != 0 {
            return Err(SynthesisError::PeriodStepMismatch {
                period: self.control_period_minutes,
                step: params.step_minutes,
            });
        }
        if self.rollouts_per_candidate == 0 {
            return Err(SynthesisError::NoRollouts);
        }
        if self.candidate_budget == 0 {
            return Err(SynthesisError::NoBudget);
        }
        Ok(())
    }

    pub fn periods(&self) -> usize {
        (self.short_horizon_minutes / self.control_period_minutes) as usize
    }
}

/// Open-loop action sequence over a short horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    pub start_period: usize,
    pub actions: Vec<ActionVector>,
}

/// Which cells and pixels one synthesis call optimizes over.
///
/// The monolithic scope covers everything; the distributed controller builds
/// one scope per partition. Cells outside `controllable` are assumed ON for
/// contribution purposes; energy is counted only for `energy_cells` and
/// penalties only for `pixels`.
#[derive(Debug, Clone)]
pub(crate) struct Scope {
    pub controllable: Vec<usize>,
    pub energy_cells: Vec<usize>,
    pub pixels: Vec<usize>,
}

impl Scope {
    pub fn monolithic(net: &Network) -> Self {
        Scope {
            controllable: net.capacity_cells().to_vec(),
            energy_cells: (0..net.nr_cells()).collect(),
            pixels: (0..net.nr_pixels()).collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// Candidate ordering
// ---------------------------------------------------------------------------

/// Total order on candidates: lower reward first, then more cells OFF, then
/// lexicographically smaller bit pattern (OFF < ON). Used identically by
/// every optimizer and by the oracle, so ties resolve the same way on every
/// path and parallel min-reductions stay order-independent.
pub(crate) fn candidate_cmp(
    reward_a: f64,
    bits_a: &[bool],
    reward_b: f64,
    bits_b: &[bool],
) -> std::cmp::Ordering {
    reward_a
        .partial_cmp(&reward_b)
        .expect("candidate rewards are finite")
        .then_with(|| {
            let off_a = bits_a.iter().filter(|&&b| !b).count();
            let off_b = bits_b.iter().filter(|&&b| !b).count();
            off_b.cmp(&off_a)
        })
        .then_with(|| bits_a.cmp(bits_b))
}

pub(crate) fn candidate_better(reward_a: f64, bits_a: &[bool], reward_b: f64, bits_b: &[bool]) -> bool {
    candidate_cmp(reward_a, bits_a, reward_b, bits_b) == std::cmp::Ordering::Less
}

/// Same order over `(reward, mask)` pairs without materializing bit vectors.
fn better_mask(a: (f64, u64), b: (f64, u64), bits_total: u32) -> (f64, u64) {
    let (ra, ma) = a;
    let (rb, mb) = b;
    if ra != rb {
        return if ra < rb { a } else { b };
    }
    // More cells OFF == fewer set bits.
    let on_a = ma.count_ones();
    let on_b = mb.count_ones();
    if on_a != on_b {
        return if on_a < on_b { a } else { b };
    }
    let diff = ma ^ mb;
    if diff == 0 {
        return a;
    }
    // First differing flat index; prefer the mask that is OFF there.
    let i = diff.trailing_zeros().min(bits_total);
    if (ma >> i) & 1 == 0 {
        a
    } else {
        b
    }
}

fn mask_to_bits(mask: u64, bits_total: u32) -> Vec<bool> {
    (0..bits_total).map(|i| (mask >> i) & 1 == 1).collect()
}

// ---------------------------------------------------------------------------
// Rollout evaluation with common random numbers
// ---------------------------------------------------------------------------

/// Scores candidate bit sequences by simulated rollouts from a fixed start
/// period. Demand (per rollout) and per-cell ON-energy are precomputed once
/// per synthesis call; candidate evaluation is then pure arithmetic and safe
/// to run concurrently.
pub(crate) struct RolloutEvaluator<'a> {
    net: &'a Network,
    scope: &'a Scope,
    params: RewardParams,
    periods: usize,
    steps_per_period: usize,
    step_hours: f64,
    /// `energy_if_on[step][i]` for `scope.energy_cells[i]`.
    energy_if_on: Vec<Vec<f64>>,
    /// `demand[rollout][step][q]` for `scope.pixels[q]`.
    demand: Vec<Vec<Vec<f64>>>,
    /// cell id -> controllable slot within the scope.
    bit_index: Vec<Option<usize>>,
    k: usize,
}

impl<'a> RolloutEvaluator<'a> {
    pub fn new(
        net: &'a Network,
        model: &'a DemandModel,
        params: &RewardParams,
        t0_period: usize,
        periods: usize,
        cfg: &SynthesisConfig,
        scope: &'a Scope,
    ) -> Result<Self, SynthesisError> {
        let period_min = cfg.control_period_minutes as u64;
        let start_minute = t0_period as u64 * period_min;
        let end_minute = start_minute + periods as u64 * period_min;
        let trace_minutes = model.trace().total_minutes();
        if end_minute > trace_minutes {
            return Err(SynthesisError::OutOfTrace {
                start_minute,
                end_minute,
                trace_minutes,
            });
        }
        let steps_per_period = (cfg.control_period_minutes / params.step_minutes) as usize;
        let total_steps = periods * steps_per_period;
        let step_hours = params.step_hours();

        let trace_indices: Vec<usize> = (0..total_steps)
            .map(|s| {
                let t = start_minute + s as u64 * params.step_minutes as u64;
                model.trace().step_at_minute(t)
            })
            .collect::<Result<_, _>>()?;

        let energy_if_on: Vec<Vec<f64>> = trace_indices
            .iter()
            .map(|&idx| {
                scope
                    .energy_cells
                    .iter()
                    .map(|&c| {
                        let cell = net.cell(c);
                        let carried_mb = model.trace().sample(c, idx) * step_hours;
                        cell_energy(cell, true, carried_mb, step_hours)
                    })
                    .collect()
            })
            .collect();

        let mut demand = Vec::with_capacity(cfg.rollouts_per_candidate as usize);
        for r in 0..cfg.rollouts_per_candidate as u64 {
            let mut rng = rng_from_seed(derive_seed(cfg.seed, 2 * r));
            let mut per_step = Vec::with_capacity(total_steps);
            for &idx in &trace_indices {
                let mut row = Vec::with_capacity(scope.pixels.len());
                for &p in &scope.pixels {
                    row.push(model.pixel_demand(net, idx, p, &mut rng)?);
                }
                per_step.push(row);
            }
            demand.push(per_step);
        }

        let mut bit_index = vec![None; net.nr_cells()];
        for (j, &c) in scope.controllable.iter().enumerate() {
            bit_index[c] = Some(j);
        }

        Ok(RolloutEvaluator {
            net,
            scope,
            params: *params,
            periods,
            steps_per_period,
            step_hours,
            energy_if_on,
            demand,
            bit_index,
            k: scope.controllable.len(),
        })
    }

    pub fn decision_bits(&self) -> u32 {
        (self.k * self.periods) as u32
    }

    /// Mean rollout reward of a candidate given any flat-bit accessor
    /// (`flat index = period * k + controllable slot`).
    fn evaluate_by<F: Fn(usize) -> bool>(&self, bit_at: F) -> f64 {
        let total_steps = self.periods * self.steps_per_period;
        let mut total = 0.0;
        for rollout in &self.demand {
            let mut energy = 0.0;
            let mut penalty = 0.0;
            for s in 0..total_steps {
                let offset = (s / self.steps_per_period) * self.k;
                let is_on = |c: usize| match self.bit_index[c] {
                    Some(j) => bit_at(offset + j),
                    None => true,
                };
                let mut e = 0.0;
                for (i, &c) in self.scope.energy_cells.iter().enumerate() {
                    if is_on(c) {
                        e += self.energy_if_on[s][i];
                    }
                }
                let demands = &rollout[s];
                let mut pen = 0.0;
                for (q, &p) in self.scope.pixels.iter().enumerate() {
                    let contribution = self.net.contribution_where(p, is_on);
                    pen += pixel_penalty(contribution, demands[q], &self.params);
                }
                energy += e;
                penalty += pen * self.step_hours;
            }
            total += energy + penalty;
        }
        total / self.demand.len() as f64
    }

    pub fn eval_bits(&self, bits: &[bool]) -> f64 {
        self.evaluate_by(|i| bits[i])
    }

    pub fn eval_mask(&self, mask: u64) -> f64 {
        self.evaluate_by(|i| (mask >> i) & 1 == 1)
    }
}

// ---------------------------------------------------------------------------
// Optimizers
// ---------------------------------------------------------------------------

struct SearchOutcome {
    bits: Vec<bool>,
    reward: f64,
    evaluations: usize,
    /// Best estimated reward after each evaluation (stochastic optimizers
    /// and the enumeration path; empty for parallel exhaustive search).
    best_so_far: Vec<f64>,
}

fn exhaustive_search(ev: &RolloutEvaluator<'_>, bits_total: u32) -> SearchOutcome {
    let total: u64 = 1 << bits_total;
    let best = (0..total)
        .into_par_iter()
        .map(|mask| (ev.eval_mask(mask), mask))
        .reduce_with(|a, b| better_mask(a, b, bits_total))
        .expect("decision space is non-empty");
    SearchOutcome {
        bits: mask_to_bits(best.1, bits_total),
        reward: best.0,
        evaluations: total as usize,
        best_so_far: Vec::new(),
    }
}

/// When the budget covers the whole space, sampling would only revisit
/// candidates: enumerate instead. Keeps budgeted optimizers exact on small
/// instances.
fn enumerate_if_covered(
    ev: &RolloutEvaluator<'_>,
    bits_total: u32,
    budget: usize,
) -> Option<SearchOutcome> {
    if bits_total >= 63 || (1u64 << bits_total) > budget as u64 {
        return None;
    }
    let total = 1u64 << bits_total;
    let mut best: Option<(f64, u64)> = None;
    let mut history = Vec::with_capacity(total as usize);
    for mask in 0..total {
        let reward = ev.eval_mask(mask);
        best = Some(match best {
            None => (reward, mask),
            Some(b) => better_mask((reward, mask), b, bits_total),
        });
        history.push(best.unwrap().0);
    }
    let (reward, mask) = best.expect("at least one candidate");
    Some(SearchOutcome {
        bits: mask_to_bits(mask, bits_total),
        reward,
        evaluations: total as usize,
        best_so_far: history,
    })
}

struct BestTracker {
    bits: Vec<bool>,
    reward: f64,
    history: Vec<f64>,
}

impl BestTracker {
    fn new() -> Self {
        BestTracker {
            bits: Vec::new(),
            reward: f64::INFINITY,
            history: Vec::new(),
        }
    }

    fn observe(&mut self, bits: &[bool], reward: f64) {
        if self.history.is_empty() || candidate_better(reward, bits, self.reward, &self.bits) {
            self.reward = reward;
            self.bits = bits.to_vec();
        }
        self.history.push(self.reward);
    }
}

fn hill_climb_search(
    ev: &RolloutEvaluator<'_>,
    bits_total: u32,
    budget: usize,
    seed: u64,
) -> SearchOutcome {
    if let Some(out) = enumerate_if_covered(ev, bits_total, budget) {
        return out;
    }
    let k = bits_total as usize;
    let mut rng = rng_from_seed(seed);
    let mut tracker = BestTracker::new();
    let mut evals = 0usize;
    let mut restart = 0usize;

    while evals < budget {
        let mut cur: Vec<bool> = match restart {
            0 => vec![true; k],
            1 => vec![false; k],
            _ => (0..k).map(|_| rng.random()).collect(),
        };
        restart += 1;
        let mut cur_reward = ev.eval_bits(&cur);
        evals += 1;
        tracker.observe(&cur, cur_reward);

        loop {
            // Steepest descent over single-bit flips.
            let mut best_neighbor: Option<(Vec<bool>, f64)> = None;
            for i in 0..k {
                if evals >= budget {
                    break;
                }
                let mut neighbor = cur.clone();
                neighbor[i] = !neighbor[i];
                let reward = ev.eval_bits(&neighbor);
                evals += 1;
                tracker.observe(&neighbor, reward);
                let replace = match &best_neighbor {
                    None => true,
                    Some((bb, br)) => candidate_better(reward, &neighbor, *br, bb),
                };
                if replace {
                    best_neighbor = Some((neighbor, reward));
                }
            }
            match best_neighbor {
                Some((nb, r)) if candidate_better(r, &nb, cur_reward, &cur) => {
                    cur = nb;
                    cur_reward = r;
                }
                _ => break, // local optimum (or budget ran out mid-scan)
            }
            if evals >= budget {
                break;
            }
        }
    }

    SearchOutcome {
        bits: tracker.bits,
        reward: tracker.reward,
        evaluations: evals,
        best_so_far: tracker.history,
    }
}

const CE_ALPHA: f64 = 0.7;
const CE_ELITE_FRACTION: f64 = 0.2;
const CE_PROB_FLOOR: f64 = 0.02;

fn cross_entropy_search(
    ev: &RolloutEvaluator<'_>,
    bits_total: u32,
    budget: usize,
    seed: u64,
) -> SearchOutcome {
    if let Some(out) = enumerate_if_covered(ev, bits_total, budget) {
        return out;
    }
    let k = bits_total as usize;
    let mut rng = rng_from_seed(seed);
    let mut probs = vec![0.5f64; k];
    let population = (4 * k).clamp(16, 64);
    let mut tracker = BestTracker::new();
    let mut evals = 0usize;
    let mut first_generation = true;

    while evals < budget {
        let size = population.min(budget - evals);
        let mut generation: Vec<Vec<bool>> = Vec::with_capacity(size);
        if first_generation {
            // The all-ON baseline anchors the estimate at ALLON's reward.
            generation.push(vec![true; k]);
            first_generation = false;
        }
        while generation.len() < size {
            generation.push((0..k).map(|i| rng.random_bool(probs[i])).collect());
        }
        let rewards: Vec<f64> = generation.par_iter().map(|b| ev.eval_bits(b)).collect();
        evals += size;
        for (bits, &reward) in generation.iter().zip(&rewards) {
            tracker.observe(bits, reward);
        }

        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by(|&a, &b| {
            candidate_cmp(rewards[a], &generation[a], rewards[b], &generation[b])
        });
        let elites = ((size as f64 * CE_ELITE_FRACTION).ceil() as usize).max(1);
        for j in 0..k {
            let mean = order[..elites]
                .iter()
                .filter(|&&i| generation[i][j])
                .count() as f64
                / elites as f64;
            probs[j] = ((1.0 - CE_ALPHA) * probs[j] + CE_ALPHA * mean)
                .clamp(CE_PROB_FLOOR, 1.0 - CE_PROB_FLOOR);
        }
    }

    SearchOutcome {
        bits: tracker.bits,
        reward: tracker.reward,
        evaluations: evals,
        best_so_far: tracker.history,
    }
}

// ---------------------------------------------------------------------------
// Synthesis entry points
// ---------------------------------------------------------------------------

/// Diagnostics of one synthesis call.
#[derive(Debug, Clone)]
pub struct SynthesisStats {
    pub decision_bits: u32,
    pub evaluations: usize,
    pub estimated_reward: f64,
    /// Best estimated reward after each candidate evaluation; empty for the
    /// parallel exhaustive path.
    pub best_so_far: Vec<f64>,
    pub wall_time: Duration,
}

pub(crate) struct ScopedOutcome {
    pub bits: Vec<bool>,
    pub stats: SynthesisStats,
}

pub(crate) fn synthesize_scoped(
    net: &Network,
    model: &DemandModel,
    params: &RewardParams,
    t0_period: usize,
    cfg: &SynthesisConfig,
    scope: &Scope,
) -> Result<ScopedOutcome, SynthesisError> {
    cfg.validate(params)?;
    let started = Instant::now();
    let periods = cfg.periods();
    let ev = RolloutEvaluator::new(net, model, params, t0_period, periods, cfg, scope)?;
    let bits_total = ev.decision_bits();
    let search_seed = derive_seed(cfg.seed, 1);
    let outcome = match cfg.optimizer {
        OptimizerKind::Exhaustive => {
            if bits_total > DEFAULT_DECISION_BIT_CAP {
                return Err(SynthesisError::DecisionSpaceTooLarge {
                    bits: bits_total,
                    cap: DEFAULT_DECISION_BIT_CAP,
                });
            }
            exhaustive_search(&ev, bits_total)
        }
        OptimizerKind::HillClimb => {
            hill_climb_search(&ev, bits_total, cfg.candidate_budget as usize, search_seed)
        }
        OptimizerKind::CrossEntropy => {
            cross_entropy_search(&ev, bits_total, cfg.candidate_budget as usize, search_seed)
        }
    };
    Ok(ScopedOutcome {
        bits: outcome.bits,
        stats: SynthesisStats {
            decision_bits: bits_total,
            evaluations: outcome.evaluations,
            estimated_reward: outcome.reward,
            best_so_far: outcome.best_so_far,
            wall_time: started.elapsed(),
        },
    })
}

fn decode_strategy(
    net: &Network,
    controllable: &[usize],
    t0_period: usize,
    periods: usize,
    bits: &[bool],
) -> Strategy {
    let k = controllable.len();
    let actions = (0..periods)
        .map(|per| {
            let mut on = vec![true; net.nr_cells()];
            for (j, &c) in controllable.iter().enumerate() {
                on[c] = bits[per * k + j];
            }
            ActionVector::new(net, on).expect("non-controllable cells stay ON")
        })
        .collect();
    Strategy {
        start_period: t0_period,
        actions,
    }
}

/// Compute a near-optimal short-horizon strategy starting at control period
/// `t0_period`. `params` carries the accumulation context (penalty scale and
/// step granularity) the estimates are scored under.
pub fn synthesize_short(
    net: &Network,
    model: &DemandModel,
    params: &RewardParams,
    t0_period: usize,
    cfg: &SynthesisConfig,
) -> Result<Strategy, SynthesisError> {
    synthesize_short_with_stats(net, model, params, t0_period, cfg).map(|(s, _)| s)
}

/// Like [`synthesize_short`], also returning evaluation-count, best-so-far
/// trace, and wall time.
pub fn synthesize_short_with_stats(
    net: &Network,
    model: &DemandModel,
    params: &RewardParams,
    t0_period: usize,
    cfg: &SynthesisConfig,
) -> Result<(Strategy, SynthesisStats), SynthesisError> {
    let scope = Scope::monolithic(net);
    let out = synthesize_scoped(net, model, params, t0_period, cfg, &scope)?;
    let strategy = decode_strategy(net, &scope.controllable, t0_period, cfg.periods(), &out.bits);
    Ok((strategy, out.stats))
}

// ---------------------------------------------------------------------------
// Receding-horizon controller
// ---------------------------------------------------------------------------

/// Plans a fresh short-horizon strategy at every control period and executes
/// only its first action. Near the end of the trace the lookahead shrinks to
/// whatever the trace still covers.
///
/// The run's control period must match `cfg.control_period_minutes`; a
/// mismatch is a configuration bug and panics.
#[derive(Debug, Clone)]
pub struct RecedingHorizonController {
    cfg: SynthesisConfig,
}

impl RecedingHorizonController {
    pub fn new(cfg: SynthesisConfig) -> Result<Self, SynthesisError> {
        // Step granularity is only known at decide time; validate the rest.
        cfg.validate(&RewardParams {
            penalty_per_pixel: 1000.0,
            step_minutes: cfg.control_period_minutes,
        })?;
        Ok(RecedingHorizonController { cfg })
    }

    pub fn config(&self) -> &SynthesisConfig {
        &self.cfg
    }
}

/// Shrink the planning horizon to what the trace still covers from `t_minutes`.
fn clamped_periods(cfg: &SynthesisConfig, model: &DemandModel, t_minutes: u64) -> u64 {
    let period = cfg.control_period_minutes as u64;
    let available = model.trace().total_minutes().saturating_sub(t_minutes) / period;
    (cfg.periods() as u64).min(available)
}

fn assert_period_alignment(cfg: &SynthesisConfig, t_minutes: u64) {
    assert!(
        t_minutes % cfg.control_period_minutes as u64 == 0,
        "controller is configured for {}-minute periods but was invoked at t = {} min; \
         run and synthesis control periods must match",
        cfg.control_period_minutes,
        t_minutes
    );
}

impl Controller for RecedingHorizonController {
    fn name(&self) -> &str {
        "rh"
    }

    fn decide(&mut self, ctx: &ControlContext<'_>) -> ActionVector {
        assert_period_alignment(&self.cfg, ctx.t_minutes);
        let periods = clamped_periods(&self.cfg, ctx.model, ctx.t_minutes);
        if periods == 0 {
            return ActionVector::all_on(ctx.net);
        }
        let t0_period = (ctx.t_minutes / self.cfg.control_period_minutes as u64) as usize;
        let cfg = SynthesisConfig {
            short_horizon_minutes: periods as u32 * self.cfg.control_period_minutes,
            seed: derive_seed(self.cfg.seed, ctx.period_index as u64),
            ..self.cfg
        };
        let strategy = synthesize_short(ctx.net, ctx.model, ctx.params, t0_period, &cfg)
            .unwrap_or_else(|e| panic!("receding-horizon synthesis failed: {e}"));
        strategy
            .actions
            .into_iter()
            .next()
            .expect("strategy covers at least one period")
    }
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

/// Configuration of [`brute_force_optimal`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub horizon_minutes: u32,
    pub control_period_minutes: u32,
    pub rollouts_per_candidate: u32,
    pub seed: u64,
    pub max_decision_bits: u32,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            horizon_minutes: 180,
            control_period_minutes: 60,
            rollouts_per_candidate: 1,
            seed: 0,
            max_decision_bits: DEFAULT_DECISION_BIT_CAP,
        }
    }
}

/// Exact enumeration of every capacity-cell action sequence over the horizon.
///
/// Each candidate is re-simulated step by step through the plain
/// [`step_reward`] path (no precomputed energies, no incremental tricks), so
/// this is the independent reference the sampling optimizers are checked
/// against. Ties resolve like everywhere else: more cells OFF, then
/// lexicographically smallest pattern.
///
/// Only feasible at desk scale; refuses more than `max_decision_bits`
/// decision bits.
pub fn brute_force_optimal(
    net: &Network,
    model: &DemandModel,
    params: &RewardParams,
    t0_period: usize,
    cfg: &OracleConfig,
) -> Result<(Strategy, f64), SynthesisError> {
    if cfg.control_period_minutes == 0
        || cfg.horizon_minutes == 0
        || cfg.horizon_minutes % cfg.control_period_minutes != 0
    {
        return Err(SynthesisError::HorizonPeriodMismatch {
            horizon: cfg.horizon_minutes,
            period: cfg.control_period_minutes,
        });
    }
    if params.step_minutes == 0 || cfg.control_period_minutes % params.step_minutes != 0 {
        return Err(SynthesisError::PeriodStepMismatch {
            period: cfg.control_period_minutes,
            step: params.step_minutes,
        });
    }
    if cfg.rollouts_per_candidate == 0 {
        return Err(SynthesisError::NoRollouts);
    }

    let periods = (cfg.horizon_minutes / cfg.control_period_minutes) as usize;
    let capacity = net.capacity_cells();
    let k = capacity.len();
    let bits_total = (k * periods) as u32;
    if bits_total > cfg.max_decision_bits || bits_total >= 63 {
        return Err(SynthesisError::DecisionSpaceTooLarge {
            bits: bits_total,
            cap: cfg.max_decision_bits,
        });
    }

    let period_min = cfg.control_period_minutes as u64;
    let start_minute = t0_period as u64 * period_min;
    let end_minute = start_minute + periods as u64 * period_min;
    let trace_minutes = model.trace().total_minutes();
    if end_minute > trace_minutes {
        return Err(SynthesisError::OutOfTrace {
            start_minute,
            end_minute,
            trace_minutes,
        });
    }

    let steps_per_period = (cfg.control_period_minutes / params.step_minutes) as usize;
    let total_steps = periods * steps_per_period;
    let step_hours = params.step_hours();
    let trace_indices: Vec<usize> = (0..total_steps)
        .map(|s| {
            let t = start_minute + s as u64 * params.step_minutes as u64;
            model.trace().step_at_minute(t)
        })
        .collect::<Result<_, _>>()?;

    // Demand realizations, one per rollout, drawn once with the same seed
    // scheme every evaluation path uses.
    let mut demand: Vec<Vec<Vec<f64>>> = Vec::with_capacity(cfg.rollouts_per_candidate as usize);
    for r in 0..cfg.rollouts_per_candidate as u64 {
        let mut rng = rng_from_seed(derive_seed(cfg.seed, 2 * r));
        let mut per_step = Vec::with_capacity(total_steps);
        for &idx in &trace_indices {
            let mut row = Vec::with_capacity(net.nr_pixels());
            for p in 0..net.nr_pixels() {
                row.push(model.pixel_demand(net, idx, p, &mut rng)?);
            }
            per_step.push(row);
        }
        demand.push(per_step);
    }

    let total: u64 = 1 << bits_total;
    let evaluate = |mask: u64, action: &mut ActionVector, carried: &mut Vec<f64>| -> f64 {
        let mut sum = 0.0;
        for rollout in &demand {
            let mut energy = 0.0;
            let mut penalty = 0.0;
            for per in 0..periods {
                for (j, &c) in capacity.iter().enumerate() {
                    action.set_unchecked(c, (mask >> (per * k + j)) & 1 == 1);
                }
                for s_in in 0..steps_per_period {
                    let s = per * steps_per_period + s_in;
                    let idx = trace_indices[s];
                    for c in 0..net.nr_cells() {
                        carried[c] = if action.is_on(c) {
                            model.trace().sample(c, idx) * step_hours
                        } else {
                            0.0
                        };
                    }
                    let (e, p) = step_reward(net, action, &rollout[s], carried, params);
                    energy += e;
                    penalty += p;
                }
            }
            sum += energy + penalty;
        }
        sum / demand.len() as f64
    };

    let best = (0..total)
        .into_par_iter()
        .map_init(
            || (ActionVector::all_on(net), vec![0.0; net.nr_cells()]),
            |(action, carried), mask| (evaluate(mask, action, carried), mask),
        )
        .reduce_with(|a, b| better_mask(a, b, bits_total))
        .expect("decision space is non-empty");

    let bits = mask_to_bits(best.1, bits_total);
    let strategy = decode_strategy(net, capacity, t0_period, periods, &bits);
    Ok((strategy, best.0))
}

#[cfg(test)]
mod tests;
