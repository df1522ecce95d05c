//! Discrete-time stochastic simulation of the network under a controller.
//!
//! The world advances in fixed steps of `step_minutes`. A [`Controller`] is
//! queried once per control period; its action is held constant (zero-order
//! hold) for every step of that period. Each step samples per-pixel demand
//! from the [`DemandModel`] with the state's own seeded RNG, scores the step
//! with [`crate::reward::step_reward`], and accumulates the result, so a
//! `(seed, scenario, controller)` triple fully determines a run.
//!
//! Coverage-layer safety is enforced twice: [`ActionVector`] construction
//! refuses OFF coverage cells, and [`SimState::do_sim_step`] re-validates
//! whatever a controller returns, aborting the run on any injected violation.

use std::io;

use thiserror::Error;

use crate::action::{ActionError, ActionVector};
use crate::network::Network;
use crate::reward::{step_reward, RewardBreakdown, RewardParams};
use crate::rng::{rng_from_seed, SimRng};
use crate::traffic::{DemandModel, TrafficError};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("constraint violation: {0}")]
    Constraint(#[from] ActionError),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error("simulation horizon exceeded: t = {t_minutes} min, horizon = {horizon_minutes} min")]
    HorizonExceeded { t_minutes: u64, horizon_minutes: u64 },
    #[error("step_minutes ({step}) must be positive and divide the control period ({period})")]
    StepPeriodMismatch { step: u32, period: u32 },
    #[error("control period ({period} min) must divide the horizon ({horizon} min)")]
    PeriodHorizonMismatch { period: u32, horizon: u64 },
    #[error("horizon must be a positive multiple of step_minutes (horizon {horizon}, step {step})")]
    HorizonStepMismatch { horizon: u64, step: u32 },
    #[error("trace covers {trace_minutes} min but the horizon needs {horizon_minutes} min")]
    TraceTooShort {
        trace_minutes: u64,
        horizon_minutes: u64,
    },
    #[error("penalty_per_pixel must be positive and finite, got {0}")]
    InvalidPenalty(f64),
    #[error("evaluate_controller needs at least one seed")]
    NoReplications,
}

/// Simulation parameters for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub horizon_minutes: u64,
    pub control_period_minutes: u32,
    pub step_minutes: u32,
    pub penalty_per_pixel: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    /// One day, hourly control on an hourly step grid.
    fn default() -> Self {
        SimConfig {
            horizon_minutes: 1440,
            control_period_minutes: 60,
            step_minutes: 60,
            penalty_per_pixel: 1000.0,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn reward_params(&self) -> RewardParams {
        RewardParams {
            penalty_per_pixel: self.penalty_per_pixel,
            step_minutes: self.step_minutes,
        }
    }
}

/// Reward delta of one simulated step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDelta {
    pub energy: f64,
    pub penalty: f64,
}

/// Mutable world state of one simulation run. Single-owner; create one per
/// run and share the immutable `Network`/`DemandModel` across runs.
pub struct SimState<'a> {
    net: &'a Network,
    model: &'a DemandModel,
    params: RewardParams,
    horizon_minutes: u64,
    t_minutes: u64,
    rng: SimRng,
    accum: RewardBreakdown,
    demand_buf: Vec<f64>,
    carried_buf: Vec<f64>,
}

impl<'a> SimState<'a> {
    pub fn new(
        net: &'a Network,
        model: &'a DemandModel,
        cfg: &SimConfig,
    ) -> Result<Self, SimError> {
        if !(cfg.penalty_per_pixel.is_finite() && cfg.penalty_per_pixel > 0.0) {
            return Err(SimError::InvalidPenalty(cfg.penalty_per_pixel));
        }
        if cfg.step_minutes == 0 || cfg.horizon_minutes % cfg.step_minutes as u64 != 0 {
            return Err(SimError::HorizonStepMismatch {
                horizon: cfg.horizon_minutes,
                step: cfg.step_minutes,
            });
        }
        let trace_minutes = model.trace().total_minutes();
        if trace_minutes < cfg.horizon_minutes {
            return Err(SimError::TraceTooShort {
                trace_minutes,
                horizon_minutes: cfg.horizon_minutes,
            });
        }
        Ok(SimState {
            net,
            model,
            params: RewardParams {
                penalty_per_pixel: cfg.penalty_per_pixel,
                step_minutes: cfg.step_minutes,
            },
            horizon_minutes: cfg.horizon_minutes,
            t_minutes: 0,
            rng: rng_from_seed(cfg.seed),
            accum: RewardBreakdown::with_step_log(),
            demand_buf: vec![0.0; net.nr_pixels()],
            carried_buf: vec![0.0; net.nr_cells()],
        })
    }

    /// Advance the world by one step under `action`.
    ///
    /// Samples demand at the current trace step, scores it, accumulates, and
    /// moves time forward by `step_minutes`. The action is validated against
    /// the network on every call.
    pub fn do_sim_step(&mut self, action: &ActionVector) -> Result<StepDelta, SimError> {
        if self.t_minutes >= self.horizon_minutes {
            return Err(SimError::HorizonExceeded {
                t_minutes: self.t_minutes,
                horizon_minutes: self.horizon_minutes,
            });
        }
        action.validate_for(self.net)?;

        let net = self.net;
        let model = self.model;
        let trace_idx = model.trace().step_at_minute(self.t_minutes)?;
        let step_hours = self.params.step_hours();

        for c in 0..net.nr_cells() {
            self.carried_buf[c] = if action.is_on(c) {
                model.trace().sample(c, trace_idx) * step_hours
            } else {
                0.0
            };
        }
        for p in 0..net.nr_pixels() {
            let demand = model.pixel_demand(net, trace_idx, p, &mut self.rng)?;
            self.demand_buf[p] = demand;
        }

        let (energy, penalty) =
            step_reward(net, action, &self.demand_buf, &self.carried_buf, &self.params);
        let step_index = (self.t_minutes / self.params.step_minutes as u64) as usize;
        self.accum.accumulate(step_index, energy, penalty);
        self.t_minutes += self.params.step_minutes as u64;
        Ok(StepDelta { energy, penalty })
    }

    pub fn t_minutes(&self) -> u64 {
        self.t_minutes
    }

    pub fn finished(&self) -> bool {
        self.t_minutes >= self.horizon_minutes
    }

    pub fn accum(&self) -> &RewardBreakdown {
        &self.accum
    }

    pub fn params(&self) -> &RewardParams {
        &self.params
    }

    pub fn into_breakdown(self) -> RewardBreakdown {
        self.accum
    }
}

/// Everything a controller may observe when deciding a period's action.
pub struct ControlContext<'a> {
    pub net: &'a Network,
    pub model: &'a DemandModel,
    pub params: &'a RewardParams,
    pub period_index: usize,
    pub t_minutes: u64,
}

/// A control policy queried once per control period.
pub trait Controller {
    fn name(&self) -> &str;
    fn decide(&mut self, ctx: &ControlContext<'_>) -> ActionVector;
}

/// Wrap a closure as a controller.
pub struct FnController<F> {
    name: String,
    f: F,
}

impl<F> FnController<F>
where
    F: FnMut(&ControlContext<'_>) -> ActionVector,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnController { name: name.into(), f }
    }
}

impl<F> Controller for FnController<F>
where
    F: FnMut(&ControlContext<'_>) -> ActionVector,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn decide(&mut self, ctx: &ControlContext<'_>) -> ActionVector {
        (self.f)(ctx)
    }
}

/// Replays a fixed per-period schedule. Panics if asked beyond its length.
pub struct ScriptedController {
    actions: Vec<ActionVector>,
}

impl ScriptedController {
    pub fn new(actions: Vec<ActionVector>) -> Self {
        ScriptedController { actions }
    }
}

impl Controller for ScriptedController {
    fn name(&self) -> &str {
        "scripted"
    }

    fn decide(&mut self, ctx: &ControlContext<'_>) -> ActionVector {
        self.actions[ctx.period_index].clone()
    }
}

/// One executed control period of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodRecord {
    pub period_index: usize,
    pub t_minutes: u64,
    pub action: ActionVector,
    pub energy: f64,
    pub penalty: f64,
}

/// Result of a full-horizon run: accumulated reward plus the executed
/// schedule, one record per control period.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub breakdown: RewardBreakdown,
    pub schedule: Vec<PeriodRecord>,
}

/// Simulate `controller` over the configured horizon.
///
/// The controller is queried at every control-period boundary; its action is
/// held fixed for the period's steps. Any returned vector that violates the
/// coverage constraint aborts the run with [`SimError::Constraint`].
pub fn run<C: Controller + ?Sized>(
    net: &Network,
    model: &DemandModel,
    controller: &mut C,
    cfg: &SimConfig,
) -> Result<RunOutput, SimError> {
    if cfg.step_minutes == 0 || cfg.control_period_minutes % cfg.step_minutes != 0 {
        return Err(SimError::StepPeriodMismatch {
            step: cfg.step_minutes,
            period: cfg.control_period_minutes,
        });
    }
    if cfg.control_period_minutes == 0
        || cfg.horizon_minutes % cfg.control_period_minutes as u64 != 0
    {
        return Err(SimError::PeriodHorizonMismatch {
            period: cfg.control_period_minutes,
            horizon: cfg.horizon_minutes,
        });
    }

    let mut state = SimState::new(net, model, cfg)?;
    let periods = (cfg.horizon_minutes / cfg.control_period_minutes as u64) as usize;
    let steps_per_period = (cfg.control_period_minutes / cfg.step_minutes) as usize;
    let mut schedule = Vec::with_capacity(periods);

    for period_index in 0..periods {
        let t_start = state.t_minutes();
        let action = {
            let ctx = ControlContext {
                net,
                model,
                params: state.params(),
                period_index,
                t_minutes: t_start,
            };
            controller.decide(&ctx)
        };
        let mut energy = 0.0;
        let mut penalty = 0.0;
        for _ in 0..steps_per_period {
            let delta = state.do_sim_step(&action)?;
            energy += delta.energy;
            penalty += delta.penalty;
        }
        schedule.push(PeriodRecord {
            period_index,
            t_minutes: t_start,
            action,
            energy,
            penalty,
        });
    }
    debug_assert_eq!(state.t_minutes(), cfg.horizon_minutes);
    Ok(RunOutput {
        breakdown: state.into_breakdown(),
        schedule,
    })
}

/// Write an executed schedule as comma-separated rows.
pub fn write_schedule_csv<W: io::Write>(w: &mut W, schedule: &[PeriodRecord]) -> io::Result<()> {
    writeln!(w, "period_index,t_minutes,actions,energy,penalty")?;
    for r in schedule {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.period_index,
            r.t_minutes,
            r.action.bitstring(),
            r.energy,
            r.penalty
        )?;
    }
    Ok(())
}

/// Mean and sample standard deviation of one reward component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentStats {
    pub mean: f64,
    pub stddev: f64,
}

fn component_stats(values: &[f64]) -> ComponentStats {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let stddev = if n < 2 {
        0.0
    } else {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n - 1) as f64).sqrt()
    };
    ComponentStats { mean, stddev }
}

/// Per-component statistics over replicated runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalSummary {
    pub replications: usize,
    pub energy: ComponentStats,
    pub penalty: ComponentStats,
    pub reward: ComponentStats,
}

/// Run a controller once per seed and report mean / sample stddev of the
/// reward components. `make_controller` receives the replication's seed so
/// stochastic controllers can derive their own planning stream from it.
pub fn evaluate_controller<C, F>(
    net: &Network,
    model: &DemandModel,
    mut make_controller: F,
    cfg: &SimConfig,
    seeds: &[u64],
) -> Result<EvalSummary, SimError>
where
    C: Controller,
    F: FnMut(u64) -> C,
{
    if seeds.is_empty() {
        return Err(SimError::NoReplications);
    }
    let mut energies = Vec::with_capacity(seeds.len());
    let mut penalties = Vec::with_capacity(seeds.len());
    let mut rewards = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let mut controller = make_controller(seed);
        let run_cfg = SimConfig { seed, ..*cfg };
        let out = run(net, model, &mut controller, &run_cfg)?;
        energies.push(out.breakdown.energy);
        penalties.push(out.breakdown.penalty);
        rewards.push(out.breakdown.reward());
    }
    Ok(EvalSummary {
        replications: seeds.len(),
        energy: component_stats(&energies),
        penalty: component_stats(&penalties),
        reward: component_stats(&rewards),
    })
}
