//! Energy and coverage-penalty accounting.
//!
//! Each simulated step accumulates two non-negative components:
//!
//! * **penalty**: for every pixel whose total ON-cell contribution does not
//!   strictly exceed its demand, `penalty_per_pixel` is charged. The
//!   comparison is strict: a pixel with contribution equal to demand (even
//!   `0 > 0`) is penalized.
//! * **energy**: an OFF cell costs nothing; an ON cell costs
//!   `base_power * step_hours + cost_per_mb * carried_mb`.
//!
//! The run total is the left Riemann sum of both components over the step
//! grid: the per-pixel penalty sum is weighted by `step_hours`, and the
//! energy terms already carry the step duration.

use crate::action::ActionVector;
use crate::network::{Cell, Network};

/// Parameters of the reward accumulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardParams {
    /// Penalty charged per uncovered pixel per accumulation step.
    pub penalty_per_pixel: f64,
    /// Duration of one accumulation step in minutes.
    pub step_minutes: u32,
}

impl RewardParams {
    pub fn new(penalty_per_pixel: f64, step_minutes: u32) -> Self {
        assert!(
            penalty_per_pixel > 0.0 && penalty_per_pixel.is_finite(),
            "penalty_per_pixel must be positive"
        );
        assert!(step_minutes > 0, "step_minutes must be positive");
        RewardParams {
            penalty_per_pixel,
            step_minutes,
        }
    }

    /// Duration of one accumulation step in hours.
    pub fn step_hours(&self) -> f64 {
        self.step_minutes as f64 / 60.0
    }
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams {
            penalty_per_pixel: 1000.0,
            step_minutes: 60,
        }
    }
}

/// Energy/penalty of a single simulated step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReward {
    pub step: usize,
    pub energy: f64,
    pub penalty: f64,
}

/// Accumulated reward of a run. `reward = energy + penalty` by construction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RewardBreakdown {
    pub energy: f64,
    pub penalty: f64,
    /// Per-step deltas in accumulation order, when recorded.
    pub per_step: Option<Vec<StepReward>>,
}

impl RewardBreakdown {
    pub fn with_step_log() -> Self {
        RewardBreakdown {
            energy: 0.0,
            penalty: 0.0,
            per_step: Some(Vec::new()),
        }
    }

    /// Total reward: lower is better.
    pub fn reward(&self) -> f64 {
        self.energy + self.penalty
    }

    /// Fold one step into the totals (and the step log, when kept).
    pub fn accumulate(&mut self, step: usize, energy: f64, penalty: f64) {
        self.energy += energy;
        self.penalty += penalty;
        if let Some(log) = &mut self.per_step {
            log.push(StepReward {
                step,
                energy,
                penalty,
            });
        }
    }
}

/// Penalty for one pixel at one step: 0 when `contribution - demand > 0`
/// (strictly), `penalty_per_pixel` otherwise, including contribution equal
/// to demand, and including `0` vs `0`.
pub fn pixel_penalty(contribution: f64, demand: f64, params: &RewardParams) -> f64 {
    if contribution - demand > 0.0 {
        0.0
    } else {
        params.penalty_per_pixel
    }
}

/// Energy one cell consumes over a step of `step_hours`: 0 when OFF,
/// `base_power * step_hours + cost_per_mb * carried_mb` when ON.
pub fn cell_energy(cell: &Cell, on: bool, carried_mb: f64, step_hours: f64) -> f64 {
    if !on {
        return 0.0;
    }
    cell.base_power * step_hours + cell.cost_per_mb * carried_mb
}

/// One step of reward accounting over the whole network.
///
/// * `pixel_demands[p]`: demand at pixel `p` (megabits/hour),
/// * `carried_mb[c]`: megabits cell `c` carries this step when ON.
///
/// Returns `(energy, penalty)`, both already weighted by the step duration.
/// Cells and pixels are accumulated in ascending id order; every other
/// evaluation path in the crate mirrors this order so cross-checks compare
/// bit-identical floats.
pub fn step_reward(
    net: &Network,
    action: &ActionVector,
    pixel_demands: &[f64],
    carried_mb: &[f64],
    params: &RewardParams,
) -> (f64, f64) {
    assert_eq!(pixel_demands.len(), net.nr_pixels(), "pixel demand array size");
    assert_eq!(carried_mb.len(), net.nr_cells(), "carried traffic array size");
    assert_eq!(action.len(), net.nr_cells(), "action vector size");

    let step_hours = params.step_hours();
    let mut energy = 0.0;
    for (c, cell) in net.cells().iter().enumerate() {
        energy += cell_energy(cell, action.is_on(c), carried_mb[c], step_hours);
    }

    let mut penalty_sum = 0.0;
    for p in 0..net.nr_pixels() {
        let contribution = net.total_contribution(action, p);
        penalty_sum += pixel_penalty(contribution, pixel_demands[p], params);
    }
    (energy, penalty_sum * step_hours)
}
